#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "dispatch.hpp"
#include "network.hpp"
#include "scenario.hpp"
#include "valuation.hpp"

namespace storval {

struct EpsilonBarOptions {
    double initial_step = 1e-5;
    double range_cap = 1e3;   // probes that never see a price change report this distance
    double safety = 0.5;
    int bisection_steps = 60;
    double price_tol = 1e-7;
    unsigned workers = 1;
};

struct EpsilonBarResult {
    double value = 0.0;          // safety * min distance
    double min_distance = 0.0;
    std::size_t support_index = 0;  // where the minimum was attained
    int coordinate = -1;
    int side = 0;
    bool capped = false;         // no boundary found within range_cap on any probe
};

// Lower estimate of the axis distance from every support point to the nearest
// change of the price vector, found by step doubling and bisection along each
// +-e_i ray. Throws BoundaryPoint if a support point fails the interiority probe.
EpsilonBarResult epsilon_bar(const Network& net, const FlowOperators& ops, const ScenarioTree& tree,
                             const EpsilonBarOptions& options = {});

enum class StorageAction { Discharge, Charge };

// Exact DP for one device of capacity eps at bus `bus` with state set {0, eps}.
struct SingleDeviceTable {
    std::size_t bus = 0;
    double eps = 0.0;
    double value_without_storage = 0.0;  // J*(0)
    double value_with_storage = 0.0;     // J*(eps 1_bus)
    std::vector<double> zero_storage;    // J_k(0, node; 0) per node
    std::vector<double> empty;           // J_k(0, node; eps 1_bus)
    std::vector<double> full;            // J_k(eps, node; eps 1_bus)
    std::vector<StorageAction> action_empty;
    std::vector<StorageAction> action_full;
};

// eps = 0 is accepted (degenerate, reproduces J*(0)). If eps_bar is given,
// eps must lie below it. Throws InvalidInput otherwise.
SingleDeviceTable solve_dp_single_device(const Network& net, const FlowOperators& ops,
                                         const ScenarioTree& tree, std::size_t bus, double eps,
                                         std::optional<double> eps_bar = std::nullopt,
                                         unsigned workers = 1);

// Approximate DP on a uniform storage grid (grid_points per dimension with
// positive capacity, a single level 0 otherwise). Moves are restricted to grid
// points, so value is an upper bound on J*(b).
struct ValueFunctionTable {
    std::vector<std::vector<double>> levels;  // storage levels per bus
    std::size_t state_count = 1;
    std::vector<double> values;               // [node * state_count + state]
    std::vector<std::size_t> next_state;      // argmin successor state
    std::vector<Vector> dispatch;             // v at the argmin
    double value = 0.0;                       // J*(b) from z0 = 0

    Vector state(std::size_t s) const;
};

ValueFunctionTable solve_dp_grid(const Network& net, const FlowOperators& ops, const ScenarioTree& tree,
                                 const Vector& capacity, std::size_t grid_points,
                                 std::size_t table_budget = 5000000, unsigned workers = 1);

struct PolicyMismatch {
    long node = 0;
    std::size_t stage = 0;
    double z = 0.0;
    std::string what;
};

struct PolicyCheckReport {
    double max_value_residual = 0.0;
    std::size_t checked = 0;
    std::vector<PolicyMismatch> mismatches;  // policy disagreements and value residuals above tol
    bool passed() const { return mismatches.empty(); }
};

// Compares the DP table against lambda_k z + eps E[sum_{j>=k} (pred_j - lambda_j)^+ | node]
// and the threshold policy at every (node, z).
PolicyCheckReport verify_threshold_policy(const SingleDeviceTable& table, const PriceLattice& lattice,
                                          const ScenarioTree& tree, double value_tol = 1e-9);

// Threshold rule: fill to b when lambda_k <= gamma * predictor, otherwise
// empty; empty at the last stage. Returns the expected arbitrage revenue.
double simulate_threshold_arbitrage(const PriceLattice& lattice, const ScenarioTree& tree,
                                    std::size_t bus, double capacity, double gamma = 1.0);

// Expected revenue with hindsight: buy at each local minimum and sell at the
// following local maximum of every root-to-leaf price path.
double perfect_foresight_revenue(const PriceLattice& lattice, const ScenarioTree& tree, std::size_t bus,
                                 double capacity);

// Threshold decision shared by the simulator and the DP policy check.
StorageAction threshold_action(double price, double predictor);

}  // namespace storval
