#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "config.hpp"

namespace storval {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Line {
    std::size_t from = 0;  // 0-based bus index
    std::size_t to = 0;
    double susceptance = 1.0;
    double capacity = 0.0;
};

// DC transmission network with piecewise-linear nodal costs
//   g_i(v) = alpha_i * max(v, 0) - beta_i * max(-v, 0).
struct Network {
    std::size_t node_count = 0;
    std::vector<Line> lines;
    std::vector<double> shunt_susceptances;
    std::vector<double> alpha;
    std::vector<double> beta;

    // Throws InvalidInput when the graph is disconnected, a susceptance is not
    // positive, a capacity is negative, or alpha_i >= beta_i >= 0 fails.
    void validate() const;

    bool has_shunts() const;
    bool homogeneous_costs() const;
    Vector capacities() const;
};

struct FlowOperators {
    Matrix admittance;  // m x m bus admittance Y
    Matrix incidence;   // l x m weighted incidence B
    Matrix ptdf;        // l x m, H = B (Y'Y + e1 e1')^{-1} Y'
};

FlowOperators build_flow_operators(const Network& net);

// Membership of x in the injection polytope. Uses the PTDF form on shunt-free
// networks and an explicit angle solve otherwise.
bool injection_feasible(const FlowOperators& ops, const Network& net, const Vector& x,
                        const Tolerances& tol = {});

bool is_connected(const Network& net);
bool is_acyclic(const Network& net);

}  // namespace storval
