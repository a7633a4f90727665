#pragma once

#include <cstddef>
#include <vector>

#include "config.hpp"
#include "dispatch.hpp"
#include "network.hpp"
#include "scenario.hpp"

namespace storval {

// Nodal prices and one-step predictors attached to every scenario-tree node.
struct PriceLattice {
    std::vector<Vector> prices;      // indexed like ScenarioTree::nodes()
    std::vector<Vector> predictors;  // E[lambda_{k+1} | node]; empty at the last stage
    std::vector<Vector> support;     // distinct xi values, first-appearance order
    std::vector<std::size_t> support_of;  // node index -> position in `support`
};

// Solves the dispatch once per distinct xi (bit-exact key), probing each for
// interiority first. Throws BoundaryPoint naming the first offending node.
PriceLattice build_price_lattice(const Network& net, const FlowOperators& ops, const ScenarioTree& tree,
                                 const Config& config = {});

struct LmvReport {
    Vector lmv;
    Vector upper_bound;      // E[TV]/2 + E[lambda_{N-1} - lambda_0]/2
    Vector tv_expectation;
    Vector terminal_drift;
    std::vector<bool> tight; // |lmv - upper_bound| <= tight_tol
    // Same bound assembled as sum_k E[(lambda_{k+1} - lambda_k)^+].
    Vector upper_bound_stepwise;
};

LmvReport lmv(const PriceLattice& lattice, const ScenarioTree& tree, double tight_tol = 1e-8);

// E[sum_k (gamma * predictor - price)^+] for a storage that keeps a fraction
// gamma of its content per period. Requires 0 < gamma < 1.
Vector lmv_dissipative(const PriceLattice& lattice, const ScenarioTree& tree, double gamma);

struct AcyclicDiagnostics {
    bool applicable = false;        // acyclic network with homogeneous alpha, beta
    double max_price_deviation = 0.0;  // max distance of any price from {alpha, beta}
    Vector transition_value;        // (alpha - beta) * E[#{k : lambda_k = beta, lambda_{k+1} = alpha}]
    Vector lmv;
    Vector upper_bound;
    std::vector<bool> coincide;     // all three within match_tol
};

// Throws StructuralViolation if the network qualifies but some price lies
// farther than price_tol from {alpha, beta}.
AcyclicDiagnostics acyclic_diagnostics(const Network& net, const PriceLattice& lattice,
                                     const ScenarioTree& tree, double price_tol = 1e-7,
                                     double match_tol = 1e-8);

struct TwoNodeLimits {
    Vector lmv_f0;    // (alpha - beta) * sum_k P{xi^i_{k-1} < 0, xi^i_k > 0}
    Vector lmv_finf;  // same with the aggregate xi^1 + xi^2
};

// Throws BoundaryPoint if a coordinate or the coordinate sum is exactly zero.
TwoNodeLimits two_node_limits(double alpha, double beta, const ScenarioTree& tree);

}  // namespace storval
