#pragma once

#include <optional>

#include "config.hpp"
#include "lp_solver.hpp"
#include "network.hpp"

namespace storval {

struct DispatchSolution {
    Vector dispatch;    // v: positive = generation, negative = consumption
    Vector angles;      // theta, angle of bus 1 fixed at 0 on shunt-free networks
    double cost = 0.0;  // Q(xi)
    Vector prices;      // lambda(xi), duals of the power balance rows
    Vector line_flows;
};

// Single-period economic dispatch
//   Q(xi) = min g(v)  s.t.  v - xi = Y theta,  -f <= B theta <= f.
// Throws LpFailure (carrying xi in the message) if the LP does not solve.
DispatchSolution solve_ed(const Network& net, const FlowOperators& ops, const Vector& xi);

// The LP that solve_ed hands to the simplex. Columns are [v+, v-, theta, s],
// rows are [balance (m), flow definition B theta - s = 0 (l)].
lp::LinearProgram build_ed_program(const Network& net, const FlowOperators& ops, const Vector& xi);

Vector price_fn(const Network& net, const FlowOperators& ops, const Vector& xi);

// Which axis perturbation (if any) changed the price vector.
struct InteriorityProbe {
    bool interior = true;
    int coordinate = -1;  // 0-based
    int side = 0;         // +1 / -1
    Vector base_prices;
};

InteriorityProbe probe_interiority(const Network& net, const FlowOperators& ops, const Vector& xi,
                                   double delta, double price_tol = 1e-7);

// True iff lambda(xi +- delta e_i) == lambda(xi) within price_tol for all 2m probes.
bool is_interior_point(const Network& net, const FlowOperators& ops, const Vector& xi, double delta,
                       double price_tol = 1e-7);

// |dQ/dxi_i - lambda_i| from central differences with step delta. Throws
// BoundaryPoint if xi fails the interiority probe.
Vector gradient_check(const Network& net, const FlowOperators& ops, const Vector& xi, double delta,
                      double price_tol = 1e-7);

// Worst violation of the sub-differential conditions:
//   v_i > tol  => lambda_i = alpha_i,  v_i < -tol => lambda_i = beta_i,
//   otherwise beta_i <= lambda_i <= alpha_i.
double subdifferential_violation(const Network& net, const DispatchSolution& sol, double sign_tol);

}  // namespace storval
