#include "dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "errors.hpp"

namespace storval {

namespace {

std::string format_vector(const Vector& v) {
    std::ostringstream out;
    char buf[32];
    out << "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v(i));
        out << (i ? ", " : "") << buf;
    }
    out << ")";
    return out.str();
}

}  // namespace

lp::LinearProgram build_ed_program(const Network& net, const FlowOperators& ops, const Vector& xi) {
    const auto m = static_cast<Eigen::Index>(net.node_count);
    const auto l = static_cast<Eigen::Index>(net.lines.size());
    if (xi.size() != m) throw InvalidInput("net demand vector has wrong dimension");
    if (!xi.allFinite()) throw InvalidInput("net demand vector is not finite");

    const Eigen::Index n = 3 * m + l;
    lp::LinearProgram prog;
    prog.name = "ed xi=" + format_vector(xi);
    prog.objective = Vector::Zero(n);
    prog.eq_matrix = Matrix::Zero(m + l, n);
    prog.eq_rhs = Vector::Zero(m + l);
    prog.lower_bounds = Vector::Zero(n);
    prog.upper_bounds = Vector::Constant(n, lp::kInfinity);

    for (Eigen::Index i = 0; i < m; ++i) {
        prog.objective(i) = net.alpha[static_cast<std::size_t>(i)];
        prog.objective(m + i) = -net.beta[static_cast<std::size_t>(i)];
        prog.eq_matrix(i, i) = 1.0;
        prog.eq_matrix(i, m + i) = -1.0;
        prog.eq_rhs(i) = xi(i);
        prog.lower_bounds(2 * m + i) = -lp::kInfinity;
    }
    prog.eq_matrix.block(0, 2 * m, m, m) = -ops.admittance;
    // With Y'1 = 0 the angles are determined up to a constant; pin bus 1.
    if (!net.has_shunts()) prog.upper_bounds(2 * m) = prog.lower_bounds(2 * m) = 0.0;

    for (Eigen::Index k = 0; k < l; ++k) {
        prog.eq_matrix.block(m + k, 2 * m, 1, m) = ops.incidence.row(k);
        prog.eq_matrix(m + k, 3 * m + k) = -1.0;
        const double f = std::min(net.lines[static_cast<std::size_t>(k)].capacity, lp::kInfinity);
        prog.lower_bounds(3 * m + k) = -f;
        prog.upper_bounds(3 * m + k) = f;
    }
    return prog;
}

DispatchSolution solve_ed(const Network& net, const FlowOperators& ops, const Vector& xi) {
    const lp::LinearProgram prog = build_ed_program(net, ops, xi);
    lp::LpSolution sol;
    try {
        sol = lp::solve(prog);
    } catch (const LpFailure& e) {
        throw LpFailure(std::string("dispatch at xi=") + format_vector(xi) + ": " + e.what());
    }
    if (sol.status != lp::LpStatus::Optimal)
        throw LpFailure("dispatch at xi=" + format_vector(xi) + " returned " + lp::to_string(sol.status));

    const auto m = static_cast<Eigen::Index>(net.node_count);
    const auto l = static_cast<Eigen::Index>(net.lines.size());
    DispatchSolution out;
    out.dispatch = sol.primal.segment(0, m) - sol.primal.segment(m, m);
    out.angles = sol.primal.segment(2 * m, m);
    out.line_flows = sol.primal.segment(3 * m, l);
    out.prices = sol.eq_duals.head(m);
    out.cost = sol.objective_value;
    return out;
}

Vector price_fn(const Network& net, const FlowOperators& ops, const Vector& xi) {
    return solve_ed(net, ops, xi).prices;
}

InteriorityProbe probe_interiority(const Network& net, const FlowOperators& ops, const Vector& xi,
                                   double delta, double price_tol) {
    if (!(delta > 0.0)) throw InvalidInput("probe step must be positive");
    InteriorityProbe probe;
    probe.base_prices = price_fn(net, ops, xi);
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
        for (int side : {+1, -1}) {
            Vector shifted = xi;
            shifted(i) += side * delta;
            const Vector p = price_fn(net, ops, shifted);
            if ((p - probe.base_prices).cwiseAbs().maxCoeff() > price_tol) {
                probe.interior = false;
                probe.coordinate = static_cast<int>(i);
                probe.side = side;
                return probe;
            }
        }
    }
    return probe;
}

bool is_interior_point(const Network& net, const FlowOperators& ops, const Vector& xi, double delta,
                       double price_tol) {
    return probe_interiority(net, ops, xi, delta, price_tol).interior;
}

Vector gradient_check(const Network& net, const FlowOperators& ops, const Vector& xi, double delta,
                      double price_tol) {
    const InteriorityProbe probe = probe_interiority(net, ops, xi, delta, price_tol);
    if (!probe.interior)
        throw BoundaryPoint("xi=" + format_vector(xi) + " lies on a price boundary along coordinate " +
                                std::to_string(probe.coordinate + 1),
                            -1, probe.coordinate);
    Vector gap(xi.size());
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
        Vector up = xi, down = xi;
        up(i) += delta;
        down(i) -= delta;
        const double derivative =
            (solve_ed(net, ops, up).cost - solve_ed(net, ops, down).cost) / (2.0 * delta);
        gap(i) = std::abs(derivative - probe.base_prices(i));
    }
    return gap;
}

double subdifferential_violation(const Network& net, const DispatchSolution& sol, double sign_tol) {
    double worst = 0.0;
    for (std::size_t i = 0; i < net.node_count; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double v = sol.dispatch(ii), p = sol.prices(ii);
        double err;
        if (v > sign_tol)
            err = std::abs(p - net.alpha[i]);
        else if (v < -sign_tol)
            err = std::abs(p - net.beta[i]);
        else
            err = std::max({0.0, net.beta[i] - p, p - net.alpha[i]});
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace storval
