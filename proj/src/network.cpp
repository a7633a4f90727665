#include "network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "errors.hpp"

namespace storval {

namespace {

// Union-find over buses; returns number of components and whether an edge
// closed a cycle.
struct Components {
    std::size_t count = 0;
    bool cycle = false;
};

Components components(const Network& net) {
    std::vector<std::size_t> parent(net.node_count);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    Components out{net.node_count, false};
    for (const Line& line : net.lines) {
        if (line.from >= net.node_count || line.to >= net.node_count) continue;
        std::size_t a = find(line.from), b = find(line.to);
        if (a == b) {
            out.cycle = true;
        } else {
            parent[a] = b;
            --out.count;
        }
    }
    return out;
}

}  // namespace

void Network::validate() const {
    if (node_count == 0) throw InvalidInput("network has no nodes");
    if (alpha.size() != node_count || beta.size() != node_count ||
        shunt_susceptances.size() != node_count)
        throw InvalidInput("per-node arrays must have node_count entries");
    for (std::size_t i = 0; i < node_count; ++i) {
        if (!std::isfinite(alpha[i]) || !std::isfinite(beta[i]))
            throw InvalidInput("non-finite cost at node " + std::to_string(i + 1));
        if (!(alpha[i] >= beta[i] && beta[i] >= 0.0))
            throw InvalidInput("node " + std::to_string(i + 1) +
                               ": costs must satisfy alpha >= beta >= 0");
        if (!(shunt_susceptances[i] >= 0.0) || !std::isfinite(shunt_susceptances[i]))
            throw InvalidInput("node " + std::to_string(i + 1) + ": shunt must be finite and >= 0");
    }
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const Line& l = lines[k];
        const std::string tag = "line " + std::to_string(k + 1);
        if (l.from >= node_count || l.to >= node_count)
            throw InvalidInput(tag + ": endpoint out of range");
        if (l.from == l.to) throw InvalidInput(tag + ": self-loop");
        if (!(l.susceptance > 0.0) || !std::isfinite(l.susceptance))
            throw InvalidInput(tag + ": susceptance must be > 0");
        if (!(l.capacity >= 0.0) || std::isnan(l.capacity))
            throw InvalidInput(tag + ": capacity must be >= 0");
    }
    if (!is_connected(*this)) throw InvalidInput("network graph is not connected");
}

bool Network::has_shunts() const {
    return std::any_of(shunt_susceptances.begin(), shunt_susceptances.end(),
                       [](double y) { return y != 0.0; });
}

bool Network::homogeneous_costs() const {
    for (std::size_t i = 1; i < node_count; ++i)
        if (alpha[i] != alpha[0] || beta[i] != beta[0]) return false;
    return true;
}

Vector Network::capacities() const {
    Vector f(static_cast<Eigen::Index>(lines.size()));
    for (std::size_t k = 0; k < lines.size(); ++k) f(static_cast<Eigen::Index>(k)) = lines[k].capacity;
    return f;
}

FlowOperators build_flow_operators(const Network& net) {
    const auto m = static_cast<Eigen::Index>(net.node_count);
    const auto l = static_cast<Eigen::Index>(net.lines.size());
    FlowOperators ops;
    ops.admittance = Matrix::Zero(m, m);
    ops.incidence = Matrix::Zero(l, m);
    for (Eigen::Index i = 0; i < m; ++i) ops.admittance(i, i) = net.shunt_susceptances[i];
    for (Eigen::Index k = 0; k < l; ++k) {
        const Line& line = net.lines[static_cast<std::size_t>(k)];
        const auto i = static_cast<Eigen::Index>(line.from);
        const auto j = static_cast<Eigen::Index>(line.to);
        const double y = line.susceptance;
        ops.admittance(i, j) -= y;
        ops.admittance(j, i) -= y;
        ops.admittance(i, i) += y;
        ops.admittance(j, j) += y;
        ops.incidence(k, i) = y;
        ops.incidence(k, j) = -y;
    }

    Matrix gram = ops.admittance.transpose() * ops.admittance;
    gram(0, 0) += 1.0;
    Eigen::FullPivLU<Matrix> lu(gram);
    if (!lu.isInvertible())
        throw SingularMatrix("Y'Y + e1 e1' is singular: network is disconnected or degenerate");
    ops.ptdf = ops.incidence * lu.solve(ops.admittance.transpose());
    return ops;
}

bool injection_feasible(const FlowOperators& ops, const Network& net, const Vector& x,
                        const Tolerances& tol) {
    const Vector f = net.capacities();
    Vector flows;
    if (!net.has_shunts()) {
        if (std::abs(x.sum()) > tol.balance) return false;
        flows = ops.ptdf * x;
    } else {
        Eigen::FullPivLU<Matrix> lu(ops.admittance);
        if (!lu.isInvertible()) return false;
        const Vector theta = lu.solve(x);
        if ((ops.admittance * theta - x).cwiseAbs().maxCoeff() > tol.balance) return false;
        flows = ops.incidence * theta;
    }
    for (Eigen::Index k = 0; k < flows.size(); ++k)
        if (std::abs(flows(k)) > f(k) + tol.flow) return false;
    return true;
}

bool is_connected(const Network& net) {
    return net.node_count > 0 && components(net).count == 1;
}

bool is_acyclic(const Network& net) {
    if (net.node_count == 0) return false;
    const Components c = components(net);
    return c.count == 1 && !c.cycle && net.lines.size() + 1 == net.node_count;
}

}  // namespace storval
