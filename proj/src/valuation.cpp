#include "valuation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "errors.hpp"
#include "parallel.hpp"

namespace storval {

namespace {

std::vector<std::uint64_t> bit_key(const Vector& v) {
    std::vector<std::uint64_t> key(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) key[static_cast<std::size_t>(i)] = std::bit_cast<std::uint64_t>(v(i));
    return key;
}

double positive(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

PriceLattice build_price_lattice(const Network& net, const FlowOperators& ops, const ScenarioTree& tree,
                                 const Config& config) {
    if (tree.dimension() != net.node_count)
        throw InvalidInput("scenario dimension " + std::to_string(tree.dimension()) +
                           " does not match network size " + std::to_string(net.node_count));
    PriceLattice lattice;
    std::map<std::vector<std::uint64_t>, std::size_t> memo;
    std::vector<std::size_t> first_node;
    lattice.support_of.resize(tree.size());
    for (std::size_t n = 0; n < tree.size(); ++n) {
        auto [it, inserted] = memo.try_emplace(bit_key(tree.node(n).xi), lattice.support.size());
        if (inserted) {
            lattice.support.push_back(tree.node(n).xi);
            first_node.push_back(n);
        }
        lattice.support_of[n] = it->second;
    }

    std::vector<InteriorityProbe> probes(lattice.support.size());
    parallel_for(lattice.support.size(), config.workers, [&](std::size_t s) {
        probes[s] = probe_interiority(net, ops, lattice.support[s], config.tol.probe_delta,
                                      config.tol.price_match);
    });
    for (std::size_t s = 0; s < probes.size(); ++s) {
        if (probes[s].interior) continue;
        const TreeNode& n = tree.node(first_node[s]);
        throw BoundaryPoint("node " + std::to_string(n.id) + " (stage " + std::to_string(n.stage) +
                                "): net demand lies on a price boundary along coordinate " +
                                std::to_string(probes[s].coordinate + 1) + " (" +
                                (probes[s].side > 0 ? "+" : "-") + "probe)",
                            n.id, probes[s].coordinate);
    }

    lattice.prices.resize(tree.size());
    for (std::size_t n = 0; n < tree.size(); ++n) lattice.prices[n] = probes[lattice.support_of[n]].base_prices;
    lattice.predictors.assign(tree.size(), Vector{});
    for (std::size_t n = 0; n < tree.size(); ++n) {
        const TreeNode& node = tree.node(n);
        if (node.children.empty()) continue;
        Vector acc = Vector::Zero(static_cast<Eigen::Index>(net.node_count));
        for (std::size_t c : node.children) acc += tree.node(c).probability * lattice.prices[c];
        lattice.predictors[n] = acc;
    }
    return lattice;
}

LmvReport lmv(const PriceLattice& lattice, const ScenarioTree& tree, double tight_tol) {
    const Eigen::Index m = static_cast<Eigen::Index>(tree.dimension());
    LmvReport r;
    r.lmv = Vector::Zero(m);
    r.tv_expectation = Vector::Zero(m);
    r.terminal_drift = Vector::Zero(m);
    r.upper_bound_stepwise = Vector::Zero(m);

    // Total variation accumulated along each root path; nodes are stage-major
    // so parents are visited first.
    std::vector<Vector> tv(tree.size());
    for (std::size_t n = 0; n < tree.size(); ++n) {
        const TreeNode& node = tree.node(n);
        const Vector& price = lattice.prices[n];
        if (!node.children.empty()) {
            for (Eigen::Index i = 0; i < m; ++i)
                r.lmv(i) += node.path_probability * positive(lattice.predictors[n](i) - price(i));
        }
        if (node.parent) {
            const Vector step = price - lattice.prices[*node.parent];
            tv[n] = tv[*node.parent] + step.cwiseAbs();
            for (Eigen::Index i = 0; i < m; ++i)
                r.upper_bound_stepwise(i) += node.path_probability * positive(step(i));
        } else {
            tv[n] = Vector::Zero(m);
        }
    }
    for (std::size_t leaf : tree.leaves()) {
        const TreeNode& node = tree.node(leaf);
        const std::vector<std::size_t> path = tree.path(leaf);
        r.tv_expectation += node.path_probability * tv[leaf];
        r.terminal_drift += node.path_probability * (lattice.prices[leaf] - lattice.prices[path.front()]);
    }
    r.upper_bound = 0.5 * r.tv_expectation + 0.5 * r.terminal_drift;
    r.tight.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i)
        r.tight[static_cast<std::size_t>(i)] = std::abs(r.lmv(i) - r.upper_bound(i)) <= tight_tol;
    return r;
}

Vector lmv_dissipative(const PriceLattice& lattice, const ScenarioTree& tree, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidInput("dissipation factor must lie in (0, 1)");
    const Eigen::Index m = static_cast<Eigen::Index>(tree.dimension());
    Vector out = Vector::Zero(m);
    for (std::size_t n = 0; n < tree.size(); ++n) {
        const TreeNode& node = tree.node(n);
        if (node.children.empty()) continue;
        for (Eigen::Index i = 0; i < m; ++i)
            out(i) += node.path_probability * positive(gamma * lattice.predictors[n](i) - lattice.prices[n](i));
    }
    return out;
}

AcyclicDiagnostics acyclic_diagnostics(const Network& net, const PriceLattice& lattice,
                                     const ScenarioTree& tree, double price_tol, double match_tol) {
    AcyclicDiagnostics d;
    if (!is_acyclic(net) || !net.homogeneous_costs()) return d;
    d.applicable = true;
    const double alpha = net.alpha[0], beta = net.beta[0];
    const Eigen::Index m = static_cast<Eigen::Index>(net.node_count);

    for (std::size_t n = 0; n < tree.size(); ++n) {
        for (Eigen::Index i = 0; i < m; ++i) {
            const double p = lattice.prices[n](i);
            const double dev = std::min(std::abs(p - alpha), std::abs(p - beta));
            d.max_price_deviation = std::max(d.max_price_deviation, dev);
            if (dev > price_tol)
                throw StructuralViolation("node " + std::to_string(tree.node(n).id) + ", bus " +
                                          std::to_string(i + 1) + ": price " + std::to_string(p) +
                                          " is neither alpha nor beta on an acyclic homogeneous network");
        }
    }

    auto near = [&](double p, double target) { return std::abs(p - target) <= price_tol; };
    d.transition_value = Vector::Zero(m);
    for (std::size_t leaf : tree.leaves()) {
        const std::vector<std::size_t> path = tree.path(leaf);
        const double weight = tree.node(leaf).path_probability;
        for (Eigen::Index i = 0; i < m; ++i) {
            int count = 0;
            for (std::size_t k = 0; k + 1 < path.size(); ++k)
                if (near(lattice.prices[path[k]](i), beta) && near(lattice.prices[path[k + 1]](i), alpha))
                    ++count;
            d.transition_value(i) += weight * count;
        }
    }
    d.transition_value *= (alpha - beta);

    const LmvReport report = lmv(lattice, tree, match_tol);
    d.lmv = report.lmv;
    d.upper_bound = report.upper_bound;
    d.coincide.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i)
        d.coincide[static_cast<std::size_t>(i)] = std::abs(d.lmv(i) - d.upper_bound(i)) <= match_tol &&
                                                  std::abs(d.lmv(i) - d.transition_value(i)) <= match_tol &&
                                                  std::abs(d.upper_bound(i) - d.transition_value(i)) <= match_tol;
    return d;
}

TwoNodeLimits two_node_limits(double alpha, double beta, const ScenarioTree& tree) {
    if (tree.dimension() != 2) throw InvalidInput("two-node limits need a 2-dimensional demand process");
    if (!(alpha >= beta && beta >= 0.0)) throw InvalidInput("costs must satisfy alpha >= beta >= 0");
    TwoNodeLimits out{Vector::Zero(2), Vector::Zero(2)};
    for (const TreeNode& node : tree.nodes()) {
        for (Eigen::Index i = 0; i < 2; ++i)
            if (node.xi(i) == 0.0)
                throw BoundaryPoint("node " + std::to_string(node.id) + ": net demand coordinate " +
                                        std::to_string(i + 1) + " is exactly zero",
                                    node.id, static_cast<int>(i));
        if (node.xi.sum() == 0.0)
            throw BoundaryPoint("node " + std::to_string(node.id) + ": aggregate net demand is exactly zero",
                                node.id, -1);
    }
    for (const TreeNode& node : tree.nodes()) {
        if (!node.parent) continue;
        const Vector& prev = tree.node(*node.parent).xi;
        for (Eigen::Index i = 0; i < 2; ++i)
            if (prev(i) < 0.0 && node.xi(i) > 0.0) out.lmv_f0(i) += node.path_probability;
        if (prev.sum() < 0.0 && node.xi.sum() > 0.0) {
            out.lmv_finf(0) += node.path_probability;
            out.lmv_finf(1) += node.path_probability;
        }
    }
    out.lmv_f0 *= (alpha - beta);
    out.lmv_finf *= (alpha - beta);
    return out;
}

}  // namespace storval
