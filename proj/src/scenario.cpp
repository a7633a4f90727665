#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace storval {

namespace {

constexpr double kSumTol = 1e-12;

void check_distribution(const std::vector<double>& probs, const std::string& what) {
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput(what + ": probability outside [0, 1]");
        total += p;
    }
    if (std::abs(total - 1.0) > kSumTol) throw InvalidInput(what + ": probabilities do not sum to 1");
}

}  // namespace

ScenarioTree ScenarioTree::from_records(std::size_t horizon, std::size_t dimension,
                                        std::vector<NodeRecord> records, std::size_t node_budget) {
    if (horizon == 0) throw InvalidInput("horizon must be positive");
    if (dimension == 0) throw InvalidInput("xi dimension must be positive");
    if (records.empty()) throw InvalidInput("scenario tree has no nodes");
    if (records.size() > node_budget)
        throw BudgetExceeded("scenario tree has " + std::to_string(records.size()) +
                             " nodes, budget is " + std::to_string(node_budget));

    ScenarioTree tree;
    tree.horizon_ = horizon;
    tree.dimension_ = dimension;
    tree.stages_.assign(horizon, {});

    std::stable_sort(records.begin(), records.end(),
                     [](const NodeRecord& a, const NodeRecord& b) { return a.stage < b.stage; });
    tree.nodes_.reserve(records.size());
    for (NodeRecord& r : records) {
        const std::string tag = "node " + std::to_string(r.id);
        if (r.stage >= horizon) throw InvalidInput(tag + ": stage beyond horizon");
        if (static_cast<std::size_t>(r.xi.size()) != dimension)
            throw InvalidInput(tag + ": xi has wrong dimension");
        if (!r.xi.allFinite()) throw InvalidInput(tag + ": xi is not finite");
        if (!(r.probability > 0.0 && r.probability <= 1.0))
            throw InvalidInput(tag + ": probability must lie in (0, 1]");
        if (tree.index_.count(r.id)) throw InvalidInput(tag + ": duplicate id");

        TreeNode n;
        n.id = r.id;
        n.stage = r.stage;
        n.probability = r.probability;
        n.xi = std::move(r.xi);
        if (r.stage == 0) {
            if (r.parent) throw InvalidInput(tag + ": stage-0 node must not have a parent");
            n.path_probability = n.probability;
        } else {
            if (!r.parent) throw InvalidInput(tag + ": missing parent");
            auto it = tree.index_.find(*r.parent);
            if (it == tree.index_.end()) throw InvalidInput(tag + ": unknown parent " + std::to_string(*r.parent));
            TreeNode& parent = tree.nodes_[it->second];
            if (parent.stage + 1 != r.stage) throw InvalidInput(tag + ": parent is not at the previous stage");
            n.parent = it->second;
            n.path_probability = parent.path_probability * n.probability;
            parent.children.push_back(tree.nodes_.size());
        }
        tree.index_[n.id] = tree.nodes_.size();
        tree.stages_[n.stage].push_back(tree.nodes_.size());
        tree.nodes_.push_back(std::move(n));
    }

    double root_total = 0.0;
    for (std::size_t r : tree.stages_[0]) root_total += tree.nodes_[r].probability;
    if (tree.stages_[0].empty() || std::abs(root_total - 1.0) > kSumTol)
        throw InvalidInput("root probabilities do not sum to 1");
    for (const TreeNode& n : tree.nodes_) {
        if (n.stage + 1 == horizon) continue;
        if (n.children.empty())
            throw InvalidInput("node " + std::to_string(n.id) + ": leaf before the last stage");
        double total = 0.0;
        for (std::size_t c : n.children) total += tree.nodes_[c].probability;
        if (std::abs(total - 1.0) > kSumTol)
            throw InvalidInput("node " + std::to_string(n.id) + ": child probabilities do not sum to 1");
    }
    return tree;
}

std::optional<std::size_t> ScenarioTree::find(long id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::size_t> ScenarioTree::path(std::size_t index) const {
    std::vector<std::size_t> out;
    for (std::optional<std::size_t> at = index; at; at = nodes_.at(*at).parent) out.push_back(*at);
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<NodeRecord> ScenarioTree::records() const {
    std::vector<NodeRecord> out;
    out.reserve(nodes_.size());
    for (const TreeNode& n : nodes_) {
        NodeRecord r;
        r.id = n.id;
        r.stage = n.stage;
        if (n.parent) r.parent = nodes_[*n.parent].id;
        r.probability = n.probability;
        r.xi = n.xi;
        out.push_back(std::move(r));
    }
    return out;
}

double path_probability(const ScenarioTree& tree, long id) {
    const auto index = tree.find(id);
    if (!index) throw InvalidInput("unknown node id " + std::to_string(id));
    return tree.node(*index).path_probability;
}

double conditional_expectation(const ScenarioTree& tree, long id, const std::map<long, double>& values) {
    const auto index = tree.find(id);
    if (!index) throw InvalidInput("unknown node id " + std::to_string(id));
    const TreeNode& n = tree.node(*index);
    if (n.children.empty())
        throw InvalidInput("node " + std::to_string(id) + " is at the terminal stage");
    double acc = 0.0;
    for (std::size_t c : n.children) {
        const TreeNode& child = tree.node(c);
        auto it = values.find(child.id);
        if (it == values.end())
            throw InvalidInput("missing value for child node " + std::to_string(child.id));
        acc += child.probability * it->second;
    }
    return acc;
}

double conditional_expectation(const ScenarioTree& tree, std::size_t index, std::span<const double> values) {
    const TreeNode& n = tree.node(index);
    if (n.children.empty())
        throw InvalidInput("node " + std::to_string(n.id) + " is at the terminal stage");
    double acc = 0.0;
    for (std::size_t c : n.children) acc += tree.node(c).probability * values[c];
    return acc;
}

namespace {

// Enumerates branches stage by stage; `branch(k, parent_state)` yields the
// (state, probability) pairs available below a node in state parent_state.
template <class Branch>
ScenarioTree expand(const std::vector<Vector>& values, std::size_t horizon, std::size_t budget,
                    const std::vector<double>& root_probs, Branch&& branch) {
    struct Frontier {
        long id;
        std::size_t state;
    };
    std::vector<NodeRecord> records;
    std::vector<Frontier> frontier;
    long next_id = 0;
    auto emit = [&](std::size_t stage, std::optional<long> parent, std::size_t state, double p,
                    std::vector<Frontier>& into) {
        if (records.size() >= budget)
            throw BudgetExceeded("scenario tree exceeds node budget of " + std::to_string(budget));
        records.push_back({next_id, stage, parent, p, values[state]});
        into.push_back({next_id, state});
        ++next_id;
    };
    for (std::size_t s = 0; s < root_probs.size(); ++s)
        if (root_probs[s] > 0.0) emit(0, std::nullopt, s, root_probs[s], frontier);
    for (std::size_t k = 1; k < horizon; ++k) {
        std::vector<Frontier> next;
        for (const Frontier& f : frontier)
            for (std::size_t s = 0; s < values.size(); ++s) {
                const double p = branch(f.state, s);
                if (p > 0.0) emit(k, f.id, s, p, next);
            }
        frontier = std::move(next);
    }
    const std::size_t dim = static_cast<std::size_t>(values.front().size());
    return ScenarioTree::from_records(horizon, dim, std::move(records), budget);
}

void check_points(const std::vector<Vector>& points) {
    if (points.empty()) throw InvalidInput("support is empty");
    for (const Vector& v : points)
        if (v.size() != points.front().size() || v.size() == 0)
            throw InvalidInput("support points must share a positive dimension");
}

}  // namespace

ScenarioTree build_iid(const std::vector<Vector>& support, const std::vector<double>& probabilities,
                       std::size_t horizon, std::size_t node_budget) {
    check_points(support);
    if (probabilities.size() != support.size())
        throw InvalidInput("one probability per support point is required");
    check_distribution(probabilities, "i.i.d. distribution");
    if (horizon == 0) throw InvalidInput("horizon must be positive");
    return expand(support, horizon, node_budget, probabilities,
                  [&](std::size_t, std::size_t s) { return probabilities[s]; });
}

ScenarioTree build_markov(const std::vector<Vector>& states, const Matrix& transition,
                          const std::vector<double>& initial, std::size_t horizon,
                          std::size_t node_budget) {
    check_points(states);
    const auto n = static_cast<Eigen::Index>(states.size());
    if (transition.rows() != n || transition.cols() != n)
        throw InvalidInput("transition matrix must be square with one row per state");
    if (initial.size() != states.size()) throw InvalidInput("initial distribution has wrong size");
    check_distribution(initial, "initial distribution");
    for (Eigen::Index r = 0; r < n; ++r) {
        std::vector<double> row;
        for (Eigen::Index c = 0; c < n; ++c) row.push_back(transition(r, c));
        check_distribution(row, "transition row " + std::to_string(r + 1));
    }
    if (horizon == 0) throw InvalidInput("horizon must be positive");
    return expand(states, horizon, node_budget, initial, [&](std::size_t from, std::size_t to) {
        return transition(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
    });
}

}  // namespace storval
