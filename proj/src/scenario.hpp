#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "network.hpp"

namespace storval {

// One record as it appears in a storval-tree/1 file or a builder.
struct NodeRecord {
    long id = 0;
    std::size_t stage = 0;
    std::optional<long> parent;
    double probability = 1.0;  // P(this node | parent), or P(root) at stage 0
    Vector xi;
};

struct TreeNode {
    long id = 0;
    std::size_t stage = 0;
    std::optional<std::size_t> parent;  // index into ScenarioTree::nodes()
    double probability = 1.0;
    double path_probability = 1.0;
    Vector xi;
    std::vector<std::size_t> children;
};

// Finite-support net-demand process over stages 0..N-1. A node stands for the
// whole demand history on its root path. Nodes are stored stage-major, in
// input order within a stage; immutable after construction.
class ScenarioTree {
public:
    static constexpr std::size_t kDefaultNodeBudget = 200000;

    // Throws InvalidInput on any structural violation: unknown or duplicate
    // ids, stage/parent mismatch, probabilities outside (0, 1], sibling or
    // root probabilities not summing to one within 1e-12, leaves before the
    // last stage, or wrong xi dimension. Throws BudgetExceeded when
    // records.size() > node_budget.
    static ScenarioTree from_records(std::size_t horizon, std::size_t dimension,
                                     std::vector<NodeRecord> records,
                                     std::size_t node_budget = kDefaultNodeBudget);

    std::size_t horizon() const { return horizon_; }
    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return nodes_.size(); }

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeNode& node(std::size_t index) const { return nodes_.at(index); }
    std::span<const std::size_t> stage(std::size_t k) const { return stages_.at(k); }
    std::span<const std::size_t> roots() const { return stages_.front(); }
    std::span<const std::size_t> leaves() const { return stages_.back(); }

    std::optional<std::size_t> find(long id) const;

    // Root-to-node index path, root first.
    std::vector<std::size_t> path(std::size_t index) const;

    std::vector<NodeRecord> records() const;

private:
    std::size_t horizon_ = 0;
    std::size_t dimension_ = 0;
    std::vector<TreeNode> nodes_;
    std::vector<std::vector<std::size_t>> stages_;
    std::map<long, std::size_t> index_;
};

// Product of transition probabilities along the root path of node `id`.
double path_probability(const ScenarioTree& tree, long id);

// Sum over children c of P(c | node) * values[c]. Throws InvalidInput when
// the node is terminal or a child value is missing.
double conditional_expectation(const ScenarioTree& tree, long id, const std::map<long, double>& values);

// Same, with values indexed by node position.
double conditional_expectation(const ScenarioTree& tree, std::size_t index,
                               std::span<const double> values);

ScenarioTree build_iid(const std::vector<Vector>& support, const std::vector<double>& probabilities,
                       std::size_t horizon,
                       std::size_t node_budget = ScenarioTree::kDefaultNodeBudget);

// Markov chain expanded into a (non-recombining) tree; zero-probability
// branches are dropped.
ScenarioTree build_markov(const std::vector<Vector>& states, const Matrix& transition,
                          const std::vector<double>& initial, std::size_t horizon,
                          std::size_t node_budget = ScenarioTree::kDefaultNodeBudget);

}  // namespace storval
