#include "dp_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>

#include "errors.hpp"
#include "parallel.hpp"

namespace storval {

namespace {

std::vector<std::uint64_t> bit_key(const Vector& v) {
    std::vector<std::uint64_t> key(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) key[static_cast<std::size_t>(i)] = std::bit_cast<std::uint64_t>(v(i));
    return key;
}

// Distinct net-demand values of the tree in first-appearance order.
struct Support {
    std::vector<Vector> points;
    std::vector<std::size_t> of_node;
};

Support collect_support(const ScenarioTree& tree) {
    Support s;
    std::map<std::vector<std::uint64_t>, std::size_t> memo;
    s.of_node.resize(tree.size());
    for (std::size_t n = 0; n < tree.size(); ++n) {
        auto [it, inserted] = memo.try_emplace(bit_key(tree.node(n).xi), s.points.size());
        if (inserted) s.points.push_back(tree.node(n).xi);
        s.of_node[n] = it->second;
    }
    return s;
}

bool same_prices(const Vector& a, const Vector& b, double tol) {
    return (a - b).cwiseAbs().maxCoeff() <= tol;
}

// Charge wins ties; at the last stage discharge wins ties.
bool prefer_charge(double charge_cost, double discharge_cost, bool terminal) {
    const double tol = 1e-10 * std::max({1.0, std::abs(charge_cost), std::abs(discharge_cost)});
    if (terminal) return charge_cost < discharge_cost - tol;
    return charge_cost <= discharge_cost + tol;
}

}  // namespace

StorageAction threshold_action(double price, double predictor) {
    const double tol = 1e-12 * std::max({1.0, std::abs(price), std::abs(predictor)});
    return price <= predictor + tol ? StorageAction::Charge : StorageAction::Discharge;
}

EpsilonBarResult epsilon_bar(const Network& net, const FlowOperators& ops, const ScenarioTree& tree,
                             const EpsilonBarOptions& options) {
    if (tree.dimension() != net.node_count) throw InvalidInput("scenario dimension does not match network");
    const Support support = collect_support(tree);
    const auto m = static_cast<Eigen::Index>(net.node_count);

    std::vector<InteriorityProbe> probes(support.points.size());
    parallel_for(support.points.size(), options.workers, [&](std::size_t s) {
        probes[s] = probe_interiority(net, ops, support.points[s], options.initial_step, options.price_tol);
    });
    for (std::size_t s = 0; s < probes.size(); ++s) {
        if (probes[s].interior) continue;
        std::size_t first = 0;
        while (support.of_node[first] != s) ++first;
        const TreeNode& n = tree.node(first);
        throw BoundaryPoint("node " + std::to_string(n.id) + ": net demand fails the interiority probe along coordinate " +
                                std::to_string(probes[s].coordinate + 1),
                            n.id, probes[s].coordinate);
    }

    // One task per (support point, coordinate, side).
    const std::size_t per_point = static_cast<std::size_t>(2 * m);
    std::vector<double> distance(support.points.size() * per_point, options.range_cap);
    std::vector<char> capped(distance.size(), 1);
    parallel_for(distance.size(), options.workers, [&](std::size_t task) {
        const std::size_t s = task / per_point;
        const auto coord = static_cast<Eigen::Index>((task % per_point) / 2);
        const double side = (task % 2 == 0) ? 1.0 : -1.0;
        const Vector& xi = support.points[s];
        const Vector& base = probes[s].base_prices;
        auto changed = [&](double delta) {
            Vector shifted = xi;
            shifted(coord) += side * delta;
            return !same_prices(price_fn(net, ops, shifted), base, options.price_tol);
        };
        double lo = options.initial_step;
        double hi = lo;
        bool found = false;
        while (hi <= options.range_cap) {
            if (changed(hi)) {
                found = true;
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        if (!found) return;
        for (int it = 0; it < options.bisection_steps && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (changed(mid))
                hi = mid;
            else
                lo = mid;
        }
        distance[task] = lo;
        capped[task] = 0;
    });

    EpsilonBarResult result;
    result.min_distance = std::numeric_limits<double>::infinity();
    result.capped = true;
    for (std::size_t task = 0; task < distance.size(); ++task) {
        if (!capped[task]) result.capped = false;
        if (distance[task] < result.min_distance) {
            result.min_distance = distance[task];
            result.support_index = task / per_point;
            result.coordinate = static_cast<int>((task % per_point) / 2);
            result.side = (task % 2 == 0) ? 1 : -1;
        }
    }
    result.value = options.safety * result.min_distance;
    return result;
}

SingleDeviceTable solve_dp_single_device(const Network& net, const FlowOperators& ops,
                                         const ScenarioTree& tree, std::size_t bus, double eps,
                                         std::optional<double> eps_bar, unsigned workers) {
    if (tree.dimension() != net.node_count) throw InvalidInput("scenario dimension does not match network");
    if (bus >= net.node_count) throw InvalidInput("storage bus out of range");
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidInput("storage capacity must be finite and >= 0");
    if (eps_bar && !(eps < *eps_bar))
        throw InvalidInput("storage capacity " + std::to_string(eps) + " is not below epsilon bar " +
                           std::to_string(*eps_bar));

    const Support support = collect_support(tree);
    // Stage cost Q(xi + u e_bus) for u in {-eps, 0, +eps}.
    const double shifts[3] = {-eps, 0.0, eps};
    std::vector<double> cost(support.points.size() * 3);
    parallel_for(cost.size(), workers, [&](std::size_t task) {
        Vector xi = support.points[task / 3];
        xi(static_cast<Eigen::Index>(bus)) += shifts[task % 3];
        cost[task] = solve_ed(net, ops, xi).cost;
    });
    auto stage_cost = [&](std::size_t node, int shift) {
        return cost[support.of_node[node] * 3 + static_cast<std::size_t>(shift + 1)];
    };

    SingleDeviceTable t;
    t.bus = bus;
    t.eps = eps;
    const std::size_t n = tree.size();
    t.zero_storage.assign(n, 0.0);
    t.empty.assign(n, 0.0);
    t.full.assign(n, 0.0);
    t.action_empty.assign(n, StorageAction::Discharge);
    t.action_full.assign(n, StorageAction::Discharge);

    for (std::size_t k = tree.horizon(); k-- > 0;) {
        for (std::size_t node : tree.stage(k)) {
            const TreeNode& nd = tree.node(node);
            const bool terminal = nd.children.empty();
            double next_zero = 0.0, next_empty = 0.0, next_full = 0.0;
            for (std::size_t c : nd.children) {
                const double p = tree.node(c).probability;
                next_zero += p * t.zero_storage[c];
                next_empty += p * t.empty[c];
                next_full += p * t.full[c];
            }
            t.zero_storage[node] = stage_cost(node, 0) + next_zero;

            // z = 0: discharge means u = 0, charge means u = +eps.
            const double e_dis = stage_cost(node, 0) + next_empty;
            const double e_chg = stage_cost(node, +1) + next_full;
            const bool e_charge = prefer_charge(e_chg, e_dis, terminal);
            t.empty[node] = e_charge ? e_chg : e_dis;
            t.action_empty[node] = e_charge ? StorageAction::Charge : StorageAction::Discharge;

            // z = eps: discharge means u = -eps, charge means u = 0.
            const double f_dis = stage_cost(node, -1) + next_empty;
            const double f_chg = stage_cost(node, 0) + next_full;
            const bool f_charge = prefer_charge(f_chg, f_dis, terminal);
            t.full[node] = f_charge ? f_chg : f_dis;
            t.action_full[node] = f_charge ? StorageAction::Charge : StorageAction::Discharge;
        }
    }
    for (std::size_t r : tree.roots()) {
        const double p = tree.node(r).probability;
        t.value_without_storage += p * t.zero_storage[r];
        t.value_with_storage += p * t.empty[r];
    }
    return t;
}

Vector ValueFunctionTable::state(std::size_t s) const {
    Vector z(static_cast<Eigen::Index>(levels.size()));
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const std::size_t count = levels[i].size();
        z(static_cast<Eigen::Index>(i)) = levels[i][s % count];
        s /= count;
    }
    return z;
}

ValueFunctionTable solve_dp_grid(const Network& net, const FlowOperators& ops, const ScenarioTree& tree,
                                 const Vector& capacity, std::size_t grid_points, std::size_t table_budget,
                                 unsigned workers) {
    const std::size_t m = net.node_count;
    if (tree.dimension() != m) throw InvalidInput("scenario dimension does not match network");
    if (static_cast<std::size_t>(capacity.size()) != m) throw InvalidInput("capacity vector has wrong dimension");
    if (!capacity.allFinite() || capacity.minCoeff() < 0.0) throw InvalidInput("capacities must be finite and >= 0");
    if (grid_points < 2 && capacity.size() && capacity.maxCoeff() > 0.0)
        throw InvalidInput("grid needs at least 2 points per dimension");

    ValueFunctionTable table;
    table.levels.resize(m);
    std::vector<double> step(m, 0.0);
    std::vector<std::size_t> count(m, 1);
    for (std::size_t i = 0; i < m; ++i) {
        const double b = capacity(static_cast<Eigen::Index>(i));
        if (b == 0.0) {
            table.levels[i] = {0.0};
            continue;
        }
        count[i] = grid_points;
        step[i] = b / static_cast<double>(grid_points - 1);
        for (std::size_t j = 0; j < grid_points; ++j)
            table.levels[i].push_back(j + 1 == grid_points ? b : static_cast<double>(j) * step[i]);
    }
    std::size_t states = 1;
    for (std::size_t i = 0; i < m; ++i) {
        if (states > table_budget / count[i]) throw BudgetExceeded("storage grid exceeds table budget");
        states *= count[i];
    }
    if (tree.size() > table_budget / states)
        throw BudgetExceeded("value table of " + std::to_string(tree.size()) + " x " + std::to_string(states) +
                             " entries exceeds budget " + std::to_string(table_budget));
    table.state_count = states;

    // Distinct moves u = z' - z, keyed by bit pattern so equal shifts share one dispatch solve.
    std::vector<Vector> state_vec(states);
    for (std::size_t s = 0; s < states; ++s) state_vec[s] = table.state(s);

    const Support support = collect_support(tree);
    std::map<std::vector<std::uint64_t>, std::size_t> move_index;
    std::vector<Vector> moves;
    std::vector<std::size_t> move_of(states * states);
    for (std::size_t s = 0; s < states; ++s)
        for (std::size_t t = 0; t < states; ++t) {
            const Vector u = state_vec[t] - state_vec[s];
            auto [it, inserted] = move_index.try_emplace(bit_key(u), moves.size());
            if (inserted) moves.push_back(u);
            move_of[s * states + t] = it->second;
        }

    std::vector<DispatchSolution> stage(support.points.size() * moves.size());
    parallel_for(stage.size(), workers, [&](std::size_t task) {
        stage[task] = solve_ed(net, ops, support.points[task / moves.size()] + moves[task % moves.size()]);
    });

    table.values.assign(tree.size() * states, 0.0);
    table.next_state.assign(tree.size() * states, 0);
    table.dispatch.assign(tree.size() * states, Vector{});
    for (std::size_t k = tree.horizon(); k-- > 0;) {
        const auto nodes = tree.stage(k);
        parallel_for(nodes.size(), workers, [&](std::size_t pos) {
            const std::size_t node = nodes[pos];
            const TreeNode& nd = tree.node(node);
            std::vector<double> future(states, 0.0);
            for (std::size_t c : nd.children) {
                const double p = tree.node(c).probability;
                for (std::size_t t = 0; t < states; ++t) future[t] += p * table.values[c * states + t];
            }
            const std::size_t base = support.of_node[node] * moves.size();
            for (std::size_t s = 0; s < states; ++s) {
                double best = std::numeric_limits<double>::infinity();
                std::size_t arg = 0;
                for (std::size_t t = 0; t < states; ++t) {
                    const double v = stage[base + move_of[s * states + t]].cost + future[t];
                    if (v < best) {
                        best = v;
                        arg = t;
                    }
                }
                table.values[node * states + s] = best;
                table.next_state[node * states + s] = arg;
                table.dispatch[node * states + s] = stage[base + move_of[s * states + arg]].dispatch;
            }
        });
    }
    for (std::size_t r : tree.roots()) table.value += tree.node(r).probability * table.values[r * states];
    return table;
}

PolicyCheckReport verify_threshold_policy(const SingleDeviceTable& table, const PriceLattice& lattice,
                                          const ScenarioTree& tree, double value_tol) {
    PolicyCheckReport report;
    const auto bus = static_cast<Eigen::Index>(table.bus);
    const double eps = table.eps;

    // future[node] = E[sum_{j >= k} (pred_j - lambda_j)^+ | node]
    std::vector<double> future(tree.size(), 0.0);
    for (std::size_t k = tree.horizon(); k-- > 0;) {
        for (std::size_t node : tree.stage(k)) {
            const TreeNode& nd = tree.node(node);
            if (nd.children.empty()) continue;
            double acc = std::max(0.0, lattice.predictors[node](bus) - lattice.prices[node](bus));
            for (std::size_t c : nd.children) acc += tree.node(c).probability * future[c];
            future[node] = acc;
        }
    }

    for (std::size_t node = 0; node < tree.size(); ++node) {
        const TreeNode& nd = tree.node(node);
        const double price = lattice.prices[node](bus);
        const bool terminal = nd.children.empty();
        const StorageAction expected =
            terminal ? StorageAction::Discharge : threshold_action(price, lattice.predictors[node](bus));
        const struct {
            double z;
            double value;
            StorageAction action;
        } cases[2] = {{0.0, table.empty[node], table.action_empty[node]},
                      {eps, table.full[node], table.action_full[node]}};
        for (const auto& c : cases) {
            ++report.checked;
            const double reference = price * c.z + eps * future[node];
            const double residual = std::abs((table.zero_storage[node] - c.value) - reference);
            report.max_value_residual = std::max(report.max_value_residual, residual);
            if (residual > value_tol)
                report.mismatches.push_back({nd.id, nd.stage, c.z,
                                             "value identity residual " + std::to_string(residual)});
            // With z = 0 at the last stage both actions are "do nothing"; only z = eps is informative.
            if (c.action != expected && !(terminal && c.z == 0.0))
                report.mismatches.push_back({nd.id, nd.stage, c.z,
                                             std::string("DP chose ") +
                                                 (c.action == StorageAction::Charge ? "charge" : "discharge") +
                                                 ", threshold rule says " +
                                                 (expected == StorageAction::Charge ? "charge" : "discharge")});
        }
    }
    return report;
}

double simulate_threshold_arbitrage(const PriceLattice& lattice, const ScenarioTree& tree, std::size_t bus,
                                    double capacity, double gamma) {
    if (!(capacity >= 0.0)) throw InvalidInput("storage capacity must be >= 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidInput("dissipation factor must lie in (0, 1]");
    const auto i = static_cast<Eigen::Index>(bus);
    std::vector<double> level(tree.size(), 0.0);  // storage content entering each node
    double revenue = 0.0;
    for (std::size_t node = 0; node < tree.size(); ++node) {
        const TreeNode& nd = tree.node(node);
        const double price = lattice.prices[node](i);
        const double retained = gamma * level[node];
        double target = 0.0;
        if (!nd.children.empty() &&
            threshold_action(price, gamma * lattice.predictors[node](i)) == StorageAction::Charge)
            target = capacity;
        revenue += nd.path_probability * (-price * (target - retained));
        for (std::size_t c : nd.children) level[c] = target;
    }
    return revenue;
}

double perfect_foresight_revenue(const PriceLattice& lattice, const ScenarioTree& tree, std::size_t bus,
                                 double capacity) {
    if (!(capacity >= 0.0)) throw InvalidInput("storage capacity must be >= 0");
    const auto i = static_cast<Eigen::Index>(bus);
    double revenue = 0.0;
    for (std::size_t leaf : tree.leaves()) {
        const std::vector<std::size_t> path = tree.path(leaf);
        double gain = 0.0, bought = 0.0;
        bool holding = false;
        for (std::size_t k = 0; k < path.size(); ++k) {
            const double now = lattice.prices[path[k]](i);
            const bool last = k + 1 == path.size();
            const double next = last ? now : lattice.prices[path[k + 1]](i);
            if (!holding && !last && next > now) {
                holding = true;
                bought = now;
            } else if (holding && (last || next < now)) {
                holding = false;
                gain += now - bought;
            }
        }
        revenue += tree.node(leaf).path_probability * capacity * gain;
    }
    return revenue;
}

}  // namespace storval
