// Acceptance run over the shipped fixture corpus. One PASS/FAIL line per
// criterion; exit status is nonzero if any hard criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dispatch.hpp"
#include "dp_oracle.hpp"
#include "formats.hpp"
#include "network.hpp"
#include "scenario.hpp"
#include "valuation.hpp"
#include "verify.hpp"

using namespace storval;

namespace {

struct Instance {
    std::string net_name;
    std::string tree_name;
    Network net;
    FlowOperators ops;
    ScenarioTree tree;
    PriceLattice lattice;
    LmvReport report;
};

std::string data(const std::string& name) { return std::string(STORVAL_DATA_DIR) + "/" + name; }

const std::vector<std::pair<std::string, std::string>> kCorpus = {
    {"copperplate.net", "iid2.tree"},          {"copperplate.net", "cp_iid3.tree"},
    {"copperplate.net", "cp_markov.tree"},     {"copperplate.net", "cp_det.tree"},
    {"copperplate.net", "cp_iid2_n5.tree"},    {"two_node.net", "two_node_iid.tree"},
    {"two_node.net", "two_node_iid3.tree"},    {"two_node.net", "two_node_iid_n2.tree"},
    {"two_node.net", "two_node_markov.tree"},  {"two_node.net", "two_node_markov_n5.tree"},
    {"two_node.net", "two_node_det.tree"},     {"triangle.net", "triangle_iid3.tree"},
    {"triangle.net", "triangle_markov.tree"},  {"triangle.net", "triangle_det.tree"},
    {"tree4.net", "tree4_iid2.tree"},          {"tree4.net", "tree4_markov.tree"},
    {"tree4.net", "tree4_det.tree"},           {"star5.net", "star5_iid2.tree"},
    {"star5.net", "star5_iid3.tree"},          {"star5.net", "star5_markov.tree"},
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

int failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << id << " " << name << ": " << detail << "\n";
    if (!pass) ++failures;
}

// Tracks the worst residual relative to its tolerance.
struct Worst {
    double ratio = 0.0;
    double residual = 0.0;
    std::string where;
    std::size_t checks = 0;
    bool ok = true;

    void add(double residual_value, double tolerance, const std::string& at) {
        ++checks;
        const bool pass = residual_value <= tolerance;
        ok = ok && pass;
        const double r = tolerance > 0 ? residual_value / tolerance : (residual_value > 0 ? 1e300 : 0.0);
        if (r >= ratio) {
            ratio = r;
            residual = residual_value;
            where = at;
        }
    }
    std::string summary() const {
        return std::to_string(checks) + " checks, worst residual " + sci(residual) + " (" + sci(ratio) +
               " of tolerance) at " + where;
    }
};

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    std::vector<Instance> corpus;
    for (const auto& [net_name, tree_name] : kCorpus) {
        Instance in{net_name, tree_name, load_network(data(net_name)), {}, load_tree(data(tree_name)), {}, {}};
        in.ops = build_flow_operators(in.net);
        in.lattice = build_price_lattice(in.net, in.ops, in.tree);
        in.report = lmv(in.lattice, in.tree);
        corpus.push_back(std::move(in));
    }

    // 1 and 6 share the single-device tables.
    Worst identity, policy_value;
    std::size_t policy_errors = 0, policy_checked = 0;
    for (const Instance& in : corpus) {
        const double bar = epsilon_bar(in.net, in.ops, in.tree).value;
        for (std::size_t bus = 0; bus < in.net.node_count; ++bus) {
            for (double fraction : {0.1, 0.5, 0.9}) {
                const double eps = fraction * bar;
                const SingleDeviceTable d = solve_dp_single_device(in.net, in.ops, in.tree, bus, eps, bar);
                const double drop = d.value_without_storage - d.value_with_storage;
                const double expected = eps * in.report.lmv(static_cast<Eigen::Index>(bus));
                const std::string at = in.tree_name + " bus " + std::to_string(bus + 1) + " eps " + sci(eps);
                identity.add(std::abs(drop - expected), 1e-8 * std::max(1.0, std::abs(d.value_without_storage)), at);
                const PolicyCheckReport p = verify_threshold_policy(d, in.lattice, in.tree, 1e-9);
                policy_value.add(p.max_value_residual, 1e-9, at);
                policy_checked += p.checked;
                for (const PolicyMismatch& mm : p.mismatches)
                    if (mm.what.rfind("DP chose", 0) == 0) ++policy_errors;
            }
        }
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(1, identity.ok && corpus.size() >= 20 && seconds < 60.0, "headline identity",
           std::to_string(corpus.size()) + " instances, " + identity.summary() + ", " + sci(seconds) + " s");

    // 2
    {
        Worst dominance;
        double best_slack = 0.0;
        std::string slack_at;
        for (const Instance& in : corpus) {
            const bool general = !is_acyclic(in.net) || !in.net.homogeneous_costs();
            for (std::size_t i = 0; i < in.net.node_count; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                const double excess = in.report.lmv(ii) - in.report.upper_bound(ii);
                dominance.add(std::max(0.0, excess), 1e-9, in.tree_name + " bus " + std::to_string(i + 1));
                if (general && -excess > best_slack) {
                    best_slack = -excess;
                    slack_at = in.tree_name + " bus " + std::to_string(i + 1);
                }
            }
        }
        report(2, dominance.ok && best_slack > 1e-6, "bound dominance",
               dominance.summary() + "; largest strict slack " + sci(best_slack) + " at " + slack_at);
    }

    // 3: transition counts recomputed here from the lattice.
    {
        Worst prices, coincide;
        std::size_t instances = 0;
        for (const Instance& in : corpus) {
            if (!is_acyclic(in.net) || !in.net.homogeneous_costs()) continue;
            ++instances;
            const double a = in.net.alpha[0], b = in.net.beta[0];
            for (std::size_t n = 0; n < in.tree.size(); ++n)
                for (Eigen::Index i = 0; i < in.lattice.prices[n].size(); ++i) {
                    const double p = in.lattice.prices[n](i);
                    prices.add(std::min(std::abs(p - a), std::abs(p - b)), 1e-7, in.tree_name);
                }
            for (std::size_t i = 0; i < in.net.node_count; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                double transitions = 0.0;
                for (std::size_t n = 0; n < in.tree.size(); ++n)
                    for (std::size_t c : in.tree.node(n).children)
                        if (std::abs(in.lattice.prices[n](ii) - b) <= 1e-7 &&
                            std::abs(in.lattice.prices[c](ii) - a) <= 1e-7)
                            transitions += in.tree.node(c).path_probability;
                const double value = (a - b) * transitions;
                const std::string at = in.tree_name + " bus " + std::to_string(i + 1);
                coincide.add(std::abs(in.report.lmv(ii) - value), 1e-8, at);
                coincide.add(std::abs(in.report.upper_bound(ii) - value), 1e-8, at);
                const AcyclicDiagnostics d = acyclic_diagnostics(in.net, in.lattice, in.tree);
                coincide.add(std::abs(d.transition_value(ii) - value), 1e-8, at);
            }
        }
        report(3, prices.ok && coincide.ok && instances > 0, "acyclic homogeneous tightness",
               std::to_string(instances) + " instances; prices " + prices.summary() + "; values " +
                   coincide.summary());
    }

    // 4
    {
        Worst limits;
        std::size_t trees = 0;
        for (const char* name : {"two_node_iid.tree", "two_node_iid3.tree", "two_node_markov.tree",
                                 "two_node_markov_n5.tree", "two_node_iid_n2.tree"}) {
            const ScenarioTree t = load_tree(data(name));
            Network net = load_network(data("two_node.net"));
            const TwoNodeLimits f = two_node_limits(net.alpha[0], net.beta[0], t);
            for (double rating : {1e-6, 1e6}) {
                net.lines[0].capacity = rating;
                const FlowOperators ops = build_flow_operators(net);
                const Vector v = lmv(build_price_lattice(net, ops, t), t).lmv;
                const Vector& ref = rating < 1.0 ? f.lmv_f0 : f.lmv_finf;
                for (Eigen::Index i = 0; i < 2; ++i)
                    limits.add(std::abs(v(i) - ref(i)), 1e-6, std::string(name) + " f=" + sci(rating));
            }
            ++trees;
        }
        report(4, limits.ok && trees >= 3, "two-bus limits", std::to_string(trees) + " trees, " + limits.summary());
    }

    // 5
    {
        Worst gradient, sign, sub;
        for (const Instance& in : corpus)
            for (const Vector& xi : in.lattice.support) {
                const Vector gap = gradient_check(in.net, in.ops, xi, 1e-5);
                gradient.add(gap.maxCoeff(), 1e-6, in.tree_name);
                const DispatchSolution sol = solve_ed(in.net, in.ops, xi);
                sign.add(std::max(0.0, -sol.prices.minCoeff()), 1e-10, in.tree_name);
                sub.add(subdifferential_violation(in.net, sol, 1e-7), 1e-7, in.tree_name);
            }
        report(5, gradient.ok && sign.ok && sub.ok, "dual gradient and sub-differential",
               "gradient " + gradient.summary() + "; sign " + sci(sign.residual) + "; subdifferential " +
                   sci(sub.residual));
    }

    report(6, policy_errors == 0 && policy_value.ok, "threshold policy",
           std::to_string(policy_checked) + " (node, z) pairs, " + std::to_string(policy_errors) +
               " policy mismatches, value " + policy_value.summary());

    // 7: nested grids b_j = j * unit with levels {0, unit, ..., j * unit}.
    {
        bool monotone = true;
        std::size_t paths = 0, convex_violations = 0;
        double worst_convex = 0.0;
        const std::vector<std::tuple<std::string, std::string, Vector>> cases = {
            {"copperplate.net", "cp_markov.tree", (Vector(1) << 0.3).finished()},
            {"two_node.net", "two_node_markov.tree", (Vector(2) << 0.4, 0.3).finished()},
            {"two_node.net", "two_node_iid3.tree", (Vector(2) << 0.0, 0.5).finished()},
            {"triangle.net", "triangle_det.tree", (Vector(3) << 0.2, 0.1, 0.3).finished()},
            {"tree4.net", "tree4_iid2.tree", (Vector(4) << 0.25, 0.0, 0.0, 0.4).finished()},
        };
        for (const auto& [net_name, tree_name, unit] : cases) {
            const Network net = load_network(data(net_name));
            const FlowOperators ops = build_flow_operators(net);
            const ScenarioTree t = load_tree(data(tree_name));
            std::vector<double> j;
            for (std::size_t k = 0; k < 5; ++k)
                j.push_back(solve_dp_grid(net, ops, t, static_cast<double>(k) * unit, k + 1).value);
            for (std::size_t k = 1; k < j.size(); ++k) monotone = monotone && j[k] <= j[k - 1] + 1e-12;
            for (std::size_t k = 1; k + 1 < j.size(); ++k) {
                const double gap = j[k] - 0.5 * (j[k - 1] + j[k + 1]);
                worst_convex = std::max(worst_convex, gap);
                if (gap > 1e-9) ++convex_violations;
            }
            ++paths;
        }
        report(7, monotone, "value monotone in capacity",
               std::to_string(paths) + " five-point paths non-increasing; midpoint convexity (soft, grid values "
               "only upper-bound J*): " + std::to_string(convex_violations) + " excursions, largest " +
                   sci(worst_convex));
    }

    // 8
    {
        Worst causal, hindsight, order, lossless;
        for (const Instance& in : corpus) {
            const Vector diss = lmv_dissipative(in.lattice, in.tree, 1.0 - 1e-9);
            for (std::size_t bus = 0; bus < in.net.node_count; ++bus) {
                const auto i = static_cast<Eigen::Index>(bus);
                const std::string at = in.tree_name + " bus " + std::to_string(bus + 1);
                for (double b : {0.5, 1.0, 3.0}) {
                    const double c = simulate_threshold_arbitrage(in.lattice, in.tree, bus, b);
                    const double h = perfect_foresight_revenue(in.lattice, in.tree, bus, b);
                    causal.add(std::abs(c - b * in.report.lmv(i)), 1e-9, at);
                    hindsight.add(std::abs(h - b * in.report.upper_bound(i)), 1e-9, at);
                    order.add(std::max(0.0, c - h), 1e-9, at);
                }
                lossless.add(std::abs(diss(i) - in.report.lmv(i)), 1e-6, at);
                const double sim = simulate_threshold_arbitrage(in.lattice, in.tree, bus, 1.0, 1.0 - 1e-9);
                lossless.add(std::abs(sim - in.report.lmv(i)), 1e-6, at);
            }
        }
        report(8, causal.ok && hindsight.ok && order.ok && lossless.ok, "arbitrage equivalences",
               "causal " + sci(causal.residual) + ", hindsight " + sci(hindsight.residual) + ", order " +
                   sci(order.residual) + ", near-lossless " + sci(lossless.residual) + " over " +
                   std::to_string(causal.checks) + " (instance, bus, b) triples");
    }

    // 9: the CLI writes the audit twice; the files must match byte for byte.
    {
        bool identical = true, clean = true;
        std::size_t runs = 0;
        for (const auto& [net_name, tree_name] : kCorpus) {
            std::string text[2];
            for (int r = 0; r < 2; ++r) {
                const std::string out = std::string(STORVAL_BUILD_DIR) + "/acceptance_audit_" + std::to_string(r) + ".csv";
                const std::string cmd = std::string("\"") + STORVAL_CLI + "\" verify --net \"" + data(net_name) +
                                        "\" --tree \"" + data(tree_name) + "\" --out \"" + out + "\" 2>/dev/null";
                clean = clean && std::system(cmd.c_str()) == 0;
                std::ifstream in(out, std::ios::binary);
                std::ostringstream buf;
                buf << in.rdbuf();
                text[r] = buf.str();
                std::remove(out.c_str());
            }
            identical = identical && !text[0].empty() && text[0] == text[1];
            ++runs;
        }
        report(9, identical && clean, "deterministic verify audit",
               std::to_string(runs) + " fixtures, two CLI runs each, " + (identical ? "byte-identical" : "DIFFERENT") +
                   (clean ? ", all exit 0" : ", some runs exited nonzero"));
    }

    std::cout << (failures ? "acceptance FAILED: " + std::to_string(failures) + " criteria\n"
                           : std::string("acceptance passed\n"));
    return failures ? 1 : 0;
}
