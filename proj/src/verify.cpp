#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dispatch.hpp"
#include "dp_oracle.hpp"
#include "formats.hpp"
#include "valuation.hpp"

namespace storval {

namespace {

AuditRow row(std::string check, int bus, long node, double eps, double value, double reference,
             double residual, double tolerance) {
    return {std::move(check), bus, node, eps, value, reference, residual, tolerance, residual <= tolerance};
}

}  // namespace

std::vector<AuditRow> run_verification(const Network& net, const ScenarioTree& tree, const VerifyOptions& options) {
    const Config& cfg = options.config;
    const FlowOperators ops = build_flow_operators(net);
    const PriceLattice lattice = build_price_lattice(net, ops, tree, cfg);
    const LmvReport report = lmv(lattice, tree, cfg.tol.verify);
    std::vector<AuditRow> rows;

    EpsilonBarOptions eb;
    eb.initial_step = cfg.tol.probe_delta;
    eb.price_tol = cfg.tol.price_match;
    eb.workers = cfg.workers;
    const EpsilonBarResult bar = epsilon_bar(net, ops, tree, eb);
    {
        AuditRow r = row("epsilon_bar", 0, -1, 0.0, bar.value, 0.0, 0.0, 0.0);
        r.passed = bar.value > 0.0;
        rows.push_back(r);
    }

    // Dual/gradient agreement and sub-differential structure at each support point.
    for (std::size_t s = 0; s < lattice.support.size(); ++s) {
        const Vector& xi = lattice.support[s];
        std::size_t first = 0;
        while (lattice.support_of[first] != s) ++first;
        const long id = tree.node(first).id;
        const Vector gap = gradient_check(net, ops, xi, cfg.tol.probe_delta, cfg.tol.price_match);
        const DispatchSolution sol = solve_ed(net, ops, xi);
        for (Eigen::Index i = 0; i < gap.size(); ++i)
            rows.push_back(row("dual_gradient", static_cast<int>(i + 1), id, 0.0, gap(i), 0.0, gap(i),
                               options.gradient_tol));
        const double negative = std::max(0.0, -sol.prices.minCoeff());
        rows.push_back(row("price_nonnegative", 0, id, 0.0, sol.prices.minCoeff(), 0.0, negative, 1e-10));
        const double sub = subdifferential_violation(net, sol, cfg.tol.sign);
        rows.push_back(row("subdifferential", 0, id, 0.0, sub, 0.0, sub, cfg.tol.price_match));
    }

    for (std::size_t bus = 0; bus < net.node_count; ++bus) {
        const int b = static_cast<int>(bus + 1);
        const auto bi = static_cast<Eigen::Index>(bus);
        for (double fraction : options.eps_fractions) {
            const double eps = fraction * bar.value;
            const SingleDeviceTable dp = solve_dp_single_device(net, ops, tree, bus, eps, bar.value, cfg.workers);
            const double drop = dp.value_without_storage - dp.value_with_storage;
            const double expected = eps * report.lmv(bi);
            rows.push_back(row("headline_identity", b, -1, eps, drop, expected, std::abs(drop - expected),
                               cfg.tol.verify * std::max(1.0, std::abs(dp.value_without_storage))));
            const PolicyCheckReport policy = verify_threshold_policy(dp, lattice, tree, options.policy_value_tol);
            rows.push_back(row("dp_value_identity", b, -1, eps, policy.max_value_residual, 0.0,
                               policy.max_value_residual, options.policy_value_tol));
            std::size_t policy_errors = 0;
            for (const PolicyMismatch& mm : policy.mismatches)
                if (mm.what.rfind("DP chose", 0) == 0) ++policy_errors;
            rows.push_back(row("dp_threshold_policy", b, -1, eps, static_cast<double>(policy_errors), 0.0,
                               static_cast<double>(policy_errors), 0.0));
        }

        rows.push_back(row("bound_dominance", b, -1, 0.0, report.lmv(bi), report.upper_bound(bi),
                           std::max(0.0, report.lmv(bi) - report.upper_bound(bi)), options.bound_tol));

        const double causal = simulate_threshold_arbitrage(lattice, tree, bus, 1.0);
        const double foresight = perfect_foresight_revenue(lattice, tree, bus, 1.0);
        rows.push_back(row("threshold_revenue", b, -1, 0.0, causal, report.lmv(bi),
                           std::abs(causal - report.lmv(bi)), options.arbitrage_tol));
        rows.push_back(row("foresight_revenue", b, -1, 0.0, foresight, report.upper_bound(bi),
                           std::abs(foresight - report.upper_bound(bi)), options.arbitrage_tol));
        rows.push_back(row("causal_le_foresight", b, -1, 0.0, causal, foresight,
                           std::max(0.0, causal - foresight), options.arbitrage_tol));
    }

    const AcyclicDiagnostics sp = acyclic_diagnostics(net, lattice, tree, cfg.tol.price_match, cfg.tol.verify);
    if (sp.applicable) {
        for (std::size_t bus = 0; bus < net.node_count; ++bus) {
            const auto bi = static_cast<Eigen::Index>(bus);
            const double spread = std::max({std::abs(sp.lmv(bi) - sp.upper_bound(bi)),
                                            std::abs(sp.lmv(bi) - sp.transition_value(bi)),
                                            std::abs(sp.upper_bound(bi) - sp.transition_value(bi))});
            rows.push_back(row("acyclic_tightness", static_cast<int>(bus + 1), -1, 0.0, sp.lmv(bi),
                               sp.transition_value(bi), spread, cfg.tol.verify));
        }
    }
    return rows;
}

bool all_passed(const std::vector<AuditRow>& rows) {
    return std::all_of(rows.begin(), rows.end(), [](const AuditRow& r) { return r.passed; });
}

std::string audit_csv(const std::vector<AuditRow>& rows) {
    std::ostringstream out;
    out << "check,bus,node,eps,value,reference,residual,tolerance,pass\n";
    for (const AuditRow& r : rows)
        out << r.check << "," << r.bus << "," << r.node << "," << format_double(r.eps) << ","
            << format_double(r.value) << "," << format_double(r.reference) << "," << format_double(r.residual)
            << "," << format_double(r.tolerance) << "," << (r.passed ? 1 : 0) << "\n";
    return out.str();
}

}  // namespace storval
