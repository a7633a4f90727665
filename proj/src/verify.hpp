#pragma once

#include <array>
#include <string>
#include <vector>

#include "config.hpp"
#include "network.hpp"
#include "scenario.hpp"

namespace storval {

// One line of the verification audit. `bus` is 1-based (0 for instance-wide
// checks); `node` is a scenario-tree node id or -1.
struct AuditRow {
    std::string check;
    int bus = 0;
    long node = -1;
    double eps = 0.0;
    double value = 0.0;
    double reference = 0.0;
    double residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct VerifyOptions {
    Config config;
    std::array<double, 3> eps_fractions{0.1, 0.5, 0.9};
    double gradient_tol = 1e-6;
    double policy_value_tol = 1e-9;
    double bound_tol = 1e-9;
    double arbitrage_tol = 1e-9;
};

// Cross-checks the price-based valuation against the DP oracle on one
// instance: epsilon bar, dual/gradient agreement, the J*(0) - J*(eps) identity
// for every bus and eps, value/policy identities of the single-device DP,
// bound dominance, acyclic-homogeneous tightness, and arbitrage revenues.
// Throws BoundaryPoint if a support point is not interior.
std::vector<AuditRow> run_verification(const Network& net, const ScenarioTree& tree,
                                       const VerifyOptions& options = {});

bool all_passed(const std::vector<AuditRow>& rows);

std::string audit_csv(const std::vector<AuditRow>& rows);

}  // namespace storval
