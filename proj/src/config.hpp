#pragma once

#include <cstddef>

namespace storval {

struct Tolerances {
    double balance = 1e-8;      // |1'x| for injection feasibility
    double flow = 1e-8;         // slack on -f <= Hx <= f
    double probe_delta = 1e-5;  // axis step for dual-constancy probing
    double price_match = 1e-7;  // two price vectors are "equal"
    double sign = 1e-7;         // |v_i| below this counts as zero dispatch
    double verify = 1e-8;       // headline identity, relative to max(1, |J(0)|)
};

struct Config {
    Tolerances tol;
    std::size_t node_budget = 200000;
    std::size_t table_budget = 5000000;  // (tree node, storage state) pairs in grid DP
    unsigned workers = 1;
};

}  // namespace storval
