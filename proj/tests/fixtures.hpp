#pragma once

#include <string>
#include <vector>

#include "formats.hpp"
#include "network.hpp"
#include "scenario.hpp"

namespace storval::testing {

inline std::string data_path(const std::string& name) { return std::string(STORVAL_DATA_DIR) + "/" + name; }

inline Network two_node(double capacity = 1.0, double alpha = 10.0, double beta = 2.0) {
    Network net;
    net.node_count = 2;
    net.alpha = {alpha, alpha};
    net.beta = {beta, beta};
    net.shunt_susceptances = {0.0, 0.0};
    net.lines = {{0, 1, 1.0, capacity}};
    return net;
}

inline Network copperplate(double alpha = 10.0, double beta = 2.0) {
    Network net;
    net.node_count = 1;
    net.alpha = {alpha};
    net.beta = {beta};
    net.shunt_susceptances = {0.0};
    return net;
}

// Unit susceptances, line 1-2 limited to 0.5.
inline Network triangle() {
    Network net;
    net.node_count = 3;
    net.alpha = {10, 10, 10};
    net.beta = {2, 2, 2};
    net.shunt_susceptances = {0, 0, 0};
    net.lines = {{0, 1, 1.0, 0.5}, {1, 2, 1.0, 10.0}, {0, 2, 1.0, 10.0}};
    return net;
}

inline Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

// Scalar i.i.d. tree with support {-1, +1}, each with probability 1/2.
inline ScenarioTree coin_tree(std::size_t horizon) {
    return build_iid({vec({-1.0}), vec({1.0})}, {0.5, 0.5}, horizon);
}

}  // namespace storval::testing
