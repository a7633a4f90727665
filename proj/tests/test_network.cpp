#include <doctest.h>

#include <random>

#include "errors.hpp"
#include "fixtures.hpp"
#include "network.hpp"

using namespace storval;
using namespace storval::testing;

TEST_CASE("PTDF maps angle-induced injections to line flows") {
    std::mt19937 rng(31337);
    std::uniform_real_distribution<double> angle(-2.0, 2.0);
    for (const char* name : {"triangle.net", "star5.net", "tree4.net", "two_node.net"}) {
        const Network net = load_network(data_path(name));
        const FlowOperators ops = build_flow_operators(net);
        const auto m = static_cast<Eigen::Index>(net.node_count);
        for (int trial = 0; trial < 1000; ++trial) {
            const Vector theta = Vector::NullaryExpr(m, [&] { return angle(rng); });
            const Vector x = ops.admittance * theta;
            const Vector direct = ops.incidence * theta;
            CHECK((ops.ptdf * x - direct).cwiseAbs().maxCoeff() <= 1e-10);
        }
    }
}

TEST_CASE("admittance and incidence structure") {
    const Network net = triangle();
    const FlowOperators ops = build_flow_operators(net);
    CHECK(ops.admittance.isApprox(ops.admittance.transpose()));
    CHECK(ops.admittance.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(ops.admittance(0, 1) == -1.0);
    CHECK(ops.admittance(0, 0) == 2.0);
    CHECK(ops.incidence(0, 0) == 1.0);
    CHECK(ops.incidence(0, 1) == -1.0);
    CHECK(ops.ptdf.rows() == 3);
    CHECK(ops.ptdf.cols() == 3);
}

TEST_CASE("injection feasibility on two buses") {
    const Network net = two_node();
    const FlowOperators ops = build_flow_operators(net);
    CHECK(injection_feasible(ops, net, vec({1, -1})));
    CHECK(injection_feasible(ops, net, vec({-0.5, 0.5})));
    CHECK_FALSE(injection_feasible(ops, net, vec({1.5, -1.5})));
    CHECK_FALSE(injection_feasible(ops, net, vec({1, 0})));
}

TEST_CASE("shunts enter the admittance diagonal and feasibility uses an angle solve") {
    Network net = two_node();
    net.shunt_susceptances = {0.5, 0.0};
    net.validate();
    CHECK(net.has_shunts());
    const FlowOperators ops = build_flow_operators(net);
    CHECK(ops.admittance(0, 0) == 1.5);
    // theta = Y^{-1} x; flow = theta1 - theta2.
    const Vector x = vec({0.3, -0.1});
    const Vector theta = ops.admittance.fullPivLu().solve(x);
    CHECK(injection_feasible(ops, net, x) == (std::abs(theta(0) - theta(1)) <= 1.0 + 1e-8));
    CHECK_FALSE(injection_feasible(ops, net, vec({3.0, -2.0})));
}

TEST_CASE("graph queries") {
    CHECK(is_acyclic(two_node()));
    CHECK(is_acyclic(copperplate()));
    CHECK_FALSE(is_acyclic(triangle()));
    CHECK(is_acyclic(load_network(data_path("star5.net"))));
    CHECK(is_acyclic(load_network(data_path("tree4.net"))));

    Network parallel = two_node();
    parallel.lines.push_back({1, 0, 2.0, 0.5});
    CHECK_FALSE(is_acyclic(parallel));
    CHECK(is_connected(parallel));

    Network split = triangle();
    split.lines = {{0, 1, 1.0, 1.0}};
    CHECK_FALSE(is_connected(split));
}

TEST_CASE("validation rejects bad networks") {
    Network split = triangle();
    split.lines = {{0, 1, 1.0, 1.0}};
    CHECK_THROWS_AS(split.validate(), InvalidInput);

    Network costs = two_node();
    costs.alpha[1] = 1.0;  // below beta
    CHECK_THROWS_AS(costs.validate(), InvalidInput);

    Network negative = two_node();
    negative.lines[0].capacity = -1.0;
    CHECK_THROWS_AS(negative.validate(), InvalidInput);

    Network zero_b = two_node();
    zero_b.lines[0].susceptance = 0.0;
    CHECK_THROWS_AS(zero_b.validate(), InvalidInput);

    Network loop = two_node();
    loop.lines.push_back({1, 1, 1.0, 1.0});
    CHECK_THROWS_AS(loop.validate(), InvalidInput);
}

TEST_CASE("homogeneous cost detection") {
    CHECK(two_node().homogeneous_costs());
    CHECK_FALSE(load_network(data_path("tree4.net")).homogeneous_costs());
}
