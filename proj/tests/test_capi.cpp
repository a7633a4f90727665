// Exercises the shared library through its C interface only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <string>
#include <vector>

#include "storval/storval.h"

namespace {

std::string data(const char* name) { return std::string(STORVAL_DATA_DIR) + "/" + name; }

struct Loaded {
    storval_network* net = nullptr;
    storval_tree* tree = nullptr;
    storval_model* model = nullptr;

    Loaded(const char* net_name, const char* tree_name) {
        storval_config cfg;
        storval_config_default(&cfg);
        REQUIRE(storval_network_load(data(net_name).c_str(), &net) == STORVAL_OK);
        REQUIRE(storval_tree_load(data(tree_name).c_str(), cfg.node_budget, &tree) == STORVAL_OK);
        REQUIRE(storval_model_create(net, tree, &cfg, &model) == STORVAL_OK);
    }
    ~Loaded() {
        storval_model_free(model);
        storval_tree_free(tree);
        storval_network_free(net);
    }
};

}  // namespace

TEST_CASE("dispatch through the C interface") {
    storval_network* net = nullptr;
    REQUIRE(storval_network_load(data("two_node.net").c_str(), &net) == STORVAL_OK);
    CHECK(storval_network_node_count(net) == 2);
    CHECK(storval_network_line_count(net) == 1);
    CHECK(storval_network_is_acyclic(net) == 1);
    CHECK(storval_network_is_homogeneous(net) == 1);

    const double xi[2] = {3, -2};
    double prices[2], dispatch[2], cost = 0;
    REQUIRE(storval_ed_solve(net, xi, 2, dispatch, nullptr, prices, nullptr, &cost) == STORVAL_OK);
    CHECK(prices[0] == doctest::Approx(10));
    CHECK(prices[1] == doctest::Approx(2));
    CHECK(cost == doctest::Approx(18));

    int interior = 0, coordinate = -1;
    const double edge[2] = {3, -1};
    REQUIRE(storval_ed_interiority(net, edge, 2, nullptr, &interior, &coordinate) == STORVAL_OK);
    CHECK(interior == 0);
    CHECK(coordinate == 1);

    double gaps[2];
    CHECK(storval_ed_gradient_check(net, edge, 2, nullptr, gaps) == STORVAL_ERR_BOUNDARY);
    CHECK(storval_ed_solve(net, xi, 3, nullptr, nullptr, prices, nullptr, nullptr) == STORVAL_ERR_INVALID_ARGUMENT);

    double ptdf[2];
    REQUIRE(storval_network_ptdf(net, ptdf) == STORVAL_OK);
    CHECK(ptdf[0] - ptdf[1] == doctest::Approx(1.0));
    storval_network_free(net);
}

TEST_CASE("error codes and messages") {
    storval_network* net = nullptr;
    CHECK(storval_network_load("/no/such/file.net", &net) == STORVAL_ERR_IO);
    CHECK(std::string(storval_last_error()).find("/no/such/file.net") != std::string::npos);

    CHECK(storval_network_parse("schema storval-net/1\nnodes 1\nnode id=1 alpha=1 beta=zero\n", &net) ==
          STORVAL_ERR_PARSE);
    CHECK(std::string(storval_last_error()).find(":3:") != std::string::npos);

    CHECK(storval_network_parse(nullptr, &net) == STORVAL_ERR_INVALID_ARGUMENT);
    CHECK(std::strcmp(storval_status_name(STORVAL_ERR_BOUNDARY), "boundary point") == 0);

    storval_tree* tree = nullptr;
    CHECK(storval_tree_load(data("cp_iid2_n5.tree").c_str(), 5, &tree) == STORVAL_ERR_BUDGET);
}

TEST_CASE("boundary scenario trees are refused") {
    storval_network* net = nullptr;
    storval_tree* tree = nullptr;
    REQUIRE(storval_network_load(data("two_node.net").c_str(), &net) == STORVAL_OK);
    const double points[2] = {3, -1};
    const double probs[1] = {1.0};
    REQUIRE(storval_tree_build_iid(points, 1, 2, probs, 2, 1000, &tree) == STORVAL_OK);
    storval_model* model = nullptr;
    CHECK(storval_model_create(net, tree, nullptr, &model) == STORVAL_ERR_BOUNDARY);
    CHECK(model == nullptr);
    storval_tree_free(tree);
    storval_network_free(net);
}

TEST_CASE("valuation and DP through the C interface") {
    Loaded in("copperplate.net", "iid2.tree");
    double lmv = 0, ub = 0, tv = 0, drift = 0, diss = 0;
    int tight = 0;
    REQUIRE(storval_lmv(in.model, &lmv, &ub, &tv, &drift, &tight) == STORVAL_OK);
    CHECK(lmv == doctest::Approx(4.0));
    CHECK(ub == doctest::Approx(4.0));
    CHECK(tight == 1);
    REQUIRE(storval_lmv_dissipative(in.model, 0.5, &diss) == STORVAL_OK);
    CHECK(diss == doctest::Approx(1.0));
    CHECK(storval_lmv_dissipative(in.model, 2.0, &diss) == STORVAL_ERR_INVALID_ARGUMENT);

    double bar = 0, j0 = 0, j1 = 0;
    REQUIRE(storval_epsilon_bar(in.model, &bar) == STORVAL_OK);
    CHECK(bar == doctest::Approx(0.5).epsilon(1e-9));
    REQUIRE(storval_dp_single_device(in.model, 0, 0.1, &j0, &j1) == STORVAL_OK);
    CHECK(j0 - j1 == doctest::Approx(0.4));

    const double cap[1] = {0.1};
    double grid = 0;
    REQUIRE(storval_dp_grid(in.model, cap, 1, 2, &grid) == STORVAL_OK);
    CHECK(grid == doctest::Approx(j1));

    double causal = 0, hindsight = 0;
    REQUIRE(storval_threshold_revenue(in.model, 0, 1.0, 1.0, &causal) == STORVAL_OK);
    REQUIRE(storval_foresight_revenue(in.model, 0, 1.0, &hindsight) == STORVAL_OK);
    CHECK(causal == doctest::Approx(4.0));
    CHECK(hindsight == doctest::Approx(4.0));

    int applicable = 0, coincide = 0;
    double trans = 0, l = 0, u = 0;
    REQUIRE(storval_acyclic_diagnostics(in.model, &applicable, &trans, &l, &u, &coincide) == STORVAL_OK);
    CHECK(applicable == 1);
    CHECK(coincide == 1);
    CHECK(trans == doctest::Approx(4.0));

    std::vector<double> prices(14);
    REQUIRE(storval_model_prices(in.model, prices.data()) == STORVAL_OK);
    CHECK(prices[0] == doctest::Approx(2.0));
    CHECK(prices[1] == doctest::Approx(10.0));
}

TEST_CASE("verification audit through the C interface") {
    Loaded in("two_node.net", "two_node_iid.tree");
    storval_audit* audit = nullptr;
    int ok = 0;
    REQUIRE(storval_verify(in.model, &audit, &ok) == STORVAL_OK);
    CHECK(ok == 1);
    const size_t rows = storval_audit_row_count(audit);
    CHECK(rows > 10);
    bool saw_identity = false;
    for (size_t r = 0; r < rows; ++r) {
        storval_audit_row row;
        REQUIRE(storval_audit_get_row(audit, r, &row) == STORVAL_OK);
        CHECK(row.passed == 1);
        if (std::strcmp(row.check, "headline_identity") == 0) {
            saw_identity = true;
            CHECK(row.residual <= row.tolerance);
        }
    }
    CHECK(saw_identity);
    storval_audit_row row;
    CHECK(storval_audit_get_row(audit, rows, &row) == STORVAL_ERR_INVALID_ARGUMENT);

    char* first = nullptr;
    char* second = nullptr;
    REQUIRE(storval_audit_to_csv(audit, &first) == STORVAL_OK);
    storval_audit* again = nullptr;
    REQUIRE(storval_verify(in.model, &again, nullptr) == STORVAL_OK);
    REQUIRE(storval_audit_to_csv(again, &second) == STORVAL_OK);
    CHECK(std::string(first) == std::string(second));
    storval_string_free(first);
    storval_string_free(second);
    storval_audit_free(again);
    storval_audit_free(audit);
}

TEST_CASE("two-bus limits and tree generation") {
    storval_network* net = nullptr;
    storval_tree* tree = nullptr;
    REQUIRE(storval_network_load(data("two_node.net").c_str(), &net) == STORVAL_OK);
    const double states[4] = {3, -2, -1, -3};
    const double p[4] = {0.6, 0.4, 0.2, 0.8};
    const double init[2] = {1, 0};
    REQUIRE(storval_tree_build_markov(states, 2, 2, p, init, 4, 1000, &tree) == STORVAL_OK);
    CHECK(storval_tree_horizon(tree) == 4);
    CHECK(storval_tree_dimension(tree) == 2);

    char* text = nullptr;
    REQUIRE(storval_tree_to_string(tree, &text) == STORVAL_OK);
    storval_tree* reparsed = nullptr;
    REQUIRE(storval_tree_parse(text, 1000, &reparsed) == STORVAL_OK);
    char* text2 = nullptr;
    REQUIRE(storval_tree_to_string(reparsed, &text2) == STORVAL_OK);
    CHECK(std::string(text) == std::string(text2));
    storval_string_free(text);
    storval_string_free(text2);

    double f0[2], finf[2];
    REQUIRE(storval_two_node_limits(net, tree, f0, finf) == STORVAL_OK);
    CHECK(f0[1] == 0.0);

    storval_network* tri = nullptr;
    REQUIRE(storval_network_load(data("triangle.net").c_str(), &tri) == STORVAL_OK);
    CHECK(storval_two_node_limits(tri, tree, f0, finf) == STORVAL_ERR_INVALID_ARGUMENT);

    storval_tree_free(reparsed);
    storval_tree_free(tree);
    storval_network_free(tri);
    storval_network_free(net);
}
