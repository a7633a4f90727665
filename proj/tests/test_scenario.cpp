#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "errors.hpp"
#include "fixtures.hpp"
#include "scenario.hpp"

using namespace storval;
using namespace storval::testing;

namespace {

std::vector<NodeRecord> small_records() {
    return {
        {1, 0, std::nullopt, 1.0, vec({0.0})},
        {2, 1, 1, 0.25, vec({1.0})},
        {3, 1, 1, 0.75, vec({-1.0})},
    };
}

}  // namespace

TEST_CASE("tree construction keeps stage-major order and path probabilities") {
    const ScenarioTree t = ScenarioTree::from_records(2, 1, small_records());
    CHECK(t.size() == 3);
    CHECK(t.stage(1).size() == 2);
    CHECK(t.node(t.stage(1)[1]).path_probability == 0.75);
    CHECK(path_probability(t, 3) == 0.75);
    CHECK(t.path(2) == std::vector<std::size_t>{0, 2});
    CHECK(t.find(2).value() == 1);
    CHECK_FALSE(t.find(42).has_value());
}

TEST_CASE("structural errors are reported") {
    auto recs = small_records();
    recs[2].probability = 0.5;  // siblings sum to 0.75
    CHECK_THROWS_AS(ScenarioTree::from_records(2, 1, recs), InvalidInput);

    recs = small_records();
    recs[1].id = 3;  // duplicate
    CHECK_THROWS_AS(ScenarioTree::from_records(2, 1, recs), InvalidInput);

    recs = small_records();
    recs[1].parent = 9;  // unknown parent
    CHECK_THROWS_AS(ScenarioTree::from_records(2, 1, recs), InvalidInput);

    recs = small_records();
    recs[1].stage = 2;  // stage does not follow parent
    CHECK_THROWS_AS(ScenarioTree::from_records(3, 1, recs), InvalidInput);

    // Leaf before the last stage.
    CHECK_THROWS_AS(ScenarioTree::from_records(3, 1, small_records()), InvalidInput);

    recs = small_records();
    recs[0].xi = vec({1.0, 2.0});
    CHECK_THROWS_AS(ScenarioTree::from_records(2, 1, recs), InvalidInput);

    recs = small_records();
    recs[1].probability = 0.0;
    recs[2].probability = 1.0;
    CHECK_THROWS_AS(ScenarioTree::from_records(2, 1, recs), InvalidInput);

    CHECK_THROWS_AS(ScenarioTree::from_records(2, 1, small_records(), 2), BudgetExceeded);
}

TEST_CASE("i.i.d. builder") {
    const ScenarioTree t = build_iid({vec({1, 2}), vec({3, 4}), vec({5, 6})}, {0.2, 0.3, 0.5}, 3);
    CHECK(t.size() == 3 + 9 + 27);
    double total = 0.0;
    for (std::size_t leaf : t.leaves()) total += t.node(leaf).path_probability;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(build_iid({vec({1})}, {0.5}, 2), InvalidInput);
    CHECK_THROWS_AS(build_iid({vec({1}), vec({2})}, {0.5, 0.5}, 30, 1000), BudgetExceeded);
}

TEST_CASE("Markov builder drops impossible branches") {
    Matrix p(2, 2);
    p << 1.0, 0.0, 0.5, 0.5;
    const ScenarioTree t = build_markov({vec({-1}), vec({1})}, p, {0.0, 1.0}, 3);
    // Root in state 2; state 1 is absorbing.
    CHECK(t.roots().size() == 1);
    CHECK(t.stage(1).size() == 2);
    CHECK(t.stage(2).size() == 3);
    for (const TreeNode& n : t.nodes()) CHECK(n.probability > 0.0);
}

TEST_CASE("conditional expectations obey the tower property") {
    Matrix p(2, 2);
    p << 0.7, 0.3, 0.4, 0.6;
    const ScenarioTree t = build_markov({vec({-1}), vec({2})}, p, {0.5, 0.5}, 4);
    std::vector<double> x(t.size());
    for (std::size_t n = 0; n < t.size(); ++n) x[n] = t.node(n).xi(0) * t.node(n).xi(0) + 0.1 * static_cast<double>(n);

    for (std::size_t k = 0; k + 1 < t.horizon(); ++k) {
        double direct = 0.0, tower = 0.0;
        for (std::size_t n : t.stage(k + 1)) direct += t.node(n).path_probability * x[n];
        for (std::size_t n : t.stage(k)) tower += t.node(n).path_probability * conditional_expectation(t, n, x);
        CHECK(tower == doctest::Approx(direct).epsilon(1e-14));
    }

    std::map<long, double> by_id;
    for (std::size_t n = 0; n < t.size(); ++n) by_id[t.node(n).id] = x[n];
    for (std::size_t n : t.stage(1))
        CHECK(conditional_expectation(t, t.node(n).id, by_id) == conditional_expectation(t, n, x));
    CHECK_THROWS_AS(conditional_expectation(t, t.leaves()[0], x), InvalidInput);
    by_id.erase(t.node(t.node(0).children[0]).id);
    CHECK_THROWS_AS(conditional_expectation(t, t.node(0).id, by_id), InvalidInput);
}

TEST_CASE("records round-trip through from_records") {
    const ScenarioTree t = coin_tree(3);
    const ScenarioTree u = ScenarioTree::from_records(t.horizon(), t.dimension(), t.records());
    REQUIRE(u.size() == t.size());
    for (std::size_t n = 0; n < t.size(); ++n) {
        CHECK(u.node(n).id == t.node(n).id);
        CHECK(u.node(n).probability == t.node(n).probability);
        CHECK(u.node(n).xi == t.node(n).xi);
    }
}
