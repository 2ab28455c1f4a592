#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include <nlohmann/json.hpp>

#include "slimtsf/forest.hpp"
#include "slimtsf/rng.hpp"

using namespace slimtsf;

namespace {

// Exhaustive split oracle: every (feature, midpoint between consecutive
// distinct sorted values) pair, gains computed with an independent formula.
double oracle_best_gain(const DataMatrix& x, const std::vector<int>& y) {
    const std::size_t n = x.rows();
    auto impurity = [&](const std::vector<std::size_t>& rows) {
        if (rows.empty()) return 0.0;
        double pos = 0.0;
        for (const std::size_t r : rows) pos += y[r];
        const double p = pos / static_cast<double>(rows.size());
        return 1.0 - p * p - (1.0 - p) * (1.0 - p);
    };
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    const double parent = impurity(all);

    double best = -1.0;
    for (std::size_t f = 0; f < x.cols(); ++f) {
        std::set<double> distinct;
        for (std::size_t r = 0; r < n; ++r) distinct.insert(x(r, f));
        std::vector<double> values(distinct.begin(), distinct.end());
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            const double threshold = (values[k] + values[k + 1]) / 2.0;
            std::vector<std::size_t> left, right;
            for (std::size_t r = 0; r < n; ++r) {
                (x(r, f) <= threshold ? left : right).push_back(r);
            }
            const double gain = parent -
                                (static_cast<double>(left.size()) * impurity(left) +
                                 static_cast<double>(right.size()) * impurity(right)) /
                                    static_cast<double>(n);
            best = std::max(best, gain);
        }
    }
    return best;
}

std::vector<std::size_t> iota_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    return rows;
}

std::vector<int> all_features(std::size_t d) {
    std::vector<int> f(d);
    for (std::size_t i = 0; i < d; ++i) f[i] = static_cast<int>(i);
    return f;
}

// n=200, d=10, features 0 and 1 informative with disjoint class ranges.
void make_separable(DataMatrix& x, std::vector<int>& y, std::uint64_t seed) {
    Rng rng(seed);
    x = DataMatrix(200, 10);
    y.assign(200, 0);
    for (std::size_t r = 0; r < 200; ++r) {
        const int label = r < 100 ? 1 : 0;
        y[r] = label;
        for (std::size_t c = 0; c < 10; ++c) {
            if (c < 2) {
                x(r, c) = label == 1 ? 0.6 + 0.4 * rng.real01() : 0.4 * rng.real01();
            } else {
                x(r, c) = rng.real01();
            }
        }
    }
}

}  // namespace

TEST_CASE("gini impurity") {
    CHECK(gini(GiniContext{{10, 0}}) == 0.0);
    CHECK(gini(GiniContext{{5, 5}}) == 0.5);
    CHECK(gini(GiniContext{{3, 1}}) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK_THROWS_WITH_AS(gini(GiniContext{{0, 0}}), doctest::Contains("EmptyNode"), Error);

    // two-class bounds: 0 <= gini <= 0.5, zero iff pure
    for (std::size_t a = 0; a <= 12; ++a) {
        for (std::size_t b = 0; b <= 12; ++b) {
            if (a + b == 0) continue;
            const double value = gini(GiniContext{{a, b}});
            CHECK(value >= 0.0);
            CHECK(value <= 0.5);
            CHECK((value == 0.0) == (a == 0 || b == 0));
        }
    }
}

TEST_CASE("best_split examples") {
    const DataMatrix x = DataMatrix::from_rows({{1.0}, {2.0}, {8.0}, {9.0}});
    const std::vector<int> y = {0, 0, 1, 1};
    const auto rows = iota_rows(4);
    const auto split = best_split(x, y, rows, all_features(1), 2);
    REQUIRE(split.has_value());
    CHECK(split->feature == 0);
    CHECK(split->threshold == 5.0);
    CHECK(split->gain == doctest::Approx(0.5).epsilon(1e-15));

    // pure node: absent
    const std::vector<int> pure = {1, 1, 1, 1};
    CHECK_FALSE(best_split(x, pure, rows, all_features(1), 2).has_value());

    // constant sole candidate: absent
    const DataMatrix constant = DataMatrix::from_rows({{3.0}, {3.0}, {3.0}, {3.0}});
    CHECK_FALSE(best_split(constant, y, rows, all_features(1), 2).has_value());
}

TEST_CASE("split optimality vs exhaustive enumeration") {
    Rng rng(314159);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.index(11);   // up to 12 samples
        const std::size_t d = 1 + rng.index(4);    // up to 4 features
        DataMatrix x(n, d);
        std::vector<int> y(n);
        bool mixed = false;
        for (std::size_t r = 0; r < n; ++r) {
            y[r] = static_cast<int>(rng.index(2));
            if (y[r] != y[0]) mixed = true;
            for (std::size_t c = 0; c < d; ++c) {
                // quantized values so equal entries (and thus threshold ties) occur
                x(r, c) = static_cast<double>(rng.index(6));
            }
        }
        const auto split = best_split(x, y, iota_rows(n), all_features(d), 2);
        const double oracle = oracle_best_gain(x, y);
        if (!mixed) {
            CHECK_FALSE(split.has_value());  // pure node
            continue;
        }
        if (oracle < 0.0) {
            CHECK_FALSE(split.has_value());  // every feature constant
            continue;
        }
        REQUIRE(split.has_value());
        CHECK(std::abs(split->gain - oracle) <= 1e-12);
    }
}

TEST_CASE("tie-break goes to lower feature index then lower threshold") {
    // two identical columns: both give identical gains, feature 0 must win
    const DataMatrix x = DataMatrix::from_rows({{1.0, 1.0}, {2.0, 2.0}, {8.0, 8.0}, {9.0, 9.0}});
    const std::vector<int> y = {0, 0, 1, 1};
    const auto split = best_split(x, y, iota_rows(4), all_features(2), 2);
    REQUIRE(split.has_value());
    CHECK(split->feature == 0);
    CHECK(split->threshold == 5.0);
}

TEST_CASE("fit_tree on separable 1-D data") {
    const DataMatrix x = DataMatrix::from_rows({{0.1}, {0.2}, {0.3}, {0.8}, {0.9}, {1.0}});
    const std::vector<int> y = {0, 0, 0, 1, 1, 1};
    ForestHyperparams hp;
    hp.max_features = 1;
    const DecisionTree tree = fit_tree(x, y, iota_rows(6), hp, 42, 2);
    CHECK(tree.depth() == 1);
    for (std::size_t r = 0; r < 6; ++r) {
        const auto row = x.row(r);
        const TreeNode& leaf = tree.leaf_for(row);
        CHECK(leaf.distribution[static_cast<std::size_t>(y[r])] == 1.0);
    }
}

TEST_CASE("fit_tree single sample") {
    const DataMatrix x = DataMatrix::from_rows({{3.0}});
    const std::vector<int> y = {1};
    const DecisionTree tree = fit_tree(x, y, iota_rows(1), ForestHyperparams{}, 0, 2);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].is_leaf());
    CHECK(tree.nodes[0].distribution == std::vector<double>{0.0, 1.0});
}

TEST_CASE("fit_tree learns XOR with zero-gain root split") {
    const DataMatrix x = DataMatrix::from_rows({{0.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {1.0, 0.0}});
    const std::vector<int> y = {0, 0, 1, 1};
    ForestHyperparams hp;
    hp.max_features = 2;
    const DecisionTree tree = fit_tree(x, y, iota_rows(4), hp, 5, 2);
    CHECK(tree.depth() == 2);
    for (std::size_t r = 0; r < 4; ++r) {
        const auto row = x.row(r);
        CHECK(tree.leaf_for(row).distribution[static_cast<std::size_t>(y[r])] == 1.0);
    }
}

TEST_CASE("fit_forest sanity on separable data") {
    DataMatrix x;
    std::vector<int> y;
    make_separable(x, y, 2024);
    ForestHyperparams hp;
    hp.n_trees = 100;
    hp.seed = 11;
    const Forest forest = fit_forest(x, y, hp, 2);
    CHECK(forest.trees.size() == 100);

    std::size_t correct = 0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto row = x.row(r);
        correct += predict(forest, row) == y[r] ? 1 : 0;
    }
    CHECK(static_cast<double>(correct) / static_cast<double>(x.rows()) >= 0.95);

    const ImportanceVector importance = mdi_importance(forest);
    double total = 0.0, informative = 0.0;
    for (std::size_t j = 0; j < importance.values.size(); ++j) {
        CHECK(importance.values[j] >= 0.0);
        total += importance.values[j];
        if (j < 2) informative += importance.values[j];
    }
    CHECK(std::abs(total - 1.0) <= 1e-9);
    CHECK(informative >= 0.8);
}

TEST_CASE("fit_forest rejections and degenerate ensemble") {
    const DataMatrix x = DataMatrix::from_rows({{1.0}, {2.0}, {3.0}, {4.0}});
    const std::vector<int> single(4, 1);
    CHECK_THROWS_WITH_AS(fit_forest(x, single, ForestHyperparams{}),
                         doctest::Contains("SingleClassInput"), Error);
    CHECK_THROWS_WITH_AS(fit_forest(DataMatrix{}, std::vector<int>{}, ForestHyperparams{}),
                         doctest::Contains("EmptyMatrix"), Error);

    const std::vector<int> y = {0, 0, 1, 1};
    ForestHyperparams hp;
    hp.n_trees = 1;
    hp.seed = 3;
    const Forest one = fit_forest(x, y, hp);
    CHECK(one.trees.size() == 1);

    // bootstrap reproducibility: same seed, same forest
    const Forest again = fit_forest(x, y, hp);
    CHECK(again == one);
}

TEST_CASE("fit_forest is deterministic across thread counts") {
    DataMatrix x;
    std::vector<int> y;
    make_separable(x, y, 555);
    ForestHyperparams hp;
    hp.n_trees = 24;
    hp.seed = 99;
    const Forest sequential = fit_forest(x, y, hp, 1);
    const Forest threaded = fit_forest(x, y, hp, 4);
    CHECK(sequential == threaded);
    CHECK(forest_to_json(sequential).dump() == forest_to_json(threaded).dump());
}

TEST_CASE("monotone feature transform preserves routing") {
    DataMatrix x;
    std::vector<int> y;
    make_separable(x, y, 777);
    ForestHyperparams hp;
    hp.n_trees = 10;
    hp.seed = 1;
    const Forest base = fit_forest(x, y, hp);

    DataMatrix warped = x;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        warped(r, 0) = std::exp(3.0 * x(r, 0));  // strictly increasing transform of column 0
    }
    const Forest transformed = fit_forest(warped, y, hp);

    // identical leaf membership for every training sample in every tree
    for (std::size_t t = 0; t < base.trees.size(); ++t) {
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const auto row_a = x.row(r);
            const auto row_b = warped.row(r);
            CHECK(base.trees[t].leaf_for(row_a).distribution ==
                  transformed.trees[t].leaf_for(row_b).distribution);
        }
    }
}

TEST_CASE("predict_proba") {
    DataMatrix x = DataMatrix::from_rows({{0.0}, {1.0}});
    const std::vector<int> y = {0, 1};
    ForestHyperparams hp;
    hp.n_trees = 8;
    hp.seed = 21;
    const Forest forest = fit_forest(x, y, hp);

    const std::vector<double> positive_row = {1.0};
    const auto proba = predict_proba(forest, positive_row);
    REQUIRE(proba.size() == 2);
    CHECK(std::abs(proba[0] + proba[1] - 1.0) <= 1e-12);

    const std::vector<double> wrong_length = {1.0, 2.0};
    CHECK_THROWS_WITH_AS(predict_proba(forest, wrong_length),
                         doctest::Contains("DimensionMismatch"), Error);

    // hand-built 2-tree forest with opposing pure leaves: (0.5, 0.5) -> positive
    Forest tie;
    tie.n_features = 1;
    tie.n_classes = 2;
    DecisionTree t1, t2;
    TreeNode leaf1;
    leaf1.n_samples = 1;
    leaf1.distribution = {1.0, 0.0};
    t1.nodes.push_back(leaf1);
    TreeNode leaf2;
    leaf2.n_samples = 1;
    leaf2.distribution = {0.0, 1.0};
    t2.nodes.push_back(leaf2);
    tie.trees = {t1, t2};
    const std::vector<double> any_row = {0.0};
    CHECK(predict_proba(tie, any_row) == std::vector<double>{0.5, 0.5});
    CHECK(predict(tie, any_row) == 1);
}

TEST_CASE("mdi importance special cases") {
    // single split on feature 1 out of 3
    const DataMatrix x =
        DataMatrix::from_rows({{0.0, 0.1, 0.0}, {0.0, 0.9, 0.0}, {0.0, 0.2, 0.0}, {0.0, 0.8, 0.0}});
    const std::vector<int> y = {0, 1, 0, 1};
    ForestHyperparams hp;
    hp.n_trees = 1;
    hp.max_features = 3;
    hp.seed = 0;
    const Forest forest = fit_forest(x, y, hp);
    const ImportanceVector importance = mdi_importance(forest);
    CHECK(importance.values[0] == 0.0);
    CHECK(importance.values[2] == 0.0);
    CHECK(importance.values[1] == doctest::Approx(1.0).epsilon(1e-12));

    // stump forest (constant features): zero vector
    const DataMatrix constant = DataMatrix::from_rows({{1.0}, {1.0}, {1.0}, {1.0}});
    const Forest stumps = fit_forest(constant, y, hp);
    const ImportanceVector zero = mdi_importance(stumps);
    for (const double v : zero.values) CHECK(v == 0.0);
}

TEST_CASE("forest JSON round-trip") {
    DataMatrix x;
    std::vector<int> y;
    make_separable(x, y, 31);
    ForestHyperparams hp;
    hp.n_trees = 5;
    hp.seed = 13;
    const Forest forest = fit_forest(x, y, hp);

    const nlohmann::json doc = forest_to_json(forest);
    CHECK(doc.at("format_version") == 1);
    const Forest back = forest_from_json(doc);
    CHECK(back == forest);
    CHECK(forest_to_json(back).dump() == doc.dump());

    nlohmann::json corrupt = doc;
    corrupt["trees"][0]["feature"] = 99;
    CHECK_THROWS_WITH_AS(forest_from_json(corrupt), doctest::Contains("SchemaViolation"), Error);
}
