#include "slimtsf/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "slimtsf/parallel.hpp"
#include "slimtsf/rng.hpp"

namespace slimtsf {

namespace {

double gini_from_counts(std::span<const std::size_t> counts, std::size_t total) {
    double sum_sq = 0.0;
    const double t = static_cast<double>(total);
    for (const std::size_t c : counts) {
        const double p = static_cast<double>(c) / t;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

/// Recursive builder with per-node scratch reuse.
class TreeBuilder {
public:
    TreeBuilder(const DataMatrix& x, std::span<const int> labels, const ForestHyperparams& hp,
                std::size_t n_classes, std::size_t max_features)
        : x_(x), labels_(labels), hp_(hp), n_classes_(n_classes), max_features_(max_features) {}

    DecisionTree build(std::span<const std::size_t> sample_indices, std::uint64_t tree_seed) {
        DecisionTree tree;
        std::vector<std::size_t> indices(sample_indices.begin(), sample_indices.end());
        grow(tree, indices, 0, tree_seed);  // root node stream = tree stream
        return tree;
    }

private:
    int grow(DecisionTree& tree, std::vector<std::size_t>& indices, std::size_t depth,
             std::uint64_t node_seed) {
        std::vector<std::size_t> counts(n_classes_, 0);
        for (const std::size_t i : indices) ++counts[static_cast<std::size_t>(labels_[i])];

        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[static_cast<std::size_t>(id)].n_samples = indices.size();
        tree.nodes[static_cast<std::size_t>(id)].impurity = gini_from_counts(counts, indices.size());

        const bool depth_capped = hp_.max_depth > 0 && depth >= hp_.max_depth;
        std::optional<SplitDecision> split;
        if (!depth_capped && indices.size() >= 2) {
            Rng feature_rng(derive_seed(node_seed, seed_stream::kNodeFeatures));
            const auto drawn = feature_rng.sample_distinct(x_.cols(), max_features_);
            std::vector<int> candidates(drawn.size());
            for (std::size_t k = 0; k < drawn.size(); ++k) candidates[k] = static_cast<int>(drawn[k]);
            split = best_split(x_, labels_, indices, candidates, n_classes_, hp_.min_samples_leaf);
        }

        if (!split) {
            auto& leaf = tree.nodes[static_cast<std::size_t>(id)];
            leaf.distribution.resize(n_classes_);
            for (std::size_t c = 0; c < n_classes_; ++c) {
                leaf.distribution[c] =
                    static_cast<double>(counts[c]) / static_cast<double>(indices.size());
            }
            return id;
        }

        std::vector<std::size_t> left, right;
        left.reserve(indices.size());
        right.reserve(indices.size());
        for (const std::size_t i : indices) {
            if (x_(i, static_cast<std::size_t>(split->feature)) <= split->threshold) {
                left.push_back(i);
            } else {
                right.push_back(i);
            }
        }
        indices.clear();
        indices.shrink_to_fit();

        tree.nodes[static_cast<std::size_t>(id)].feature = split->feature;
        tree.nodes[static_cast<std::size_t>(id)].threshold = split->threshold;
        const int left_id =
            grow(tree, left, depth + 1, derive_seed(node_seed, seed_stream::kLeftChild));
        const int right_id =
            grow(tree, right, depth + 1, derive_seed(node_seed, seed_stream::kRightChild));
        tree.nodes[static_cast<std::size_t>(id)].left = left_id;
        tree.nodes[static_cast<std::size_t>(id)].right = right_id;
        return id;
    }

    const DataMatrix& x_;
    std::span<const int> labels_;
    const ForestHyperparams& hp_;
    std::size_t n_classes_;
    std::size_t max_features_;
};

std::size_t resolve_max_features(const ForestHyperparams& hp, std::size_t d) {
    if (hp.max_features == 0) {
        return std::min<std::size_t>(
            d, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d)))));
    }
    return std::min(hp.max_features, d);
}

std::size_t infer_n_classes(std::span<const int> labels) {
    int max_label = 0;
    for (const int y : labels) {
        if (y < 0) throw Error(ErrorKind::InvalidConfig, "class labels must be non-negative");
        max_label = std::max(max_label, y);
    }
    return static_cast<std::size_t>(max_label) + 1;
}

nlohmann::json node_to_json(const DecisionTree& tree, int id) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
    nlohmann::json j;
    j["impurity"] = node.impurity;
    j["n_samples"] = node.n_samples;
    if (node.is_leaf()) {
        j["distribution"] = node.distribution;
    } else {
        j["feature"] = node.feature;
        j["threshold"] = node.threshold;
        j["left"] = node_to_json(tree, node.left);
        j["right"] = node_to_json(tree, node.right);
    }
    return j;
}

int node_from_json(const nlohmann::json& j, DecisionTree& tree, std::size_t n_features,
                   std::size_t n_classes) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[static_cast<std::size_t>(id)].impurity = j.at("impurity").get<double>();
    tree.nodes[static_cast<std::size_t>(id)].n_samples = j.at("n_samples").get<std::size_t>();
    if (j.contains("feature")) {
        const int feature = j.at("feature").get<int>();
        if (feature < 0 || static_cast<std::size_t>(feature) >= n_features) {
            throw Error(ErrorKind::SchemaViolation, "forest JSON references an invalid feature");
        }
        tree.nodes[static_cast<std::size_t>(id)].feature = feature;
        tree.nodes[static_cast<std::size_t>(id)].threshold = j.at("threshold").get<double>();
        const int left = node_from_json(j.at("left"), tree, n_features, n_classes);
        const int right = node_from_json(j.at("right"), tree, n_features, n_classes);
        tree.nodes[static_cast<std::size_t>(id)].left = left;
        tree.nodes[static_cast<std::size_t>(id)].right = right;
    } else {
        auto dist = j.at("distribution").get<std::vector<double>>();
        if (dist.size() != n_classes) {
            throw Error(ErrorKind::SchemaViolation, "forest JSON leaf distribution size mismatch");
        }
        tree.nodes[static_cast<std::size_t>(id)].distribution = std::move(dist);
    }
    return id;
}

}  // namespace

double gini(std::span<const std::size_t> class_counts) {
    std::size_t total = 0;
    for (const std::size_t c : class_counts) total += c;
    if (total == 0) {
        throw Error(ErrorKind::EmptyNode, "cannot score an empty node");
    }
    return gini_from_counts(class_counts, total);
}

double gini(const GiniContext& ctx) { return gini(std::span<const std::size_t>(ctx.class_counts)); }

std::optional<SplitDecision> best_split(const DataMatrix& x, std::span<const int> labels,
                                        std::span<const std::size_t> samples,
                                        std::span<const int> candidate_features,
                                        std::size_t n_classes, std::size_t min_samples_leaf) {
    const std::size_t m = samples.size();
    if (m < 2 || candidate_features.empty()) return std::nullopt;

    std::vector<std::size_t> parent_counts(n_classes, 0);
    for (const std::size_t i : samples) ++parent_counts[static_cast<std::size_t>(labels[i])];
    const double parent_impurity = gini_from_counts(parent_counts, m);
    if (parent_impurity <= 0.0) return std::nullopt;

    std::vector<int> candidates(candidate_features.begin(), candidate_features.end());
    std::sort(candidates.begin(), candidates.end());

    std::optional<SplitDecision> best;
    std::vector<std::pair<double, int>> sorted;  // (value, label)
    sorted.reserve(m);
    std::vector<std::size_t> left_counts(n_classes);

    for (const int feature : candidates) {
        sorted.clear();
        for (const std::size_t i : samples) {
            sorted.emplace_back(x(i, static_cast<std::size_t>(feature)), labels[i]);
        }
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        if (sorted.front().first == sorted.back().first) continue;  // constant column

        std::fill(left_counts.begin(), left_counts.end(), 0);
        for (std::size_t i = 1; i < m; ++i) {
            ++left_counts[static_cast<std::size_t>(sorted[i - 1].second)];
            if (sorted[i].first == sorted[i - 1].first) continue;
            const std::size_t n_left = i;
            const std::size_t n_right = m - i;
            if (n_left < min_samples_leaf || n_right < min_samples_leaf) continue;

            double left_sq = 0.0, right_sq = 0.0;
            for (std::size_t c = 0; c < n_classes; ++c) {
                const double l = static_cast<double>(left_counts[c]);
                const double r = static_cast<double>(parent_counts[c] - left_counts[c]);
                left_sq += l * l;
                right_sq += r * r;
            }
            const double child_impurity =
                (static_cast<double>(n_left) - left_sq / static_cast<double>(n_left) +
                 static_cast<double>(n_right) - right_sq / static_cast<double>(n_right)) /
                static_cast<double>(m);
            const double gain = parent_impurity - child_impurity;

            double threshold = (sorted[i - 1].first + sorted[i].first) / 2.0;
            if (threshold >= sorted[i].first) threshold = sorted[i - 1].first;

            if (!best || gain > best->gain) {
                best = SplitDecision{feature, threshold, std::max(gain, 0.0)};
            }
        }
    }
    return best;
}

DecisionTree fit_tree(const DataMatrix& x, std::span<const int> labels,
                      std::span<const std::size_t> sample_indices, const ForestHyperparams& hp,
                      std::uint64_t tree_seed, std::size_t n_classes) {
    if (sample_indices.empty()) {
        throw Error(ErrorKind::EmptyInput, "cannot fit a tree on zero samples");
    }
    if (n_classes == 0) n_classes = infer_n_classes(labels);
    TreeBuilder builder(x, labels, hp, n_classes, resolve_max_features(hp, x.cols()));
    return builder.build(sample_indices, tree_seed);
}

Forest fit_forest(const DataMatrix& x, std::span<const int> labels, const ForestHyperparams& hp,
                  int threads) {
    if (x.empty()) {
        throw Error(ErrorKind::EmptyMatrix, "cannot fit a forest on an empty matrix");
    }
    if (labels.size() != x.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "label count does not match matrix rows");
    }
    const std::size_t n_classes = infer_n_classes(labels);
    std::size_t present = 0;
    {
        std::vector<std::size_t> counts(n_classes, 0);
        for (const int y : labels) ++counts[static_cast<std::size_t>(y)];
        for (const std::size_t c : counts) present += c > 0 ? 1 : 0;
    }
    if (present < 2) {
        throw Error(ErrorKind::SingleClassInput, "training labels contain a single class");
    }
    if (hp.n_trees == 0) {
        throw Error(ErrorKind::InvalidConfig, "n_trees must be >= 1");
    }

    Forest forest;
    forest.n_features = x.cols();
    forest.n_classes = n_classes;
    forest.hp = hp;
    forest.trees.resize(hp.n_trees);

    const std::size_t n = x.rows();
    parallel_for(hp.n_trees, threads, [&](std::size_t t) {
        const std::uint64_t tree_seed =
            derive_seed(hp.seed, seed_stream::kTree, static_cast<std::uint64_t>(t));
        Rng bootstrap_rng(derive_seed(tree_seed, seed_stream::kTreeBootstrap));
        std::vector<std::size_t> sample(n);
        for (std::size_t i = 0; i < n; ++i) sample[i] = bootstrap_rng.index(n);
        forest.trees[t] = fit_tree(x, labels, sample, hp, tree_seed, n_classes);
    });
    return forest;
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> row) const {
    const TreeNode* node = &nodes.front();
    while (!node->is_leaf()) {
        node = row[static_cast<std::size_t>(node->feature)] <= node->threshold
                   ? &nodes[static_cast<std::size_t>(node->left)]
                   : &nodes[static_cast<std::size_t>(node->right)];
    }
    return *node;
}

std::size_t DecisionTree::depth() const {
    // iterative: depth of node i relative to the root
    std::vector<std::size_t> depths(nodes.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].is_leaf()) {
            depths[static_cast<std::size_t>(nodes[i].left)] = depths[i] + 1;
            depths[static_cast<std::size_t>(nodes[i].right)] = depths[i] + 1;
        }
        deepest = std::max(deepest, depths[i]);
    }
    return deepest;
}

std::vector<double> predict_proba(const Forest& forest, std::span<const double> row) {
    if (row.size() != forest.n_features) {
        throw Error(ErrorKind::DimensionMismatch,
                    "feature vector length " + std::to_string(row.size()) + " != " +
                        std::to_string(forest.n_features));
    }
    std::vector<double> proba(forest.n_classes, 0.0);
    for (const DecisionTree& tree : forest.trees) {
        const TreeNode& leaf = tree.leaf_for(row);
        for (std::size_t c = 0; c < forest.n_classes; ++c) proba[c] += leaf.distribution[c];
    }
    const double n = static_cast<double>(forest.trees.size());
    for (double& p : proba) p /= n;
    return proba;
}

int predict(const Forest& forest, std::span<const double> row) {
    const std::vector<double> proba = predict_proba(forest, row);
    int best = 0;
    for (int c = 1; c < static_cast<int>(proba.size()); ++c) {
        if (proba[static_cast<std::size_t>(c)] >= proba[static_cast<std::size_t>(best)]) best = c;
    }
    return best;
}

std::vector<int> predict_batch(const Forest& forest, const DataMatrix& x, int threads) {
    if (x.cols() != forest.n_features) {
        throw Error(ErrorKind::DimensionMismatch, "matrix feature count mismatch");
    }
    std::vector<int> out(x.rows());
    parallel_for(x.rows(), threads, [&](std::size_t r) {
        const std::vector<double> row = x.row(r);
        out[r] = predict(forest, row);
    });
    return out;
}

ImportanceVector mdi_importance(const Forest& forest) {
    ImportanceVector importance;
    importance.values.assign(forest.n_features, 0.0);
    if (forest.trees.empty()) return importance;

    std::vector<double> per_tree(forest.n_features);
    for (const DecisionTree& tree : forest.trees) {
        std::fill(per_tree.begin(), per_tree.end(), 0.0);
        const double root_samples = static_cast<double>(tree.nodes.front().n_samples);
        double tree_total = 0.0;
        for (const TreeNode& node : tree.nodes) {
            if (node.is_leaf()) continue;
            const TreeNode& l = tree.nodes[static_cast<std::size_t>(node.left)];
            const TreeNode& r = tree.nodes[static_cast<std::size_t>(node.right)];
            const double n = static_cast<double>(node.n_samples);
            const double decrease = node.impurity -
                                    (static_cast<double>(l.n_samples) * l.impurity +
                                     static_cast<double>(r.n_samples) * r.impurity) /
                                        n;
            const double weighted = (n / root_samples) * decrease;
            per_tree[static_cast<std::size_t>(node.feature)] += weighted;
            tree_total += weighted;
        }
        if (tree_total > 0.0) {
            for (std::size_t j = 0; j < per_tree.size(); ++j) {
                importance.values[j] += per_tree[j] / tree_total;
            }
        }
    }

    double total = 0.0;
    for (const double v : importance.values) total += v;
    if (total > 0.0) {
        for (double& v : importance.values) v /= total;
    }
    return importance;
}

nlohmann::json forest_to_json(const Forest& forest) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["n_features"] = forest.n_features;
    j["n_classes"] = forest.n_classes;
    j["hyperparams"] = {{"n_trees", forest.hp.n_trees},
                        {"max_features", forest.hp.max_features},
                        {"min_samples_leaf", forest.hp.min_samples_leaf},
                        {"max_depth", forest.hp.max_depth},
                        {"seed", forest.hp.seed}};
    nlohmann::json trees = nlohmann::json::array();
    for (const DecisionTree& tree : forest.trees) {
        trees.push_back(node_to_json(tree, 0));
    }
    j["trees"] = std::move(trees);
    return j;
}

Forest forest_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("format_version").get<int>() != 1) {
            throw Error(ErrorKind::SchemaViolation, "unsupported forest format version");
        }
        Forest forest;
        forest.n_features = doc.at("n_features").get<std::size_t>();
        forest.n_classes = doc.at("n_classes").get<std::size_t>();
        const auto& hp = doc.at("hyperparams");
        forest.hp.n_trees = hp.at("n_trees").get<std::size_t>();
        forest.hp.max_features = hp.at("max_features").get<std::size_t>();
        forest.hp.min_samples_leaf = hp.at("min_samples_leaf").get<std::size_t>();
        forest.hp.max_depth = hp.at("max_depth").get<std::size_t>();
        forest.hp.seed = hp.at("seed").get<std::uint64_t>();
        for (const auto& tree_json : doc.at("trees")) {
            DecisionTree tree;
            node_from_json(tree_json, tree, forest.n_features, forest.n_classes);
            forest.trees.push_back(std::move(tree));
        }
        return forest;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SchemaViolation,
                    "malformed forest JSON: " + std::string(e.what()));
    }
}

void save_forest(const Forest& forest, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "' for writing");
    out << forest_to_json(forest).dump(2) << '\n';
    if (!out) throw Error(ErrorKind::IoFailure, "failed writing forest JSON");
}

Forest load_forest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::MissingFile, "cannot open forest file '" + path.string() + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SchemaViolation, "forest file is not valid JSON: " + std::string(e.what()));
    }
    return forest_from_json(doc);
}

}  // namespace slimtsf
