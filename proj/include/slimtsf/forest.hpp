#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "slimtsf/matrix.hpp"

namespace slimtsf {

/// Class-count context for impurity scoring at one node.
struct GiniContext {
    std::vector<std::size_t> class_counts;

    std::size_t total() const {
        std::size_t t = 0;
        for (const std::size_t c : class_counts) t += c;
        return t;
    }
};

/// Gini impurity 1 - sum(p_i^2). Throws EmptyNode for a zero-sample context.
double gini(const GiniContext& ctx);
double gini(std::span<const std::size_t> class_counts);

struct ForestHyperparams {
    std::size_t n_trees = 100;
    std::size_t max_features = 0;  // candidates per split; 0 = ceil(sqrt(d))
    std::size_t min_samples_leaf = 1;
    std::size_t max_depth = 0;  // 0 = unlimited
    std::uint64_t seed = 0;

    bool operator==(const ForestHyperparams&) const = default;
};

/// Flat tree storage; node 0 is the root. Internal nodes route
/// value <= threshold to the left child. Every node keeps its impurity and
/// sample count so MDI needs no recomputation.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
    std::size_t n_samples = 0;
    int left = -1;
    int right = -1;
    std::vector<double> distribution;  // leaves only; sums to 1

    bool is_leaf() const { return left < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    const TreeNode& leaf_for(std::span<const double> row) const;
    std::size_t depth() const;
    bool has_split() const { return !nodes.empty() && !nodes.front().is_leaf(); }
    bool operator==(const DecisionTree&) const = default;
};

struct Forest {
    std::vector<DecisionTree> trees;
    std::size_t n_features = 0;
    std::size_t n_classes = 2;
    ForestHyperparams hp;

    bool operator==(const Forest&) const = default;
};

struct SplitDecision {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;  // weighted impurity decrease at this node
};

/// Best axis-aligned split over the candidate features at midpoint thresholds
/// between consecutive distinct sorted values. Ties in gain go to the lower
/// feature index, then the lower threshold. Returns nullopt when the node is
/// pure or no candidate feature admits a threshold; an impure node with only
/// zero-gain thresholds still splits (XOR-style patterns stay learnable).
std::optional<SplitDecision> best_split(const DataMatrix& x, std::span<const int> labels,
                                        std::span<const std::size_t> samples,
                                        std::span<const int> candidate_features,
                                        std::size_t n_classes,
                                        std::size_t min_samples_leaf = 1);

/// CART on the given bootstrap multiset. Feature subsets are drawn per node
/// from streams derived from (tree_seed, node path), so the structure is
/// independent of build order.
DecisionTree fit_tree(const DataMatrix& x, std::span<const int> labels,
                      std::span<const std::size_t> sample_indices, const ForestHyperparams& hp,
                      std::uint64_t tree_seed, std::size_t n_classes);

/// Bagged forest: n_trees trees, each on a size-n bootstrap resample drawn
/// from a per-tree seed stream. Bit-identical results for a fixed seed
/// regardless of thread count.
Forest fit_forest(const DataMatrix& x, std::span<const int> labels, const ForestHyperparams& hp,
                  int threads = 1);

/// Mean of the per-tree leaf distributions; sums to 1 (+-1e-12).
std::vector<double> predict_proba(const Forest& forest, std::span<const double> row);

/// Argmax class; an exact tie resolves to the higher class index, so a binary
/// 0.5/0.5 goes to the positive class.
int predict(const Forest& forest, std::span<const double> row);

std::vector<int> predict_batch(const Forest& forest, const DataMatrix& x, int threads = 1);

struct ImportanceVector {
    std::vector<double> values;
    bool operator==(const ImportanceVector&) const = default;
};

/// Mean-decrease-impurity importance: each internal node contributes
/// (node_samples / root_samples) * impurity decrease to its feature; per-tree
/// vectors are normalized to sum 1 (splitless trees stay zero), averaged
/// across trees, then renormalized.
ImportanceVector mdi_importance(const Forest& forest);

// Versioned JSON serialization (nested node objects) for reproducibility audits.
nlohmann::json forest_to_json(const Forest& forest);
Forest forest_from_json(const nlohmann::json& doc);
void save_forest(const Forest& forest, const std::filesystem::path& path);
Forest load_forest(const std::filesystem::path& path);

}  // namespace slimtsf
