#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ake/features.hpp"

namespace ake {

struct Instance {
    std::vector<double> x;
    int label = 0;  // 0 or 1
    double weight = 1.0;
};

struct TreeParams {
    std::size_t min_leaf = 2;
    std::size_t max_depth = 0;  // 0 = unlimited
};

/// Binary entropy in bits of weighted class totals.
double entropy(double n0, double n1);

struct Split {
    std::size_t feature = 0;
    FeatureKind kind = FeatureKind::Numeric;
    double threshold = 0.0;       // numeric: left branch takes x <= threshold
    std::vector<double> values;   // nominal: one branch per value, ascending
    double gain = 0.0;
    double split_info = 0.0;
    double gain_ratio = 0.0;
};

/// Highest gain-ratio split with strictly positive information gain among
/// those leaving at least `min_leaf` instances on each numeric side (or on at
/// least two nominal branches). Earlier features and lower thresholds win ties.
std::optional<Split> best_split(std::span<const Instance> data, std::span<const std::size_t> rows,
                                std::span<const FeatureKind> kinds, std::size_t min_leaf);

/// Every eligible split in (feature, threshold) order, regardless of gain.
std::vector<Split> eligible_splits(std::span<const Instance> data, std::span<const std::size_t> rows,
                                   std::span<const FeatureKind> kinds, std::size_t min_leaf);

struct TreeNode {
    double n0 = 0.0;
    double n1 = 0.0;
    int feature = -1;  // -1 marks a leaf
    FeatureKind kind = FeatureKind::Numeric;
    double threshold = 0.0;
    std::vector<double> values;
    std::vector<std::size_t> children;

    bool is_leaf() const { return feature < 0; }
    /// Laplace-smoothed positive fraction (n1 + 1) / (n0 + n1 + 2).
    double laplace() const { return (n1 + 1.0) / (n0 + n1 + 2.0); }
};

struct ValueRanks;

class DecisionTree {
public:
    /// Greedy gain-ratio induction without post-pruning. A node becomes a leaf
    /// when pure, when it holds fewer than 2 * min_leaf instances, or when no
    /// split separates the classes. If every split has zero gain, the first one
    /// under which some child gains is taken, so interactions such as XOR can
    /// still be learned.
    static DecisionTree train(std::span<const Instance> data, std::span<const FeatureKind> kinds,
                              const TreeParams& params = {});
    static DecisionTree train(std::span<const Instance> data, std::span<const std::size_t> rows,
                              std::span<const FeatureKind> kinds, const TreeParams& params);
    /// A single-leaf tree with the given class totals.
    static DecisionTree leaf(double n0, double n1, std::size_t dimension);

    double score(std::span<const double> x) const;
    int predict(std::span<const double> x) const { return score(x) >= 0.5 ? 1 : 0; }

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeNode& root() const { return nodes_.front(); }
    std::size_t dimension() const { return dimension_; }
    std::size_t depth() const;

    /// One node per line in pre-order.
    void write(std::ostream& out) const;
    static DecisionTree read(std::istream& in, std::size_t dimension);

    friend bool operator==(const DecisionTree&, const DecisionTree&);

private:
    std::size_t grow(std::span<const Instance> data, std::vector<std::size_t> rows, std::span<const FeatureKind> kinds,
                     const TreeParams& params, std::size_t depth, const ValueRanks& ranks);
    std::size_t read_node(std::istream& in);

    std::vector<TreeNode> nodes_;
    std::size_t dimension_ = 0;
};

bool operator==(const TreeNode& a, const TreeNode& b);

struct BaggingParams {
    std::size_t bags = 10;
    std::uint64_t seed = 1;
    bool bootstrap = true;  // false trains every tree on the full data (test hook)
    bool parallel = true;
    TreeParams tree;
};

class Ensemble {
public:
    /// B bootstrap resamples of |data| rows each, one tree per resample.
    /// Tree i draws from its own generator seeded from (seed, i).
    static Ensemble train(std::span<const Instance> data, std::vector<FeatureKind> kinds,
                          const BaggingParams& params = {});
    static Ensemble from_trees(std::vector<DecisionTree> trees, std::vector<FeatureKind> kinds);

    /// Mean Laplace-smoothed leaf score over trees. Throws std::invalid_argument
    /// when x has the wrong dimensionality.
    double score(std::span<const double> x) const;

    const std::vector<DecisionTree>& trees() const { return trees_; }
    std::size_t dimension() const { return kinds_.size(); }
    const std::vector<FeatureKind>& kinds() const { return kinds_; }
    std::uint64_t seed() const { return seed_; }
    /// Weighted misclassification rate of out-of-bag votes; empty when no
    /// instance was ever left out.
    std::optional<double> oob_error() const { return oob_error_; }

    void write(std::ostream& out) const;
    static Ensemble read(std::istream& in);

    friend bool operator==(const Ensemble&, const Ensemble&) = default;

private:
    std::vector<DecisionTree> trees_;
    std::vector<FeatureKind> kinds_;
    std::uint64_t seed_ = 0;
    std::optional<double> oob_error_;
};

/// Per-tree generator seed derived from the ensemble seed.
std::uint64_t tree_seed(std::uint64_t seed, std::size_t tree);
/// Uniform index in [0, n) from one 64-bit draw.
std::size_t draw_index(std::uint64_t r, std::size_t n);

/// k-fold error of a single tree (seeded fold assignment).
double cross_validated_error(std::span<const Instance> data, std::span<const FeatureKind> kinds, std::size_t folds,
                             std::uint64_t seed, const TreeParams& params = {});

/// Shortest round-trip decimal form.
std::string format_double(double v);
double parse_double(std::string_view s);

}  // namespace ake
