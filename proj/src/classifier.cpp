#include "ake/classifier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <future>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

namespace ake {

namespace {

constexpr double kMinGain = 1e-12;
constexpr double kTieEps = 1e-12;
constexpr std::size_t kLookaheadLimit = 32;

double split_information(std::span<const double> branch_weights, double total) {
    double info = 0.0;
    for (double w : branch_weights) {
        if (w <= 0.0) continue;
        const double p = w / total;
        info -= p * std::log2(p);
    }
    return info;
}

struct Totals {
    double w0 = 0.0;
    double w1 = 0.0;
    std::size_t count = 0;

    void add(const Instance& in) {
        (in.label ? w1 : w0) += in.weight;
        ++count;
    }
    double weight() const { return w0 + w1; }
};

Totals totals_of(std::span<const Instance> data, std::span<const std::size_t> rows) {
    Totals t;
    for (auto r : rows) t.add(data[r]);
    return t;
}

}  // namespace

/// Per numeric feature: the sorted distinct values over the whole training set
/// and each instance's position among them.
struct ValueRanks {
    std::vector<std::vector<double>> values;
    std::vector<std::vector<std::uint32_t>> rank;

    ValueRanks(std::span<const Instance> data, std::span<const std::size_t> rows, std::span<const FeatureKind> kinds)
        : values(kinds.size()), rank(kinds.size()) {
        for (std::size_t f = 0; f < kinds.size(); ++f) {
            if (kinds[f] != FeatureKind::Numeric) continue;
            auto& v = values[f];
            for (auto r : rows) v.push_back(data[r].x[f]);
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
            rank[f].assign(data.size(), 0);
            for (auto r : rows)
                rank[f][r] = static_cast<std::uint32_t>(std::lower_bound(v.begin(), v.end(), data[r].x[f]) - v.begin());
        }
    }
};

namespace {

// Calls `emit` for every eligible split in (feature, threshold) order until it
// returns false. Instances sharing a value are pooled before the sweep so the
// histogram and sorting paths accumulate identical sums.
template <typename Emit>
void enumerate_splits(std::span<const Instance> data, std::span<const std::size_t> rows,
                      std::span<const FeatureKind> kinds, std::size_t min_leaf, const ValueRanks& ranks, Emit&& emit) {
    const Totals all = totals_of(data, rows);
    const double total_w = all.weight();
    if (rows.size() < 2 || total_w <= 0.0) return;
    const double parent_h = entropy(all.w0, all.w1);

    std::vector<std::pair<double, Totals>> bins;
    std::vector<Totals> hist;
    std::vector<std::pair<double, std::size_t>> sorted;
    for (std::size_t f = 0; f < kinds.size(); ++f) {
        if (kinds[f] == FeatureKind::Numeric) {
            bins.clear();
            const auto& values = ranks.values[f];
            if (values.size() <= 4 * rows.size()) {
                hist.assign(values.size(), Totals{});
                for (auto r : rows) hist[ranks.rank[f][r]].add(data[r]);
                for (std::size_t v = 0; v < values.size(); ++v) {
                    if (hist[v].count > 0) bins.emplace_back(values[v], hist[v]);
                }
            } else {
                sorted.clear();
                for (auto r : rows) sorted.emplace_back(data[r].x[f], r);
                std::sort(sorted.begin(), sorted.end());
                for (const auto& [value, r] : sorted) {
                    if (bins.empty() || bins.back().first != value) bins.emplace_back(value, Totals{});
                    bins.back().second.add(data[r]);
                }
            }
            Totals left;
            for (std::size_t i = 0; i + 1 < bins.size(); ++i) {
                left.w0 += bins[i].second.w0;
                left.w1 += bins[i].second.w1;
                left.count += bins[i].second.count;
                const double a = bins[i].first;
                const double b = bins[i + 1].first;
                const std::size_t right_count = rows.size() - left.count;
                if (left.count < min_leaf || right_count < min_leaf) continue;
                const double lw = left.weight();
                const double rw = total_w - lw;
                const double r0 = all.w0 - left.w0;
                const double r1 = all.w1 - left.w1;
                Split s;
                s.feature = f;
                s.kind = FeatureKind::Numeric;
                s.threshold = a + (b - a) / 2.0;
                if (!(s.threshold < b)) s.threshold = a;
                s.gain = parent_h - (lw / total_w) * entropy(left.w0, left.w1) - (rw / total_w) * entropy(r0, r1);
                const double branches[2] = {lw, rw};
                s.split_info = split_information(branches, total_w);
                s.gain_ratio = s.split_info > 0.0 ? s.gain / s.split_info : 0.0;
                if (!emit(std::move(s))) return;
            }
        } else {
            std::map<double, Totals> groups;
            for (auto r : rows) groups[data[r].x[f]].add(data[r]);
            if (groups.size() < 2) continue;
            const auto big = std::count_if(groups.begin(), groups.end(),
                                           [&](const auto& g) { return g.second.count >= min_leaf; });
            if (big < 2) continue;
            Split s;
            s.feature = f;
            s.kind = FeatureKind::Nominal;
            double conditional = 0.0;
            std::vector<double> weights;
            for (const auto& [v, t] : groups) {
                s.values.push_back(v);
                weights.push_back(t.weight());
                conditional += (t.weight() / total_w) * entropy(t.w0, t.w1);
            }
            s.gain = parent_h - conditional;
            s.split_info = split_information(weights, total_w);
            s.gain_ratio = s.split_info > 0.0 ? s.gain / s.split_info : 0.0;
            if (!emit(std::move(s))) return;
        }
    }
}

std::optional<Split> best_split_ranked(std::span<const Instance> data, std::span<const std::size_t> rows,
                                       std::span<const FeatureKind> kinds, std::size_t min_leaf,
                                       const ValueRanks& ranks) {
    std::optional<Split> best;
    enumerate_splits(data, rows, kinds, min_leaf, ranks, [&](Split&& s) {
        if (s.gain > kMinGain && (!best || s.gain_ratio > best->gain_ratio + kTieEps)) best = std::move(s);
        return true;
    });
    return best;
}

std::vector<Split> eligible_splits_ranked(std::span<const Instance> data, std::span<const std::size_t> rows,
                                          std::span<const FeatureKind> kinds, std::size_t min_leaf,
                                          const ValueRanks& ranks, std::size_t limit) {
    std::vector<Split> out;
    enumerate_splits(data, rows, kinds, min_leaf, ranks, [&](Split&& s) {
        out.push_back(std::move(s));
        return out.size() < limit;
    });
    return out;
}

std::vector<std::vector<std::size_t>> partition(std::span<const Instance> data, std::span<const std::size_t> rows,
                                                const Split& s) {
    if (s.kind == FeatureKind::Numeric) {
        std::vector<std::vector<std::size_t>> parts(2);
        for (auto r : rows) parts[data[r].x[s.feature] <= s.threshold ? 0 : 1].push_back(r);
        return parts;
    }
    std::vector<std::vector<std::size_t>> parts(s.values.size());
    for (auto r : rows) {
        const auto it = std::lower_bound(s.values.begin(), s.values.end(), data[r].x[s.feature]);
        parts[static_cast<std::size_t>(it - s.values.begin())].push_back(r);
    }
    return parts;
}

bool is_pure(std::span<const Instance> data, std::span<const std::size_t> rows) {
    return std::all_of(rows.begin(), rows.end(), [&](std::size_t r) { return data[r].label == data[rows[0]].label; });
}

bool can_split(std::span<const Instance> data, std::span<const std::size_t> rows, const TreeParams& params,
               std::size_t depth) {
    if (rows.empty() || is_pure(data, rows)) return false;
    if (rows.size() < 2 * params.min_leaf) return false;
    return params.max_depth == 0 || depth < params.max_depth;
}

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string next_token(std::istream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) throw DataError(std::string("model file truncated while reading ") + what);
    return tok;
}

std::size_t parse_size(const std::string& s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw DataError("model file: expected an integer, got '" + s + "'");
    return v;
}

}  // namespace

double entropy(double n0, double n1) {
    const double n = n0 + n1;
    if (n <= 0.0) return 0.0;
    double h = 0.0;
    for (double c : {n0, n1}) {
        if (c <= 0.0) continue;
        const double p = c / n;
        h -= p * std::log2(p);
    }
    return h;
}

std::optional<Split> best_split(std::span<const Instance> data, std::span<const std::size_t> rows,
                                std::span<const FeatureKind> kinds, std::size_t min_leaf) {
    return best_split_ranked(data, rows, kinds, min_leaf, ValueRanks(data, rows, kinds));
}

std::vector<Split> eligible_splits(std::span<const Instance> data, std::span<const std::size_t> rows,
                                   std::span<const FeatureKind> kinds, std::size_t min_leaf) {
    return eligible_splits_ranked(data, rows, kinds, min_leaf, ValueRanks(data, rows, kinds),
                                  std::numeric_limits<std::size_t>::max());
}

// ---------------------------------------------------------------------------

DecisionTree DecisionTree::train(std::span<const Instance> data, std::span<const FeatureKind> kinds,
                                 const TreeParams& params) {
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return train(data, rows, kinds, params);
}

DecisionTree DecisionTree::train(std::span<const Instance> data, std::span<const std::size_t> rows,
                                 std::span<const FeatureKind> kinds, const TreeParams& params) {
    if (rows.empty()) throw std::invalid_argument("cannot train a decision tree on zero instances");
    if (params.min_leaf < 1) throw std::invalid_argument("min_leaf must be at least 1");
    for (auto r : rows) {
        if (data[r].x.size() != kinds.size())
            throw std::invalid_argument("instance dimensionality " + std::to_string(data[r].x.size()) +
                                        " does not match " + std::to_string(kinds.size()) + " feature kinds");
        if (data[r].label != 0 && data[r].label != 1) throw std::invalid_argument("instance labels must be 0 or 1");
        if (!(data[r].weight >= 0.0)) throw std::invalid_argument("instance weights must be non-negative");
    }
    DecisionTree tree;
    tree.dimension_ = kinds.size();
    tree.grow(data, std::vector<std::size_t>(rows.begin(), rows.end()), kinds, params, 0, ValueRanks(data, rows, kinds));
    return tree;
}

DecisionTree DecisionTree::leaf(double n0, double n1, std::size_t dimension) {
    DecisionTree tree;
    tree.dimension_ = dimension;
    TreeNode node;
    node.n0 = n0;
    node.n1 = n1;
    tree.nodes_.push_back(node);
    return tree;
}

std::size_t DecisionTree::grow(std::span<const Instance> data, std::vector<std::size_t> rows,
                               std::span<const FeatureKind> kinds, const TreeParams& params, std::size_t depth,
                               const ValueRanks& ranks) {
    const std::size_t id = nodes_.size();
    const Totals t = totals_of(data, rows);
    nodes_.emplace_back();
    nodes_.back().n0 = t.w0;
    nodes_.back().n1 = t.w1;
    if (!can_split(data, rows, params, depth)) return id;

    std::optional<Split> split = best_split_ranked(data, rows, kinds, params.min_leaf, ranks);
    if (!split) {
        const auto candidates = eligible_splits_ranked(data, rows, kinds, params.min_leaf, ranks, kLookaheadLimit);
        for (std::size_t i = 0; i < candidates.size() && !split; ++i) {
            for (const auto& part : partition(data, rows, candidates[i])) {
                if (can_split(data, part, params, depth + 1) &&
                    best_split_ranked(data, part, kinds, params.min_leaf, ranks)) {
                    split = candidates[i];
                    break;
                }
            }
        }
    }
    if (!split) return id;

    auto parts = partition(data, rows, *split);
    rows.clear();
    rows.shrink_to_fit();
    std::vector<std::size_t> children;
    for (auto& part : parts) children.push_back(grow(data, std::move(part), kinds, params, depth + 1, ranks));

    TreeNode& node = nodes_[id];
    node.feature = static_cast<int>(split->feature);
    node.kind = split->kind;
    node.threshold = split->threshold;
    node.values = std::move(split->values);
    node.children = std::move(children);
    return id;
}

double DecisionTree::score(std::span<const double> x) const {
    if (x.size() != dimension_)
        throw std::invalid_argument("feature vector has " + std::to_string(x.size()) + " dimensions, tree expects " +
                                    std::to_string(dimension_));
    const TreeNode* node = &nodes_.front();
    while (!node->is_leaf()) {
        const double v = x[static_cast<std::size_t>(node->feature)];
        if (node->kind == FeatureKind::Numeric) {
            node = &nodes_[node->children[v <= node->threshold ? 0 : 1]];
        } else {
            const auto it = std::lower_bound(node->values.begin(), node->values.end(), v);
            if (it == node->values.end() || *it != v) return node->laplace();
            node = &nodes_[node->children[static_cast<std::size_t>(it - node->values.begin())]];
        }
    }
    return node->laplace();
}

std::size_t DecisionTree::depth() const {
    std::vector<std::size_t> depth(nodes_.size(), 0);
    std::size_t deepest = 0;
    // Children always follow their parent in pre-order storage.
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        deepest = std::max(deepest, depth[i]);
        for (auto c : nodes_[i].children) depth[c] = depth[i] + 1;
    }
    return deepest;
}

void DecisionTree::write(std::ostream& out) const {
    out << "tree " << nodes_.size() << '\n';
    for (const auto& n : nodes_) {
        if (n.is_leaf()) {
            out << "L " << format_double(n.n0) << ' ' << format_double(n.n1) << '\n';
        } else if (n.kind == FeatureKind::Numeric) {
            out << "N " << n.feature << ' ' << format_double(n.threshold) << ' ' << format_double(n.n0) << ' '
                << format_double(n.n1) << '\n';
        } else {
            out << "C " << n.feature << ' ' << format_double(n.n0) << ' ' << format_double(n.n1) << ' '
                << n.values.size();
            for (double v : n.values) out << ' ' << format_double(v);
            out << '\n';
        }
    }
}

std::size_t DecisionTree::read_node(std::istream& in) {
    const std::string kind = next_token(in, "tree node");
    const std::size_t id = nodes_.size();
    nodes_.emplace_back();
    TreeNode node;
    std::size_t branches = 0;
    if (kind == "L") {
        node.n0 = parse_double(next_token(in, "leaf"));
        node.n1 = parse_double(next_token(in, "leaf"));
    } else if (kind == "N") {
        node.feature = static_cast<int>(parse_size(next_token(in, "split")));
        node.threshold = parse_double(next_token(in, "split"));
        node.n0 = parse_double(next_token(in, "split"));
        node.n1 = parse_double(next_token(in, "split"));
        branches = 2;
    } else if (kind == "C") {
        node.kind = FeatureKind::Nominal;
        node.feature = static_cast<int>(parse_size(next_token(in, "split")));
        node.n0 = parse_double(next_token(in, "split"));
        node.n1 = parse_double(next_token(in, "split"));
        branches = parse_size(next_token(in, "split"));
        if (branches < 2) throw DataError("model file: nominal split with fewer than two branches");
        for (std::size_t i = 0; i < branches; ++i) node.values.push_back(parse_double(next_token(in, "split value")));
    } else {
        throw DataError("model file: unknown tree node kind '" + kind + "'");
    }
    if (!node.is_leaf() && static_cast<std::size_t>(node.feature) >= dimension_)
        throw DataError("model file: split feature index out of range");
    for (std::size_t i = 0; i < branches; ++i) node.children.push_back(read_node(in));
    nodes_[id] = std::move(node);
    return id;
}

DecisionTree DecisionTree::read(std::istream& in, std::size_t dimension) {
    if (next_token(in, "tree header") != "tree") throw DataError("model file: expected 'tree'");
    const std::size_t count = parse_size(next_token(in, "tree size"));
    DecisionTree tree;
    tree.dimension_ = dimension;
    tree.read_node(in);
    if (tree.nodes_.size() != count) throw DataError("model file: tree node count mismatch");
    return tree;
}

bool operator==(const TreeNode& a, const TreeNode& b) {
    return a.n0 == b.n0 && a.n1 == b.n1 && a.feature == b.feature && a.kind == b.kind && a.threshold == b.threshold &&
           a.values == b.values && a.children == b.children;
}

bool operator==(const DecisionTree& a, const DecisionTree& b) {
    return a.dimension_ == b.dimension_ && a.nodes_ == b.nodes_;
}

// ---------------------------------------------------------------------------

std::uint64_t tree_seed(std::uint64_t seed, std::size_t tree) {
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(tree) + 1));
}

std::size_t draw_index(std::uint64_t r, std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(r) * n) >> 64);
}

Ensemble Ensemble::train(std::span<const Instance> data, std::vector<FeatureKind> kinds, const BaggingParams& params) {
    if (params.bags < 1) throw std::invalid_argument("bag count must be at least 1");
    if (data.empty()) throw std::invalid_argument("cannot train an ensemble on zero instances");

    const std::size_t n = data.size();
    std::vector<std::vector<std::size_t>> samples(params.bags);
    std::vector<std::vector<char>> in_bag(params.bags, std::vector<char>(n, 0));
    for (std::size_t b = 0; b < params.bags; ++b) {
        auto& rows = samples[b];
        rows.resize(n);
        if (params.bootstrap) {
            std::mt19937_64 rng(tree_seed(params.seed, b));
            for (auto& r : rows) r = draw_index(rng(), n);
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        for (auto r : rows) in_bag[b][r] = 1;
    }

    Ensemble e;
    e.kinds_ = std::move(kinds);
    e.seed_ = params.seed;
    e.trees_.resize(params.bags);
    const bool threaded = params.parallel && params.bags > 1 && std::thread::hardware_concurrency() > 1;
    if (threaded) {
        std::vector<std::future<DecisionTree>> jobs;
        for (std::size_t b = 0; b < params.bags; ++b) {
            jobs.push_back(std::async(std::launch::async, [&, b] {
                return DecisionTree::train(data, samples[b], e.kinds_, params.tree);
            }));
        }
        for (std::size_t b = 0; b < params.bags; ++b) e.trees_[b] = jobs[b].get();
    } else {
        for (std::size_t b = 0; b < params.bags; ++b) e.trees_[b] = DecisionTree::train(data, samples[b], e.kinds_, params.tree);
    }

    double wrong = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        std::size_t votes = 0;
        for (std::size_t b = 0; b < params.bags; ++b) {
            if (in_bag[b][j]) continue;
            sum += e.trees_[b].score(data[j].x);
            ++votes;
        }
        if (votes == 0) continue;
        const int predicted = sum / static_cast<double>(votes) >= 0.5 ? 1 : 0;
        total += data[j].weight;
        if (predicted != data[j].label) wrong += data[j].weight;
    }
    if (total > 0.0) e.oob_error_ = wrong / total;
    return e;
}

Ensemble Ensemble::from_trees(std::vector<DecisionTree> trees, std::vector<FeatureKind> kinds) {
    if (trees.empty()) throw std::invalid_argument("an ensemble needs at least one tree");
    for (const auto& t : trees) {
        if (t.dimension() != kinds.size()) throw std::invalid_argument("tree dimensionality differs from the ensemble");
    }
    Ensemble e;
    e.trees_ = std::move(trees);
    e.kinds_ = std::move(kinds);
    return e;
}

double Ensemble::score(std::span<const double> x) const {
    if (x.size() != dimension())
        throw std::invalid_argument("feature vector has " + std::to_string(x.size()) + " dimensions, model expects " +
                                    std::to_string(dimension()));
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.score(x);
    return sum / static_cast<double>(trees_.size());
}

void Ensemble::write(std::ostream& out) const {
    out << "ensemble " << trees_.size() << ' ' << kinds_.size() << ' ' << seed_ << ' '
        << (oob_error_ ? format_double(*oob_error_) : std::string("none")) << '\n';
    out << "kinds ";
    for (auto k : kinds_) out << (k == FeatureKind::Nominal ? 'c' : 'n');
    out << '\n';
    for (const auto& t : trees_) t.write(out);
}

Ensemble Ensemble::read(std::istream& in) {
    if (next_token(in, "ensemble header") != "ensemble") throw DataError("model file: expected 'ensemble'");
    const std::size_t count = parse_size(next_token(in, "tree count"));
    const std::size_t dim = parse_size(next_token(in, "dimension"));
    Ensemble e;
    const std::string seed = next_token(in, "seed");
    const auto [ptr, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), e.seed_);
    if (ec != std::errc{} || ptr != seed.data() + seed.size()) throw DataError("model file: bad ensemble seed");
    const std::string oob = next_token(in, "oob error");
    if (oob != "none") e.oob_error_ = parse_double(oob);
    if (next_token(in, "kinds") != "kinds") throw DataError("model file: expected 'kinds'");
    const std::string kinds = dim == 0 ? std::string() : next_token(in, "kinds");
    if (kinds.size() != dim) throw DataError("model file: kinds length differs from dimension");
    for (char c : kinds) {
        if (c != 'n' && c != 'c') throw DataError("model file: unknown feature kind");
        e.kinds_.push_back(c == 'c' ? FeatureKind::Nominal : FeatureKind::Numeric);
    }
    if (count < 1) throw DataError("model file: ensemble without trees");
    for (std::size_t i = 0; i < count; ++i) e.trees_.push_back(DecisionTree::read(in, dim));
    return e;
}

double cross_validated_error(std::span<const Instance> data, std::span<const FeatureKind> kinds, std::size_t folds,
                             std::uint64_t seed, const TreeParams& params) {
    if (folds < 2 || folds > data.size()) throw std::invalid_argument("fold count must be in [2, instances]");
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[draw_index(rng(), i)]);

    double wrong = 0.0;
    double total = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> train_rows;
        std::vector<std::size_t> test_rows;
        for (std::size_t i = 0; i < order.size(); ++i) (i % folds == f ? test_rows : train_rows).push_back(order[i]);
        const auto tree = DecisionTree::train(data, train_rows, kinds, params);
        for (auto r : test_rows) {
            total += data[r].weight;
            if (tree.predict(data[r].x) != data[r].label) wrong += data[r].weight;
        }
    }
    return total > 0.0 ? wrong / total : 0.0;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::logic_error("cannot format double");
    return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw DataError("expected a number, got '" + std::string(s) + "'");
    return v;
}

}  // namespace ake
