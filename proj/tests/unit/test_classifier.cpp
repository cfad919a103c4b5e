#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

#include "ake/classifier.hpp"

using namespace ake;

namespace {

std::vector<FeatureKind> numeric(std::size_t n) { return std::vector<FeatureKind>(n, FeatureKind::Numeric); }

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = i;
    return r;
}

// Two informative features, three noise features, 15% label noise.
std::vector<Instance> noisy_data(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Instance> data;
    for (std::size_t i = 0; i < n; ++i) {
        Instance in;
        for (int f = 0; f < 5; ++f) in.x.push_back(u(rng));
        int label = in.x[0] + in.x[1] > 1.0 ? 1 : 0;
        if (u(rng) < 0.15) label = 1 - label;
        in.label = label;
        data.push_back(in);
    }
    return data;
}

double accuracy(const DecisionTree& t, const std::vector<Instance>& data) {
    double ok = 0;
    for (const auto& in : data) ok += t.predict(in.x) == in.label;
    return ok / static_cast<double>(data.size());
}

}  // namespace

TEST_CASE("binary entropy in bits") {
    CHECK(entropy(5, 5) == doctest::Approx(1.0));
    CHECK(entropy(4, 0) == 0.0);
    CHECK(entropy(0, 0) == 0.0);
    CHECK(entropy(1, 3) == doctest::Approx(0.811278).epsilon(1e-6));
}

TEST_CASE("a perfect separator gives one split and two pure leaves") {
    std::vector<Instance> data = {{{0.0}, 0, 1.0}, {{0.0}, 0, 1.0}, {{1.0}, 1, 1.0}, {{1.0}, 1, 1.0}};
    const auto t = DecisionTree::train(data, numeric(1));
    REQUIRE(t.nodes().size() == 3);
    CHECK(t.root().feature == 0);
    CHECK(t.root().threshold == 0.5);
    CHECK(t.nodes()[1].is_leaf());
    CHECK(t.nodes()[2].is_leaf());
    CHECK(accuracy(t, data) == 1.0);
}

TEST_CASE("identical labels give a single leaf") {
    std::vector<Instance> data = {{{0.0}, 1, 1.0}, {{3.0}, 1, 1.0}, {{7.0}, 1, 1.0}};
    const auto t = DecisionTree::train(data, numeric(1));
    CHECK(t.nodes().size() == 1);
    CHECK(t.root().laplace() == doctest::Approx(0.8));
}

TEST_CASE("XOR is learned at depth two with perfect training accuracy") {
    const auto data = test::xor_data(5);
    CHECK_FALSE(best_split(data, all_rows(data.size()), numeric(2), 2).has_value());
    const auto t = DecisionTree::train(data, numeric(2));
    CHECK(t.depth() == 2);
    CHECK(accuracy(t, data) == 1.0);
}

TEST_CASE("root split equals the brute-force gain-ratio argmax") {
    std::mt19937_64 rng(12345);
    int compared = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const auto data = test::random_dataset(rng);
        const auto kinds = numeric(data.front().x.size());
        const auto got = best_split(data, all_rows(data.size()), kinds, 2);
        const auto want = test::brute_force_split(data, 2);
        REQUIRE(got.has_value() == want.has_value());
        if (!got) continue;
        ++compared;
        CHECK(got->gain_ratio == doctest::Approx(want->gain_ratio).epsilon(1e-9));
        CHECK(got->feature == want->feature);
        CHECK(got->threshold == want->threshold);
    }
    CHECK(compared > 200);
}

TEST_CASE("numeric splits respect min_leaf") {
    std::vector<Instance> data = {{{0.0}, 1, 1.0}, {{1.0}, 0, 1.0}, {{2.0}, 0, 1.0}, {{3.0}, 0, 1.0}};
    const auto s1 = best_split(data, all_rows(4), numeric(1), 1);
    REQUIRE(s1);
    CHECK(s1->threshold == 0.5);
    const auto s2 = best_split(data, all_rows(4), numeric(1), 2);
    if (s2) CHECK(s2->threshold == 1.5);
}

TEST_CASE("nominal features split multiway") {
    std::vector<Instance> data;
    for (int v = 0; v < 3; ++v) {
        for (int c = 0; c < 4; ++c) data.push_back({{double(v)}, v == 1 ? 1 : 0, 1.0});
    }
    const std::vector<FeatureKind> kinds = {FeatureKind::Nominal};
    const auto s = best_split(data, all_rows(data.size()), kinds, 2);
    REQUIRE(s);
    CHECK(s->kind == FeatureKind::Nominal);
    CHECK(s->values == std::vector<double>{0.0, 1.0, 2.0});
    const auto t = DecisionTree::train(data, kinds);
    CHECK(t.root().children.size() == 3);
    CHECK(accuracy(t, data) == 1.0);
    // An unseen category falls back to the split node's own score.
    CHECK(t.score(std::vector<double>{7.0}) == doctest::Approx(t.root().laplace()));
}

TEST_CASE("tree training validates input") {
    std::vector<Instance> empty;
    CHECK_THROWS_AS(DecisionTree::train(empty, numeric(1)), std::invalid_argument);
    std::vector<Instance> bad = {{{0.0, 1.0}, 0, 1.0}};
    CHECK_THROWS_AS(DecisionTree::train(bad, numeric(1)), std::invalid_argument);
    std::vector<Instance> label = {{{0.0}, 2, 1.0}};
    CHECK_THROWS_AS(DecisionTree::train(label, numeric(1)), std::invalid_argument);
    const auto t = DecisionTree::leaf(1, 1, 2);
    CHECK_THROWS_AS(t.score(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("leaf scores use Laplace smoothing and ensembles average them") {
    TreeNode pure;
    pure.n1 = 8;
    CHECK(pure.laplace() == doctest::Approx(0.9));
    const auto a = DecisionTree::leaf(3, 0, 1);
    const auto b = DecisionTree::leaf(1, 2, 1);
    CHECK(a.score(std::vector<double>{0.0}) == doctest::Approx(0.2));
    CHECK(b.score(std::vector<double>{0.0}) == doctest::Approx(0.6));
    const auto e = Ensemble::from_trees({a, b}, numeric(1));
    CHECK(e.score(std::vector<double>{0.0}) == doctest::Approx(0.4));
    CHECK_THROWS_AS(e.score(std::vector<double>{0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("one bag without bootstrap equals a single tree") {
    const auto data = noisy_data(200, 3);
    BaggingParams p;
    p.bags = 1;
    p.bootstrap = false;
    const auto e = Ensemble::train(data, numeric(5), p);
    const auto t = DecisionTree::train(data, numeric(5));
    CHECK(e.trees().front() == t);
    for (const auto& in : data) CHECK(e.score(in.x) == t.score(in.x));
}

TEST_CASE("bagging is deterministic under a fixed seed") {
    const auto data = noisy_data(300, 4);
    BaggingParams p;
    p.seed = 77;
    const auto a = Ensemble::train(data, numeric(5), p);
    const auto b = Ensemble::train(data, numeric(5), p);
    CHECK(a == b);
    std::ostringstream sa, sb;
    a.write(sa);
    b.write(sb);
    CHECK(sa.str() == sb.str());
    p.seed = 78;
    CHECK_FALSE(Ensemble::train(data, numeric(5), p) == a);
    p.bags = 0;
    CHECK_THROWS_AS(Ensemble::train(data, numeric(5), p), std::invalid_argument);
}

TEST_CASE("sequential and threaded bagging agree") {
    const auto data = noisy_data(200, 8);
    BaggingParams p;
    p.parallel = false;
    const auto a = Ensemble::train(data, numeric(5), p);
    p.parallel = true;
    CHECK(Ensemble::train(data, numeric(5), p) == a);
}

TEST_CASE("per-tree seeds and index draws") {
    CHECK(tree_seed(1, 0) != tree_seed(1, 1));
    CHECK(tree_seed(1, 0) != tree_seed(2, 0));
    CHECK(draw_index(0, 10) == 0);
    CHECK(draw_index(~0ULL, 10) == 9);
}

TEST_CASE("out-of-bag error of ten bags is no worse than single-tree cross-validation") {
    const auto data = noisy_data(500, 21);
    BaggingParams p;
    p.bags = 10;
    p.seed = 5;
    const auto e = Ensemble::train(data, numeric(5), p);
    REQUIRE(e.oob_error().has_value());
    const double cv = cross_validated_error(data, numeric(5), 10, 5);
    CHECK(*e.oob_error() <= cv);
    CHECK(cv > 0.0);
}

TEST_CASE("scores are probabilities") {
    const auto data = noisy_data(200, 6);
    const auto e = Ensemble::train(data, numeric(5), {});
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x(5);
        for (auto& v : x) v = u(rng);
        const double s = e.score(x);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("monotone feature transforms leave tree structure and training-row scores unchanged") {
    const auto data = noisy_data(300, 9);
    auto transformed = data;
    for (auto& in : transformed) in.x[1] = std::exp(3.0 * in.x[1]);
    BaggingParams p;
    p.bags = 3;
    p.bootstrap = false;
    const auto a = Ensemble::train(data, numeric(5), p);
    const auto b = Ensemble::train(transformed, numeric(5), p);
    REQUIRE(a.trees().size() == b.trees().size());
    for (std::size_t t = 0; t < a.trees().size(); ++t) {
        const auto& na = a.trees()[t].nodes();
        const auto& nb = b.trees()[t].nodes();
        REQUIRE(na.size() == nb.size());
        for (std::size_t i = 0; i < na.size(); ++i) {
            CHECK(na[i].feature == nb[i].feature);
            CHECK(na[i].n0 == nb[i].n0);
            CHECK(na[i].n1 == nb[i].n1);
        }
    }
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(a.score(data[i].x) == b.score(transformed[i].x));
}

TEST_CASE("scaling a feature by c > 0 rescales thresholds and keeps every score") {
    const auto data = noisy_data(300, 9);
    for (double c : {1.0 / std::log(2.0), 7.5, 0.001}) {
        auto scaled = data;
        for (auto& in : scaled) in.x[0] *= c;
        BaggingParams p;
        p.seed = 3;
        const auto a = Ensemble::train(data, numeric(5), p);
        const auto b = Ensemble::train(scaled, numeric(5), p);
        for (std::size_t t = 0; t < a.trees().size(); ++t) {
            const auto& na = a.trees()[t].nodes();
            const auto& nb = b.trees()[t].nodes();
            REQUIRE(na.size() == nb.size());
            for (std::size_t i = 0; i < na.size(); ++i) {
                CHECK(na[i].feature == nb[i].feature);
                if (na[i].feature == 0) CHECK(nb[i].threshold == doctest::Approx(c * na[i].threshold));
            }
        }
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 300; ++i) {
            std::vector<double> x(5);
            for (auto& v : x) v = u(rng);
            auto y = x;
            y[0] *= c;
            CHECK(a.score(x) == b.score(y));
        }
    }
}

TEST_CASE("instance weights shift leaf scores") {
    std::vector<Instance> data = {{{0.0}, 0, 1.0}, {{0.0}, 1, 3.0}};
    const auto t = DecisionTree::train(data, numeric(1));
    CHECK(t.root().n1 == 3.0);
    CHECK(t.score(std::vector<double>{0.0}) == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("ensembles serialize to text and back exactly") {
    auto data = noisy_data(150, 10);
    for (auto& in : data) in.x.push_back(static_cast<double>(static_cast<int>(in.x[2] * 3)));
    auto kinds = numeric(5);
    kinds.push_back(FeatureKind::Nominal);
    BaggingParams p;
    p.bags = 3;
    const auto e = Ensemble::train(data, kinds, p);
    std::stringstream buf;
    e.write(buf);
    const auto back = Ensemble::read(buf);
    CHECK(back == e);
    for (const auto& in : data) CHECK(back.score(in.x) == e.score(in.x));

    std::istringstream truncated(buf.str().substr(0, buf.str().size() / 2));
    CHECK_THROWS_AS(Ensemble::read(truncated), DataError);
    std::istringstream garbage("ensemble 1 1 0 none\nkinds n\ntree 1\nQ 1 2\n");
    CHECK_THROWS_AS(Ensemble::read(garbage), DataError);
}

TEST_CASE("shortest round-trip number formatting") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5}) CHECK(parse_double(format_double(v)) == v);
    CHECK(format_double(0.5) == "0.5");
    CHECK_THROWS_AS(parse_double("abc"), DataError);
}
