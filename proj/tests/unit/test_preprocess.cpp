#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"

#include "ake/entities.hpp"
#include "ake/preprocess.hpp"

using namespace ake;

namespace {

SentenceVector vec(std::map<std::string, double> w) {
    SentenceVector v;
    v.weights = std::move(w);
    return v;
}

std::string random_document_body(std::mt19937_64& rng, std::size_t n_sentences) {
    static const std::vector<std::string> words = {"market", "budget", "river", "school", "storm", "player",
                                                   "doctor", "album",  "court", "rocket", "harvest", "bridge"};
    std::string body;
    for (std::size_t i = 0; i < n_sentences; ++i) {
        std::string s = "Word" + std::to_string(i % 7);
        const std::size_t len = 2 + rng() % 8;
        for (std::size_t j = 0; j < len; ++j) s += " " + words[rng() % words.size()];
        body += (body.empty() ? "" : " ") + s + ".";
    }
    return body;
}

std::vector<std::string> texts(const Document& d) {
    std::vector<std::string> out;
    for (const auto& s : d.sentences) {
        std::string t;
        for (const auto& tok : s.tokens) t += tok.surface + " ";
        out.push_back(t);
    }
    return out;
}

}  // namespace

TEST_CASE("sentence vectors count stopword-free terms") {
    const auto d = make_document("d", "", "Fox fox jumps. The of.", Category::Science);
    const auto vocab = document_vocabulary(d);
    const auto v = sentence_vector(d.sentences[0], vocab);
    CHECK(v.weights == std::map<std::string, double>{{"fox", 2.0}, {"jumps", 1.0}});
    CHECK(v.dim == vocab.size());
    CHECK(sentence_vector(d.sentences[1], vocab).is_zero());
}

TEST_CASE("identical sentences give identical vectors") {
    const auto d = make_document("d", "", "Red apples fall. Red apples fall.", Category::Science);
    const auto vocab = document_vocabulary(d);
    CHECK(sentence_vector(d.sentences[0], vocab).weights == sentence_vector(d.sentences[1], vocab).weights);
}

TEST_CASE("euclidean distance on sparse vectors") {
    CHECK(euclidean_distance(vec({}), vec({{"x", 3.0}, {"y", 4.0}})) == doctest::Approx(5.0));
    CHECK(euclidean_distance(vec({{"a", 1.0}}), vec({{"a", 1.0}})) == 0.0);
    CHECK(euclidean_distance(vec({{"a", 1.0}, {"b", 2.0}}), vec({{"b", 1.0}, {"c", 2.0}})) ==
          doctest::Approx(std::sqrt(6.0)));
}

TEST_CASE("euclidean distance is a metric on random sparse vectors") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> w(0.5, 4.0);
    auto random_vec = [&] {
        std::map<std::string, double> m;
        for (int i = 0; i < 6; ++i) {
            if (rng() % 2) m[std::string(1, static_cast<char>('a' + i))] = w(rng);
        }
        return vec(m);
    };
    for (int i = 0; i < 500; ++i) {
        const auto x = random_vec(), y = random_vec(), z = random_vec();
        CHECK(euclidean_distance(x, y) >= 0.0);
        CHECK(euclidean_distance(x, y) == doctest::Approx(euclidean_distance(y, x)));
        CHECK(euclidean_distance(x, z) <= euclidean_distance(x, y) + euclidean_distance(y, z) + 1e-12);
    }
}

TEST_CASE("filter configuration is validated") {
    FilterConfig bad;
    bad.support_size = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = {};
    bad.removal_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("support set of a five-sentence document is every sentence") {
    const auto d = make_document("d", "", "Alpha beta. Gamma delta. Alpha gamma. Beta delta. Alpha delta.",
                                 Category::Science);
    auto s = support_set(d);
    std::sort(s.begin(), s.end());
    CHECK(s == std::vector<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("a sentence repeating the dominant vocabulary joins the support set") {
    const auto d = make_document("d", "",
                                 "Budget council vote looms today. Rain falls on quiet farms. Budget council debate "
                                 "continues. Budget council vote. Wind blows across empty hills. Council vote delayed. "
                                 "Cats sleep through long afternoons. Budget vote passes. Dogs bark at passing trucks. "
                                 "Budget council meeting ends.",
                                 Category::Science);
    const auto s = support_set(d);
    CHECK(std::find(s.begin(), s.end(), std::size_t{3}) != s.end());
    CHECK(s.front() == 3);
}

TEST_CASE("equidistant sentences: the lower index wins the last support slot") {
    // Six identical sentences all sit at the same distance from the centroid.
    const auto d = make_document("d", "", "Same words here. Same words here. Same words here. Same words here. "
                                          "Same words here. Same words here.",
                                 Category::Science);
    auto s = support_set(d);
    std::sort(s.begin(), s.end());
    CHECK(s == std::vector<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("light filter removes floor(10%) of body sentences") {
    std::mt19937_64 rng(11);
    const auto d20 = make_document("d", "Headline here", random_document_body(rng, 20), Category::Crime);
    CHECK(light_filter(d20).sentences.size() == 1 + 18);
    const auto d5 = make_document("d", "", random_document_body(rng, 5), Category::Crime);
    CHECK(light_filter(d5).sentences.size() == 5);
}

TEST_CASE("light filter count law and re-indexing on random documents") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + rng() % 120;
        const bool titled = rng() % 2;
        const auto d = make_document("r", titled ? "A headline" : "", random_document_body(rng, n), Category::Sports);
        REQUIRE(d.body_sentence_count() == n);
        const auto out = light_filter(d);
        CHECK(out.sentences.size() == (titled ? 1 : 0) + n - n / 10);
        for (std::size_t i = 0; i < out.sentences.size(); ++i) CHECK(out.sentences[i].index == i);
        if (titled) CHECK(out.sentences.front().from_title);
        // Survivors keep their relative order.
        const auto before = texts(d);
        const auto after = texts(out);
        std::size_t j = 0;
        for (const auto& t : after) {
            while (j < before.size() && before[j] != t) ++j;
            CHECK(j < before.size());
            ++j;
        }
        // Filtering again removes floor(10%) of what is left.
        const auto again = light_filter(out);
        CHECK(again.sentences.size() == out.sentences.size() - out.body_sentence_count() / 10);
    }
}

TEST_CASE("the off-topic planted sentence is removed, matching a brute-force oracle") {
    const auto f = test::off_topic_plant();
    const auto rel = sentence_relevance(f.doc);
    const auto oracle = test::brute_force_relevance(f.doc);
    REQUIRE(rel.size() == oracle.size());
    for (std::size_t i = 0; i < rel.size(); ++i) CHECK(rel[i] == doctest::Approx(oracle[i]));
    const auto farthest = static_cast<std::size_t>(std::max_element(oracle.begin(), oracle.end()) - oracle.begin());
    CHECK(farthest == f.planted_sentence);

    const auto out = light_filter(f.doc);
    CHECK(out.sentences.size() == f.doc.sentences.size() - 1);
    for (const auto& s : out.sentences) {
        for (const auto& t : s.tokens) CHECK(t.lower != "penguins");
    }
}

TEST_CASE("capitalized runs with and without connectors") {
    const auto d = make_document("d", "", "Shares in Bank of America rose.", Category::Business);
    const auto& toks = d.sentences[0].tokens;
    CHECK(capitalized_runs(toks, true) == std::vector<TokenRun>{{0, 1}, {2, 5}});
    CHECK(capitalized_runs(toks, false) == std::vector<TokenRun>{{0, 1}, {2, 3}, {4, 5}});
    CHECK(first_word_index(toks) == 0);
}

TEST_CASE("partial entity mentions are rewritten to the full name") {
    const auto d = make_document("d", "", "Fans loved Michael Jackson for years. Later, Jackson toured Asia.",
                                 Category::ArtAndCulture);
    const auto r = resolve_coreferences(d);
    CHECK(r.rewritten_mentions == 1);
    REQUIRE(r.document.sentences.size() == 2);
    const auto& s = r.document.sentences[1].tokens;
    CHECK(s[2].surface == "Michael");
    CHECK(s[3].surface == "Jackson");
    bool found = false;
    for (const auto& c : r.clusters) {
        if (c.canonical == "Michael Jackson") {
            found = true;
            CHECK(c.members == std::set<std::string>{"Jackson", "Michael Jackson"});
        }
    }
    CHECK(found);
}

TEST_CASE("ambiguous sub-mentions stay unchanged") {
    const auto d = make_document("d", "",
                                 "Fans loved Michael Jackson and Janet Jackson equally. Later, Jackson toured Asia.",
                                 Category::ArtAndCulture);
    const auto r = resolve_coreferences(d);
    CHECK(r.rewritten_mentions == 0);
    CHECK(texts(r.document) == texts(d));
}

TEST_CASE("documents without repeated entities are unchanged") {
    const auto d = make_document("d", "Quiet day", "Nothing happened in Paris today. The weather was mild.",
                                 Category::WorldPolitics);
    const auto out = normalize_coreferences(d);
    CHECK(texts(out) == texts(d));
}

TEST_CASE("co-reference rewriting keeps sentence count and non-mention tokens") {
    const auto d = make_document("d", "Jackson returns",
                                 "Critics praised Michael Jackson on Monday. Then Jackson sang. Michael Jackson bowed.",
                                 Category::ArtAndCulture);
    const auto out = normalize_coreferences(d);
    REQUIRE(out.sentences.size() == d.sentences.size());
    std::set<std::string> surface_forms;
    for (const auto& s : out.sentences) {
        for (std::size_t i = 0; i + 1 < s.tokens.size(); ++i) {
            if (s.tokens[i + 1].surface == "Jackson") surface_forms.insert(s.tokens[i].surface + " Jackson");
        }
        for (const auto& t : s.tokens) CHECK(!t.surface.empty());
    }
    CHECK(surface_forms == std::set<std::string>{"Michael Jackson"});
    CHECK(out.sentences[2].tokens.back().surface == ".");
}

TEST_CASE("preprocess applies each step only when enabled") {
    std::mt19937_64 rng(1);
    const auto d = make_document("d", "", random_document_body(rng, 30), Category::Health);
    PreprocessOptions off;
    off.coref = false;
    off.light_filter = false;
    CHECK(preprocess(d, off).sentences.size() == 30);
    PreprocessOptions on;
    CHECK(preprocess(d, on).sentences.size() == 27);
}
