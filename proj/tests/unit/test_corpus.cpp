#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"

#include "ake/corpus.hpp"

using namespace ake;

namespace {

std::vector<std::string> normalized(const std::vector<CandidatePhrase>& cands) {
    std::vector<std::string> out;
    for (const auto& c : cands) out.push_back(c.normalized);
    return out;
}

}  // namespace

TEST_CASE("category labels round-trip and parse case-insensitively") {
    for (auto c : all_categories()) CHECK(parse_category(category_label(c)) == c);
    CHECK(parse_category("world politics") == Category::WorldPolitics);
    CHECK(parse_category("art AND culture") == Category::ArtAndCulture);
    CHECK_FALSE(parse_category("Cooking").has_value());
}

TEST_CASE("bundled stoplist covers common function words") {
    const auto& stop = Stoplist::english();
    CHECK(stop.size() > 250);
    for (const char* w : {"the", "of", "in", "and", "a"}) CHECK(stop.contains(w));
    CHECK_FALSE(stop.contains("fox"));
}

TEST_CASE("tokenizer keeps punctuation as separate tokens with source offsets") {
    const std::string text = "Larry Page, CEO of Google!";
    const auto toks = tokenize(text, Stoplist::english());
    REQUIRE(toks.size() == 7);
    CHECK(toks[0].surface == "Larry");
    CHECK(toks[0].lower == "larry");
    CHECK(toks[2].is_punct());
    CHECK(toks[4].is_stopword);
    CHECK(toks[6].surface == "!");
    for (const auto& t : toks) {
        CHECK(t.span.end > t.span.start);
        CHECK(text.substr(t.span.start, t.span.end - t.span.start) == t.surface);
    }
}

TEST_CASE("segmentation splits at terminal punctuation before a capital") {
    const auto s = segment_and_tokenize("A b", "C d. E f!");
    REQUIRE(s.size() == 3);
    CHECK(s[0].from_title);
    CHECK_FALSE(s[1].from_title);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i].index == i);
}

TEST_CASE("abbreviations do not end a sentence") {
    CHECK(segment_and_tokenize("", "Mr. Smith left.").size() == 1);
    CHECK(segment_and_tokenize("X", "").size() == 1);
    CHECK_THROWS_AS(segment_and_tokenize("", ""), std::invalid_argument);
}

TEST_CASE("hand-labeled segmentation fixture agrees on every boundary") {
    const std::vector<std::string> expected = {
        "Mr. Smith went to Washington on Monday.",
        "He met Dr. Jones at 5 p.m. near the White House.",
        "The U.S. economy grew by 2.5 percent last year!",
        "Was it enough?",
        "Analysts at Goldman Sachs Inc. were not sure.",
        "Prices rose 3.2 percent in March.",
        "St. Louis fans cheered loudly.",
        "The vote was 52 to 48.",
        "\"We won,\" she said.",
        "Gen. Patton's diaries were sold at auction.",
        "Sales of the iPhone fell sharply.",
        "Why did that happen?",
        "Nobody knows for sure.",
        "The company, e.g. Apple, declined to comment.",
        "Prof. Lee disagreed with that view.",
        "Revenue hit $4.5 billion.",
        "Meanwhile, Ms. Green resigned.",
        "It was a surprise!",
        "The team moved to Jan. 5 for the final.",
        "Everyone agreed in the end.",
    };
    std::string body;
    for (const auto& s : expected) body += (body.empty() ? "" : " ") + s;
    const auto sentences = segment_and_tokenize("", body);
    REQUIRE(sentences.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const auto& toks = sentences[i].tokens;
        const auto first = toks.front().span.start;
        const auto last = toks.back().span.end;
        // Offsets count from the title plus its separator, which is empty here.
        CHECK(body.substr(first - 1, last - first) == expected[i]);
    }
}

TEST_CASE("documents expose token and body-sentence counts") {
    const auto d = make_document("d1", "Title words", "One two. Three four five.", Category::Sports);
    CHECK(d.sentences.size() == 3);
    CHECK(d.body_sentence_count() == 2);
    CHECK(d.token_count() == 2 + 3 + 4);
}

TEST_CASE("ingest reads JSONL, rejects bad records with line numbers") {
    test::TempDir dir;
    const auto good = dir / "good.jsonl";
    test::write_file(good,
                     R"({"id":"a","title":"First","body":"Body one.","category":"Sports"})"
                     "\n"
                     R"({"id":"b","title":"Second","body":"Body two.","category":"U.S. Politics"})"
                     "\n");
    const auto r = ingest_corpus(good);
    REQUIRE(r.documents.size() == 2);
    CHECK(r.documents[1].category == Category::USPolitics);
}

TEST_CASE("ingest errors name the line and the valid labels") {
    try {
        ingest_corpus_text(R"({"id":"a","title":"T","body":"B.","category":"Cooking"})");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 1") != std::string::npos);
        CHECK(msg.find("World Politics") != std::string::npos);
    }
    CHECK_THROWS_AS(ingest_corpus_text("{\"id\":\"a\"}\n{not json"), DataError);
    CHECK_THROWS_AS(ingest_corpus_text(R"({"id":"a","title":"T","body":"B.","category":"Sports"})"
                                       "\n"
                                       R"({"id":"a","title":"U","body":"C.","category":"Sports"})"),
                    DataError);
    const auto empty = ingest_corpus_text("");
    CHECK(empty.documents.empty());
    CHECK_FALSE(empty.warnings.empty());
    CHECK_THROWS_AS(ingest_corpus("/nonexistent/corpus.jsonl"), DataError);
}

TEST_CASE("candidate generation follows the stopword and punctuation rules") {
    const auto d = make_document("d", "", "The quick brown fox.", Category::Science);
    const auto names = normalized(generate_candidates(d));
    const std::set<std::string> got(names.begin(), names.end());
    const std::set<std::string> want = {"quick", "brown", "fox", "quick brown", "brown fox", "quick brown fox"};
    CHECK(got == want);

    const auto stop_only = make_document("d", "", "In of the.", Category::Science);
    CHECK(generate_candidates(stop_only).empty());

    const auto comma = make_document("d", "", "Apples, pears grow.", Category::Science);
    for (const auto& n : normalized(generate_candidates(comma))) CHECK(n != "apples pears");
}

TEST_CASE("repeated phrases merge into one candidate with every occurrence") {
    const auto d = make_document("d", "News", "Larry Page spoke. Others listened. Larry Page left.", Category::Technology);
    const auto cands = generate_candidates(d);
    const auto it = std::find_if(cands.begin(), cands.end(), [](const auto& c) { return c.normalized == "larry page"; });
    REQUIRE(it != cands.end());
    REQUIRE(it->occurrences.size() == 2);
    CHECK(it->occurrences[0] == Occurrence{1, 0});
    CHECK(it->occurrences[1] == Occurrence{3, 0});
}

TEST_CASE("candidate properties hold on random documents") {
    std::mt19937_64 rng(7);
    const std::vector<std::string> words = {"the", "market", "of", "rose", "Apple", "and", "sharply", "in",
                                            "growth", "a", "Chicago", "fell", ",", "profits", "to"};
    for (int trial = 0; trial < 50; ++trial) {
        std::string body;
        const int n = 5 + static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) body += words[rng() % words.size()] + " ";
        body += "end.";
        const auto d = make_document("r", "", body, Category::Business);
        const auto a = generate_candidates(d);
        const auto b = generate_candidates(d);
        CHECK(normalized(a) == normalized(b));
        for (const auto& c : a) {
            REQUIRE(!c.tokens.empty());
            CHECK(c.length() <= kMaxPhraseLength);
            CHECK_FALSE(c.tokens.front().is_stopword);
            CHECK_FALSE(c.tokens.back().is_stopword);
            for (const auto& occ : c.occurrences) {
                const auto& toks = d.sentences[occ.sentence].tokens;
                REQUIRE(occ.offset + c.length() <= toks.size());
                std::vector<Token> span(toks.begin() + static_cast<std::ptrdiff_t>(occ.offset),
                                        toks.begin() + static_cast<std::ptrdiff_t>(occ.offset + c.length()));
                CHECK(join_lower(span) == c.normalized);
            }
        }
    }
}

TEST_CASE("normalize_phrase folds case and whitespace") {
    CHECK(normalize_phrase("  Larry \t PAGE ") == "larry page");
    CHECK(normalize_phrase("") == "");
}
