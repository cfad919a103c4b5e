#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ake/corpus.hpp"

namespace ake {

/// A token span inside one sentence of the original (unfiltered) story.
/// end_token is exclusive.
struct Selection {
    std::size_t sentence = 0;
    std::size_t start_token = 0;
    std::size_t end_token = 0;

    std::size_t size() const { return end_token > start_token ? end_token - start_token : 0; }
    friend bool operator==(const Selection&, const Selection&) = default;
};

struct Hit {
    std::string hit_id;
    std::string worker_id;
    std::string story_id;
    std::vector<Selection> selections;
    double duration_seconds = 0.0;

    friend bool operator==(const Hit&, const Hit&) = default;
};

enum class HitRule : std::uint8_t { Stopword, LongSequence, FastCompletion, InvalidSpan, OverlappingSpans };

/// "stopword", "long-sequence", "fast-completion", "invalid-span", "overlapping-spans".
std::string_view hit_rule_name(HitRule r);

struct HitRules {
    std::size_t max_words = 10;
    double min_seconds = 30.0;
};

struct RejectedHit {
    Hit hit;
    std::vector<HitRule> reasons;  // every rule that fired, in rule order

    HitRule first_reason() const { return reasons.front(); }
};

struct FilterResult {
    std::vector<Hit> good;
    std::vector<RejectedHit> rejected;
};

using StoryIndex = std::unordered_map<std::string, const Document*>;
StoryIndex index_stories(const Corpus& corpus);

/// Normalized text of a selection, or nothing if the span is outside the story.
std::optional<std::string> selection_text(const Document& doc, const Selection& s);

/// Rules checked for one HIT, in order. Stopword: a selection consisting only of
/// stopwords and punctuation. LongSequence: more than max_words word tokens.
/// FastCompletion: duration below min_seconds.
std::vector<HitRule> check_hit(const Hit& hit, const StoryIndex& stories, const HitRules& rules = {});
FilterResult filter_bad_hits(const std::vector<Hit>& hits, const StoryIndex& stories, const HitRules& rules = {});

struct StoryGold {
    std::map<std::string, int> votes;  // normalized phrase -> distinct workers
    int annotators = 0;
};

struct GoldStandard {
    std::map<std::string, StoryGold> stories;

    const StoryGold* find(const std::string& story_id) const;
    double mean_phrases_per_story() const;
};

/// Distinct-worker vote counts per story. Throws DataError when a worker has two
/// HITs for one story or a selection falls outside its story.
GoldStandard aggregate(const std::vector<Hit>& good_hits, const StoryIndex& stories);

/// Smallest vote count that is at least `threshold` of `annotators`, computed
/// in integer arithmetic on the threshold's millionths.
int required_votes(int annotators, double threshold = 0.90);

using PositiveSets = std::unordered_map<std::string, std::set<std::string>>;
PositiveSets positive_labels(const GoldStandard& gs, double threshold = 0.90);

struct SplitSpec {
    std::size_t train = 0;
    std::size_t test = 0;
    std::uint64_t seed = 1;
};

struct StorySplit {
    std::vector<std::string> train;
    std::vector<std::string> test;
    bool stratified = false;
};

/// Seeded shuffle of the story ids. Stratified by category when both counts are
/// multiples of the category count and every category can supply its share.
StorySplit split_stories(const std::vector<std::pair<std::string, Category>>& stories, const SplitSpec& spec);
StorySplit split_stories(const Corpus& corpus, const SplitSpec& spec);

// JSON records -------------------------------------------------------------

nlohmann::json hit_to_json(const Hit& h);
Hit hit_from_json(const nlohmann::json& j);
/// Line-delimited HIT records; errors name the line number.
std::vector<Hit> parse_hits(std::string_view jsonl);
std::vector<Hit> read_hits(const std::filesystem::path& path);
void write_hits(std::ostream& out, const std::vector<Hit>& hits);

/// One record per story: {story_id, phrases:[{text, votes}], annotators}.
void write_gold(std::ostream& out, const GoldStandard& gs);
/// Accepts line-delimited records or a single JSON array of them.
GoldStandard parse_gold(std::string_view text);
GoldStandard read_gold(const std::filesystem::path& path);

}  // namespace ake
