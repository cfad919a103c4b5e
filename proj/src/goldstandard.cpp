#include "ake/goldstandard.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace ake {

namespace {

std::string slurp(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw DataError(std::string("cannot open ") + what + ": " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

std::size_t draw(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

void seeded_shuffle(std::vector<std::string>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[draw(rng, i)]);
}

bool span_valid(const Document& doc, const Selection& s) {
    return s.sentence < doc.sentences.size() && s.start_token < s.end_token &&
           s.end_token <= doc.sentences[s.sentence].tokens.size();
}

StoryGold story_gold_from_json(const nlohmann::json& j, std::string& id) {
    id = j.at("story_id").get<std::string>();
    StoryGold g;
    g.annotators = j.at("annotators").get<int>();
    if (g.annotators < 0) throw DataError("story " + id + ": negative annotator count");
    for (const auto& p : j.at("phrases")) {
        const std::string text = normalize_phrase(p.at("text").get<std::string>());
        const int votes = p.at("votes").get<int>();
        if (votes <= 0 || votes > g.annotators)
            throw DataError("story " + id + ": votes for '" + text + "' outside (0, annotators]");
        g.votes[text] = std::max(g.votes[text], votes);
    }
    return g;
}

}  // namespace

std::string_view hit_rule_name(HitRule r) {
    switch (r) {
        case HitRule::Stopword: return "stopword";
        case HitRule::LongSequence: return "long-sequence";
        case HitRule::FastCompletion: return "fast-completion";
        case HitRule::InvalidSpan: return "invalid-span";
        case HitRule::OverlappingSpans: return "overlapping-spans";
    }
    return "unknown";
}

StoryIndex index_stories(const Corpus& corpus) {
    StoryIndex idx;
    for (const auto& d : corpus) idx.emplace(d.id, &d);
    return idx;
}

std::optional<std::string> selection_text(const Document& doc, const Selection& s) {
    if (!span_valid(doc, s)) return std::nullopt;
    const auto& toks = doc.sentences[s.sentence].tokens;
    return join_lower(std::span<const Token>(toks.data() + s.start_token, s.size()));
}

std::vector<HitRule> check_hit(const Hit& hit, const StoryIndex& stories, const HitRules& rules) {
    const auto it = stories.find(hit.story_id);
    const Document* doc = it == stories.end() ? nullptr : it->second;

    bool stopword = false;
    bool too_long = false;
    bool invalid = false;
    for (const auto& s : hit.selections) {
        if (!doc || !span_valid(*doc, s)) {
            invalid = true;
            if (s.size() > rules.max_words) too_long = true;
            continue;
        }
        const auto& toks = doc->sentences[s.sentence].tokens;
        std::size_t words = 0;
        bool content = false;
        for (std::size_t i = s.start_token; i < s.end_token; ++i) {
            if (toks[i].is_punct()) continue;
            ++words;
            if (!toks[i].is_stopword) content = true;
        }
        if (!content) stopword = true;
        if (words > rules.max_words) too_long = true;
    }

    bool overlap = false;
    std::vector<Selection> sorted = hit.selections;
    std::sort(sorted.begin(), sorted.end(), [](const Selection& a, const Selection& b) {
        return std::tie(a.sentence, a.start_token) < std::tie(b.sentence, b.start_token);
    });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].sentence == sorted[i - 1].sentence && sorted[i].start_token < sorted[i - 1].end_token) overlap = true;
    }

    std::vector<HitRule> reasons;
    if (stopword) reasons.push_back(HitRule::Stopword);
    if (too_long) reasons.push_back(HitRule::LongSequence);
    if (hit.duration_seconds < rules.min_seconds) reasons.push_back(HitRule::FastCompletion);
    if (invalid) reasons.push_back(HitRule::InvalidSpan);
    if (overlap) reasons.push_back(HitRule::OverlappingSpans);
    return reasons;
}

FilterResult filter_bad_hits(const std::vector<Hit>& hits, const StoryIndex& stories, const HitRules& rules) {
    FilterResult out;
    for (const auto& h : hits) {
        auto reasons = check_hit(h, stories, rules);
        if (reasons.empty()) {
            out.good.push_back(h);
        } else {
            out.rejected.push_back(RejectedHit{h, std::move(reasons)});
        }
    }
    return out;
}

const StoryGold* GoldStandard::find(const std::string& story_id) const {
    const auto it = stories.find(story_id);
    return it == stories.end() ? nullptr : &it->second;
}

double GoldStandard::mean_phrases_per_story() const {
    if (stories.empty()) return 0.0;
    double total = 0.0;
    for (const auto& [id, g] : stories) total += static_cast<double>(g.votes.size());
    return total / static_cast<double>(stories.size());
}

GoldStandard aggregate(const std::vector<Hit>& good_hits, const StoryIndex& stories) {
    GoldStandard gs;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& h : good_hits) {
        if (!seen.emplace(h.worker_id, h.story_id).second)
            throw DataError("worker " + h.worker_id + " has more than one HIT for story " + h.story_id);
        const auto it = stories.find(h.story_id);
        if (it == stories.end()) throw DataError("HIT " + h.hit_id + " refers to unknown story " + h.story_id);
        std::set<std::string> phrases;
        for (const auto& s : h.selections) {
            auto text = selection_text(*it->second, s);
            if (!text) throw DataError("HIT " + h.hit_id + " has a selection outside story " + h.story_id);
            if (!text->empty()) phrases.insert(std::move(*text));
        }
        auto& g = gs.stories[h.story_id];
        ++g.annotators;
        for (const auto& p : phrases) ++g.votes[p];
    }
    return gs;
}

int required_votes(int annotators, double threshold) {
    if (annotators <= 0) return 0;
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("agreement threshold must be in [0, 1]");
    constexpr long long kScale = 1000000;
    const long long t = std::llround(threshold * static_cast<double>(kScale));
    return static_cast<int>((t * annotators + kScale - 1) / kScale);
}

PositiveSets positive_labels(const GoldStandard& gs, double threshold) {
    PositiveSets out;
    for (const auto& [id, g] : gs.stories) {
        auto& set = out[id];
        const int need = std::max(1, required_votes(g.annotators, threshold));
        for (const auto& [phrase, votes] : g.votes) {
            if (votes >= need) set.insert(phrase);
        }
    }
    return out;
}

StorySplit split_stories(const std::vector<std::pair<std::string, Category>>& stories, const SplitSpec& spec) {
    if (spec.train + spec.test > stories.size())
        throw std::invalid_argument("split asks for " + std::to_string(spec.train) + " train + " +
                                    std::to_string(spec.test) + " test stories but only " +
                                    std::to_string(stories.size()) + " exist");
    std::mt19937_64 rng(spec.seed);
    StorySplit out;

    std::map<Category, std::vector<std::string>> by_cat;
    for (const auto& [id, cat] : stories) by_cat[cat].push_back(id);
    const std::size_t per_train = spec.train / kCategoryCount;
    const std::size_t per_test = spec.test / kCategoryCount;
    bool stratify = spec.train % kCategoryCount == 0 && spec.test % kCategoryCount == 0 &&
                    by_cat.size() == kCategoryCount;
    for (const auto& [cat, ids] : by_cat) {
        if (ids.size() < per_train + per_test) stratify = false;
    }

    if (stratify) {
        out.stratified = true;
        for (auto& [cat, ids] : by_cat) {
            std::sort(ids.begin(), ids.end());
            seeded_shuffle(ids, rng);
            out.train.insert(out.train.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(per_train));
            out.test.insert(out.test.end(), ids.begin() + static_cast<std::ptrdiff_t>(per_train),
                            ids.begin() + static_cast<std::ptrdiff_t>(per_train + per_test));
        }
        return out;
    }

    std::vector<std::string> ids;
    for (const auto& s : stories) ids.push_back(s.first);
    std::sort(ids.begin(), ids.end());
    seeded_shuffle(ids, rng);
    out.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(spec.train));
    out.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(spec.train),
                    ids.begin() + static_cast<std::ptrdiff_t>(spec.train + spec.test));
    return out;
}

StorySplit split_stories(const Corpus& corpus, const SplitSpec& spec) {
    std::vector<std::pair<std::string, Category>> stories;
    for (const auto& d : corpus) stories.emplace_back(d.id, d.category);
    return split_stories(stories, spec);
}

// ---------------------------------------------------------------------------

nlohmann::json hit_to_json(const Hit& h) {
    nlohmann::json sel = nlohmann::json::array();
    for (const auto& s : h.selections)
        sel.push_back({{"sentence", s.sentence}, {"start_token", s.start_token}, {"end_token", s.end_token}});
    return {{"hit_id", h.hit_id},
            {"worker_id", h.worker_id},
            {"story_id", h.story_id},
            {"selections", sel},
            {"duration_seconds", h.duration_seconds}};
}

Hit hit_from_json(const nlohmann::json& j) {
    Hit h;
    h.hit_id = j.at("hit_id").get<std::string>();
    h.worker_id = j.at("worker_id").get<std::string>();
    h.story_id = j.at("story_id").get<std::string>();
    h.duration_seconds = j.at("duration_seconds").get<double>();
    for (const auto& s : j.at("selections")) {
        h.selections.push_back(Selection{s.at("sentence").get<std::size_t>(), s.at("start_token").get<std::size_t>(),
                                         s.at("end_token").get<std::size_t>()});
    }
    return h;
}

std::vector<Hit> parse_hits(std::string_view jsonl) {
    std::vector<Hit> hits;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        try {
            hits.push_back(hit_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("HIT line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return hits;
}

std::vector<Hit> read_hits(const std::filesystem::path& path) { return parse_hits(slurp(path, "HIT file")); }

void write_hits(std::ostream& out, const std::vector<Hit>& hits) {
    for (const auto& h : hits) out << hit_to_json(h).dump() << '\n';
}

void write_gold(std::ostream& out, const GoldStandard& gs) {
    for (const auto& [id, g] : gs.stories) {
        std::vector<std::pair<std::string, int>> phrases(g.votes.begin(), g.votes.end());
        std::stable_sort(phrases.begin(), phrases.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [text, votes] : phrases) arr.push_back({{"text", text}, {"votes", votes}});
        out << nlohmann::json{{"story_id", id}, {"phrases", arr}, {"annotators", g.annotators}}.dump() << '\n';
    }
}

GoldStandard parse_gold(std::string_view text) {
    GoldStandard gs;
    auto add = [&](const nlohmann::json& j) {
        std::string id;
        auto g = story_gold_from_json(j, id);
        if (!gs.stories.emplace(id, std::move(g)).second) throw DataError("duplicate gold record for story " + id);
    };
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '[') {
        try {
            for (const auto& j : nlohmann::json::parse(text)) add(j);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("gold file: ") + e.what());
        }
        return gs;
    }
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        try {
            add(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("gold line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return gs;
}

GoldStandard read_gold(const std::filesystem::path& path) { return parse_gold(slurp(path, "gold file")); }

}  // namespace ake
