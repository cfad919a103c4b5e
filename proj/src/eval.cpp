#include "ake/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ake {

namespace {

std::vector<std::string> normalized_prefix(const std::vector<std::string>& phrases, std::size_t k) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& p : phrases) {
        if (out.size() == k) break;
        auto n = normalize_phrase(p);
        if (seen.insert(n).second) out.push_back(std::move(n));
    }
    return out;
}

VoteMap normalized_votes(const VoteMap& gold) {
    VoteMap out;
    for (const auto& [p, v] : gold) {
        auto& slot = out[normalize_phrase(p)];
        slot = std::max(slot, v);
    }
    return out;
}

std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string percent(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << v * 100.0 << '%';
    return s.str();
}

}  // namespace

double dcg(std::span<const double> rels, DcgForm form) {
    double total = 0.0;
    for (std::size_t i = 0; i < rels.size(); ++i) {
        const double rank = static_cast<double>(i + 1);
        if (form == DcgForm::Printed) {
            total += i == 0 ? rels[i] : rels[i] / std::log2(rank);
        } else {
            total += rels[i] / std::log2(rank + 1.0);
        }
    }
    return total;
}

double precision_at_k(const std::vector<std::string>& extracted, const VoteMap& gold, std::size_t k) {
    const auto top = normalized_prefix(extracted, k);
    if (top.empty()) return 0.0;
    const auto votes = normalized_votes(gold);
    const auto tp = std::count_if(top.begin(), top.end(), [&](const std::string& p) { return votes.contains(p); });
    return static_cast<double>(tp) / static_cast<double>(top.size());
}

double ndcg(const std::vector<std::string>& extracted, const VoteMap& gold, std::size_t k, DcgForm form) {
    if (gold.empty()) throw std::invalid_argument("nDCG needs a non-empty gold vote map");
    const auto votes = normalized_votes(gold);
    std::vector<double> rels;
    for (const auto& p : normalized_prefix(extracted, k)) {
        const auto it = votes.find(p);
        rels.push_back(it == votes.end() ? 0.0 : static_cast<double>(it->second));
    }
    std::vector<double> ideal;
    for (const auto& [p, v] : votes) ideal.push_back(static_cast<double>(v));
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    if (ideal.size() > k) ideal.resize(k);
    const double idcg = dcg(ideal, form);
    if (idcg <= 0.0) return 0.0;
    return dcg(rels, form) / idcg;
}

std::vector<double> human_trial_ndcgs(const std::vector<std::string>& selections, const VoteMap& gold,
                                      std::size_t trials, std::size_t k, std::uint64_t seed, DcgForm form) {
    auto order = normalized_prefix(selections, k);
    std::mt19937_64 rng(seed);
    std::vector<double> out;
    out.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * i) >> 64);
            std::swap(order[i - 1], order[j]);
        }
        out.push_back(ndcg(order, gold, k, form));
    }
    return out;
}

double human_baseline_ndcg(const std::vector<std::vector<std::string>>& annotators, const VoteMap& gold,
                           std::size_t trials, std::size_t k, std::uint64_t seed, DcgForm form) {
    if (annotators.empty()) throw std::invalid_argument("human baseline needs at least one annotator");
    if (trials == 0) throw std::invalid_argument("human baseline needs at least one trial");
    double total = 0.0;
    for (std::size_t a = 0; a < annotators.size(); ++a) {
        const auto scores = human_trial_ndcgs(annotators[a], gold, trials, k, mix(seed ^ mix(a)), form);
        total += std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
    }
    return total / static_cast<double>(annotators.size());
}

double human_baseline_for_stories(const std::vector<Hit>& good_hits, const StoryIndex& stories,
                                  const GoldStandard& gold, const std::vector<std::string>& story_ids,
                                  std::size_t trials, std::size_t k, std::uint64_t seed, DcgForm form) {
    const std::set<std::string> wanted(story_ids.begin(), story_ids.end());
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& h : good_hits) {
        if (!wanted.contains(h.story_id)) continue;
        const auto* g = gold.find(h.story_id);
        const auto doc = stories.find(h.story_id);
        if (!g || g->votes.empty() || doc == stories.end()) continue;
        std::vector<std::string> phrases;
        for (const auto& s : h.selections) {
            if (auto text = selection_text(*doc->second, s)) phrases.push_back(std::move(*text));
        }
        if (phrases.empty()) continue;
        total += human_baseline_ndcg({phrases}, g->votes, trials, k, mix(seed ^ std::hash<std::string>{}(h.hit_id)), form);
        ++count;
    }
    if (count == 0) throw std::invalid_argument("no annotator selections for the requested stories");
    return total / static_cast<double>(count);
}

// ---------------------------------------------------------------------------

nlohmann::json EvalReport::to_json(bool per_story) const {
    nlohmann::json j{{"condition", condition},
                     {"k", k},
                     {"stories_evaluated", stories.size()},
                     {"macro_precision", macro_precision},
                     {"macro_ndcg", macro_ndcg},
                     {"empty_extractions", empty_extractions},
                     {"skipped_without_gold", skipped_without_gold}};
    if (per_story) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& s : stories) {
            arr.push_back({{"story_id", s.story_id}, {"precision", s.precision}, {"ndcg", s.ndcg}, {"extracted", s.extracted}});
        }
        j["stories"] = std::move(arr);
    }
    return j;
}

EvalReport evaluate(const KeyphraseModel& model, const Corpus& test_docs, const GoldStandard& gold,
                    const FeatureResources& res, const EvalOptions& opts) {
    EvalReport report;
    report.condition = opts.condition;
    report.k = opts.k;
    ExtractOptions xo;
    xo.k = opts.k;
    xo.preprocess = opts.preprocess;
    for (const auto& doc : test_docs) {
        const auto* g = gold.find(doc.id);
        if (!g || g->votes.empty()) {
            ++report.skipped_without_gold;
            continue;
        }
        StoryResult r;
        r.story_id = doc.id;
        for (auto& p : extract_top_k(doc, model, res, xo)) r.extracted.push_back(std::move(p.phrase));
        if (r.extracted.empty()) ++report.empty_extractions;
        r.precision = precision_at_k(r.extracted, g->votes, opts.k);
        r.ndcg = ndcg(r.extracted, g->votes, opts.k, opts.form);
        report.stories.push_back(std::move(r));
    }
    if (!report.stories.empty()) {
        for (const auto& s : report.stories) {
            report.macro_precision += s.precision;
            report.macro_ndcg += s.ndcg;
        }
        report.macro_precision /= static_cast<double>(report.stories.size());
        report.macro_ndcg /= static_cast<double>(report.stories.size());
    }
    return report;
}

// ---------------------------------------------------------------------------

Condition parse_condition(std::string_view text) {
    Condition c;
    std::uint8_t bits = static_cast<std::uint8_t>(FeatureGroup::Baseline);
    std::string item;
    auto flush = [&] {
        const std::string name = normalize_phrase(item);
        item.clear();
        if (name.empty() || name == "baseline") return;
        if (name == "ss") bits |= static_cast<std::uint8_t>(FeatureGroup::Shallow);
        else if (name == "tc") bits |= static_cast<std::uint8_t>(FeatureGroup::TopCategory);
        else if (name == "rs") bits |= static_cast<std::uint8_t>(FeatureGroup::Rhetorical);
        else if (name == "sc") bits |= static_cast<std::uint8_t>(FeatureGroup::SubCategory);
        else if (name == "cn") c.coref = true;
        else if (name == "lf") c.light_filter = true;
        else throw std::invalid_argument("unknown condition component '" + name + "' (expected baseline, ss, tc, rs, sc, cn, lf)");
    };
    for (char ch : text) {
        if (ch == '+' || ch == ',') {
            flush();
        } else {
            item.push_back(ch);
        }
    }
    flush();
    c.mask = FeatureMask(bits);

    c.name = "Baseline";
    const std::pair<FeatureGroup, const char*> groups[] = {{FeatureGroup::Shallow, "SS"},
                                                           {FeatureGroup::TopCategory, "TC"},
                                                           {FeatureGroup::Rhetorical, "RS"},
                                                           {FeatureGroup::SubCategory, "SC"}};
    for (const auto& [g, label] : groups) {
        if (c.mask.has(g)) c.name += std::string(" + ") + label;
    }
    if (c.coref) c.name += " + CN";
    if (c.light_filter) c.name += " + LF";
    return c;
}

std::vector<Condition> standard_conditions() {
    std::vector<Condition> out;
    for (const char* spec : {"baseline", "baseline+ss", "baseline+ss+tc", "baseline+ss+tc+rs", "baseline+ss+tc+rs+sc",
                             "baseline+ss+tc+rs+sc+cn", "baseline+ss+tc+rs+cn+lf", "baseline+ss+tc+rs+sc+cn+lf"}) {
        out.push_back(parse_condition(spec));
    }
    return out;
}

std::vector<Condition> parse_conditions(std::string_view text) {
    if (normalize_phrase(text) == "standard") return standard_conditions();
    std::vector<Condition> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find(';', start), text.size());
        const auto part = text.substr(start, end - start);
        if (part.find_first_not_of(" \t") != std::string_view::npos) out.push_back(parse_condition(part));
        start = end + 1;
    }
    if (out.empty()) throw std::invalid_argument("no conditions given");
    return out;
}

std::vector<AblationRow> run_ablation(const Corpus& train_docs, const Corpus& test_docs, const GoldStandard& gold,
                                      const FeatureResources& res, const std::vector<Condition>& conditions,
                                      const AblationConfig& cfg) {
    if (conditions.empty()) throw std::invalid_argument("no conditions given");
    const auto positives = positive_labels(gold, cfg.threshold);
    std::vector<AblationRow> rows;
    for (const auto& cond : conditions) {
        TrainingConfig tc;
        tc.mask = cond.mask;
        tc.preprocess.coref = cond.coref;
        tc.preprocess.light_filter = cond.light_filter;
        tc.preprocess.filter = cfg.filter;
        tc.features = cfg.features;
        tc.bagging = cfg.bagging;
        tc.balance = cfg.balance;
        const auto model = train_model(train_docs, positives, res, tc);

        EvalOptions eo;
        eo.k = cfg.k;
        eo.form = cfg.form;
        eo.condition = cond.name;
        rows.push_back(AblationRow{cond, evaluate(model, test_docs, gold, res, eo)});
    }
    return rows;
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
    std::size_t width = std::string("Condition").size();
    for (const auto& r : rows) width = std::max(width, r.condition.name.size());
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(width)) << "Condition" << "  " << std::right << std::setw(8) << "nDCG"
        << "  " << std::setw(9) << "Precision" << '\n';
    for (const auto& r : rows) {
        out << std::left << std::setw(static_cast<int>(width)) << r.condition.name << "  " << std::right << std::setw(8)
            << percent(r.report.macro_ndcg) << "  " << std::setw(9) << percent(r.report.macro_precision) << '\n';
    }
    return out.str();
}

nlohmann::json ablation_json(const std::vector<AblationRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        auto j = r.report.to_json(false);
        j["mask"] = r.condition.mask.to_string();
        j["coref"] = r.condition.coref;
        j["light_filter"] = r.condition.light_filter;
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace ake
