#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ake/extractor.hpp"
#include "ake/goldstandard.hpp"

namespace ake {

enum class DcgForm {
    Printed,       // rel_1 + sum_{i>=2} rel_i / log2(i)
    Conventional,  // sum_{i>=1} rel_i / log2(i + 1)
};

using VoteMap = std::map<std::string, int>;

double dcg(std::span<const double> rels, DcgForm form = DcgForm::Printed);

/// TP / |extracted| over the first k phrases after case and whitespace
/// normalization; 0 when nothing was extracted.
double precision_at_k(const std::vector<std::string>& extracted, const VoteMap& gold, std::size_t k = 10);

/// DCG of the extracted phrases' votes over the DCG of the k highest votes.
/// Throws std::invalid_argument for an empty gold map.
double ndcg(const std::vector<std::string>& extracted, const VoteMap& gold, std::size_t k = 10,
            DcgForm form = DcgForm::Printed);

/// nDCG of `trials` seeded random orderings of one annotator's selections,
/// truncated to k before shuffling.
std::vector<double> human_trial_ndcgs(const std::vector<std::string>& selections, const VoteMap& gold,
                                      std::size_t trials = 100, std::size_t k = 10, std::uint64_t seed = 1,
                                      DcgForm form = DcgForm::Printed);

/// Mean over annotators of each annotator's mean trial nDCG.
double human_baseline_ndcg(const std::vector<std::vector<std::string>>& annotators, const VoteMap& gold,
                           std::size_t trials = 100, std::size_t k = 10, std::uint64_t seed = 1,
                           DcgForm form = DcgForm::Printed);

/// Human baseline over every good HIT of the listed stories that have gold data.
double human_baseline_for_stories(const std::vector<Hit>& good_hits, const StoryIndex& stories,
                                  const GoldStandard& gold, const std::vector<std::string>& story_ids,
                                  std::size_t trials = 100, std::size_t k = 10, std::uint64_t seed = 1,
                                  DcgForm form = DcgForm::Printed);

struct StoryResult {
    std::string story_id;
    std::vector<std::string> extracted;
    double precision = 0.0;
    double ndcg = 0.0;
};

struct EvalReport {
    std::string condition;
    std::size_t k = 10;
    std::vector<StoryResult> stories;
    double macro_precision = 0.0;
    double macro_ndcg = 0.0;
    std::size_t empty_extractions = 0;
    std::size_t skipped_without_gold = 0;

    nlohmann::json to_json(bool per_story = true) const;
};

struct EvalOptions {
    std::size_t k = 10;
    DcgForm form = DcgForm::Printed;
    std::optional<PreprocessOptions> preprocess;
    std::string condition = "model";
};

/// Extracts from each document and scores it against its gold votes; stories
/// without gold records are skipped and counted.
EvalReport evaluate(const KeyphraseModel& model, const Corpus& test_docs, const GoldStandard& gold,
                    const FeatureResources& res, const EvalOptions& opts = {});

struct Condition {
    std::string name;
    FeatureMask mask;
    bool coref = false;
    bool light_filter = false;
};

/// "baseline+ss+tc+rs+sc+cn+lf" style: feature groups plus cn (co-reference
/// normalization) and lf (light filtering). Baseline is always included.
Condition parse_condition(std::string_view text);
/// The eight standard rows, from Baseline up to every group with both preprocessing steps.
std::vector<Condition> standard_conditions();
/// "standard" or a ';'-separated list of conditions.
std::vector<Condition> parse_conditions(std::string_view text);

struct AblationConfig {
    std::size_t k = 10;
    DcgForm form = DcgForm::Printed;
    BaggingParams bagging;
    bool balance = false;
    FeatureOptions features;
    FilterConfig filter;
    double threshold = 0.90;
};

struct AblationRow {
    Condition condition;
    EvalReport report;
};

/// Trains and evaluates every condition on the same train/test stories.
std::vector<AblationRow> run_ablation(const Corpus& train_docs, const Corpus& test_docs, const GoldStandard& gold,
                                      const FeatureResources& res, const std::vector<Condition>& conditions,
                                      const AblationConfig& cfg = {});

std::string format_ablation_table(const std::vector<AblationRow>& rows);
nlohmann::json ablation_json(const std::vector<AblationRow>& rows);

}  // namespace ake
