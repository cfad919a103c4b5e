#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ake/classifier.hpp"
#include "ake/corpus.hpp"
#include "ake/features.hpp"
#include "ake/goldstandard.hpp"
#include "ake/preprocess.hpp"

namespace ake {

struct TrainingConfig {
    FeatureMask mask = FeatureMask::all();
    PreprocessOptions preprocess;
    FeatureOptions features;
    BaggingParams bagging;
    /// Weight positives by negatives/positives so both classes carry equal mass.
    bool balance = false;
};

/// Everything needed to score candidates of unseen documents.
struct KeyphraseModel {
    FeatureMask mask = FeatureMask::all();
    PreprocessOptions preprocess;
    FeatureOptions features;
    PatternTable patterns;
    DocumentFrequencies df;
    Ensemble ensemble;
    std::size_t ngram_keys = 0;  // key count of the n-gram store used in training (0 = none)

    void write(std::ostream& out) const;
    static KeyphraseModel read(std::istream& in);
    void save(const std::filesystem::path& path) const;
    static KeyphraseModel load(const std::filesystem::path& path);
};

struct LabeledCandidates {
    std::vector<Instance> instances;
    std::vector<std::string> story_ids;  // parallel to instances
    std::vector<std::string> phrases;    // parallel to instances
};

/// Preprocesses every document, then turns each candidate into an instance
/// labeled by membership in that story's positive set. Stories absent from
/// `positives` contribute only negatives. Learns pattern ids into `patterns`.
LabeledCandidates build_training_set(const Corpus& processed, const PositiveSets& positives,
                                     const DocumentFrequencies& df, const FeatureResources& res, FeatureMask mask,
                                     const FeatureOptions& fopts, PatternTable& patterns);

KeyphraseModel train_model(const Corpus& train_docs, const PositiveSets& positives, const FeatureResources& res,
                           const TrainingConfig& cfg);

struct RankedPhrase {
    std::string phrase;   // normalized form
    std::string surface;  // as written at the representative occurrence
    double score = 0.0;
    double tfidf = 0.0;
    double first_occurrence = 0.0;
};

struct ExtractOptions {
    std::size_t k = 10;
    /// Replaces the model's preprocessing flags when set.
    std::optional<PreprocessOptions> preprocess;
    /// Whether the document was part of the model's document-frequency corpus.
    bool doc_in_corpus = false;
};

/// Top-k candidates by score; ties go to higher tfidf, then earlier first
/// occurrence, then the lexicographically smaller phrase.
std::vector<RankedPhrase> extract_top_k(const Document& doc, const KeyphraseModel& model, const FeatureResources& res,
                                        const ExtractOptions& opts = {});

/// Total order used to rank extracted phrases.
bool ranks_before(const RankedPhrase& a, const RankedPhrase& b);

}  // namespace ake
