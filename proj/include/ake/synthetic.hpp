#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ake/corpus.hpp"
#include "ake/goldstandard.hpp"

namespace ake {

/// Knobs for the planted-signal corpus used by the ablation experiments.
struct SyntheticOptions {
    std::size_t docs_per_category = 6;
    std::size_t keys_per_doc = 4;
    std::size_t annotators = 10;
    std::size_t lm_mentions = 40;    // LM lines per planted phrase
    std::size_t lm_filler_lines = 1500;
    bool include_bad_hits = true;    // one fast HIT on every fifth story
    std::uint64_t seed = 20240501;
};

struct SyntheticRecord {
    std::string id;
    std::string title;
    std::string body;
    Category category = Category::Technology;
};

/// Each story plants key phrases drawn from the gazetteer, always in sentences
/// carrying rhetorical cues and frequent in the LM text, next to decoy phrases
/// with the same term frequency, document frequency, length and positions but
/// none of those signals. Simulated annotators pick nearly every key phrase and
/// a scattering of decoys and filler.
struct SyntheticData {
    std::vector<SyntheticRecord> records;
    Corpus corpus;
    std::vector<Hit> hits;
    std::string lm_text;
    std::map<std::string, std::vector<std::string>> planted;  // story -> key phrases
    std::map<std::string, std::vector<std::string>> decoys;   // story -> decoy phrases
};

SyntheticData generate_synthetic(const SyntheticOptions& opts = {});

/// Writes corpus.jsonl, hits.jsonl, gold.jsonl and lm.txt into `dir`.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir);

}  // namespace ake
