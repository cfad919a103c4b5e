#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ake/corpus.hpp"
#include "ake/ngram_store.hpp"

namespace ake {

// ---------------------------------------------------------------------------
// Rhetorical signals

enum class SignalType : std::uint8_t {
    Continuation,
    ChangeOfDirection,
    Sequence,
    Illustration,
    Emphasis,
    CauseConditionResult,
    Spatial,
    ComparisonContrast,
    Conclusion,
    Fuzz,
    NonWordEmphasis,
};

inline constexpr std::size_t kSignalTypeCount = 11;
using SignalCounts = std::array<std::uint32_t, kSignalTypeCount>;

/// Section name used in lexicon files, e.g. "change_of_direction".
std::string_view signal_type_name(SignalType t);

class SignalLexicon {
public:
    /// Cue lists seeded from the classic eleven signal types.
    static const SignalLexicon& bundled();
    /// Sectioned text: "[continuation]" headers, then one cue per line; '#' starts a comment.
    static SignalLexicon from_text(std::string_view text);
    static SignalLexicon from_file(const std::filesystem::path& path);

    /// Adds every cue of `other` to this lexicon.
    void merge(const SignalLexicon& other);
    void add(SignalType type, std::string_view cue);
    const std::vector<std::string>& cues(SignalType type) const;

    /// Longest-match, case-insensitive, token-aligned counts of word cues,
    /// plus one count per '!' or quotation mark for the non-word type.
    SignalCounts count(const Sentence& s) const;

private:
    struct Cue {
        std::vector<std::string> tokens;
        SignalType type;
    };

    std::array<std::vector<std::string>, kSignalTypeCount> lists_;
    std::vector<Cue> word_cues_;  // sorted longest first
    std::vector<std::string> nonword_marks_;
};

// ---------------------------------------------------------------------------
// Sub-category gazetteer

inline constexpr std::size_t kSubcategoryCount = 85;
using SubcategoryBits = std::bitset<kSubcategoryCount>;

class Gazetteer {
public:
    /// The bundled 85-label universe.
    static const std::vector<std::string>& subcategory_labels();
    static const Gazetteer& bundled();
    /// Tab-separated "phrase<TAB>label[,label...]" lines; labels must belong to the universe.
    static Gazetteer from_text(std::string_view text);
    static Gazetteer from_file(const std::filesystem::path& path);

    void add(std::string_view phrase, std::string_view label);
    SubcategoryBits lookup(std::string_view normalized) const;
    std::size_t size() const { return entries_.size(); }
    static std::size_t label_index(std::string_view label);

private:
    std::unordered_map<std::string, SubcategoryBits> entries_;
};

// ---------------------------------------------------------------------------
// Part-of-speech patterns

enum class CoarseTag : std::uint8_t { Noun, Adj, Verb, Adv, Other };

std::string_view coarse_tag_name(CoarseTag t);

/// Lexicon lookup with suffix-rule fallback over a five-tag set.
class PosTagger {
public:
    static const PosTagger& bundled();
    /// "word<TAB>tag" lines with tag in {noun, adj, verb, adv, other}.
    static PosTagger from_text(std::string_view text);

    CoarseTag tag(const Token& token, bool sentence_initial) const;
    bool knows(std::string_view lower) const { return lexicon_.contains(std::string(lower)); }

private:
    std::unordered_map<std::string, CoarseTag> lexicon_;
};

/// Maps tag sequences to integer ids in first-seen order. Id 0 stands for
/// patterns that were never seen while the table was growing.
class PatternTable {
public:
    int intern(const std::string& pattern);
    int lookup(const std::string& pattern) const;
    std::size_t size() const { return ids_.size(); }
    /// Patterns in id order (id = position + 1).
    const std::vector<std::string>& patterns() const { return by_id_; }

private:
    std::unordered_map<std::string, int> ids_;
    std::vector<std::string> by_id_;
};

// ---------------------------------------------------------------------------
// Document frequencies

class DocumentFrequencies {
public:
    void add_document(const std::vector<CandidatePhrase>& candidates);
    std::size_t documents() const { return documents_; }
    std::uint32_t df(const std::string& normalized) const;
    /// ln(|D| / (1 + df)). When `doc_in_corpus` is false the scored document is
    /// counted as an extra member of D that contains the phrase.
    double idf(const std::string& normalized, bool doc_in_corpus = true) const;
    const std::unordered_map<std::string, std::uint32_t>& table() const { return df_; }
    void set(std::size_t documents, std::unordered_map<std::string, std::uint32_t> df);

private:
    std::size_t documents_ = 0;
    std::unordered_map<std::string, std::uint32_t> df_;
};

DocumentFrequencies document_frequencies(const Corpus& corpus);

/// tf * ln(n_docs / (1 + df)).
double tfidf_value(double tf, double df, double n_docs);
double tfidf(const CandidatePhrase& t, const DocumentFrequencies& D, bool doc_in_corpus = true);

// ---------------------------------------------------------------------------
// Feature vectors

enum class FeatureGroup : std::uint8_t { Baseline = 1, Shallow = 2, TopCategory = 4, Rhetorical = 8, SubCategory = 16 };

class FeatureMask {
public:
    constexpr FeatureMask() = default;
    constexpr explicit FeatureMask(std::uint8_t bits) : bits_(bits) {}

    static FeatureMask all();
    static FeatureMask baseline() { return FeatureMask(static_cast<std::uint8_t>(FeatureGroup::Baseline)); }
    /// Comma- or plus-separated group names: baseline, ss, tc, rs, sc.
    static FeatureMask parse(std::string_view text);

    bool has(FeatureGroup g) const { return (bits_ & static_cast<std::uint8_t>(g)) != 0; }
    FeatureMask with(FeatureGroup g) const { return FeatureMask(bits_ | static_cast<std::uint8_t>(g)); }
    std::uint8_t bits() const { return bits_; }
    std::string to_string() const;
    bool empty() const { return bits_ == 0; }

    friend bool operator==(FeatureMask, FeatureMask) = default;

private:
    std::uint8_t bits_ = 0;
};

enum class FeatureKind : std::uint8_t { Numeric, Nominal };

struct FeatureVector {
    double tfidf = 0.0;
    double first_occurrence = 0.0;
    int phrase_len_words = 0;
    int n_chars = 0;
    int n_named_entities = 0;
    int n_capitals = 0;
    int pos_pattern_id = 0;
    double ngram_logfreq = 0.0;  // log(1 + n-gram count)
    std::array<std::uint8_t, kCategoryCount> top_category{};
    SubcategoryBits sub_categories;
    SignalCounts signals{};

    /// Enabled groups in the fixed order baseline, ss, tc, rs, sc.
    std::vector<double> dense(FeatureMask mask) const;
};

std::vector<std::string> feature_names(FeatureMask mask);
std::vector<FeatureKind> feature_kinds(FeatureMask mask);
std::size_t feature_dimension(FeatureMask mask);

struct FeatureResources {
    NGramStore ngrams;  // may be empty; the frequency feature is then 0
    SignalLexicon signals = SignalLexicon::bundled();
    Gazetteer gazetteer = Gazetteer::bundled();
    PosTagger tagger = PosTagger::bundled();
};

struct FeatureOptions {
    /// Multiplies every TF-IDF value; 1 / ln(b) switches the idf log base to b.
    double tfidf_scale = 1.0;
};

enum class PatternMode { Learn, Frozen };

struct ShallowFeatures {
    int n_chars = 0;
    int n_named_entities = 0;
    int n_capitals = 0;
    int pos_pattern_id = 0;
    double ngram_logfreq = 0.0;
};

/// Per-document state shared by all candidates of that document.
class DocumentContext {
public:
    DocumentContext(const Document& doc, const SignalLexicon& lexicon);

    const Document& document() const { return *doc_; }
    const SignalCounts& signals(std::size_t sentence) const { return sentence_signals_[sentence]; }
    /// Document-wide token offset of a sentence's first token.
    std::size_t sentence_offset(std::size_t sentence) const { return sentence_offsets_[sentence]; }
    std::size_t token_count() const { return token_count_; }

private:
    const Document* doc_;
    std::vector<SignalCounts> sentence_signals_;
    std::vector<std::size_t> sentence_offsets_;
    std::size_t token_count_ = 0;
};

/// Occurrence whose surface is most informative for the capitalization features:
/// the first one not at a sentence start, else the first.
Occurrence representative_occurrence(const CandidatePhrase& t, const Document& doc);

std::string pos_pattern(std::span<const Token> tokens, bool starts_sentence, const PosTagger& tagger);
int pos_pattern_id(std::span<const Token> tokens, bool starts_sentence, const PosTagger& tagger,
                   PatternTable& table, PatternMode mode);

ShallowFeatures shallow_semantic(const CandidatePhrase& t, const Document& doc, const FeatureResources& res,
                                 PatternTable& patterns, PatternMode mode);

SignalCounts rhetorical_signals(const Sentence& s, const SignalLexicon& lex);
/// Element-wise maximum over the sentences that contain `t`.
SignalCounts phrase_signals(const CandidatePhrase& t, const DocumentContext& ctx);

std::array<std::uint8_t, kCategoryCount> category_features(const Document& d);
SubcategoryBits subcategory_features(const CandidatePhrase& t, const Gazetteer& gaz);

FeatureVector assemble(const CandidatePhrase& t, const DocumentContext& ctx, const DocumentFrequencies& D,
                       const FeatureResources& res, PatternTable& patterns, PatternMode mode,
                       const FeatureOptions& opts = {}, bool doc_in_corpus = true);

}  // namespace ake
