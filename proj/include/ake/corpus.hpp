#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace ake {

/// Raised for malformed input data: corpus records, HIT logs, model files.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The ten news top-categories a story can be filed under.
enum class Category : std::uint8_t {
    Technology,
    Crime,
    Sports,
    Health,
    ArtAndCulture,
    Fashion,
    Science,
    Business,
    WorldPolitics,
    USPolitics,
};

inline constexpr std::size_t kCategoryCount = 10;

std::string_view category_label(Category c);
const std::array<Category, kCategoryCount>& all_categories();

/// Case-insensitive match against the ten labels ("Art and Culture", "U.S. Politics", ...).
std::optional<Category> parse_category(std::string_view label);

class Stoplist {
public:
    Stoplist() = default;
    explicit Stoplist(std::unordered_set<std::string> words) : words_(std::move(words)) {}

    /// The bundled English list.
    static const Stoplist& english();
    static Stoplist from_file(const std::filesystem::path& path);
    static Stoplist from_text(std::string_view text);

    bool contains(std::string_view lower) const { return words_.contains(std::string(lower)); }
    std::size_t size() const { return words_.size(); }

private:
    std::unordered_set<std::string> words_;
};

struct CharSpan {
    std::size_t start = 0;
    std::size_t end = 0;
};

enum class TokenKind : std::uint8_t { Word, Number, Punct };

struct Token {
    std::string surface;
    std::string lower;
    bool is_stopword = false;
    TokenKind kind = TokenKind::Word;
    // Offsets into the document source text (title, '\n', body).
    CharSpan span;

    bool is_punct() const { return kind == TokenKind::Punct; }
    bool has_alpha() const;
    /// First character is an uppercase letter.
    bool is_capitalized() const;
};

struct Sentence {
    std::size_t index = 0;
    std::vector<Token> tokens;
    bool from_title = false;
};

struct Document {
    std::string id;
    std::string title;
    std::string body;
    Category category = Category::Technology;
    std::vector<Sentence> sentences;

    std::size_t token_count() const;
    std::size_t body_sentence_count() const;
};

using Corpus = std::vector<Document>;

struct IngestResult {
    Corpus documents;
    std::vector<std::string> warnings;
};

/// Splits `text` into tokens. Offsets are relative to `text` plus `base_offset`.
std::vector<Token> tokenize(std::string_view text, const Stoplist& stoplist, std::size_t base_offset = 0);

/// Title becomes sentence 0 (when non-empty); body is split at . ! ? followed by
/// a capitalized token. Abbreviations keep their period, so "Mr. Smith" never splits.
std::vector<Sentence> segment_and_tokenize(std::string_view title, std::string_view body,
                                           const Stoplist& stoplist = Stoplist::english());

Document make_document(std::string id, std::string title, std::string body, Category category,
                       const Stoplist& stoplist = Stoplist::english());

/// Reads one JSON object per line with fields id, title, body, category.
IngestResult ingest_corpus(const std::filesystem::path& path, const Stoplist& stoplist = Stoplist::english());
IngestResult ingest_corpus_text(std::string_view jsonl, const Stoplist& stoplist = Stoplist::english());

struct Occurrence {
    std::size_t sentence = 0;
    std::size_t offset = 0;

    friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

struct CandidatePhrase {
    std::vector<Token> tokens;  // tokens of the first occurrence
    std::string normalized;
    std::vector<Occurrence> occurrences;

    std::size_t length() const { return tokens.size(); }
};

inline constexpr std::size_t kMaxPhraseLength = 4;

/// Within-sentence n-grams of 1..max_len tokens that neither start nor end
/// with a stopword, contain a letter, and contain no punctuation. Candidates are
/// merged by normalized form and returned in first-seen order.
std::vector<CandidatePhrase> generate_candidates(const Document& doc, std::size_t max_len = kMaxPhraseLength);

/// Lowercases and collapses runs of whitespace to single spaces.
std::string normalize_phrase(std::string_view text);

std::string join_lower(std::span<const Token> tokens);

}  // namespace ake
