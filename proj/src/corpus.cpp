#include "ake/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "ake/embedded_data.hpp"
#include "json.hpp"

namespace ake {

namespace {

constexpr std::array<std::string_view, kCategoryCount> kCategoryLabels = {
    "Technology", "Crime",    "Sports",   "Health",         "Art and Culture",
    "Fashion",    "Science",  "Business", "World Politics", "U.S. Politics",
};

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Abbreviations that keep their trailing period.
const std::unordered_set<std::string>& abbreviations() {
    static const std::unordered_set<std::string> kAbbrev = {
        "mr",  "mrs",  "ms",   "dr",   "prof", "sr",  "jr",  "st",   "inc", "corp", "co",  "ltd",
        "jan", "feb",  "mar",  "apr",  "jun",  "jul", "aug", "sep",  "sept", "oct", "nov", "dec",
        "vs",  "etc",  "gen",  "gov",  "sen",  "rep", "lt",  "col",  "capt", "sgt", "rev", "mt",
        "ft",  "no",   "dept", "univ", "ave",  "blvd", "approx", "est", "fig", "al",
    };
    return kAbbrev;
}

enum class CharClass { Space, Word, Punct, Apostrophe };

struct CodePoint {
    char32_t value = 0;
    std::size_t length = 1;
};

CodePoint decode(std::string_view s, std::size_t i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    auto cont = [&](std::size_t k) -> char32_t {
        return i + k < s.size() ? static_cast<unsigned char>(s[i + k]) & 0x3Fu : 0;
    };
    if (b0 < 0x80) return {b0, 1};
    if ((b0 >> 5) == 0x6 && i + 1 < s.size()) return {((b0 & 0x1Fu) << 6) | cont(1), 2};
    if ((b0 >> 4) == 0xE && i + 2 < s.size()) return {((b0 & 0x0Fu) << 12) | (cont(1) << 6) | cont(2), 3};
    if ((b0 >> 3) == 0x1E && i + 3 < s.size())
        return {((b0 & 0x07u) << 18) | (cont(1) << 12) | (cont(2) << 6) | cont(3), 4};
    return {0xFFFD, 1};
}

CharClass classify(char32_t c) {
    if (c < 0x80) {
        if (std::isspace(static_cast<int>(c))) return CharClass::Space;
        if (std::isalnum(static_cast<int>(c))) return CharClass::Word;
        if (c == '\'') return CharClass::Apostrophe;
        return CharClass::Punct;
    }
    if (c == 0x00A0 || (c >= 0x2000 && c <= 0x200B) || c == 0x3000) return CharClass::Space;
    if (c == 0x2019) return CharClass::Apostrophe;
    if ((c >= 0x2010 && c <= 0x206F) || c == 0x00AB || c == 0x00BB || c == 0x00BF || c == 0x00A1)
        return CharClass::Punct;
    return CharClass::Word;
}

bool is_word_at(std::string_view s, std::size_t i) {
    return i < s.size() && classify(decode(s, i).value) == CharClass::Word;
}

bool is_digit_at(std::string_view s, std::size_t i) {
    return i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]));
}

// Surface with curly apostrophes folded to ASCII, then lowercased.
std::string fold_lower(std::string_view surface) {
    std::string out;
    out.reserve(surface.size());
    for (std::size_t i = 0; i < surface.size();) {
        const auto cp = decode(surface, i);
        if (cp.value == 0x2019) {
            out.push_back('\'');
        } else if (cp.length == 1) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(surface[i]))));
        } else {
            out.append(surface.substr(i, cp.length));
        }
        i += cp.length;
    }
    return out;
}

TokenKind kind_of(std::string_view surface) {
    bool alpha = false;
    bool digit = false;
    for (std::size_t i = 0; i < surface.size();) {
        const auto cp = decode(surface, i);
        if (cp.value < 0x80) {
            if (std::isalpha(static_cast<int>(cp.value))) alpha = true;
            if (std::isdigit(static_cast<int>(cp.value))) digit = true;
        } else if (classify(cp.value) == CharClass::Word) {
            alpha = true;
        }
        i += cp.length;
    }
    if (alpha) return TokenKind::Word;
    if (digit) return TokenKind::Number;
    return TokenKind::Punct;
}

bool is_terminal(const Token& t) {
    return t.surface == "." || t.surface == "!" || t.surface == "?";
}

bool is_closing(const Token& t) {
    return t.surface == "\"" || t.surface == "'" || t.surface == ")" || t.surface == "”" ||
           t.surface == "’";
}

bool is_opening(const Token& t) {
    return t.surface == "\"" || t.surface == "(" || t.surface == "“" || t.surface == "'" ||
           t.surface == "‘";
}

}  // namespace

std::string_view category_label(Category c) { return kCategoryLabels.at(static_cast<std::size_t>(c)); }

const std::array<Category, kCategoryCount>& all_categories() {
    static const std::array<Category, kCategoryCount> kAll = [] {
        std::array<Category, kCategoryCount> a{};
        for (std::size_t i = 0; i < kCategoryCount; ++i) a[i] = static_cast<Category>(i);
        return a;
    }();
    return kAll;
}

std::optional<Category> parse_category(std::string_view label) {
    const std::string needle = ascii_lower(label);
    for (std::size_t i = 0; i < kCategoryCount; ++i) {
        if (ascii_lower(kCategoryLabels[i]) == needle) return static_cast<Category>(i);
    }
    return std::nullopt;
}

const Stoplist& Stoplist::english() {
    static const Stoplist kEnglish = from_text(embedded::stopwords());
    return kEnglish;
}

Stoplist Stoplist::from_text(std::string_view text) {
    std::unordered_set<std::string> words;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t\r");
        words.insert(fold_lower(std::string_view(line).substr(first, last - first + 1)));
    }
    return Stoplist(std::move(words));
}

Stoplist Stoplist::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open stopword file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

bool Token::has_alpha() const { return kind == TokenKind::Word; }

bool Token::is_capitalized() const {
    return !surface.empty() && std::isupper(static_cast<unsigned char>(surface.front()));
}

std::size_t Document::token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.tokens.size();
    return n;
}

std::size_t Document::body_sentence_count() const {
    return static_cast<std::size_t>(
        std::count_if(sentences.begin(), sentences.end(), [](const Sentence& s) { return !s.from_title; }));
}

std::vector<Token> tokenize(std::string_view text, const Stoplist& stoplist, std::size_t base_offset) {
    std::vector<Token> tokens;
    auto emit = [&](std::size_t start, std::size_t end) {
        Token t;
        t.surface = std::string(text.substr(start, end - start));
        t.lower = fold_lower(t.surface);
        t.kind = kind_of(t.surface);
        t.is_stopword = t.kind == TokenKind::Word && stoplist.contains(t.lower);
        t.span = {base_offset + start, base_offset + end};
        tokens.push_back(std::move(t));
    };

    std::size_t i = 0;
    while (i < text.size()) {
        const auto cp = decode(text, i);
        const auto cls = classify(cp.value);
        if (cls == CharClass::Space) {
            i += cp.length;
            continue;
        }
        if (cls == CharClass::Punct || cls == CharClass::Apostrophe) {
            emit(i, i + cp.length);
            i += cp.length;
            continue;
        }

        const std::size_t start = i;
        std::size_t end = i;
        while (end < text.size()) {
            const auto c = decode(text, end);
            const auto k = classify(c.value);
            if (k == CharClass::Word) {
                end += c.length;
                continue;
            }
            if (k == CharClass::Apostrophe) {
                const std::size_t next = end + c.length;
                // Possessive clitic is split off: "Page's" -> "Page", "'s".
                const bool possessive = next < text.size() && (text[next] == 's' || text[next] == 'S') &&
                                        !is_word_at(text, next + 1);
                if (possessive || !is_word_at(text, next)) break;
                end = next;
                continue;
            }
            if (c.value == '-' || c.value == '&' || c.value == '.') {
                if (is_word_at(text, end + 1)) {
                    end += 1;
                    continue;
                }
                break;
            }
            if (c.value == ',' && end > start && is_digit_at(text, end - 1) && is_digit_at(text, end + 1)) {
                end += 1;
                continue;
            }
            break;
        }

        // Attach a trailing period to abbreviations and initials.
        if (end < text.size() && text[end] == '.') {
            const std::string word = fold_lower(text.substr(start, end - start));
            const bool initial = end - start == 1 && std::isupper(static_cast<unsigned char>(text[start]));
            const bool dotted = word.find('.') != std::string::npos && kind_of(word) == TokenKind::Word;
            if (initial || dotted || abbreviations().contains(word)) end += 1;
        }
        emit(start, end);
        i = end;

        if (i < text.size() && classify(decode(text, i).value) == CharClass::Apostrophe) {
            const auto apo = decode(text, i);
            const std::size_t next = i + apo.length;
            if (next < text.size() && (text[next] == 's' || text[next] == 'S') && !is_word_at(text, next + 1)) {
                emit(i, next + 1);
                i = next + 1;
            }
        }
    }
    return tokens;
}

std::vector<Sentence> segment_and_tokenize(std::string_view title, std::string_view body,
                                           const Stoplist& stoplist) {
    const auto blank = [](std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; };
    if (blank(title) && blank(body)) throw std::invalid_argument("segment_and_tokenize: title and body are both empty");

    std::vector<Sentence> sentences;
    auto title_tokens = tokenize(title, stoplist, 0);
    if (!title_tokens.empty()) {
        sentences.push_back(Sentence{0, std::move(title_tokens), true});
    }

    const auto body_tokens = tokenize(body, stoplist, title.size() + 1);
    std::vector<Token> current;
    auto close = [&] {
        if (current.empty()) return;
        sentences.push_back(Sentence{sentences.size(), std::move(current), false});
        current.clear();
    };

    for (std::size_t i = 0; i < body_tokens.size(); ++i) {
        current.push_back(body_tokens[i]);
        if (!is_terminal(body_tokens[i])) continue;

        // Absorb runs like "?!" and closing quotes/brackets directly after the terminal.
        std::size_t j = i + 1;
        while (j < body_tokens.size() && (is_terminal(body_tokens[j]) || is_closing(body_tokens[j])) &&
               body_tokens[j].span.start == body_tokens[j - 1].span.end) {
            current.push_back(body_tokens[j]);
            ++j;
        }
        i = j - 1;
        if (j >= body_tokens.size()) break;

        const Token& next = body_tokens[j];
        const bool whitespace = next.span.start > body_tokens[j - 1].span.end;
        bool capital = next.is_capitalized() || next.kind == TokenKind::Number;
        if (!capital && is_opening(next) && j + 1 < body_tokens.size()) capital = body_tokens[j + 1].is_capitalized();
        if (whitespace && capital) close();
    }
    close();
    return sentences;
}

Document make_document(std::string id, std::string title, std::string body, Category category,
                       const Stoplist& stoplist) {
    Document doc;
    doc.sentences = segment_and_tokenize(title, body, stoplist);
    doc.id = std::move(id);
    doc.title = std::move(title);
    doc.body = std::move(body);
    doc.category = category;
    return doc;
}

IngestResult ingest_corpus_text(std::string_view jsonl, const Stoplist& stoplist) {
    using nlohmann::json;
    IngestResult result;
    std::unordered_set<std::string> seen;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    std::size_t line_no = 0;

    auto fail = [&](const std::string& what) {
        throw DataError("corpus line " + std::to_string(line_no) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(std::string("malformed record: ") + e.what());
        }
        if (!rec.is_object()) fail("record is not an object");
        for (const char* field : {"id", "title", "body", "category"}) {
            if (!rec.contains(field) || !rec[field].is_string()) fail(std::string("missing string field '") + field + "'");
        }
        const auto label = rec["category"].get<std::string>();
        const auto category = parse_category(label);
        if (!category) {
            std::string valid;
            for (std::size_t i = 0; i < kCategoryCount; ++i) {
                if (i) valid += ", ";
                valid += kCategoryLabels[i];
            }
            fail("unknown category '" + label + "'; valid labels: " + valid);
        }
        auto id = rec["id"].get<std::string>();
        if (!seen.insert(id).second) fail("duplicate document id '" + id + "'");
        try {
            result.documents.push_back(make_document(std::move(id), rec["title"].get<std::string>(),
                                                     rec["body"].get<std::string>(), *category, stoplist));
        } catch (const std::invalid_argument&) {
            fail("title and body are both empty");
        }
    }
    if (result.documents.empty()) result.warnings.emplace_back("corpus is empty");
    return result;
}

IngestResult ingest_corpus(const std::filesystem::path& path, const Stoplist& stoplist) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return ingest_corpus_text(buf.str(), stoplist);
}

std::string normalize_phrase(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (char c : fold_lower(text)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::string join_lower(std::span<const Token> tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t.lower;
    }
    return out;
}

std::vector<CandidatePhrase> generate_candidates(const Document& doc, std::size_t max_len) {
    std::vector<CandidatePhrase> out;
    std::unordered_map<std::string, std::size_t> by_form;

    for (const auto& sentence : doc.sentences) {
        const auto& toks = sentence.tokens;
        for (std::size_t start = 0; start < toks.size(); ++start) {
            if (toks[start].is_punct() || toks[start].is_stopword) continue;
            bool alpha = false;
            for (std::size_t len = 1; len <= max_len && start + len <= toks.size(); ++len) {
                const Token& last = toks[start + len - 1];
                if (last.is_punct()) break;
                alpha = alpha || last.has_alpha();
                if (last.is_stopword || !alpha) continue;

                const std::span<const Token> window(toks.data() + start, len);
                std::string form = join_lower(window);
                const Occurrence occ{sentence.index, start};
                if (auto it = by_form.find(form); it != by_form.end()) {
                    out[it->second].occurrences.push_back(occ);
                    continue;
                }
                by_form.emplace(form, out.size());
                out.push_back(CandidatePhrase{{window.begin(), window.end()}, std::move(form), {occ}});
            }
        }
    }
    return out;
}

}  // namespace ake
