#include "ake/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "ake/embedded_data.hpp"
#include "ake/entities.hpp"

namespace ake {

namespace {

constexpr std::array<std::string_view, kSignalTypeCount> kSignalNames = {
    "continuation", "change_of_direction", "sequence",  "illustration", "emphasis",          "cause_condition_result",
    "spatial",      "comparison_contrast", "conclusion", "fuzz",         "non_word_emphasis",
};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string read_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw DataError(std::string("cannot open ") + what + ": " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> lower_tokens(std::string_view text) {
    static const Stoplist kNone;
    std::vector<std::string> out;
    for (auto& t : tokenize(text, kNone)) out.push_back(std::move(t.lower));
    return out;
}

bool is_quote_mark(std::string_view s) { return s == "\"" || s == "“" || s == "”"; }

int count_capitals(std::string_view s) {
    return static_cast<int>(std::count_if(s.begin(), s.end(), [](char c) { return std::isupper(static_cast<unsigned char>(c)); }));
}

int count_codepoints(std::string_view s) {
    return static_cast<int>(std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view signal_type_name(SignalType t) { return kSignalNames.at(static_cast<std::size_t>(t)); }

const SignalLexicon& SignalLexicon::bundled() {
    static const SignalLexicon kBundled = from_text(embedded::signals());
    return kBundled;
}

SignalLexicon SignalLexicon::from_text(std::string_view text) {
    SignalLexicon lex;
    std::istringstream in{std::string(text)};
    std::string line;
    std::optional<SignalType> section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string cue = trim(line);
        if (cue.empty() || cue.front() == '#') continue;
        if (cue.front() == '[' && cue.back() == ']') {
            const std::string name = cue.substr(1, cue.size() - 2);
            const auto it = std::find(kSignalNames.begin(), kSignalNames.end(), name);
            if (it == kSignalNames.end())
                throw DataError("signal lexicon line " + std::to_string(line_no) + ": unknown section [" + name + "]");
            section = static_cast<SignalType>(std::distance(kSignalNames.begin(), it));
            continue;
        }
        if (!section) throw DataError("signal lexicon line " + std::to_string(line_no) + ": cue before any section");
        lex.add(*section, cue);
    }
    return lex;
}

SignalLexicon SignalLexicon::from_file(const std::filesystem::path& path) {
    return from_text(read_file(path, "signal lexicon"));
}

void SignalLexicon::merge(const SignalLexicon& other) {
    for (std::size_t i = 0; i < kSignalTypeCount; ++i) {
        for (const auto& cue : other.lists_[i]) add(static_cast<SignalType>(i), cue);
    }
}

void SignalLexicon::add(SignalType type, std::string_view cue) {
    const std::string lowered = normalize_phrase(cue);
    if (lowered.empty()) return;
    auto& list = lists_[static_cast<std::size_t>(type)];
    if (std::find(list.begin(), list.end(), lowered) != list.end()) return;
    list.push_back(lowered);

    if (type == SignalType::NonWordEmphasis) {
        nonword_marks_.push_back(lowered);
        return;
    }
    Cue c{lower_tokens(lowered), type};
    if (c.tokens.empty()) return;
    const auto pos = std::upper_bound(word_cues_.begin(), word_cues_.end(), c,
                                      [](const Cue& a, const Cue& b) { return a.tokens.size() > b.tokens.size(); });
    word_cues_.insert(pos, std::move(c));
}

const std::vector<std::string>& SignalLexicon::cues(SignalType type) const {
    return lists_[static_cast<std::size_t>(type)];
}

SignalCounts SignalLexicon::count(const Sentence& s) const {
    SignalCounts counts{};
    const auto& toks = s.tokens;
    std::size_t i = 0;
    while (i < toks.size()) {
        std::size_t matched = 0;
        for (const auto& cue : word_cues_) {
            if (i + cue.tokens.size() > toks.size()) continue;
            bool ok = true;
            for (std::size_t k = 0; k < cue.tokens.size() && ok; ++k) ok = toks[i + k].lower == cue.tokens[k];
            if (!ok) continue;
            ++counts[static_cast<std::size_t>(cue.type)];
            matched = cue.tokens.size();
            break;
        }
        i += matched ? matched : 1;
    }

    const bool quote_cue = std::any_of(nonword_marks_.begin(), nonword_marks_.end(),
                                       [](const std::string& m) { return is_quote_mark(m); });
    auto& nonword = counts[static_cast<std::size_t>(SignalType::NonWordEmphasis)];
    for (const auto& t : toks) {
        if (!t.is_punct()) continue;
        if (quote_cue && is_quote_mark(t.surface)) {
            ++nonword;
        } else if (std::find(nonword_marks_.begin(), nonword_marks_.end(), t.lower) != nonword_marks_.end()) {
            ++nonword;
        }
    }
    return counts;
}

SignalCounts rhetorical_signals(const Sentence& s, const SignalLexicon& lex) { return lex.count(s); }

// ---------------------------------------------------------------------------

const std::vector<std::string>& Gazetteer::subcategory_labels() {
    static const std::vector<std::string> kLabels = [] {
        std::vector<std::string> labels;
        std::istringstream in{std::string(embedded::subcategories())};
        std::string line;
        while (std::getline(in, line)) {
            auto label = trim(line);
            if (!label.empty() && label.front() != '#') labels.push_back(std::move(label));
        }
        if (labels.size() != kSubcategoryCount) throw std::logic_error("bundled sub-category list must have 85 labels");
        return labels;
    }();
    return kLabels;
}

std::size_t Gazetteer::label_index(std::string_view label) {
    const auto& labels = subcategory_labels();
    const std::string wanted = normalize_phrase(label);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (normalize_phrase(labels[i]) == wanted) return i;
    }
    throw DataError("unknown sub-category label '" + std::string(label) + "'");
}

const Gazetteer& Gazetteer::bundled() {
    static const Gazetteer kBundled = from_text(embedded::gazetteer());
    return kBundled;
}

Gazetteer Gazetteer::from_text(std::string_view text) {
    Gazetteer gaz;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || trim(line).front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError("gazetteer line " + std::to_string(line_no) + ": expected phrase<TAB>labels");
        const std::string phrase = line.substr(0, tab);
        std::istringstream labels(line.substr(tab + 1));
        std::string label;
        while (std::getline(labels, label, ',')) {
            if (trim(label).empty()) continue;
            try {
                gaz.add(phrase, trim(label));
            } catch (const DataError& e) {
                throw DataError("gazetteer line " + std::to_string(line_no) + ": " + e.what());
            }
        }
    }
    return gaz;
}

Gazetteer Gazetteer::from_file(const std::filesystem::path& path) { return from_text(read_file(path, "gazetteer")); }

void Gazetteer::add(std::string_view phrase, std::string_view label) {
    entries_[join_lower(tokenize(phrase, Stoplist{}))].set(label_index(label));
}

SubcategoryBits Gazetteer::lookup(std::string_view normalized) const {
    const auto it = entries_.find(std::string(normalized));
    return it == entries_.end() ? SubcategoryBits{} : it->second;
}

// ---------------------------------------------------------------------------

std::string_view coarse_tag_name(CoarseTag t) {
    static constexpr std::array<std::string_view, 5> kNames = {"noun", "adj", "verb", "adv", "other"};
    return kNames.at(static_cast<std::size_t>(t));
}

const PosTagger& PosTagger::bundled() {
    static const PosTagger kBundled = from_text(embedded::pos_lexicon());
    return kBundled;
}

PosTagger PosTagger::from_text(std::string_view text) {
    PosTagger tagger;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || trim(line).front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw DataError("POS lexicon line " + std::to_string(line_no) + ": expected word<TAB>tag");
        const std::string tag = trim(line.substr(tab + 1));
        std::optional<CoarseTag> parsed;
        for (int i = 0; i < 5; ++i) {
            if (coarse_tag_name(static_cast<CoarseTag>(i)) == tag) parsed = static_cast<CoarseTag>(i);
        }
        if (!parsed) throw DataError("POS lexicon line " + std::to_string(line_no) + ": unknown tag '" + tag + "'");
        tagger.lexicon_[normalize_phrase(line.substr(0, tab))] = *parsed;
    }
    return tagger;
}

CoarseTag PosTagger::tag(const Token& token, bool sentence_initial) const {
    if (token.kind != TokenKind::Word) return CoarseTag::Other;
    if (auto it = lexicon_.find(token.lower); it != lexicon_.end()) return it->second;
    if (token.is_stopword) return CoarseTag::Other;
    if (token.is_capitalized() && !sentence_initial) return CoarseTag::Noun;

    const std::string& w = token.lower;
    auto ends = [&](std::string_view suffix) {
        return w.size() > suffix.size() + 2 && std::string_view(w).substr(w.size() - suffix.size()) == suffix;
    };
    for (auto s : {"tion", "sion", "ment", "ness", "ity", "ism", "ist", "ship", "hood", "ance", "ence"}) {
        if (ends(s)) return CoarseTag::Noun;
    }
    if (ends("ly")) return CoarseTag::Adv;
    for (auto s : {"ous", "ful", "ive", "able", "ible", "less", "ical", "ic", "al", "ary", "est"}) {
        if (ends(s)) return CoarseTag::Adj;
    }
    for (auto s : {"ing", "ed", "ize", "ise", "ify", "ate"}) {
        if (ends(s)) return CoarseTag::Verb;
    }
    return CoarseTag::Noun;
}

int PatternTable::intern(const std::string& pattern) {
    if (auto it = ids_.find(pattern); it != ids_.end()) return it->second;
    by_id_.push_back(pattern);
    const int id = static_cast<int>(by_id_.size());
    ids_.emplace(pattern, id);
    return id;
}

int PatternTable::lookup(const std::string& pattern) const {
    const auto it = ids_.find(pattern);
    return it == ids_.end() ? 0 : it->second;
}

std::string pos_pattern(std::span<const Token> tokens, bool starts_sentence, const PosTagger& tagger) {
    std::string pattern;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) pattern.push_back(',');
        pattern += coarse_tag_name(tagger.tag(tokens[i], starts_sentence && i == 0));
    }
    return pattern;
}

int pos_pattern_id(std::span<const Token> tokens, bool starts_sentence, const PosTagger& tagger,
                   PatternTable& table, PatternMode mode) {
    const std::string pattern = pos_pattern(tokens, starts_sentence, tagger);
    return mode == PatternMode::Learn ? table.intern(pattern) : table.lookup(pattern);
}

// ---------------------------------------------------------------------------

void DocumentFrequencies::add_document(const std::vector<CandidatePhrase>& candidates) {
    ++documents_;
    for (const auto& c : candidates) ++df_[c.normalized];
}

std::uint32_t DocumentFrequencies::df(const std::string& normalized) const {
    const auto it = df_.find(normalized);
    return it == df_.end() ? 0 : it->second;
}

double DocumentFrequencies::idf(const std::string& normalized, bool doc_in_corpus) const {
    const double extra = doc_in_corpus ? 0.0 : 1.0;
    return std::log((static_cast<double>(documents_) + extra) / (1.0 + df(normalized) + extra));
}

void DocumentFrequencies::set(std::size_t documents, std::unordered_map<std::string, std::uint32_t> df) {
    documents_ = documents;
    df_ = std::move(df);
}

DocumentFrequencies document_frequencies(const Corpus& corpus) {
    DocumentFrequencies D;
    for (const auto& doc : corpus) D.add_document(generate_candidates(doc));
    return D;
}

double tfidf_value(double tf, double df, double n_docs) { return tf * std::log(n_docs / (1.0 + df)); }

double tfidf(const CandidatePhrase& t, const DocumentFrequencies& D, bool doc_in_corpus) {
    return static_cast<double>(t.occurrences.size()) * D.idf(t.normalized, doc_in_corpus);
}

// ---------------------------------------------------------------------------

FeatureMask FeatureMask::all() { return FeatureMask(0x1F); }

FeatureMask FeatureMask::parse(std::string_view text) {
    std::uint8_t bits = 0;
    std::string item;
    auto flush = [&] {
        const std::string name = normalize_phrase(trim(item));
        item.clear();
        if (name.empty()) return;
        if (name == "baseline") bits |= static_cast<std::uint8_t>(FeatureGroup::Baseline);
        else if (name == "ss") bits |= static_cast<std::uint8_t>(FeatureGroup::Shallow);
        else if (name == "tc") bits |= static_cast<std::uint8_t>(FeatureGroup::TopCategory);
        else if (name == "rs") bits |= static_cast<std::uint8_t>(FeatureGroup::Rhetorical);
        else if (name == "sc") bits |= static_cast<std::uint8_t>(FeatureGroup::SubCategory);
        else if (name == "all") bits |= 0x1F;
        else throw std::invalid_argument("unknown feature group '" + name + "' (expected baseline, ss, tc, rs, sc)");
    };
    for (char c : text) {
        if (c == ',' || c == '+') {
            flush();
        } else {
            item.push_back(c);
        }
    }
    flush();
    if (bits == 0) throw std::invalid_argument("feature mask selects no groups");
    return FeatureMask(bits);
}

std::string FeatureMask::to_string() const {
    std::string out;
    auto add = [&](FeatureGroup g, const char* name) {
        if (!has(g)) return;
        if (!out.empty()) out.push_back(',');
        out += name;
    };
    add(FeatureGroup::Baseline, "baseline");
    add(FeatureGroup::Shallow, "ss");
    add(FeatureGroup::TopCategory, "tc");
    add(FeatureGroup::Rhetorical, "rs");
    add(FeatureGroup::SubCategory, "sc");
    return out;
}

std::vector<double> FeatureVector::dense(FeatureMask mask) const {
    std::vector<double> out;
    out.reserve(feature_dimension(mask));
    if (mask.has(FeatureGroup::Baseline)) {
        out.push_back(tfidf);
        out.push_back(first_occurrence);
        out.push_back(phrase_len_words);
    }
    if (mask.has(FeatureGroup::Shallow)) {
        out.push_back(n_chars);
        out.push_back(n_named_entities);
        out.push_back(n_capitals);
        out.push_back(pos_pattern_id);
        out.push_back(ngram_logfreq);
    }
    if (mask.has(FeatureGroup::TopCategory)) {
        for (auto b : top_category) out.push_back(b);
    }
    if (mask.has(FeatureGroup::Rhetorical)) {
        for (auto c : signals) out.push_back(c);
    }
    if (mask.has(FeatureGroup::SubCategory)) {
        for (std::size_t i = 0; i < kSubcategoryCount; ++i) out.push_back(sub_categories[i] ? 1.0 : 0.0);
    }
    return out;
}

std::vector<std::string> feature_names(FeatureMask mask) {
    std::vector<std::string> names;
    if (mask.has(FeatureGroup::Baseline)) names.insert(names.end(), {"tfidf", "first_occurrence", "phrase_len_words"});
    if (mask.has(FeatureGroup::Shallow))
        names.insert(names.end(), {"n_chars", "n_named_entities", "n_capitals", "pos_pattern_id", "ngram_logfreq"});
    if (mask.has(FeatureGroup::TopCategory)) {
        for (auto c : all_categories()) names.push_back("top:" + std::string(category_label(c)));
    }
    if (mask.has(FeatureGroup::Rhetorical)) {
        for (auto n : kSignalNames) names.push_back("signal:" + std::string(n));
    }
    if (mask.has(FeatureGroup::SubCategory)) {
        for (const auto& l : Gazetteer::subcategory_labels()) names.push_back("sub:" + l);
    }
    return names;
}

std::vector<FeatureKind> feature_kinds(FeatureMask mask) {
    std::vector<FeatureKind> kinds(feature_dimension(mask), FeatureKind::Numeric);
    if (mask.has(FeatureGroup::Shallow)) {
        const std::size_t base = mask.has(FeatureGroup::Baseline) ? 3 : 0;
        kinds[base + 3] = FeatureKind::Nominal;
    }
    return kinds;
}

std::size_t feature_dimension(FeatureMask mask) {
    std::size_t d = 0;
    if (mask.has(FeatureGroup::Baseline)) d += 3;
    if (mask.has(FeatureGroup::Shallow)) d += 5;
    if (mask.has(FeatureGroup::TopCategory)) d += kCategoryCount;
    if (mask.has(FeatureGroup::Rhetorical)) d += kSignalTypeCount;
    if (mask.has(FeatureGroup::SubCategory)) d += kSubcategoryCount;
    return d;
}

// ---------------------------------------------------------------------------

DocumentContext::DocumentContext(const Document& doc, const SignalLexicon& lexicon) : doc_(&doc) {
    sentence_signals_.reserve(doc.sentences.size());
    sentence_offsets_.reserve(doc.sentences.size());
    for (const auto& s : doc.sentences) {
        sentence_signals_.push_back(lexicon.count(s));
        sentence_offsets_.push_back(token_count_);
        token_count_ += s.tokens.size();
    }
}

Occurrence representative_occurrence(const CandidatePhrase& t, const Document& doc) {
    for (const auto& occ : t.occurrences) {
        if (occ.offset != first_word_index(doc.sentences[occ.sentence].tokens)) return occ;
    }
    return t.occurrences.front();
}

ShallowFeatures shallow_semantic(const CandidatePhrase& t, const Document& doc, const FeatureResources& res,
                                 PatternTable& patterns, PatternMode mode) {
    const Occurrence occ = representative_occurrence(t, doc);
    const auto& sentence = doc.sentences[occ.sentence];
    const std::span<const Token> tokens(sentence.tokens.data() + occ.offset, t.length());
    const bool starts_sentence = occ.offset == first_word_index(sentence.tokens);

    ShallowFeatures f;
    std::string surface;
    for (const auto& tok : tokens) {
        if (!surface.empty()) surface.push_back(' ');
        surface += tok.surface;
    }
    f.n_chars = count_codepoints(surface);
    f.n_capitals = count_capitals(surface);

    for (const auto& run : capitalized_runs(tokens, true)) {
        // A lone capitalized common word opening a sentence is not an entity.
        const bool lone_initial = starts_sentence && run.begin == 0 && run.size() == 1;
        const auto& tok = tokens[run.begin];
        if (lone_initial && (tok.is_stopword || res.tagger.knows(tok.lower))) continue;
        ++f.n_named_entities;
    }

    f.pos_pattern_id = pos_pattern_id(tokens, starts_sentence, res.tagger, patterns, mode);

    if (!res.ngrams.empty() && t.length() <= res.ngrams.order()) {
        f.ngram_logfreq = std::log1p(res.ngrams.frequency_of_key(t.normalized));
    }
    return f;
}

SignalCounts phrase_signals(const CandidatePhrase& t, const DocumentContext& ctx) {
    SignalCounts out{};
    for (const auto& occ : t.occurrences) {
        const auto& s = ctx.signals(occ.sentence);
        for (std::size_t i = 0; i < kSignalTypeCount; ++i) out[i] = std::max(out[i], s[i]);
    }
    return out;
}

std::array<std::uint8_t, kCategoryCount> category_features(const Document& d) {
    std::array<std::uint8_t, kCategoryCount> bits{};
    bits[static_cast<std::size_t>(d.category)] = 1;
    return bits;
}

SubcategoryBits subcategory_features(const CandidatePhrase& t, const Gazetteer& gaz) { return gaz.lookup(t.normalized); }

FeatureVector assemble(const CandidatePhrase& t, const DocumentContext& ctx, const DocumentFrequencies& D,
                       const FeatureResources& res, PatternTable& patterns, PatternMode mode,
                       const FeatureOptions& opts, bool doc_in_corpus) {
    const Document& doc = ctx.document();
    FeatureVector fv;
    fv.tfidf = tfidf(t, D, doc_in_corpus) * opts.tfidf_scale;
    const auto& first = t.occurrences.front();
    fv.first_occurrence = ctx.token_count() == 0
                              ? 0.0
                              : static_cast<double>(ctx.sentence_offset(first.sentence) + first.offset) /
                                    static_cast<double>(ctx.token_count());
    fv.phrase_len_words = static_cast<int>(t.length());

    const auto shallow = shallow_semantic(t, doc, res, patterns, mode);
    fv.n_chars = shallow.n_chars;
    fv.n_named_entities = shallow.n_named_entities;
    fv.n_capitals = shallow.n_capitals;
    fv.pos_pattern_id = shallow.pos_pattern_id;
    fv.ngram_logfreq = shallow.ngram_logfreq;

    fv.top_category = category_features(doc);
    fv.sub_categories = subcategory_features(t, res.gazetteer);
    fv.signals = phrase_signals(t, ctx);
    return fv;
}

}  // namespace ake
