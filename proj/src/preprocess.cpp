#include "ake/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "ake/entities.hpp"

namespace ake {

std::set<std::string> document_vocabulary(const Document& doc) {
    std::set<std::string> vocab;
    for (const auto& s : doc.sentences) {
        for (const auto& t : s.tokens) {
            if (t.kind != TokenKind::Punct && !t.is_stopword) vocab.insert(t.lower);
        }
    }
    return vocab;
}

SentenceVector sentence_vector(const Sentence& s, const std::set<std::string>& doc_vocab) {
    SentenceVector v;
    v.dim = doc_vocab.size();
    for (const auto& t : s.tokens) {
        if (t.kind == TokenKind::Punct || t.is_stopword) continue;
        v.weights[t.lower] += 1.0;
    }
    return v;
}

double euclidean_distance(const SentenceVector& x, const SentenceVector& y) {
    double sum = 0.0;
    auto xi = x.weights.begin();
    auto yi = y.weights.begin();
    while (xi != x.weights.end() || yi != y.weights.end()) {
        double d = 0.0;
        if (yi == y.weights.end() || (xi != x.weights.end() && xi->first < yi->first)) {
            d = xi->second;
            ++xi;
        } else if (xi == x.weights.end() || yi->first < xi->first) {
            d = yi->second;
            ++yi;
        } else {
            d = xi->second - yi->second;
            ++xi;
            ++yi;
        }
        sum += d * d;
    }
    return std::sqrt(sum);
}

void FilterConfig::validate() const {
    if (support_size < 1) throw std::invalid_argument("support set size must be at least 1");
    if (!(removal_fraction >= 0.0 && removal_fraction < 1.0))
        throw std::invalid_argument("removal fraction must lie in [0, 1)");
}

namespace {

std::vector<SentenceVector> all_vectors(const Document& doc) {
    const auto vocab = document_vocabulary(doc);
    std::vector<SentenceVector> vecs;
    vecs.reserve(doc.sentences.size());
    for (const auto& s : doc.sentences) vecs.push_back(sentence_vector(s, vocab));
    return vecs;
}

std::vector<std::size_t> nearest_to_centroid(const std::vector<SentenceVector>& vecs, std::size_t k) {
    SentenceVector centroid;
    for (const auto& v : vecs) {
        for (const auto& [term, w] : v.weights) centroid.weights[term] += w;
    }
    for (auto& [term, w] : centroid.weights) w /= static_cast<double>(vecs.size());

    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(vecs.size());
    for (std::size_t i = 0; i < vecs.size(); ++i) ranked.emplace_back(euclidean_distance(vecs[i], centroid), i);
    std::sort(ranked.begin(), ranked.end());

    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) out.push_back(ranked[i].second);
    return out;
}

std::vector<double> relevance_from(const std::vector<SentenceVector>& vecs, const std::vector<std::size_t>& support) {
    std::vector<double> rel(vecs.size(), 0.0);
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t s : support) best = std::min(best, euclidean_distance(vecs[i], vecs[s]));
        rel[i] = best;
    }
    return rel;
}

}  // namespace

std::vector<std::size_t> support_set(const Document& doc, const FilterConfig& cfg) {
    cfg.validate();
    if (doc.sentences.empty()) return {};
    return nearest_to_centroid(all_vectors(doc), cfg.support_size);
}

std::vector<double> sentence_relevance(const Document& doc, const FilterConfig& cfg) {
    cfg.validate();
    if (doc.sentences.empty()) return {};
    const auto vecs = all_vectors(doc);
    return relevance_from(vecs, nearest_to_centroid(vecs, cfg.support_size));
}

Document light_filter(const Document& doc, const FilterConfig& cfg) {
    cfg.validate();
    const std::size_t n_body = doc.body_sentence_count();
    const auto n_remove = static_cast<std::size_t>(std::floor(cfg.removal_fraction * static_cast<double>(n_body)));
    if (n_remove == 0) return doc;

    const auto rel = sentence_relevance(doc, cfg);
    std::vector<std::size_t> body;
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
        if (!doc.sentences[i].from_title) body.push_back(i);
    }
    // Farthest first; among equals the later sentence goes first.
    std::sort(body.begin(), body.end(), [&](std::size_t a, std::size_t b) {
        if (rel[a] != rel[b]) return rel[a] > rel[b];
        return a > b;
    });
    std::unordered_set<std::size_t> removed(body.begin(), body.begin() + static_cast<std::ptrdiff_t>(n_remove));

    Document out = doc;
    out.sentences.clear();
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
        if (removed.contains(i)) continue;
        Sentence s = doc.sentences[i];
        s.index = out.sentences.size();
        out.sentences.push_back(std::move(s));
    }
    return out;
}

namespace {

struct Mention {
    std::size_t sentence = 0;
    TokenRun run;
    std::string text;
};

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto sp = text.find(' ', pos);
        const auto end = sp == std::string::npos ? text.size() : sp;
        words.push_back(text.substr(pos, end - pos));
        pos = end + 1;
    }
    return words;
}

bool contains_run(const std::vector<std::string>& outer, const std::vector<std::string>& inner) {
    if (inner.size() >= outer.size()) return false;
    return std::search(outer.begin(), outer.end(), inner.begin(), inner.end()) != outer.end();
}

std::string surface_text(const std::vector<Token>& tokens, TokenRun run) {
    std::string text;
    for (std::size_t i = run.begin; i < run.end; ++i) {
        if (!text.empty()) text.push_back(' ');
        text += tokens[i].surface;
    }
    return text;
}

// Trims stopword tokens ("The", "I") from both ends of a capitalized run.
TokenRun trim_stopwords(const std::vector<Token>& tokens, TokenRun run) {
    while (run.begin < run.end && tokens[run.begin].is_stopword) ++run.begin;
    while (run.end > run.begin && tokens[run.end - 1].is_stopword) --run.end;
    return run;
}

std::vector<Mention> detect_mentions(const Document& doc) {
    // Lowercase forms seen capitalized away from a sentence start.
    std::unordered_set<std::string> mid_caps;
    for (const auto& s : doc.sentences) {
        if (s.from_title) continue;
        const std::size_t first = first_word_index(s.tokens);
        for (std::size_t i = first + 1; i < s.tokens.size(); ++i) {
            const auto& t = s.tokens[i];
            if (t.kind == TokenKind::Word && t.is_capitalized() && !t.is_stopword) mid_caps.insert(t.lower);
        }
    }

    std::vector<Mention> mentions;
    for (const auto& s : doc.sentences) {
        if (s.from_title) continue;
        const std::size_t first = first_word_index(s.tokens);
        for (TokenRun run : capitalized_runs(s.tokens, false)) {
            if (run.begin == first && !mid_caps.contains(s.tokens[run.begin].lower)) ++run.begin;
            run = trim_stopwords(s.tokens, run);
            if (run.size() == 0) continue;
            mentions.push_back({s.index, run, surface_text(s.tokens, run)});
        }
    }
    return mentions;
}

}  // namespace

CorefResult resolve_coreferences(const Document& doc) {
    const auto mentions = detect_mentions(doc);

    std::vector<std::string> forms;
    std::unordered_map<std::string, std::vector<std::string>> words_of;
    for (const auto& m : mentions) {
        if (words_of.contains(m.text)) continue;
        forms.push_back(m.text);
        words_of.emplace(m.text, split_words(m.text));
    }

    std::vector<std::string> maximal;
    for (const auto& f : forms) {
        const bool contained = std::any_of(forms.begin(), forms.end(), [&](const std::string& g) {
            return contains_run(words_of[g], words_of[f]);
        });
        if (!contained) maximal.push_back(f);
    }

    std::unordered_map<std::string, std::string> canonical_of;
    std::unordered_map<std::string, std::size_t> cluster_of;
    CorefResult result;
    for (const auto& b : maximal) {
        cluster_of.emplace(b, result.clusters.size());
        result.clusters.push_back(AliasCluster{b, {b}});
    }
    for (const auto& f : forms) {
        if (cluster_of.contains(f)) continue;
        std::vector<std::string> supers;
        for (const auto& b : maximal) {
            if (contains_run(words_of[b], words_of[f])) supers.push_back(b);
        }
        if (supers.size() != 1) continue;
        canonical_of.emplace(f, supers.front());
        result.clusters[cluster_of[supers.front()]].members.insert(f);
    }

    // Canonical token sequences, copied from the first occurrence of each canonical form.
    std::unordered_map<std::string, std::vector<Token>> canonical_tokens;
    for (const auto& m : mentions) {
        if (!cluster_of.contains(m.text) || canonical_tokens.contains(m.text)) continue;
        const auto& toks = doc.sentences[m.sentence].tokens;
        canonical_tokens.emplace(m.text, std::vector<Token>(toks.begin() + static_cast<std::ptrdiff_t>(m.run.begin),
                                                            toks.begin() + static_cast<std::ptrdiff_t>(m.run.end)));
    }

    std::unordered_map<std::size_t, std::vector<std::pair<TokenRun, std::string>>> rewrites;
    for (const auto& m : mentions) {
        if (auto it = canonical_of.find(m.text); it != canonical_of.end()) {
            rewrites[m.sentence].emplace_back(m.run, it->second);
        }
    }
    // Title-cased headlines give no capitalization evidence, so only exact
    // sub-mention runs are rewritten there.
    for (const auto& s : doc.sentences) {
        if (!s.from_title) continue;
        for (TokenRun run : capitalized_runs(s.tokens, false)) {
            run = trim_stopwords(s.tokens, run);
            if (run.size() == 0) continue;
            if (auto it = canonical_of.find(surface_text(s.tokens, run)); it != canonical_of.end()) {
                rewrites[s.index].emplace_back(run, it->second);
            }
        }
    }

    result.document = doc;
    for (auto& [sentence_index, edits] : rewrites) {
        auto& sentence = result.document.sentences[sentence_index];
        std::sort(edits.begin(), edits.end(),
                  [](const auto& a, const auto& b) { return a.first.begin > b.first.begin; });
        for (const auto& [run, canonical] : edits) {
            auto replacement = canonical_tokens.at(canonical);
            const CharSpan span{sentence.tokens[run.begin].span.start, sentence.tokens[run.end - 1].span.end};
            for (auto& t : replacement) t.span = span;
            auto first = sentence.tokens.begin() + static_cast<std::ptrdiff_t>(run.begin);
            sentence.tokens.erase(first, sentence.tokens.begin() + static_cast<std::ptrdiff_t>(run.end));
            sentence.tokens.insert(sentence.tokens.begin() + static_cast<std::ptrdiff_t>(run.begin),
                                   replacement.begin(), replacement.end());
            ++result.rewritten_mentions;
        }
    }
    return result;
}

Document preprocess(const Document& doc, const PreprocessOptions& opts) {
    Document out = opts.coref ? normalize_coreferences(doc) : doc;
    if (opts.light_filter) out = light_filter(out, opts.filter);
    return out;
}

}  // namespace ake
