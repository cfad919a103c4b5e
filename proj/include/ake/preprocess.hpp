#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ake/corpus.hpp"

namespace ake {

/// Stopword-free term-frequency vector of one sentence.
struct SentenceVector {
    std::map<std::string, double> weights;
    std::size_t dim = 0;  // vocabulary size of the owning document

    bool is_zero() const { return weights.empty(); }
};

/// Distinct non-stopword word forms of a document, in sorted order.
std::set<std::string> document_vocabulary(const Document& doc);

SentenceVector sentence_vector(const Sentence& s, const std::set<std::string>& doc_vocab);

/// sqrt(sum_i (x_i - y_i)^2) over the union of non-zero coordinates.
double euclidean_distance(const SentenceVector& x, const SentenceVector& y);

struct FilterConfig {
    std::size_t support_size = 5;
    double removal_fraction = 0.10;

    void validate() const;
};

/// Indices of the `support_size` sentences nearest the centroid of all
/// sentence vectors, nearest first; ties go to the lower index. Returns every
/// sentence when the document is shorter than the support set.
std::vector<std::size_t> support_set(const Document& doc, const FilterConfig& cfg = {});

/// Distance of every sentence to its nearest support-set member.
std::vector<double> sentence_relevance(const Document& doc, const FilterConfig& cfg = {});

/// Drops floor(removal_fraction * body sentences) body sentences that lie
/// farthest from the support set. The title is never removed; survivors keep
/// their order and are re-indexed from 0.
Document light_filter(const Document& doc, const FilterConfig& cfg = {});

struct AliasCluster {
    std::string canonical;
    std::set<std::string> members;
};

struct CorefResult {
    Document document;
    std::vector<AliasCluster> clusters;
    std::size_t rewritten_mentions = 0;
};

/// Rewrites partial named-entity mentions ("Jackson") to the single longer
/// mention that contains them ("Michael Jackson"). Sub-mentions contained in
/// more than one longer mention are left alone.
CorefResult resolve_coreferences(const Document& doc);

inline Document normalize_coreferences(const Document& doc) { return resolve_coreferences(doc).document; }

struct PreprocessOptions {
    bool coref = true;
    bool light_filter = true;
    FilterConfig filter;
};

/// Co-reference normalization followed by light filtering, each optional.
Document preprocess(const Document& doc, const PreprocessOptions& opts);

}  // namespace ake
