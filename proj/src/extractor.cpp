#include "ake/extractor.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ake {

namespace {

constexpr const char* kModelMagic = "AKEMODEL1";

std::string expect_token(std::istream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) throw DataError(std::string("model file truncated while reading ") + what);
    return tok;
}

void expect_keyword(std::istream& in, const char* keyword) {
    const std::string tok = expect_token(in, keyword);
    if (tok != keyword) throw DataError(std::string("model file: expected '") + keyword + "', got '" + tok + "'");
}

std::uint64_t expect_uint(std::istream& in, const char* what) {
    const std::string tok = expect_token(in, what);
    std::uint64_t v = 0;
    std::istringstream ss(tok);
    if (!(ss >> v) || !ss.eof()) throw DataError(std::string("model file: bad ") + what + " '" + tok + "'");
    return v;
}

bool expect_flag(std::istream& in, const char* what) {
    const auto v = expect_uint(in, what);
    if (v > 1) throw DataError(std::string("model file: ") + what + " must be 0 or 1");
    return v == 1;
}

}  // namespace

void KeyphraseModel::write(std::ostream& out) const {
    out << kModelMagic << '\n';
    out << "mask " << mask.to_string() << '\n';
    out << "preprocess " << (preprocess.coref ? 1 : 0) << ' ' << (preprocess.light_filter ? 1 : 0) << ' '
        << preprocess.filter.support_size << ' ' << format_double(preprocess.filter.removal_fraction) << '\n';
    out << "tfidf_scale " << format_double(features.tfidf_scale) << '\n';
    out << "ngram_keys " << ngram_keys << '\n';
    out << "patterns " << patterns.size() << '\n';
    for (const auto& p : patterns.patterns()) out << p << '\n';

    std::vector<std::pair<std::string, std::uint32_t>> rows(df.table().begin(), df.table().end());
    std::sort(rows.begin(), rows.end());
    out << "df " << df.documents() << ' ' << rows.size() << '\n';
    for (const auto& [phrase, count] : rows) {
        const auto words = std::count(phrase.begin(), phrase.end(), ' ') + 1;
        out << count << ' ' << words << ' ' << phrase << '\n';
    }
    ensemble.write(out);
    out << "end\n";
}

KeyphraseModel KeyphraseModel::read(std::istream& in) {
    if (expect_token(in, "header") != kModelMagic) throw DataError("not a key-phrase model file (missing AKEMODEL1 header)");
    KeyphraseModel m;
    expect_keyword(in, "mask");
    try {
        m.mask = FeatureMask::parse(expect_token(in, "mask"));
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    expect_keyword(in, "preprocess");
    m.preprocess.coref = expect_flag(in, "coref flag");
    m.preprocess.light_filter = expect_flag(in, "light-filter flag");
    m.preprocess.filter.support_size = expect_uint(in, "support size");
    m.preprocess.filter.removal_fraction = parse_double(expect_token(in, "removal fraction"));
    expect_keyword(in, "tfidf_scale");
    m.features.tfidf_scale = parse_double(expect_token(in, "tfidf scale"));
    expect_keyword(in, "ngram_keys");
    m.ngram_keys = expect_uint(in, "n-gram key count");

    expect_keyword(in, "patterns");
    const auto n_patterns = expect_uint(in, "pattern count");
    for (std::uint64_t i = 0; i < n_patterns; ++i) {
        const auto id = m.patterns.intern(expect_token(in, "pattern"));
        if (static_cast<std::uint64_t>(id) != i + 1) throw DataError("model file: duplicate POS pattern");
    }

    expect_keyword(in, "df");
    const auto documents = expect_uint(in, "document count");
    const auto entries = expect_uint(in, "df entry count");
    std::unordered_map<std::string, std::uint32_t> table;
    table.reserve(entries);
    for (std::uint64_t i = 0; i < entries; ++i) {
        const auto count = expect_uint(in, "document frequency");
        const auto words = expect_uint(in, "phrase length");
        if (words < 1 || words > kMaxPhraseLength) throw DataError("model file: bad phrase length in df table");
        std::string phrase;
        for (std::uint64_t w = 0; w < words; ++w) {
            if (w) phrase.push_back(' ');
            phrase += expect_token(in, "df phrase");
        }
        table[phrase] = static_cast<std::uint32_t>(count);
    }
    m.df.set(documents, std::move(table));
    m.ensemble = Ensemble::read(in);
    if (m.ensemble.dimension() != feature_dimension(m.mask))
        throw DataError("model file: ensemble dimensionality disagrees with the feature mask");
    expect_keyword(in, "end");
    return m;
}

void KeyphraseModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model: " + path.string());
    write(out);
    if (!out) throw DataError("failed writing model: " + path.string());
}

KeyphraseModel KeyphraseModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model: " + path.string());
    return read(in);
}

LabeledCandidates build_training_set(const Corpus& processed, const PositiveSets& positives,
                                     const DocumentFrequencies& df, const FeatureResources& res, FeatureMask mask,
                                     const FeatureOptions& fopts, PatternTable& patterns) {
    LabeledCandidates out;
    for (const auto& doc : processed) {
        const auto pos_it = positives.find(doc.id);
        const DocumentContext ctx(doc, res.signals);
        for (const auto& cand : generate_candidates(doc)) {
            const auto fv = assemble(cand, ctx, df, res, patterns, PatternMode::Learn, fopts, true);
            Instance inst;
            inst.x = fv.dense(mask);
            inst.label = pos_it != positives.end() && pos_it->second.contains(cand.normalized) ? 1 : 0;
            out.instances.push_back(std::move(inst));
            out.story_ids.push_back(doc.id);
            out.phrases.push_back(cand.normalized);
        }
    }
    return out;
}

KeyphraseModel train_model(const Corpus& train_docs, const PositiveSets& positives, const FeatureResources& res,
                           const TrainingConfig& cfg) {
    if (train_docs.empty()) throw std::invalid_argument("no training documents");
    if (cfg.mask.empty()) throw std::invalid_argument("feature mask selects no groups");
    cfg.preprocess.filter.validate();

    Corpus processed;
    processed.reserve(train_docs.size());
    for (const auto& d : train_docs) processed.push_back(preprocess(d, cfg.preprocess));

    KeyphraseModel model;
    model.mask = cfg.mask;
    model.preprocess = cfg.preprocess;
    model.features = cfg.features;
    model.ngram_keys = res.ngrams.key_count();
    model.df = document_frequencies(processed);

    auto data = build_training_set(processed, positives, model.df, res, cfg.mask, cfg.features, model.patterns);
    if (data.instances.empty()) throw std::invalid_argument("training documents produced no candidate phrases");
    if (cfg.balance) {
        const auto pos = std::count_if(data.instances.begin(), data.instances.end(), [](const Instance& i) { return i.label == 1; });
        const auto neg = static_cast<std::ptrdiff_t>(data.instances.size()) - pos;
        if (pos > 0 && neg > 0) {
            const double w = static_cast<double>(neg) / static_cast<double>(pos);
            for (auto& inst : data.instances) {
                if (inst.label == 1) inst.weight = w;
            }
        }
    }
    model.ensemble = Ensemble::train(data.instances, feature_kinds(cfg.mask), cfg.bagging);
    return model;
}

bool ranks_before(const RankedPhrase& a, const RankedPhrase& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.tfidf != b.tfidf) return a.tfidf > b.tfidf;
    if (a.first_occurrence != b.first_occurrence) return a.first_occurrence < b.first_occurrence;
    return a.phrase < b.phrase;
}

std::vector<RankedPhrase> extract_top_k(const Document& doc, const KeyphraseModel& model, const FeatureResources& res,
                                        const ExtractOptions& opts) {
    const Document processed = preprocess(doc, opts.preprocess.value_or(model.preprocess));
    const DocumentContext ctx(processed, res.signals);
    PatternTable patterns = model.patterns;

    std::vector<RankedPhrase> ranked;
    for (const auto& cand : generate_candidates(processed)) {
        const auto fv = assemble(cand, ctx, model.df, res, patterns, PatternMode::Frozen, model.features,
                                 opts.doc_in_corpus);
        const Occurrence occ = representative_occurrence(cand, processed);
        const auto& toks = processed.sentences[occ.sentence].tokens;
        std::string surface;
        for (std::size_t i = 0; i < cand.length(); ++i) {
            if (i) surface.push_back(' ');
            surface += toks[occ.offset + i].surface;
        }
        ranked.push_back(RankedPhrase{cand.normalized, std::move(surface), model.ensemble.score(fv.dense(model.mask)),
                                      fv.tfidf, fv.first_occurrence});
    }
    std::sort(ranked.begin(), ranked.end(), ranks_before);
    if (ranked.size() > opts.k) ranked.resize(opts.k);
    return ranked;
}

}  // namespace ake
