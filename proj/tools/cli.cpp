#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ake/corpus.hpp"
#include "ake/eval.hpp"
#include "ake/extractor.hpp"
#include "ake/features.hpp"
#include "ake/goldstandard.hpp"
#include "ake/ngram_store.hpp"
#include "ake/service.hpp"

namespace ake::cli {

namespace {

/// Raised for bad option values that CLI11 cannot validate on its own.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResourceFlags {
    std::string lm;
    std::string signals;
    std::string gazetteer;
};

void add_resource_flags(CLI::App* cmd, ResourceFlags& f) {
    cmd->add_option("--lm", f.lm, "n-gram model built with build-lm");
    cmd->add_option("--signals", f.signals, "extra rhetorical cue lexicon (sectioned text)");
    cmd->add_option("--gazetteer", f.gazetteer, "replacement gazetteer (phrase<TAB>labels)");
}

struct FilterFlags {
    std::optional<std::size_t> support_size;
    std::optional<double> fraction;

    void apply(FilterConfig& cfg) const {
        if (support_size) cfg.support_size = *support_size;
        if (fraction) cfg.removal_fraction = *fraction;
        try {
            cfg.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
};

void add_filter_flags(CLI::App* cmd, FilterFlags& f) {
    cmd->add_option("--support-size", f.support_size, "support sentences for light filtering (default 5)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--filter-fraction", f.fraction, "share of body sentences light filtering drops (default 0.10)")
        ->check(CLI::Range(0.0, 1.0));
}

FeatureResources load_resources(const ResourceFlags& f) {
    FeatureResources res;
    if (!f.lm.empty()) res.ngrams = NGramStore::load(f.lm);
    if (!f.signals.empty()) res.signals.merge(SignalLexicon::from_file(f.signals));
    if (!f.gazetteer.empty()) res.gazetteer = Gazetteer::from_file(f.gazetteer);
    return res;
}

SplitSpec parse_split(const std::string& text, std::uint64_t seed) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) throw UsageError("--split expects TRAIN/TEST, e.g. 450/50");
    try {
        std::size_t used = 0;
        SplitSpec spec;
        spec.train = std::stoul(text.substr(0, slash), &used);
        if (used != slash) throw std::invalid_argument(text);
        spec.test = std::stoul(text.substr(slash + 1), &used);
        if (used != text.size() - slash - 1) throw std::invalid_argument(text);
        spec.seed = seed;
        return spec;
    } catch (const std::logic_error&) {
        throw UsageError("--split expects TRAIN/TEST, e.g. 450/50; got '" + text + "'");
    }
}

DcgForm parse_dcg(const std::string& s) {
    if (s == "printed") return DcgForm::Printed;
    if (s == "conventional") return DcgForm::Conventional;
    throw UsageError("--dcg must be 'printed' or 'conventional'");
}

FeatureMask parse_mask(const std::string& s) {
    try {
        return FeatureMask::parse(s);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

Corpus select(const Corpus& corpus, const std::vector<std::string>& ids) {
    const auto index = index_stories(corpus);
    Corpus out;
    for (const auto& id : ids) {
        const auto it = index.find(id);
        if (it == index.end()) throw DataError("story " + id + " is not in the corpus");
        out.push_back(*it->second);
    }
    return out;
}

Corpus load_corpus(const std::string& path, const Stoplist& stop, std::ostream& err) {
    auto result = ingest_corpus(path, stop);
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';
    return std::move(result.documents);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path);
    f << text;
    if (!f) throw DataError("failed writing " + path);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open input: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Supervised topical key-phrase extraction toolkit", "ake"};
    app.require_subcommand(1);
    std::string stopwords_path;
    app.add_option("--stopwords", stopwords_path, "stopword list replacing the bundled English list");

    // build-lm ----------------------------------------------------------------
    auto* build_lm = app.add_subcommand("build-lm", "Build a compressed n-gram count model");
    std::vector<std::string> lm_text;
    std::string lm_corpus, lm_out;
    std::size_t lm_order = 4;
    unsigned lm_bits = 16;
    build_lm->add_option("--text", lm_text, "plain-text file(s), one or more sentences per line");
    build_lm->add_option("--corpus", lm_corpus, "story corpus (JSONL) to count as well");
    build_lm->add_option("--order", lm_order, "largest n")->check(CLI::Range(1, 8));
    build_lm->add_option("--bits", lm_bits, "fingerprint bits per key")->check(CLI::Range(1, 32));
    build_lm->add_option("--out", lm_out, "output model file")->required();

    // train -----------------------------------------------------------------------
    auto* train = app.add_subcommand("train", "Train a bagged decision-tree key-phrase model");
    std::string tr_corpus, tr_gold, tr_out, tr_mask = "baseline,ss,tc,rs,sc", tr_split;
    std::size_t tr_bags = 10, tr_min_leaf = 2;
    std::uint64_t tr_seed = 1, tr_split_seed = 1;
    double tr_threshold = 0.90, tr_idf_base = std::exp(1.0);
    bool tr_no_lf = false, tr_no_cn = false, tr_balance = false;
    ResourceFlags tr_res;
    train->add_option("--corpus", tr_corpus, "story corpus (JSONL)")->required();
    train->add_option("--gold", tr_gold, "gold standard from `ake aggregate`")->required();
    train->add_option("--mask", tr_mask, "feature groups: baseline,ss,tc,rs,sc");
    train->add_option("--bags", tr_bags, "number of bagged trees")->check(CLI::PositiveNumber);
    train->add_option("--seed", tr_seed, "bootstrap seed");
    train->add_option("--min-leaf", tr_min_leaf, "minimum instances per numeric branch")->check(CLI::PositiveNumber);
    train->add_option("--threshold", tr_threshold, "agreement share for a positive label")->check(CLI::Range(0.0, 1.0));
    train->add_option("--idf-base", tr_idf_base, "logarithm base of the idf term")->check(CLI::PositiveNumber);
    train->add_option("--split", tr_split, "TRAIN/TEST story counts; trains on the TRAIN part");
    train->add_option("--split-seed", tr_split_seed, "seed of the story split");
    train->add_flag("--no-light-filter", tr_no_lf, "skip light filtering");
    train->add_flag("--no-coref", tr_no_cn, "skip co-reference normalization");
    train->add_flag("--balance", tr_balance, "weight positives up to the negative mass");
    train->add_option("--out", tr_out, "output model file")->required();
    add_resource_flags(train, tr_res);
    FilterFlags tr_filter;
    add_filter_flags(train, tr_filter);

    // extract -------------------------------------------------------------------
    auto* extract = app.add_subcommand("extract", "Extract ranked key phrases from stories");
    std::string ex_model, ex_in, ex_category = "World Politics";
    std::size_t ex_k = 10;
    bool ex_no_lf = false, ex_no_cn = false, ex_json = false;
    ResourceFlags ex_res;
    extract->add_option("--model", ex_model, "model file from `ake train`")->required();
    extract->add_option("--in", ex_in, "plain text (first line is the title) or a JSONL corpus")->required();
    extract->add_option("--category", ex_category, "top category of a plain-text story");
    extract->add_option("--k", ex_k, "phrases per story")->check(CLI::PositiveNumber);
    extract->add_flag("--no-light-filter", ex_no_lf, "skip light filtering");
    extract->add_flag("--no-coref", ex_no_cn, "skip co-reference normalization");
    extract->add_flag("--json", ex_json, "print JSON records");
    add_resource_flags(extract, ex_res);
    FilterFlags ex_filter;
    add_filter_flags(extract, ex_filter);

    // eval --------------------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "Score a model against a gold standard");
    std::string ev_model, ev_corpus, ev_gold, ev_split, ev_dcg = "printed", ev_json, ev_hits;
    std::size_t ev_k = 10;
    std::uint64_t ev_split_seed = 1;
    ResourceFlags ev_res;
    eval->add_option("--model", ev_model, "model file")->required();
    eval->add_option("--corpus", ev_corpus, "story corpus (JSONL)")->required();
    eval->add_option("--gold", ev_gold, "gold standard")->required();
    eval->add_option("--k", ev_k, "phrases per story")->check(CLI::PositiveNumber);
    eval->add_option("--split", ev_split, "TRAIN/TEST counts; evaluates the TEST part");
    eval->add_option("--split-seed", ev_split_seed, "seed of the story split");
    eval->add_option("--dcg", ev_dcg, "printed (default) or conventional discounting");
    eval->add_option("--hits", ev_hits, "HIT file; adds the human-baseline nDCG");
    eval->add_option("--json", ev_json, "write machine-readable records here");
    add_resource_flags(eval, ev_res);

    // ablate ------------------------------------------------------------------------
    auto* ablate = app.add_subcommand("ablate", "Train and evaluate a list of feature/preprocessing conditions");
    std::string ab_corpus, ab_gold, ab_conditions = "standard", ab_split, ab_dcg = "printed", ab_json;
    std::size_t ab_k = 10, ab_bags = 10;
    std::uint64_t ab_seed = 1, ab_split_seed = 1;
    bool ab_balance = false;
    ResourceFlags ab_res;
    ablate->add_option("--corpus", ab_corpus, "story corpus (JSONL)")->required();
    ablate->add_option("--gold", ab_gold, "gold standard")->required();
    ablate->add_option("--conditions", ab_conditions, "'standard' or ';'-separated conditions like baseline+ss+cn");
    ablate->add_option("--split", ab_split, "TRAIN/TEST story counts (default 90%/10%)");
    ablate->add_option("--split-seed", ab_split_seed, "seed of the story split");
    ablate->add_option("--k", ab_k, "phrases per story")->check(CLI::PositiveNumber);
    ablate->add_option("--bags", ab_bags, "number of bagged trees")->check(CLI::PositiveNumber);
    ablate->add_option("--seed", ab_seed, "bootstrap seed");
    ablate->add_flag("--balance", ab_balance, "weight positives up to the negative mass");
    ablate->add_option("--dcg", ab_dcg, "printed (default) or conventional discounting");
    ablate->add_option("--json", ab_json, "write machine-readable records here");
    add_resource_flags(ablate, ab_res);
    FilterFlags ab_filter;
    add_filter_flags(ablate, ab_filter);

    // aggregate -----------------------------------------------------------------------
    auto* aggregate_cmd = app.add_subcommand("aggregate", "Filter HITs and aggregate votes into a gold standard");
    std::string ag_hits, ag_stories, ag_out, ag_rejected;
    aggregate_cmd->add_option("--hits", ag_hits, "HIT records (JSONL)")->required();
    aggregate_cmd->add_option("--stories", ag_stories, "story corpus the HITs refer to")->required();
    aggregate_cmd->add_option("--out", ag_out, "gold standard output (JSONL)")->required();
    aggregate_cmd->add_option("--rejected", ag_rejected, "write rejected HITs with reasons here");

    // serve ------------------------------------------------------------------------------
    auto* serve = app.add_subcommand("serve", "Run the annotation HTTP service");
    std::string sv_corpus, sv_host = "0.0.0.0";
    int sv_port = 8080;
    std::size_t sv_quota = 20;
    serve->add_option("--corpus", sv_corpus, "stories to annotate (JSONL)")->required();
    serve->add_option("--host", sv_host, "bind address");
    serve->add_option("--port", sv_port, "TCP port")->check(CLI::Range(1, 65535));
    serve->add_option("--quota", sv_quota, "HITs wanted per story")->check(CLI::PositiveNumber);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const Stoplist stop = stopwords_path.empty() ? Stoplist::english() : Stoplist::from_file(stopwords_path);

        if (*build_lm) {
            if (lm_text.empty() && lm_corpus.empty()) throw UsageError("build-lm needs --text and/or --corpus");
            std::vector<std::vector<std::string>> seqs;
            for (const auto& path : lm_text) {
                auto more = lm_sequences_from_text(slurp(path));
                seqs.insert(seqs.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
            }
            if (!lm_corpus.empty()) {
                auto more = lm_sequences_from_corpus(load_corpus(lm_corpus, stop, err));
                seqs.insert(seqs.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
            }
            NGramStore::Options o;
            o.order = lm_order;
            o.fingerprint_bits = lm_bits;
            if (count_ngrams(seqs, lm_order).empty()) throw DataError("the LM input contains no tokens");
            const auto store = NGramStore::build(seqs, o);
            store.save(lm_out);
            out << "n-grams: " << store.key_count() << "\nbytes: " << store.size_in_bytes() << "\nbits/key: "
                << fmt(8.0 * static_cast<double>(store.size_in_bytes()) / static_cast<double>(store.key_count()), 2)
                << "\nwrote " << lm_out << '\n';
            return kExitOk;
        }

        if (*train) {
            TrainingConfig cfg;
            cfg.mask = parse_mask(tr_mask);
            cfg.preprocess.coref = !tr_no_cn;
            cfg.preprocess.light_filter = !tr_no_lf;
            tr_filter.apply(cfg.preprocess.filter);
            cfg.bagging.bags = tr_bags;
            cfg.bagging.seed = tr_seed;
            cfg.bagging.tree.min_leaf = tr_min_leaf;
            cfg.balance = tr_balance;
            if (tr_idf_base == 1.0) throw UsageError("--idf-base must differ from 1");
            cfg.features.tfidf_scale = 1.0 / std::log(tr_idf_base);

            const auto corpus = load_corpus(tr_corpus, stop, err);
            const auto gold = read_gold(tr_gold);
            std::vector<std::string> ids;
            if (!tr_split.empty()) {
                ids = split_stories(corpus, parse_split(tr_split, tr_split_seed)).train;
            } else {
                for (const auto& d : corpus) {
                    if (gold.find(d.id)) ids.push_back(d.id);
                }
            }
            if (ids.empty()) throw DataError("no corpus story has a gold record");
            const auto res = load_resources(tr_res);
            const auto model = train_model(select(corpus, ids), positive_labels(gold, tr_threshold), res, cfg);
            model.save(tr_out);
            out << "trained on " << ids.size() << " stories, " << cfg.bagging.bags << " trees, mask "
                << cfg.mask.to_string();
            if (const auto oob = model.ensemble.oob_error()) out << ", out-of-bag error " << fmt(*oob);
            out << "\nwrote " << tr_out << '\n';
            return kExitOk;
        }

        if (*extract) {
            const auto model = KeyphraseModel::load(ex_model);
            const auto res = load_resources(ex_res);
            if (model.ngram_keys != res.ngrams.key_count())
                err << "warning: model was trained with an n-gram store of " << model.ngram_keys
                    << " keys, but " << res.ngrams.key_count() << " are loaded\n";
            Corpus docs;
            const bool jsonl = ex_in.size() >= 6 && ex_in.substr(ex_in.size() - 6) == ".jsonl";
            if (jsonl) {
                docs = load_corpus(ex_in, stop, err);
            } else {
                const auto cat = parse_category(ex_category);
                if (!cat) throw UsageError("unknown --category '" + ex_category + "'");
                const std::string text = slurp(ex_in);
                std::istringstream in(text);
                std::string title, line, body;
                while (std::getline(in, title) && title.find_first_not_of(" \t\r") == std::string::npos) {
                }
                while (std::getline(in, line)) body += line + "\n";
                if (title.find_first_not_of(" \t\r") == std::string::npos && body.empty())
                    throw DataError("input " + ex_in + " is empty");
                docs.push_back(make_document(ex_in, title, body, *cat, stop));
            }
            ExtractOptions xo;
            xo.k = ex_k;
            PreprocessOptions pp = model.preprocess;
            if (ex_no_lf) pp.light_filter = false;
            if (ex_no_cn) pp.coref = false;
            ex_filter.apply(pp.filter);
            xo.preprocess = pp;
            for (const auto& doc : docs) {
                const auto ranked = extract_top_k(doc, model, res, xo);
                if (ex_json) {
                    nlohmann::json arr = nlohmann::json::array();
                    for (const auto& r : ranked)
                        arr.push_back({{"phrase", r.phrase}, {"surface", r.surface}, {"score", r.score}});
                    out << nlohmann::json{{"id", doc.id}, {"phrases", arr}}.dump() << '\n';
                } else {
                    if (docs.size() > 1) out << "# " << doc.id << '\n';
                    for (std::size_t i = 0; i < ranked.size(); ++i)
                        out << (i + 1) << '\t' << fmt(ranked[i].score) << '\t' << ranked[i].surface << '\n';
                }
            }
            return kExitOk;
        }

        if (*eval) {
            const auto form = parse_dcg(ev_dcg);
            const auto model = KeyphraseModel::load(ev_model);
            const auto corpus = load_corpus(ev_corpus, stop, err);
            const auto gold = read_gold(ev_gold);
            const auto res = load_resources(ev_res);
            Corpus test = corpus;
            if (!ev_split.empty()) test = select(corpus, split_stories(corpus, parse_split(ev_split, ev_split_seed)).test);
            EvalOptions eo;
            eo.k = ev_k;
            eo.form = form;
            eo.condition = model.mask.to_string();
            const auto report = evaluate(model, test, gold, res, eo);
            out << "stories: " << report.stories.size() << "\nmacro nDCG@" << ev_k << ": " << fmt(report.macro_ndcg)
                << "\nmacro precision@" << ev_k << ": " << fmt(report.macro_precision) << '\n';
            if (report.empty_extractions) out << "empty extractions: " << report.empty_extractions << '\n';
            if (report.skipped_without_gold) out << "skipped (no gold): " << report.skipped_without_gold << '\n';
            auto j = report.to_json();
            if (!ev_hits.empty()) {
                const auto index = index_stories(corpus);
                const auto good = filter_bad_hits(read_hits(ev_hits), index).good;
                std::vector<std::string> ids;
                for (const auto& s : report.stories) ids.push_back(s.story_id);
                const double human = human_baseline_for_stories(good, index, gold, ids, 100, ev_k, 1, form);
                out << "human baseline nDCG@" << ev_k << ": " << fmt(human) << '\n';
                j["human_baseline_ndcg"] = human;
            }
            if (!ev_json.empty()) write_text(ev_json, j.dump(2) + "\n");
            return kExitOk;
        }

        if (*ablate) {
            AblationConfig cfg;
            cfg.k = ab_k;
            cfg.form = parse_dcg(ab_dcg);
            cfg.bagging.bags = ab_bags;
            cfg.bagging.seed = ab_seed;
            cfg.balance = ab_balance;
            ab_filter.apply(cfg.filter);
            std::vector<Condition> conditions;
            try {
                conditions = parse_conditions(ab_conditions);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            const auto corpus = load_corpus(ab_corpus, stop, err);
            const auto gold = read_gold(ab_gold);
            std::vector<std::pair<std::string, Category>> stories;
            for (const auto& d : corpus) {
                if (gold.find(d.id)) stories.emplace_back(d.id, d.category);
            }
            SplitSpec spec;
            if (!ab_split.empty()) {
                spec = parse_split(ab_split, ab_split_seed);
            } else {
                spec.test = std::max<std::size_t>(1, stories.size() / 10);
                spec.train = stories.size() - spec.test;
                spec.seed = ab_split_seed;
            }
            const auto parts = split_stories(stories, spec);
            const auto res = load_resources(ab_res);
            const auto rows =
                run_ablation(select(corpus, parts.train), select(corpus, parts.test), gold, res, conditions, cfg);
            out << "train stories: " << parts.train.size() << ", test stories: " << parts.test.size() << "\n\n"
                << format_ablation_table(rows);
            if (!ab_json.empty()) write_text(ab_json, ablation_json(rows).dump(2) + "\n");
            return kExitOk;
        }

        if (*aggregate_cmd) {
            const auto corpus = load_corpus(ag_stories, stop, err);
            const auto index = index_stories(corpus);
            const auto filtered = filter_bad_hits(read_hits(ag_hits), index);
            const auto gs = aggregate(filtered.good, index);
            std::ofstream f(ag_out, std::ios::binary);
            if (!f) throw DataError("cannot write " + ag_out);
            write_gold(f, gs);
            if (!ag_rejected.empty()) {
                std::string text;
                for (const auto& r : filtered.rejected) {
                    auto j = hit_to_json(r.hit);
                    nlohmann::json reasons = nlohmann::json::array();
                    for (auto reason : r.reasons) reasons.push_back(std::string(hit_rule_name(reason)));
                    j["reasons"] = reasons;
                    text += j.dump() + "\n";
                }
                write_text(ag_rejected, text);
            }
            out << "good HITs: " << filtered.good.size() << "\nrejected HITs: " << filtered.rejected.size() << '\n';
            std::map<std::string, std::size_t> by_rule;
            for (const auto& r : filtered.rejected) ++by_rule[std::string(hit_rule_name(r.first_reason()))];
            for (const auto& [rule, n] : by_rule) out << "  " << rule << ": " << n << '\n';
            out << "stories: " << gs.stories.size() << "\nmean phrases per story: " << fmt(gs.mean_phrases_per_story(), 2)
                << "\nwrote " << ag_out << '\n';
            return kExitOk;
        }

        if (*serve) {
            ServiceConfig cfg;
            cfg.quota = sv_quota;
            if (const char* dir = std::getenv("AKE_DATA_DIR"); dir && *dir) cfg.data_dir = dir;
            AnnotationService service(load_corpus(sv_corpus, stop, err), cfg);
            out << "serving " << sv_host << ':' << sv_port << ", HIT log " << service.log_path().string() << std::endl;
            if (!serve_annotation(service, sv_host, sv_port)) {
                err << "error: cannot listen on " << sv_host << ':' << sv_port << '\n';
                return kExitData;
            }
            return kExitOk;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace ake::cli
