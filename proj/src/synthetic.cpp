#include "ake/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ake/embedded_data.hpp"
#include "ake/features.hpp"
#include "json.hpp"

namespace ake {

namespace {

const std::vector<std::string> kTowns = {"Ashford", "Brookfield", "Carver",   "Dunmore",  "Elmwood",
                                         "Fairview", "Glenville", "Hartwell", "Ironton", "Kingsley"};
const std::vector<std::string> kDays = {"Monday", "Tuesday", "Wednesday", "Thursday", "Friday"};
const std::vector<std::string> kVerbs = {"reviewed", "praised",   "delayed", "approved", "described",
                                         "mentioned", "questioned", "welcomed", "examined", "discussed"};
const std::vector<std::string> kFillerNouns = {
    "schedule", "volunteer", "morning", "weather", "crowd",    "garden",  "corner",   "bench",   "window",
    "sidewalk", "neighbor",  "evening", "letter",  "staff",    "visitor", "parking",  "counter", "lobby",
    "poster",   "umbrella",  "notice",  "plaza",   "driveway", "mailbox", "sandwich", "stairway"};
const std::vector<std::string> kDecoyAdjectives = {"quiet",  "narrow", "wooden", "yellow", "rusty",  "gentle",
                                                   "hollow", "silver", "dusty",  "modest", "plain",  "crisp",
                                                   "faded",  "brisk",  "sturdy", "shallow", "velvet", "copper"};
const std::vector<std::string> kDecoyNouns = {"hallway", "ledger",  "lantern", "fence",   "bucket",  "pathway",
                                              "curtain", "cabinet", "blanket", "kettle",  "doorway", "notebook",
                                              "barrel",  "chimney", "basket",  "ribbon",  "saddle",  "drawer",
                                              "tray",    "hammer",  "teapot",  "doormat", "birdbath", "trellis"};
const std::vector<std::string> kKeyLeads = {"Moreover,",    "Furthermore,", "In addition,", "Nevertheless,",
                                            "For example,", "For instance,", "Hence,",      "Finally,",
                                            "In summary,",  "Probably"};
const std::vector<std::string> kPlainLeads = {"Meanwhile,", "Today,", "Later,", "Separately,", "Once again",
                                              "On Tuesday", "This week", "Afterwards,", "Elsewhere,", "Still"};

struct Picker {
    std::mt19937_64 rng;

    std::size_t below(std::size_t n) { return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64); }
    template <typename T>
    const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }
};

std::vector<std::string> words_of(const std::string& phrase) {
    std::vector<std::string> out;
    std::istringstream in(phrase);
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

std::set<std::string> cue_words() {
    std::set<std::string> out;
    const auto& lex = SignalLexicon::bundled();
    for (std::size_t t = 0; t < kSignalTypeCount; ++t) {
        for (const auto& cue : lex.cues(static_cast<SignalType>(t))) {
            for (auto& w : words_of(cue)) out.insert(w);
        }
    }
    return out;
}

// Two-word gazetteer phrases made only of plain lowercase content words.
std::vector<std::string> key_pool(const std::set<std::string>& banned) {
    std::vector<std::string> out;
    std::istringstream in{std::string(embedded::gazetteer())};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const std::string phrase = line.substr(0, line.find('\t'));
        const auto words = words_of(phrase);
        if (words.size() != 2) continue;
        bool ok = true;
        for (const auto& w : words) {
            ok = ok && std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
            ok = ok && !Stoplist::english().contains(w) && !banned.contains(w);
        }
        if (ok) out.push_back(phrase);
    }
    return out;
}

std::string sentence(const std::string& lead, const std::string& phrase, Picker& p, bool exclaim) {
    return lead + " the " + phrase + " " + p.pick(kVerbs) + " the " + p.pick(kFillerNouns) + " at the " +
           p.pick(kFillerNouns) + (exclaim ? "!" : ".");
}

std::string filler_sentence(Picker& p) {
    switch (p.below(3)) {
        case 0: return "Residents of " + p.pick(kTowns) + " " + p.pick(kVerbs) + " the " + p.pick(kFillerNouns) + " on " + p.pick(kDays) + ".";
        case 1: return p.pick(kPlainLeads) + " the " + p.pick(kFillerNouns) + " " + p.pick(kVerbs) + " the " + p.pick(kFillerNouns) + ".";
        default: return "Staff at the " + p.pick(kFillerNouns) + " " + p.pick(kVerbs) + " the " + p.pick(kFillerNouns) + " on " + p.pick(kDays) + ".";
    }
}

std::optional<Selection> find_phrase(const Document& doc, const std::string& phrase) {
    const auto words = words_of(phrase);
    for (const auto& s : doc.sentences) {
        for (std::size_t i = 0; i + words.size() <= s.tokens.size(); ++i) {
            bool match = true;
            for (std::size_t k = 0; k < words.size() && match; ++k) match = s.tokens[i + k].lower == words[k];
            if (match) return Selection{s.index, i, i + words.size()};
        }
    }
    return std::nullopt;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticOptions& opts) {
    if (opts.docs_per_category < 1 || opts.keys_per_doc < 1 || opts.annotators < 1)
        throw std::invalid_argument("synthetic corpus needs documents, key phrases and annotators");
    Picker p{std::mt19937_64(opts.seed)};
    const std::size_t n_docs = opts.docs_per_category * kCategoryCount;
    const std::size_t slots = n_docs * opts.keys_per_doc;

    // Every key and decoy phrase is planted in exactly two stories so that
    // document frequency carries no information.
    std::set<std::string> banned = cue_words();
    for (const auto* list : {&kFillerNouns, &kDecoyAdjectives, &kDecoyNouns, &kVerbs}) banned.insert(list->begin(), list->end());
    auto keys = key_pool(banned);
    p.shuffle(keys);
    if (keys.size() * 2 < slots) throw std::invalid_argument("gazetteer has too few two-word phrases for this corpus size");
    keys.resize((slots + 1) / 2);

    std::vector<std::string> decoys;
    {
        std::set<std::string> seen;
        while (decoys.size() < keys.size()) {
            std::string d = p.pick(kDecoyAdjectives) + " " + p.pick(kDecoyNouns);
            if (Gazetteer::bundled().lookup(d).none() && seen.insert(d).second) decoys.push_back(d);
        }
    }

    auto assign = [&](const std::vector<std::string>& pool) {
        std::vector<std::string> flat;
        for (const auto& k : pool) flat.insert(flat.end(), 2, k);
        flat.resize(slots);
        for (int attempt = 0;; ++attempt) {
            p.shuffle(flat);
            bool clash = false;
            for (std::size_t d = 0; d < n_docs && !clash; ++d) {
                std::set<std::string> here(flat.begin() + static_cast<std::ptrdiff_t>(d * opts.keys_per_doc),
                                           flat.begin() + static_cast<std::ptrdiff_t>((d + 1) * opts.keys_per_doc));
                clash = here.size() != opts.keys_per_doc;
            }
            if (!clash) return flat;
            if (attempt > 1000) throw std::logic_error("could not spread planted phrases across stories");
        }
    };
    const auto key_slots = assign(keys);
    const auto decoy_slots = assign(decoys);

    SyntheticData out;
    std::size_t doc_no = 0;
    for (auto cat : all_categories()) {
        for (std::size_t i = 0; i < opts.docs_per_category; ++i, ++doc_no) {
            SyntheticRecord rec;
            char id[16];
            std::snprintf(id, sizeof(id), "syn-%03zu", doc_no + 1);
            rec.id = id;
            rec.category = cat;
            rec.title = p.pick(kTowns) + " notes for " + p.pick(kDays);

            std::vector<std::string> sentences;
            std::vector<std::string> planted;
            std::vector<std::string> decoy_here;
            for (std::size_t k = 0; k < opts.keys_per_doc; ++k) {
                const auto& key = key_slots[doc_no * opts.keys_per_doc + k];
                const auto& decoy = decoy_slots[doc_no * opts.keys_per_doc + k];
                planted.push_back(key);
                decoy_here.push_back(decoy);
                const std::size_t tf = 2 + p.below(2);
                for (std::size_t t = 0; t < tf; ++t) {
                    sentences.push_back(sentence(p.pick(kKeyLeads), key, p, p.below(4) == 0));
                    sentences.push_back(sentence(p.pick(kPlainLeads), decoy, p, false));
                }
            }
            const std::size_t fillers = 6 + p.below(3);
            for (std::size_t f = 0; f < fillers; ++f) sentences.push_back(filler_sentence(p));
            p.shuffle(sentences);
            for (const auto& s : sentences) {
                if (!rec.body.empty()) rec.body.push_back(' ');
                rec.body += s;
            }
            out.planted[rec.id] = planted;
            out.decoys[rec.id] = decoy_here;
            out.corpus.push_back(make_document(rec.id, rec.title, rec.body, rec.category));
            out.records.push_back(std::move(rec));
        }
    }

    // Simulated annotators.
    const int need = std::max(1, required_votes(static_cast<int>(opts.annotators)));
    for (std::size_t d = 0; d < out.corpus.size(); ++d) {
        const Document& doc = out.corpus[d];
        std::vector<std::set<std::string>> picks(opts.annotators);
        auto vote = [&](const std::string& phrase, std::size_t votes) {
            std::vector<std::size_t> who(opts.annotators);
            for (std::size_t a = 0; a < who.size(); ++a) who[a] = a;
            p.shuffle(who);
            for (std::size_t v = 0; v < std::min(votes, who.size()); ++v) picks[who[v]].insert(phrase);
        };
        for (const auto& key : out.planted[doc.id]) {
            const std::size_t slack = opts.annotators - static_cast<std::size_t>(need);
            vote(key, opts.annotators - (slack > 0 ? p.below(slack + 1) : 0));
        }
        const std::size_t decoy_cap = std::max<std::size_t>(1, static_cast<std::size_t>(need) - 1);
        for (const auto& decoy : out.decoys[doc.id]) vote(decoy, std::min(decoy_cap, 1 + p.below(2)));
        std::vector<std::string> present;
        for (const auto& w : kFillerNouns) {
            if (find_phrase(doc, w)) present.push_back(w);
        }
        p.shuffle(present);
        for (std::size_t f = 0; f < std::min<std::size_t>(3, present.size()); ++f) vote(present[f], 1);

        for (std::size_t a = 0; a < opts.annotators; ++a) {
            Hit h;
            char worker[32];
            std::snprintf(worker, sizeof(worker), "w%02zu", a + 1);
            h.worker_id = worker;
            h.story_id = doc.id;
            h.hit_id = doc.id + "-" + h.worker_id;
            h.duration_seconds = static_cast<double>(60 + p.below(340));
            for (const auto& phrase : picks[a]) {
                if (auto sel = find_phrase(doc, phrase)) h.selections.push_back(*sel);
            }
            std::sort(h.selections.begin(), h.selections.end(), [](const Selection& x, const Selection& y) {
                return std::tie(x.sentence, x.start_token) < std::tie(y.sentence, y.start_token);
            });
            out.hits.push_back(std::move(h));
        }
        if (opts.include_bad_hits && d % 5 == 0) {
            Hit h;
            h.worker_id = "w-fast";
            h.story_id = doc.id;
            h.hit_id = doc.id + "-w-fast";
            h.duration_seconds = 20.0;
            for (const auto& phrase : out.decoys[doc.id]) {
                if (auto sel = find_phrase(doc, phrase)) h.selections.push_back(*sel);
            }
            out.hits.push_back(std::move(h));
        }
    }

    // LM text: planted phrases are frequent, decoys never occur.
    std::ostringstream lm;
    std::vector<std::string> lm_lines;
    for (const auto& key : keys) {
        for (std::size_t i = 0; i < opts.lm_mentions; ++i) lm_lines.push_back(sentence(p.pick(kPlainLeads), key, p, false));
    }
    for (std::size_t i = 0; i < opts.lm_filler_lines; ++i) lm_lines.push_back(filler_sentence(p));
    p.shuffle(lm_lines);
    for (const auto& l : lm_lines) lm << l << '\n';
    out.lm_text = lm.str();
    return out;
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw DataError("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("corpus.jsonl");
        for (const auto& r : data.records) {
            f << nlohmann::json{{"id", r.id}, {"title", r.title}, {"body", r.body},
                                {"category", std::string(category_label(r.category))}}
                     .dump()
              << '\n';
        }
    }
    {
        auto f = open("hits.jsonl");
        write_hits(f, data.hits);
    }
    {
        auto f = open("gold.jsonl");
        const auto index = index_stories(data.corpus);
        write_gold(f, aggregate(filter_bad_hits(data.hits, index).good, index));
    }
    {
        auto f = open("lm.txt");
        f << data.lm_text;
    }
}

}  // namespace ake
