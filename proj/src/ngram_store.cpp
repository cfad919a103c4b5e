#include "ake/ngram_store.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ake {

namespace {

constexpr char kMagic[6] = {'N', 'G', 'M', 'P', 'H', '1'};

std::string join(std::span<const std::string> words) {
    std::string key;
    for (const auto& w : words) {
        if (!key.empty()) key.push_back(' ');
        key += w;
    }
    return key;
}

}  // namespace

CountQuantizer::CountQuantizer(std::uint32_t exact_limit, double base) : exact_limit_(exact_limit), base_(base) {
    if (exact_limit < 1 || exact_limit > 200) throw std::invalid_argument("quantizer exact limit must be in [1, 200]");
    if (!(base > 1.0)) throw std::invalid_argument("quantizer base must exceed 1");
    for (std::uint32_t c = 0; c <= exact_limit + 1; ++c) lower_[c] = c;
    for (std::size_t c = exact_limit + 2; c < lower_.size(); ++c) {
        const auto grown = static_cast<std::uint64_t>(std::ceil(static_cast<double>(lower_[c - 1]) * base));
        lower_[c] = std::max(lower_[c - 1] + 1, grown);
    }
}

std::uint8_t CountQuantizer::encode(std::uint64_t count) const {
    const auto it = std::upper_bound(lower_.begin(), lower_.end(), count);
    return static_cast<std::uint8_t>(std::distance(lower_.begin(), it) - 1);
}

std::uint64_t CountQuantizer::upper_bound(std::uint8_t code) const {
    if (code == 255) return std::numeric_limits<std::uint64_t>::max();
    return lower_[code + 1] - 1;
}

double CountQuantizer::decode(std::uint8_t code) const {
    const auto lo = static_cast<double>(lower_[code]);
    if (code == 255) return lo;
    const auto hi = static_cast<double>(upper_bound(code));
    return std::sqrt(lo * hi);
}

NGramCounts count_ngrams(std::span<const std::vector<std::string>> sequences, std::size_t order) {
    if (order < 1) throw std::invalid_argument("n-gram order must be at least 1");
    NGramCounts counts;
    for (const auto& seq : sequences) {
        for (std::size_t i = 0; i < seq.size(); ++i) {
            std::string key;
            for (std::size_t n = 0; n < order && i + n < seq.size(); ++n) {
                if (n) key.push_back(' ');
                key += seq[i + n];
                ++counts[key];
            }
        }
    }
    return counts;
}

std::vector<std::vector<std::string>> lm_sequences_from_text(std::string_view text) {
    static const Stoplist kNone;
    std::vector<std::vector<std::string>> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> run;
        for (auto& t : tokenize(line, kNone)) {
            if (t.is_punct()) {
                if (!run.empty()) out.push_back(std::move(run));
                run.clear();
                continue;
            }
            run.push_back(std::move(t.lower));
        }
        if (!run.empty()) out.push_back(std::move(run));
    }
    return out;
}

std::vector<std::vector<std::string>> lm_sequences_from_corpus(const Corpus& corpus) {
    std::vector<std::vector<std::string>> out;
    for (const auto& doc : corpus) {
        for (const auto& s : doc.sentences) {
            std::vector<std::string> run;
            for (const auto& t : s.tokens) {
                if (t.is_punct()) {
                    if (!run.empty()) out.push_back(std::move(run));
                    run.clear();
                    continue;
                }
                run.push_back(t.lower);
            }
            if (!run.empty()) out.push_back(std::move(run));
        }
    }
    return out;
}

NGramStore NGramStore::build(std::span<const std::vector<std::string>> sequences, const Options& opts) {
    auto counts = count_ngrams(sequences, opts.order);
    if (counts.empty()) throw std::invalid_argument("cannot build an n-gram model from an empty corpus");
    return from_counts(counts, opts);
}

NGramStore NGramStore::from_counts(const NGramCounts& counts, const Options& opts) {
    if (counts.empty()) throw std::invalid_argument("cannot build an n-gram model from an empty corpus");
    if (opts.order < 1) throw std::invalid_argument("n-gram order must be at least 1");
    if (opts.fingerprint_bits < 1 || opts.fingerprint_bits > 32)
        throw std::invalid_argument("fingerprint bits must be in [1, 32]");

    std::vector<std::string> keys;
    keys.reserve(counts.size());
    for (const auto& [k, c] : counts) keys.push_back(k);
    std::sort(keys.begin(), keys.end());

    NGramStore store;
    store.order_ = opts.order;
    store.fingerprint_bits_ = opts.fingerprint_bits;
    store.fingerprint_seed_ = opts.seed ^ 0xf1f2f3f4f5f6f7f8ULL;
    store.quantizer_ = opts.quantizer;
    store.mph_ = MinimalPerfectHash::build(keys, opts.seed);

    const std::size_t n = keys.size();
    store.fingerprints_.assign((n * opts.fingerprint_bits + 63) / 64 + 1, 0);
    store.counts_.assign(n, 0);
    for (const auto& key : keys) {
        const std::uint64_t slot = store.mph_(key);
        const std::uint64_t fp = store.fingerprint(key);
        const std::uint64_t bit = slot * opts.fingerprint_bits;
        store.fingerprints_[bit / 64] |= fp << (bit % 64);
        if (bit % 64 + opts.fingerprint_bits > 64) store.fingerprints_[bit / 64 + 1] |= fp >> (64 - bit % 64);
        store.counts_[slot] = store.quantizer_.encode(counts.at(key));
    }
    return store;
}

std::uint64_t NGramStore::fingerprint(std::string_view key) const {
    const std::uint64_t mask = (1ULL << fingerprint_bits_) - 1;
    return hash_bytes(key, fingerprint_seed_) & mask;
}

std::uint64_t NGramStore::stored_fingerprint(std::uint64_t slot) const {
    const std::uint64_t bit = slot * fingerprint_bits_;
    const std::uint64_t mask = (1ULL << fingerprint_bits_) - 1;
    // The trailing padding word makes the second read always in range.
    const std::uint64_t lo = fingerprints_[bit / 64] >> (bit % 64);
    const std::uint64_t hi = bit % 64 == 0 ? 0 : fingerprints_[bit / 64 + 1] << (64 - bit % 64);
    return (lo | hi) & mask;
}

double NGramStore::frequency_of_key(std::string_view key, ProbeCounter* probes) const {
    if (empty()) return 0.0;
    const std::uint64_t slot = mph_(key, probes);
    if (probes) {
        probes->hashes += 1;
        probes->reads += 3;
    }
    if (stored_fingerprint(slot) != fingerprint(key)) return 0.0;
    return quantizer_.decode(counts_[slot]);
}

std::uint8_t NGramStore::count_code(std::string_view key) const {
    if (empty()) return 0;
    const std::uint64_t slot = mph_(key);
    if (stored_fingerprint(slot) != fingerprint(key)) return 0;
    return counts_[slot];
}

double NGramStore::frequency(std::span<const std::string> phrase, ProbeCounter* probes) const {
    if (phrase.empty()) throw std::invalid_argument("n-gram lookup needs at least one token");
    if (phrase.size() > order_)
        throw std::invalid_argument("phrase of " + std::to_string(phrase.size()) + " tokens exceeds model order " +
                                    std::to_string(order_));
    return frequency_of_key(join(phrase), probes);
}

std::size_t NGramStore::size_in_bytes() const {
    return mph_.size_in_bytes() + fingerprints_.size() * sizeof(std::uint64_t) + counts_.size();
}

void NGramStore::write(std::ostream& out) const {
    out.write(kMagic, sizeof(kMagic));
    io::write_u32(out, static_cast<std::uint32_t>(order_));
    io::write_u32(out, fingerprint_bits_);
    io::write_u64(out, mph_.size());
    io::write_u64(out, mph_.seed());
    io::write_u64(out, fingerprint_seed_);
    io::write_u32(out, quantizer_.exact_limit());
    io::write_f64(out, quantizer_.base());
    mph_.write(out);
    io::write_u64(out, fingerprints_.size());
    for (auto w : fingerprints_) io::write_u64(out, w);
    io::write_u64(out, counts_.size());
    out.write(reinterpret_cast<const char*>(counts_.data()), static_cast<std::streamsize>(counts_.size()));
}

NGramStore NGramStore::read(std::istream& in) {
    char magic[sizeof(kMagic)];
    if (!in.read(magic, sizeof(magic)) || !std::equal(magic, magic + sizeof(magic), kMagic))
        throw DataError("not an n-gram model file (bad magic)");
    NGramStore store;
    store.order_ = io::read_u32(in);
    store.fingerprint_bits_ = io::read_u32(in);
    const std::uint64_t key_count = io::read_u64(in);
    const std::uint64_t mph_seed = io::read_u64(in);
    store.fingerprint_seed_ = io::read_u64(in);
    const std::uint32_t exact = io::read_u32(in);
    const double base = io::read_f64(in);
    if (store.order_ < 1 || store.fingerprint_bits_ < 1 || store.fingerprint_bits_ > 32)
        throw DataError("n-gram model header out of range");
    store.quantizer_ = CountQuantizer(exact, base);
    store.mph_ = MinimalPerfectHash::read(in);
    if (store.mph_.size() != key_count || store.mph_.seed() != mph_seed)
        throw DataError("n-gram model header disagrees with hash section");
    const std::uint64_t fp_words = io::read_u64(in);
    if (fp_words != (key_count * store.fingerprint_bits_ + 63) / 64 + 1)
        throw DataError("n-gram model fingerprint section has the wrong size");
    store.fingerprints_.resize(fp_words);
    for (auto& w : store.fingerprints_) w = io::read_u64(in);
    const std::uint64_t n_counts = io::read_u64(in);
    if (n_counts != key_count) throw DataError("n-gram model count section has the wrong size");
    store.counts_.resize(n_counts);
    if (!in.read(reinterpret_cast<char*>(store.counts_.data()), static_cast<std::streamsize>(n_counts)))
        throw DataError("unexpected end of n-gram model file");
    return store;
}

void NGramStore::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write n-gram model: " + path.string());
    write(out);
    if (!out) throw DataError("failed writing n-gram model: " + path.string());
}

NGramStore NGramStore::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open n-gram model: " + path.string());
    return read(in);
}

}  // namespace ake
