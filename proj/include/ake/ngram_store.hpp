#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ake/corpus.hpp"
#include "ake/mph.hpp"

namespace ake {

/// 8-bit count codes: counts up to `exact_limit` are stored exactly, larger
/// counts fall into logarithmic buckets whose bounds grow by `base`.
class CountQuantizer {
public:
    explicit CountQuantizer(std::uint32_t exact_limit = 32, double base = 1.12);

    std::uint8_t encode(std::uint64_t count) const;
    /// Geometric mean of the bucket's integer bounds.
    double decode(std::uint8_t code) const;
    std::uint64_t lower_bound(std::uint8_t code) const { return lower_[code]; }
    /// Largest count mapping to `code` (saturating for the last bucket).
    std::uint64_t upper_bound(std::uint8_t code) const;

    std::uint32_t exact_limit() const { return exact_limit_; }
    double base() const { return base_; }

private:
    std::uint32_t exact_limit_;
    double base_;
    std::array<std::uint64_t, 256> lower_{};
};

using NGramCounts = std::unordered_map<std::string, std::uint64_t>;

/// Counts every 1..order-gram of each token sequence. Keys are space-joined tokens.
NGramCounts count_ngrams(std::span<const std::vector<std::string>> sequences, std::size_t order);

/// Lowercased word runs of plain text, one or more per line; punctuation breaks a run.
std::vector<std::vector<std::string>> lm_sequences_from_text(std::string_view text);
std::vector<std::vector<std::string>> lm_sequences_from_corpus(const Corpus& corpus);

/// Read-only n-gram frequency table: a minimal perfect hash maps each n-gram to
/// a slot holding a b-bit fingerprint and an 8-bit quantized count. Non-keys are
/// rejected by the fingerprint except with probability about 2^-b.
class NGramStore {
public:
    struct Options {
        std::size_t order = 4;
        unsigned fingerprint_bits = 16;
        std::uint64_t seed = 0x6e6772616d31ULL;
        CountQuantizer quantizer{};
    };

    NGramStore() = default;

    static NGramStore build(std::span<const std::vector<std::string>> sequences, const Options& opts);
    static NGramStore build(std::span<const std::vector<std::string>> sequences) { return build(sequences, Options{}); }
    static NGramStore from_counts(const NGramCounts& counts, const Options& opts);

    /// Dequantized count, or 0 when the fingerprint rejects the phrase.
    /// Throws std::invalid_argument if the phrase is empty or longer than order().
    double frequency(std::span<const std::string> phrase, ProbeCounter* probes = nullptr) const;
    double frequency_of_key(std::string_view key, ProbeCounter* probes = nullptr) const;
    std::uint8_t count_code(std::string_view key) const;

    std::size_t order() const { return order_; }
    unsigned fingerprint_bits() const { return fingerprint_bits_; }
    std::size_t key_count() const { return mph_.size(); }
    bool empty() const { return mph_.size() == 0; }
    const CountQuantizer& quantizer() const { return quantizer_; }
    const MinimalPerfectHash& mph() const { return mph_; }
    /// In-memory footprint of the hash, fingerprint and count arrays.
    std::size_t size_in_bytes() const;

    void write(std::ostream& out) const;
    static NGramStore read(std::istream& in);
    void save(const std::filesystem::path& path) const;
    static NGramStore load(const std::filesystem::path& path);

private:
    std::uint64_t fingerprint(std::string_view key) const;
    std::uint64_t stored_fingerprint(std::uint64_t slot) const;

    std::size_t order_ = 0;
    unsigned fingerprint_bits_ = 16;
    std::uint64_t fingerprint_seed_ = 0;
    CountQuantizer quantizer_{};
    MinimalPerfectHash mph_;
    std::vector<std::uint64_t> fingerprints_;  // packed, fingerprint_bits_ per slot
    std::vector<std::uint8_t> counts_;
};

}  // namespace ake
