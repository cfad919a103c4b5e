#include "ake/mph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "ake/corpus.hpp"

namespace ake {

namespace {

constexpr std::uint64_t kUnassigned = 3;
constexpr std::uint64_t kVerticesPerWord = 32;
constexpr std::uint64_t kVerticesPerBlock = 64;
constexpr double kVerticesPerKey = 1.23;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t load_le(const unsigned char* p, std::size_t n) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

struct Edge {
    std::uint32_t v[3];
};

Edge edge_for(std::string_view key, std::uint64_t seed, std::uint64_t part) {
    const std::uint64_t h1 = hash_bytes(key, seed);
    const std::uint64_t h2 = mix64(h1 ^ 0x9e3779b97f4a7c15ULL);
    auto reduce = [part](std::uint64_t x) {
        return static_cast<std::uint32_t>((static_cast<unsigned __int128>(x & 0xffffffffULL) * part) >> 32);
    };
    return Edge{{reduce(h1), static_cast<std::uint32_t>(part + reduce(h1 >> 32)),
                 static_cast<std::uint32_t>(2 * part + reduce(h2))}};
}

// Number of 2-bit fields of `w` selected by `mask` that hold a value other than 3.
std::uint64_t assigned_in(std::uint64_t w, std::uint64_t mask) {
    const std::uint64_t unassigned = w & (w >> 1) & 0x5555555555555555ULL & mask;
    return static_cast<std::uint64_t>(std::popcount(mask & 0x5555555555555555ULL)) -
           static_cast<std::uint64_t>(std::popcount(unassigned));
}

}  // namespace

std::uint64_t hash_bytes(std::string_view key, std::uint64_t seed) {
    const auto* p = reinterpret_cast<const unsigned char*>(key.data());
    std::size_t n = key.size();
    std::uint64_t h = mix64(seed ^ (0x9e3779b97f4a7c15ULL * (n + 1)));
    while (n >= 8) {
        h = mix64(h ^ load_le(p, 8)) * 0xff51afd7ed558ccdULL;
        p += 8;
        n -= 8;
    }
    if (n > 0) h = mix64(h ^ load_le(p, n) ^ (static_cast<std::uint64_t>(n) << 56));
    return mix64(h);
}

MinimalPerfectHash MinimalPerfectHash::build(std::span<const std::string> keys, std::uint64_t seed,
                                             int max_attempts) {
    if (keys.empty()) throw std::invalid_argument("minimal perfect hash needs at least one key");
    {
        std::vector<std::string_view> sorted(keys.begin(), keys.end());
        std::sort(sorted.begin(), sorted.end());
        if (auto dup = std::adjacent_find(sorted.begin(), sorted.end()); dup != sorted.end())
            throw std::invalid_argument("duplicate key in minimal perfect hash input: '" + std::string(*dup) + "'");
    }
    const std::size_t n = keys.size();
    if (n >= (1ULL << 31)) throw std::invalid_argument("too many keys for a 32-bit vertex space");

    MinimalPerfectHash mph;
    mph.key_count_ = n;
    mph.part_size_ = static_cast<std::uint64_t>(std::ceil(kVerticesPerKey * static_cast<double>(n) / 3.0)) + 1;
    const std::uint64_t vertices = 3 * mph.part_size_;

    std::vector<Edge> edges(n);
    std::vector<std::uint32_t> degree(vertices);
    std::vector<std::uint32_t> edge_xor(vertices);
    std::vector<std::uint32_t> queue;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> order;  // (edge, free vertex)
    queue.reserve(vertices);
    order.reserve(n);

    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const std::uint64_t s = mix64(seed + static_cast<std::uint64_t>(attempt) * 0x632be59bd9b4e019ULL);
        std::fill(degree.begin(), degree.end(), 0);
        std::fill(edge_xor.begin(), edge_xor.end(), 0);
        for (std::uint32_t e = 0; e < n; ++e) {
            edges[e] = edge_for(keys[e], s, mph.part_size_);
            for (auto v : edges[e].v) {
                ++degree[v];
                edge_xor[v] ^= e;
            }
        }

        queue.clear();
        order.clear();
        for (std::uint32_t v = 0; v < vertices; ++v) {
            if (degree[v] == 1) queue.push_back(v);
        }
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const std::uint32_t v = queue[head];
            if (degree[v] != 1) continue;
            const std::uint32_t e = edge_xor[v];
            order.emplace_back(e, v);
            for (auto u : edges[e].v) {
                --degree[u];
                edge_xor[u] ^= e;
                if (degree[u] == 1) queue.push_back(u);
            }
        }
        if (order.size() != n) continue;

        mph.seed_ = s;
        mph.attempts_ = attempt + 1;
        mph.values_.assign((vertices + kVerticesPerWord - 1) / kVerticesPerWord, ~0ULL);
        auto set_value = [&](std::uint32_t v, std::uint64_t val) {
            auto& w = mph.values_[v / kVerticesPerWord];
            const unsigned shift = 2 * (v % kVerticesPerWord);
            w = (w & ~(3ULL << shift)) | (val << shift);
        };
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const auto [e, v] = *it;
            const auto& edge = edges[e];
            std::uint32_t pos = 0;
            std::uint32_t others = 0;
            for (std::uint32_t i = 0; i < 3; ++i) {
                if (edge.v[i] == v) {
                    pos = i;
                } else {
                    others += mph.value_at(edge.v[i]);
                }
            }
            set_value(v, (pos + 6 - others % 3) % 3);
        }
        mph.build_rank();
        return mph;
    }
    throw std::runtime_error("minimal perfect hash: hypergraph not peelable after " + std::to_string(max_attempts) +
                             " attempts");
}

std::uint32_t MinimalPerfectHash::value_at(std::uint64_t vertex) const {
    return static_cast<std::uint32_t>((values_[vertex / kVerticesPerWord] >> (2 * (vertex % kVerticesPerWord))) & 3);
}

void MinimalPerfectHash::build_rank() {
    const std::uint64_t vertices = 3 * part_size_;
    ranks_.assign((vertices + kVerticesPerBlock - 1) / kVerticesPerBlock, 0);
    std::uint32_t running = 0;
    for (std::uint64_t v = 0; v < vertices; ++v) {
        if (v % kVerticesPerBlock == 0) ranks_[v / kVerticesPerBlock] = running;
        if (value_at(v) != kUnassigned) ++running;
    }
}

std::uint64_t MinimalPerfectHash::rank(std::uint64_t vertex, ProbeCounter* probes) const {
    const std::uint64_t block = vertex / kVerticesPerBlock;
    const std::uint64_t word = block * 2;
    const std::uint64_t offset = vertex % kVerticesPerBlock;
    std::uint64_t r = ranks_[block];
    // Both words of the block are read unconditionally so the probe count stays fixed.
    const std::uint64_t w0 = values_[word];
    const std::uint64_t w1 = word + 1 < values_.size() ? values_[word + 1] : ~0ULL;
    const std::uint64_t m0 = offset >= 32 ? ~0ULL : ((1ULL << (2 * offset)) - 1);
    const std::uint64_t m1 = offset <= 32 ? 0ULL : ((1ULL << (2 * (offset - 32))) - 1);
    r += assigned_in(w0, m0) + assigned_in(w1, m1);
    if (probes) probes->reads += 3;
    return r;
}

std::uint64_t MinimalPerfectHash::operator()(std::string_view key, ProbeCounter* probes) const {
    const Edge edge = edge_for(key, seed_, part_size_);
    if (probes) {
        probes->hashes += 2;
        probes->reads += 3;
    }
    const std::uint32_t sum = value_at(edge.v[0]) + value_at(edge.v[1]) + value_at(edge.v[2]);
    const std::uint64_t chosen = edge.v[sum % 3];
    const std::uint64_t slot = rank(chosen, probes);
    // A non-key can land on an unassigned vertex whose rank equals key_count.
    return slot < key_count_ ? slot : slot % key_count_;
}

std::size_t MinimalPerfectHash::size_in_bytes() const {
    return sizeof(std::uint64_t) * 4 + values_.size() * sizeof(std::uint64_t) + ranks_.size() * sizeof(std::uint32_t);
}

void MinimalPerfectHash::write(std::ostream& out) const {
    io::write_u64(out, key_count_);
    io::write_u64(out, seed_);
    io::write_u64(out, part_size_);
    io::write_u64(out, values_.size());
    for (auto w : values_) io::write_u64(out, w);
}

MinimalPerfectHash MinimalPerfectHash::read(std::istream& in) {
    MinimalPerfectHash mph;
    mph.key_count_ = io::read_u64(in);
    mph.seed_ = io::read_u64(in);
    mph.part_size_ = io::read_u64(in);
    const std::uint64_t words = io::read_u64(in);
    if (mph.key_count_ == 0 || words != (3 * mph.part_size_ + kVerticesPerWord - 1) / kVerticesPerWord)
        throw DataError("minimal perfect hash: inconsistent header");
    mph.values_.resize(words);
    for (auto& w : mph.values_) w = io::read_u64(in);
    mph.build_rank();
    return mph;
}

namespace io {

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw DataError("unexpected end of binary data");
    return static_cast<std::uint32_t>(load_le(b, 4));
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw DataError("unexpected end of binary data");
    return load_le(b, 8);
}

double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

}  // namespace io

}  // namespace ake
