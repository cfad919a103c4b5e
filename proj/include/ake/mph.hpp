#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ake {

/// Counts hash evaluations and array reads made by a lookup.
struct ProbeCounter {
    std::uint64_t hashes = 0;
    std::uint64_t reads = 0;

    std::uint64_t total() const { return hashes + reads; }
};

std::uint64_t hash_bytes(std::string_view key, std::uint64_t seed);

/// Minimal perfect hash over a static key set, built by peeling a random
/// 3-partite 3-uniform hypergraph (one edge per key, ~1.23 vertices per key).
/// Each vertex holds a 2-bit value; a key's slot is the rank of the vertex
/// selected by the sum of its three values mod 3.
class MinimalPerfectHash {
public:
    static constexpr int kDefaultAttempts = 100;

    MinimalPerfectHash() = default;

    /// Throws std::invalid_argument on an empty or duplicated key set and
    /// std::runtime_error if no seed yields a peelable graph within `max_attempts`.
    static MinimalPerfectHash build(std::span<const std::string> keys, std::uint64_t seed = 0x5eed1234abcdULL,
                                    int max_attempts = kDefaultAttempts);

    /// Slot in [0, size()) for a build key; an arbitrary slot for anything else.
    std::uint64_t operator()(std::string_view key, ProbeCounter* probes = nullptr) const;

    std::size_t size() const { return key_count_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t part_size() const { return part_size_; }
    int attempts() const { return attempts_; }
    std::size_t size_in_bytes() const;

    void write(std::ostream& out) const;
    static MinimalPerfectHash read(std::istream& in);

private:
    std::uint32_t value_at(std::uint64_t vertex) const;
    std::uint64_t rank(std::uint64_t vertex, ProbeCounter* probes) const;
    void build_rank();

    std::size_t key_count_ = 0;
    std::uint64_t seed_ = 0;
    std::uint64_t part_size_ = 0;
    int attempts_ = 0;
    std::vector<std::uint64_t> values_;  // 2 bits per vertex, 3 = unassigned
    std::vector<std::uint32_t> ranks_;   // assigned vertices before each 64-vertex block
};

namespace io {

void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);

}  // namespace io

}  // namespace ake
