#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ake/corpus.hpp"

namespace ake {

/// Half-open token range [begin, end) within a sentence or phrase.
struct TokenRun {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    friend bool operator==(const TokenRun&, const TokenRun&) = default;
};

/// Index of the first word token, or tokens.size() if there is none.
std::size_t first_word_index(std::span<const Token> tokens);

/// Maximal runs of capitalized word tokens. With `allow_connectors`, a
/// lowercase connector ("of", "de", "van", ...) between two capitalized tokens
/// stays inside the run, so "Bank of America" is one run.
std::vector<TokenRun> capitalized_runs(std::span<const Token> tokens, bool allow_connectors);

}  // namespace ake
