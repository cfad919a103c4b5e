#include "ake/entities.hpp"

#include <string_view>
#include <unordered_set>

namespace ake {

namespace {

bool is_connector(const Token& t) {
    static const std::unordered_set<std::string_view> kConnectors = {
        "of", "de", "da", "del", "der", "van", "von", "la", "le", "du", "di", "bin", "al",
    };
    return kConnectors.contains(t.lower);
}

bool capital_word(const Token& t) { return t.kind == TokenKind::Word && t.is_capitalized(); }

}  // namespace

std::size_t first_word_index(std::span<const Token> tokens) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i].kind == TokenKind::Word) return i;
    }
    return tokens.size();
}

std::vector<TokenRun> capitalized_runs(std::span<const Token> tokens, bool allow_connectors) {
    std::vector<TokenRun> runs;
    std::size_t i = 0;
    while (i < tokens.size()) {
        if (!capital_word(tokens[i])) {
            ++i;
            continue;
        }
        std::size_t end = i + 1;
        while (end < tokens.size()) {
            if (capital_word(tokens[end])) {
                ++end;
            } else if (allow_connectors && is_connector(tokens[end]) && end + 1 < tokens.size() &&
                       capital_word(tokens[end + 1])) {
                end += 2;
            } else {
                break;
            }
        }
        runs.push_back({i, end});
        i = end;
    }
    return runs;
}

}  // namespace ake
