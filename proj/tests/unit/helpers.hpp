#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>

namespace test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("ake-test-" + std::to_string(::getpid()) + "-" + std::to_string(stamp) + "-" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::filesystem::path source_dir() { return AKE_SOURCE_DIR; }

}  // namespace test

#include <cmath>
#include <map>
#include <vector>

#include "ake/corpus.hpp"

namespace test {

struct PlantFixture {
    ake::Document doc;
    std::size_t planted_sentence = 0;  // index in doc.sentences
};

/// Twelve body sentences about a city budget, one of them about penguins.
inline PlantFixture off_topic_plant() {
    const std::vector<std::string> body = {
        "The city council approved the new school budget on Tuesday.",
        "Council members said the budget adds money for school buses.",
        "The mayor praised the council for passing the school budget.",
        "Parents had asked the council to raise the school budget.",
        "The budget vote in the council was nine to two.",
        "Penguins waddle across frozen Antarctic ice floes hunting krill.",
        "Teachers welcomed the school budget and new council funding.",
        "The council will review the budget again next spring.",
        "Critics said the school budget ignores council debt.",
        "The mayor signed the school budget after the council vote.",
        "School principals expect the budget to hire more teachers.",
        "The council thanked parents who spoke about the budget.",
    };
    std::string text;
    for (const auto& s : body) text += (text.empty() ? "" : " ") + s;
    PlantFixture f;
    f.doc = ake::make_document("plant", "Council passes school budget", text, ake::Category::USPolitics);
    f.planted_sentence = 6;  // title is sentence 0
    return f;
}

/// Independent brute-force relevance: stopword-free TF vectors, centroid,
/// the five nearest sentences, distance to the nearest of them.
inline std::vector<double> brute_force_relevance(const ake::Document& doc, std::size_t k = 5) {
    std::vector<std::map<std::string, double>> vecs;
    for (const auto& s : doc.sentences) {
        std::map<std::string, double> v;
        for (const auto& t : s.tokens) {
            if (t.kind != ake::TokenKind::Punct && !t.is_stopword) v[t.lower] += 1.0;
        }
        vecs.push_back(v);
    }
    auto dist = [](const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
        std::map<std::string, double> diff = a;
        for (const auto& [w, x] : b) diff[w] -= x;
        double sq = 0.0;
        for (const auto& [w, x] : diff) sq += x * x;
        return std::sqrt(sq);
    };
    std::map<std::string, double> centroid;
    for (const auto& v : vecs) {
        for (const auto& [w, x] : v) centroid[w] += x / static_cast<double>(vecs.size());
    }
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < vecs.size(); ++i) order.emplace_back(dist(vecs[i], centroid), i);
    std::sort(order.begin(), order.end());
    std::vector<double> rel(vecs.size(), 1e300);
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        for (std::size_t j = 0; j < std::min(k, order.size()); ++j)
            rel[i] = std::min(rel[i], dist(vecs[i], vecs[order[j].second]));
    }
    return rel;
}

}  // namespace test
