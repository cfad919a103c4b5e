#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "ake/classifier.hpp"

namespace test {

struct OracleSplit {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain_ratio = 0.0;
};

inline double h2(double a, double b) {
    double h = 0.0;
    for (double c : {a, b}) {
        if (c > 0.0) h -= c / (a + b) * std::log2(c / (a + b));
    }
    return h;
}

/// Exhaustive numeric split search: every feature, every midpoint between
/// consecutive distinct values, both sides holding at least min_leaf rows.
inline std::optional<OracleSplit> brute_force_split(const std::vector<ake::Instance>& data, std::size_t min_leaf) {
    std::optional<OracleSplit> best;
    double p0 = 0.0, p1 = 0.0;
    for (const auto& in : data) (in.label ? p1 : p0) += in.weight;
    const double total = p0 + p1;
    for (std::size_t f = 0; f < data.front().x.size(); ++f) {
        std::set<double> values;
        for (const auto& in : data) values.insert(in.x[f]);
        for (auto it = values.begin(); std::next(it) != values.end(); ++it) {
            const double thr = (*it + *std::next(it)) / 2.0;
            double l0 = 0.0, l1 = 0.0;
            std::size_t nl = 0;
            for (const auto& in : data) {
                if (in.x[f] <= thr) {
                    (in.label ? l1 : l0) += in.weight;
                    ++nl;
                }
            }
            if (nl < min_leaf || data.size() - nl < min_leaf) continue;
            const double lw = l0 + l1, rw = total - lw;
            const double gain = h2(p0, p1) - lw / total * h2(l0, l1) - rw / total * h2(p0 - l0, p1 - l1);
            if (gain <= 1e-12) continue;
            const double si = h2(lw, rw);
            const double ratio = gain / si;
            if (!best || ratio > best->gain_ratio + 1e-12) best = OracleSplit{f, thr, ratio};
        }
    }
    return best;
}

/// Random dataset with up to 4 numeric features and up to 64 rows; values are
/// drawn from a small grid so duplicates and ties occur.
inline std::vector<ake::Instance> random_dataset(std::mt19937_64& rng) {
    const std::size_t dims = 1 + rng() % 4;
    const std::size_t rows = 2 + rng() % 63;
    std::vector<ake::Instance> data(rows);
    for (auto& in : data) {
        for (std::size_t f = 0; f < dims; ++f) in.x.push_back(static_cast<double>(rng() % 9) * 0.5);
        in.label = static_cast<int>(rng() % 2);
    }
    return data;
}

inline std::vector<ake::Instance> xor_data(std::size_t copies) {
    std::vector<ake::Instance> data;
    for (std::size_t c = 0; c < copies; ++c) {
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) data.push_back({{double(a), double(b)}, a ^ b, 1.0});
        }
    }
    return data;
}

}  // namespace test
