// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "sqlsynth/error.hpp"

namespace sqlsynth {

inline constexpr int kDefaultEmbeddingDim = 384;

struct EmbeddingVector {
    std::int64_t query_id = -1;
    std::vector<double> values;
    double norm = 0.0;

    int dim() const { return static_cast<int>(values.size()); }
};

/// Any text → fixed-dimension vector function. Plug in a real encoder here;
/// the engine itself only requires determinism.
using TextEncoder = std::function<EmbeddingVector(std::string_view)>;

namespace detail {

inline std::uint64_t fnv1a64(const unsigned char* data, std::size_t len,
                             std::uint64_t seed = 1469598103934665603ULL) {
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= data[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    return fnv1a64(reinterpret_cast<const unsigned char*>(s.data()), s.size());
}

}  // namespace detail

/// Deterministic offline encoder: hashed character trigram counts folded into
/// `dim` buckets, L2-normalized. Integer hashing and integer accumulation
/// only, so output is stable across platforms. Text is lowercased and
/// whitespace runs collapse to single spaces first.
inline EmbeddingVector fallback_encode(std::string_view text, int dim = kDefaultEmbeddingDim) {
    if (text.empty()) throw Error(ErrorCode::InvalidInput, "cannot encode empty text");
    std::string norm;
    norm.reserve(text.size());
    bool last_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!last_space && !norm.empty()) norm.push_back(' ');
            last_space = true;
        } else {
            norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            last_space = false;
        }
    }
    while (!norm.empty() && norm.back() == ' ') norm.pop_back();
    if (norm.empty()) throw Error(ErrorCode::InvalidInput, "cannot encode blank text");

    std::vector<std::uint32_t> counts(static_cast<std::size_t>(dim), 0);
    if (norm.size() < 3) {
        counts[detail::fnv1a64(norm) % static_cast<std::uint64_t>(dim)] += 1;
    } else {
        for (std::size_t i = 0; i + 3 <= norm.size(); ++i) {
            std::uint64_t h = detail::fnv1a64(norm.substr(i, 3));
            counts[h % static_cast<std::uint64_t>(dim)] += 1;
        }
    }

    EmbeddingVector v;
    v.values.resize(static_cast<std::size_t>(dim));
    double sq = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        v.values[i] = static_cast<double>(counts[i]);
        sq += v.values[i] * v.values[i];
    }
    double n = std::sqrt(sq);
    for (double& x : v.values) x /= n;
    v.norm = 1.0;
    return v;
}

inline TextEncoder make_fallback_encoder(int dim = kDefaultEmbeddingDim) {
    return [dim](std::string_view text) { return fallback_encode(text, dim); };
}

}  // namespace sqlsynth
