// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sqlsynth/embedding.hpp"
#include "sqlsynth/error.hpp"
#include "sqlsynth/sql/ast.hpp"

namespace sqlsynth {

// ── hybrid similarity ───────────────────────────────────────────
//
// Three complementary signals combined by weighted sum: token-level overlap
// after sorting (widest dispersion, dominant weight), tree edit distance over
// normalized ASTs (structural overlap), and embedding cosine (semantic
// proximity in latent space).

struct HybridWeights {
    double alpha = 0.6;
    double beta = 0.3;
    double gamma = 0.1;

    void validate() const {
        if (alpha < 0 || beta < 0 || gamma < 0)
            throw Error(ErrorCode::ConfigError, "similarity weights must be non-negative");
        if (std::abs(alpha + beta + gamma - 1.0) > 1e-12)
            throw Error(ErrorCode::ConfigError, "similarity weights must sum to 1");
    }
};

struct HybridScore {
    double sim_tok = 0.0;
    double sim_ast = 0.0;
    double sim_emb = 0.0;
    double combined = 0.0;
};

inline HybridScore combine(double tok, double ast, double emb, const HybridWeights& w) {
    // weights sum to 1, so equal components imply combined == that component;
    // taking the shortcut keeps self-similarity exactly 1.0
    double combined = (tok == ast && ast == emb)
                          ? tok
                          : w.alpha * tok + w.beta * ast + w.gamma * emb;
    return {tok, ast, emb, combined};
}

// ── token similarity ────────────────────────────────────────────

namespace detail {

/// Levenshtein distance between two sequences, two-row rolling DP.
template <typename Seq>
std::size_t edit_distance(const Seq& a, const Seq& b) {
    const std::size_t n = a.size(), m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

}  // namespace detail

/// Lexical alignment: sort both token sequences, then 1 − normalized edit
/// distance (normalized by the longer length). Order-insensitive.
inline double sim_tok(std::vector<std::string> a, std::vector<std::string> b) {
    if (a.empty() || b.empty())
        throw Error(ErrorCode::InvalidInput, "sim_tok requires non-empty token sequences");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t dist = detail::edit_distance(a, b);
    double denom = static_cast<double>(std::max(a.size(), b.size()));
    return 1.0 - static_cast<double>(dist) / denom;
}

// ── AST similarity (ordered tree edit distance) ─────────────────

namespace detail {

/// Post-order flattening of a tree with integer labels and leftmost-leaf
/// indices, the input form of the Zhang–Shasha algorithm.
struct FlatTree {
    std::vector<int> labels;   // post-order, 0-based
    std::vector<int> leftmost; // leftmost leaf descendant per node
    std::vector<int> keyroots;
};

inline int flatten_tree(const sql::AstNode& node, std::map<std::pair<int, std::string>, int>& ids,
                        FlatTree& out) {
    int first_leaf = -1;
    for (const sql::AstNode& c : node.children) {
        int leaf = flatten_tree(c, ids, out);
        if (first_leaf < 0) first_leaf = leaf;
    }
    auto key = std::make_pair(static_cast<int>(node.kind), node.payload);
    auto [it, _] = ids.emplace(key, static_cast<int>(ids.size()));
    int index = static_cast<int>(out.labels.size());
    out.labels.push_back(it->second);
    out.leftmost.push_back(first_leaf < 0 ? index : first_leaf);
    return first_leaf < 0 ? index : first_leaf;
}

inline FlatTree make_flat_tree(const sql::AstNode& root,
                               std::map<std::pair<int, std::string>, int>& ids) {
    FlatTree t;
    flatten_tree(root, ids, t);
    int n = static_cast<int>(t.labels.size());
    std::vector<bool> seen_leftmost(static_cast<std::size_t>(n), false);
    for (int i = n - 1; i >= 0; --i) {
        if (!seen_leftmost[static_cast<std::size_t>(t.leftmost[i])]) {
            t.keyroots.push_back(i);
            seen_leftmost[static_cast<std::size_t>(t.leftmost[i])] = true;
        }
    }
    std::sort(t.keyroots.begin(), t.keyroots.end());
    return t;
}

/// Zhang–Shasha ordered tree edit distance with unit costs.
inline int tree_edit_distance_flat(const FlatTree& t1, const FlatTree& t2) {
    const int n = static_cast<int>(t1.labels.size());
    const int m = static_cast<int>(t2.labels.size());
    std::vector<std::vector<int>> treedist(static_cast<std::size_t>(n),
                                           std::vector<int>(static_cast<std::size_t>(m), 0));
    std::vector<std::vector<int>> fd(static_cast<std::size_t>(n) + 2,
                                     std::vector<int>(static_cast<std::size_t>(m) + 2, 0));

    for (int i : t1.keyroots) {
        for (int j : t2.keyroots) {
            const int li = t1.leftmost[i];
            const int lj = t2.leftmost[j];
            fd[static_cast<std::size_t>(li)][static_cast<std::size_t>(lj)] = 0;
            for (int di = li; di <= i; ++di)
                fd[static_cast<std::size_t>(di) + 1][static_cast<std::size_t>(lj)] =
                    fd[static_cast<std::size_t>(di)][static_cast<std::size_t>(lj)] + 1;
            for (int dj = lj; dj <= j; ++dj)
                fd[static_cast<std::size_t>(li)][static_cast<std::size_t>(dj) + 1] =
                    fd[static_cast<std::size_t>(li)][static_cast<std::size_t>(dj)] + 1;
            for (int di = li; di <= i; ++di) {
                for (int dj = lj; dj <= j; ++dj) {
                    const auto udi = static_cast<std::size_t>(di);
                    const auto udj = static_cast<std::size_t>(dj);
                    if (t1.leftmost[di] == li && t2.leftmost[dj] == lj) {
                        int relabel = t1.labels[udi] == t2.labels[udj] ? 0 : 1;
                        fd[udi + 1][udj + 1] = std::min({fd[udi][udj + 1] + 1,
                                                         fd[udi + 1][udj] + 1,
                                                         fd[udi][udj] + relabel});
                        treedist[udi][udj] = fd[udi + 1][udj + 1];
                    } else {
                        const auto ldi = static_cast<std::size_t>(t1.leftmost[di]);
                        const auto ldj = static_cast<std::size_t>(t2.leftmost[dj]);
                        fd[udi + 1][udj + 1] =
                            std::min({fd[udi][udj + 1] + 1, fd[udi + 1][udj] + 1,
                                      fd[ldi][ldj] + treedist[udi][udj]});
                    }
                }
            }
        }
    }
    return treedist[static_cast<std::size_t>(n) - 1][static_cast<std::size_t>(m) - 1];
}

}  // namespace detail

/// Exact ordered tree edit distance (insert/delete/relabel, unit costs).
inline int tree_edit_distance(const sql::AstNode& a, const sql::AstNode& b) {
    std::map<std::pair<int, std::string>, int> ids;
    detail::FlatTree t1 = detail::make_flat_tree(a, ids);
    detail::FlatTree t2 = detail::make_flat_tree(b, ids);
    return detail::tree_edit_distance_flat(t1, t2);
}

/// 1 − EditDist / max(node counts), clamped to [0, 1].
inline double sim_ast(const sql::QueryAst& a, const sql::QueryAst& b) {
    int dist = tree_edit_distance(a.root, b.root);
    double denom = static_cast<double>(std::max(sql::node_count(a), sql::node_count(b)));
    return std::clamp(1.0 - static_cast<double>(dist) / denom, 0.0, 1.0);
}

// ── embedding similarity ────────────────────────────────────────

/// Cosine similarity clamped to [0, 1]. Bitwise-identical vectors score 1.0
/// exactly, so self-similarity is exact.
inline double sim_emb(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.values.size() != b.values.size())
        throw Error(ErrorCode::InvalidVector, "embedding dimension mismatch");
    if (a.values.empty())
        throw Error(ErrorCode::InvalidVector, "empty embedding");
    if (a.values == b.values) return 1.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0)
        throw Error(ErrorCode::InvalidVector, "zero-norm embedding");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

// ── hybrid entry point ──────────────────────────────────────────

/// Everything the hybrid metric needs from one query.
struct QuerySignature {
    std::vector<std::string> tokens;
    sql::QueryAst ast;
    EmbeddingVector embedding;
};

inline HybridScore hybrid(const QuerySignature& a, const QuerySignature& b,
                          const HybridWeights& w = {}) {
    return combine(sim_tok(a.tokens, b.tokens), sim_ast(a.ast, b.ast),
                   sim_emb(a.embedding, b.embedding), w);
}

// ── Vendi diversity score ───────────────────────────────────────

/// Diversity as the exponential of the eigenvalue entropy of K/n. K must be
/// square, symmetric within 1e-8, with unit diagonal and entries in [0, 1].
/// Tiny negative eigenvalues (≥ −1e-8) are floored at zero; anything more
/// negative is a genuine PSD violation and errors out.
inline double vendi_score(const std::vector<std::vector<double>>& K) {
    const std::size_t n = K.size();
    if (n == 0) throw Error(ErrorCode::InvalidMatrix, "empty similarity matrix");
    for (const auto& row : K)
        if (row.size() != n)
            throw Error(ErrorCode::InvalidMatrix, "similarity matrix is not square");
    Eigen::MatrixXd M(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(K[i][j] - K[j][i]) > 1e-8)
                throw Error(ErrorCode::InvalidMatrix, "similarity matrix is not symmetric");
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                0.5 * (K[i][j] + K[j][i]);
        }
    }
    M /= static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorCode::InvalidMatrix, "eigenvalue computation failed");
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        double lambda = solver.eigenvalues()(i);
        if (lambda < -1e-8)
            throw Error(ErrorCode::InvalidMatrix, "similarity matrix is not PSD");
        if (lambda > 0.0) entropy -= lambda * std::log(lambda);
    }
    return std::exp(entropy);
}

}  // namespace sqlsynth
