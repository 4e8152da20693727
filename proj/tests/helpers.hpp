#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <vector>

#include "rankforge/graph.hpp"
#include "rankforge/metrics.hpp"
#include "rankforge/rng.hpp"

namespace rankforge::testutil {

// Strict total order: node 0 beats everyone, node 1 beats everyone below, ...
inline DiGraph transitive_tournament(int n, double w = 1.0) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) A(i, j) = w;
    return DiGraph::from_adjacency(A);
}

inline DiGraph single_edge(double w = 1.0) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
    A(0, 1) = w;
    return DiGraph::from_adjacency(A);
}

// Directed cycle 0 -> 1 -> ... -> n-1 -> 0.
inline DiGraph directed_cycle(int n, double w = 1.0) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) A(i, (i + 1) % n) = w;
    return DiGraph::from_adjacency(A);
}

// Complete graph with equal weights in both directions: fully tied.
inline DiGraph complete_tied(int n, double w = 1.0) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Constant(n, n, w);
    A.diagonal().setZero();
    return DiGraph::from_adjacency(A);
}

// Random digraph where each ordered pair gets weight ~ U(0, 1) with density p.
inline DiGraph random_digraph(int n, double p, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (rng.uniform() < p) A(i, j) = rng.uniform();
        }
    return DiGraph::from_adjacency(A);
}

inline std::vector<int> random_permutation(int n, std::uint64_t seed) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (int i = n - 1; i > 0; --i) {
        int j = static_cast<int>(rng.uniform() * (i + 1));
        std::swap(perm[i], perm[std::min(j, i)]);
    }
    return perm;
}

// B(perm[i], perm[j]) = A(i, j)
inline Eigen::MatrixXd permute_matrix(const Eigen::MatrixXd& A, const std::vector<int>& perm) {
    Eigen::MatrixXd B(A.rows(), A.cols());
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j) B(perm[i], perm[j]) = A(i, j);
    return B;
}

inline Eigen::VectorXd permute_vector(const Eigen::VectorXd& v, const std::vector<int>& perm) {
    Eigen::VectorXd w(v.size());
    for (int i = 0; i < v.size(); ++i) w(perm[i]) = v(i);
    return w;
}

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    Eigen::VectorXd x = a.array() - a.mean();
    Eigen::VectorXd y = b.array() - b.mean();
    return x.dot(y) / (x.norm() * y.norm());
}

// Same ranking (ties included)?
inline bool same_ranking(const ScoreVector& a, const ScoreVector& b) {
    return scores_to_ranks(a) == scores_to_ranks(b);
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

// RBF similarity over one tight cluster of latent positions plus one point
// far away: the Fiedler eigenvalue is near zero while the next one is O(n),
// so a few hundred projected-gradient steps provably align with the Fiedler
// vector. Optionally returns the latent positions (a good starting vector).
inline Eigen::MatrixXd clustered_similarity(int n, std::uint64_t seed,
                                            Eigen::VectorXd* z_out = nullptr) {
    Rng rng(seed);
    Eigen::VectorXd z(n);
    for (int i = 0; i + 1 < n; ++i) z(i) = 0.3 * rng.uniform();
    z(n - 1) = 3.0;
    Eigen::MatrixXd S(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double d = z(i) - z(j);
            S(i, j) = std::exp(-d * d);
        }
    if (z_out) *z_out = z;
    return S;
}

}  // namespace rankforge::testutil
