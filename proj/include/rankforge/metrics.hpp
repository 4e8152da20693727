#pragma once

#include "rankforge/graph.hpp"

namespace rankforge {

using ScoreVector = Eigen::VectorXd;

/// R[i] is the rank of node i; 1 is best. Ties broken by ascending index, so
/// a ranking is always a permutation of 1..n.
using Ranking = std::vector<int>;

enum class ScoreTransform {
    None,        ///< scores used as-is (caller guarantees positivity)
    Sigmoid,     ///< 1 / (1 + exp(-r))
    AffineHalf,  ///< (r + 1) / 2, for unit-norm scores with entries >= -1
};

struct MetricConfig {
    ScoreTransform transform = ScoreTransform::Sigmoid;
    double margin = 0.01;  ///< epsilon for the margin upset
};

ScoreVector apply_transform(const ScoreVector& r, ScoreTransform t);

Ranking scores_to_ranks(const ScoreVector& r);

/// Fraction of supported ordered pairs whose predicted sign disagrees with
/// the observed sign (a tied prediction always disagrees). Range [0, 1].
double upset_naive(const ComparisonMatrices& cm, const ScoreVector& r);

/// Squared Frobenius mismatch between the normalized score-ratio matrix
/// T_ij = (r_i - r_j) / (r_i + r_j) and M, averaged over supported pairs.
/// The configured transform is applied to r first so all entries are valid.
double upset_ratio(const ComparisonMatrices& cm, const ScoreVector& r,
                   const MetricConfig& cfg = {});

/// Hinge penalty on upsets weighted by observed margins:
/// sum_ij (M'_ij + |M'_ij|) relu(r_j - r_i + margin) / t.
double upset_margin(const ComparisonMatrices& cm, const ScoreVector& r,
                    const MetricConfig& cfg = {});

/// || sign(T') - sign(M') ||_F^2 over supported pairs, divided by t.
/// Constant scores give exactly 1; a perfect ranking on strict outcomes
/// gives 0; a fully reversed one gives 4.
double upset_simple(const ComparisonMatrices& cm, const ScoreVector& r);
double upset_simple(const ComparisonMatrices& cm, const Ranking& R);

/// Kendall tau-b between two score vectors (tie-aware). Errors when either
/// side is entirely tied.
double kendall_tau(const ScoreVector& a, const ScoreVector& b);
double kendall_tau(const Ranking& a, const Ranking& b);

/// n^-2 || S - S' / max(S') ||_F^2 against the seriation similarity.
double similarity_pretrain_loss(const Eigen::MatrixXd& S, const SerialSimilarity& sr);

/// Scores whose ranking equals R (higher score = better rank).
ScoreVector ranking_to_scores(const Ranking& R);

}  // namespace rankforge
