#pragma once

#include "rankforge/metrics.hpp"

namespace rankforge {

struct BaselineConfig {
    double power_tol = 1e-10;
    int power_max_iter = 100000;
    double btl_tol = 1e-9;
    int btl_max_iter = 10000;
    double spring_reg = 1e-8;
    double damping = 0.85;  ///< PageRank damping factor
};

struct BaselineResult {
    ScoreVector scores;
    double residual = 0.0;  ///< final fixed-point or linear-solve residual
    int iterations = 0;
};

/// Random-walk scores on the transposed graph (losing mass flows to the
/// winner), with uniform teleportation at rate 1 - damping.
BaselineResult pagerank(const DiGraph& g, const BaselineConfig& cfg = {});

/// Leading-eigenvector centrality where beating a strong opponent counts
/// more; unit 1-norm, entrywise nonnegative.
BaselineResult eigenvector_centrality(const DiGraph& g, const BaselineConfig& cfg = {});

/// Stationary distribution of the Markov chain P_ij = A_ji / (d_max (A_ij + A_ji)).
BaselineResult rank_centrality(const DiGraph& g, const BaselineConfig& cfg = {});

/// w + w2 - l - l2 on win proportions.
BaselineResult davids_score(const DiGraph& g, const BaselineConfig& cfg = {});

/// Bradley-Terry-Luce maximum likelihood via minorization-maximization;
/// scores are log-weights.
BaselineResult btl(const DiGraph& g, const BaselineConfig& cfg = {});

/// Solves [D_out + D_in - (A + A^T) + reg I] s = d_out - d_in, zero-mean s.
BaselineResult spring_rank(const DiGraph& g, const BaselineConfig& cfg = {});

/// Fiedler vector of the Laplacian of the match-outcome similarity, sign
/// chosen by the lower simple upset.
BaselineResult serial_rank(const DiGraph& g, const BaselineConfig& cfg = {});

/// Angular synchronization: top eigenvector of H_kl = exp(i pi C_kl (n-1)/n),
/// then the cyclic rotation (and direction) with the fewest naive upsets.
BaselineResult sync_rank(const DiGraph& g, const BaselineConfig& cfg = {});

/// Rank-2 SVD of A - A^T; scores are row means of the reconstruction.
BaselineResult svd_rs(const DiGraph& g, const BaselineConfig& cfg = {});

/// Rank-2 SVD of the degree-normalized skew matrix, then a least-squares
/// refit of scores to the reconstructed pairwise differences on the support.
BaselineResult svd_nrs(const DiGraph& g, const BaselineConfig& cfg = {});

const std::vector<std::string>& baseline_names();

/// Dispatch by name ("pagerank", "eigencentrality", "rankcentrality",
/// "davidscore", "btl", "springrank", "serialrank", "syncrank", "svd_rs",
/// "svd_nrs"). "mvr" reports itself as out of scope.
BaselineResult run_baseline(const std::string& name, const DiGraph& g,
                            const BaselineConfig& cfg = {});

}  // namespace rankforge
