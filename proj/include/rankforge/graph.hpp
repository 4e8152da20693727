#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace rankforge {

/// Weighted digraph of pairwise comparisons. A(i, j) > 0 means node i beat
/// node j with that aggregate margin; A(i, j) == 0 means no win recorded in
/// that direction. The diagonal is zero and all weights are finite and
/// nonnegative.
struct DiGraph {
    Eigen::MatrixXd A;
    std::vector<std::string> labels;  ///< empty when nodes are bare indices

    int n() const { return static_cast<int>(A.rows()); }
    std::string label(int i) const;

    /// Validates and wraps an adjacency matrix.
    static DiGraph from_adjacency(Eigen::MatrixXd A, std::vector<std::string> labels = {});
};

/// Skew and normalized comparison views of a digraph.
struct ComparisonMatrices {
    Eigen::MatrixXd Mprime;   ///< A - A^T
    Eigen::MatrixXd M;        ///< (A - A^T) ./ (A + A^T), zero on unsupported pairs
    Eigen::MatrixXd C;        ///< sign(A - A^T)
    Eigen::MatrixXd support;  ///< 1 where A + A^T is nonzero (distinguishes ties from absences)
    long t = 0;               ///< ordered supported pairs, equals nonzero count of A + A^T
};

/// Match-outcome similarity used for seriation-style ranking.
struct SerialSimilarity {
    Eigen::MatrixXd Sprime;      ///< 0.5 * (n 11^T + C C^T)
    Eigen::MatrixXd SprimeNorm;  ///< Sprime / max(Sprime)
};

/// Reads a tab-separated edge list (src, dst, weight). Node ids may be
/// 0-based integers or arbitrary string labels; duplicate edges sum their
/// weights. When finer_offset is given, every pair listed in the file (even
/// with weight 0) has the offset added, so ties stay distinguishable from
/// absent comparisons.
DiGraph load_edge_list(const std::string& path, std::optional<double> finer_offset = std::nullopt);

/// Writes the graph back as a tab-separated edge list; weights use the
/// shortest decimal form that round-trips.
void write_edge_list(const DiGraph& g, const std::string& path);

ComparisonMatrices comparison_matrices(const DiGraph& g);

SerialSimilarity serialrank_similarity(const DiGraph& g);

/// L = D - S for a symmetric nonnegative similarity matrix.
Eigen::MatrixXd graph_laplacian(const Eigen::MatrixXd& S);

/// Spectral node features of the Hermitian matrix H = i (A - A^T): the top-k
/// eigenvectors by eigenvalue, their real and imaginary parts stacked as
/// columns (n x 2k). Computed by power iteration with deflation on the real
/// symmetric embedding of H. Requires 2k <= n; larger k zero-pads and warns.
Eigen::MatrixXd hermitian_features(const DiGraph& g, int k,
                                   std::vector<std::string>* warnings = nullptr);

}  // namespace rankforge
