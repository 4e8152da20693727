#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace rankforge {

/// Orthogonal matrix Q that rotates the all-ones direction onto the first
/// coordinate axis (Q 1 = sqrt(n) e1), so the unit sphere in the trailing
/// n-1 coordinates parameterizes unit-norm zero-sum score vectors. Built in
/// closed form; multiplication runs in O(n m) via the upper-Hessenberg
/// structure (constant-tail rows plus one subdiagonal).
class OrthogonalReducer {
public:
    explicit OrthogonalReducer(int n);

    int n() const { return n_; }

    /// Dense Q, for tests and small problems.
    Eigen::MatrixXd dense() const;

    /// Q * X without materializing Q.
    Eigen::MatrixXd mul(const Eigen::MatrixXd& X) const;

    /// Q^T * X without materializing Q.
    Eigen::MatrixXd tmul(const Eigen::MatrixXd& X) const;

    /// [Q L Q^T]_{2:n,2:n}: the Laplacian expressed in the rotated basis with
    /// the all-ones row and column dropped.
    Eigen::MatrixXd reduce_laplacian(const Eigen::MatrixXd& L) const;

private:
    int n_;
    Eigen::VectorXd row_coeff_;  ///< constant value of row i on columns >= max(i, 2) - 1
    Eigen::VectorXd sub_coeff_;  ///< subdiagonal entries Q(i, i-1), i >= 2
};

/// x / ||x||, or e1 when x is the zero vector.
Eigen::VectorXd spherical_project(const Eigen::VectorXd& x);

struct ProximalTrace {
    /// y^T L~ y before the first step and after each step.
    std::vector<double> objective;
};

/// Unfolded projected-gradient refinement of an initial score vector: center
/// r0, rotate into the reduced sphere, take one gradient step of size
/// alphas[g] on y^T L~ y / n per stage with renormalization, rotate back.
/// Output has unit norm and zero sum.
Eigen::VectorXd proximal_steps(const Eigen::VectorXd& r0, const Eigen::MatrixXd& L,
                               const OrthogonalReducer& Q, const Eigen::VectorXd& alphas,
                               ProximalTrace* trace = nullptr);

/// Warnings for step sizes at or beyond the fixed-step convergence bound
/// 1/(4(n-1)).
std::vector<std::string> check_step_bound(const Eigen::VectorXd& alphas, int n);

}  // namespace rankforge
