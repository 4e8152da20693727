#include "rankforge/unfold.hpp"

#include <cmath>
#include <stdexcept>

#include "rankforge/io.hpp"

namespace rankforge {

OrthogonalReducer::OrthogonalReducer(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("reducer needs n >= 1");
    row_coeff_.resize(n);
    sub_coeff_.resize(n);
    row_coeff_(0) = std::sqrt(1.0 / static_cast<double>(n));
    sub_coeff_(0) = 0.0;
    for (int i = 1; i < n; ++i) {
        double tail = static_cast<double>(n - i);  // columns i..n-1 share one value
        row_coeff_(i) = std::sqrt(1.0 / (tail * (tail + 1.0)));
        sub_coeff_(i) = -std::sqrt(tail / (tail + 1.0));
    }
}

Eigen::MatrixXd OrthogonalReducer::dense() const {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n_, n_);
    Q.row(0).setConstant(row_coeff_(0));
    for (int i = 1; i < n_; ++i) {
        Q(i, i - 1) = sub_coeff_(i);
        for (int j = i; j < n_; ++j) Q(i, j) = row_coeff_(i);
    }
    return Q;
}

Eigen::MatrixXd OrthogonalReducer::mul(const Eigen::MatrixXd& X) const {
    if (X.rows() != n_) throw std::invalid_argument("reducer mul: row count mismatch");
    Eigen::MatrixXd Y(n_, X.cols());
    Eigen::RowVectorXd suffix = Eigen::RowVectorXd::Zero(X.cols());
    // Row i of Q is row_coeff_(i) on columns >= i plus one subdiagonal term,
    // so a reverse running sum gives Q X in O(n m).
    for (int i = n_ - 1; i >= 1; --i) {
        suffix += X.row(i);
        Y.row(i) = row_coeff_(i) * suffix + sub_coeff_(i) * X.row(i - 1);
    }
    suffix += X.row(0);
    Y.row(0) = row_coeff_(0) * suffix;
    return Y;
}

Eigen::MatrixXd OrthogonalReducer::tmul(const Eigen::MatrixXd& X) const {
    if (X.rows() != n_) throw std::invalid_argument("reducer tmul: row count mismatch");
    Eigen::MatrixXd Y(n_, X.cols());
    Eigen::RowVectorXd prefix = Eigen::RowVectorXd::Zero(X.cols());
    for (int j = 0; j < n_; ++j) {
        prefix += row_coeff_(j) * X.row(j);
        Y.row(j) = prefix;
        if (j + 1 < n_) Y.row(j) += sub_coeff_(j + 1) * X.row(j + 1);
    }
    return Y;
}

Eigen::MatrixXd OrthogonalReducer::reduce_laplacian(const Eigen::MatrixXd& L) const {
    if (L.rows() != n_ || L.cols() != n_)
        throw std::invalid_argument("reduce_laplacian: shape mismatch");
    Eigen::MatrixXd QL = mul(L);
    Eigen::MatrixXd QLQt = mul(QL.transpose()).transpose();
    return QLQt.block(1, 1, n_ - 1, n_ - 1);
}

Eigen::VectorXd spherical_project(const Eigen::VectorXd& x) {
    double norm = x.norm();
    if (norm == 0.0) {
        Eigen::VectorXd e1 = Eigen::VectorXd::Zero(x.size());
        if (x.size() > 0) e1(0) = 1.0;
        return e1;
    }
    return x / norm;
}

Eigen::VectorXd proximal_steps(const Eigen::VectorXd& r0, const Eigen::MatrixXd& L,
                               const OrthogonalReducer& Q, const Eigen::VectorXd& alphas,
                               ProximalTrace* trace) {
    const int n = Q.n();
    if (n < 2) throw std::invalid_argument("proximal_steps needs n >= 2");
    if (r0.size() != n || L.rows() != n || L.cols() != n)
        throw std::invalid_argument("proximal_steps: shape mismatch");
    if (!r0.allFinite() || !L.allFinite() || !alphas.allFinite())
        throw std::invalid_argument("proximal_steps: non-finite input");

    Eigen::VectorXd centered = r0.array() - r0.mean();
    Eigen::VectorXd y = Q.mul(centered).col(0).tail(n - 1);
    y = spherical_project(y);

    Eigen::MatrixXd Ltil = Q.reduce_laplacian(L);
    if (trace) trace->objective.push_back(y.dot(Ltil * y));

    const double inv_n = 1.0 / static_cast<double>(n);
    for (long g = 0; g < alphas.size(); ++g) {
        y -= alphas(g) * (2.0 * (Ltil * y)) * inv_n;
        y = spherical_project(y);
        if (trace) trace->objective.push_back(y.dot(Ltil * y));
    }

    Eigen::VectorXd lifted = Eigen::VectorXd::Zero(n);
    lifted.tail(n - 1) = y;
    return Q.tmul(lifted);
}

std::vector<std::string> check_step_bound(const Eigen::VectorXd& alphas, int n) {
    std::vector<std::string> warnings;
    if (n < 2) return warnings;
    double bound = 1.0 / (4.0 * static_cast<double>(n - 1));
    for (long g = 0; g < alphas.size(); ++g) {
        if (!(alphas(g) > 0.0))
            warnings.push_back("step " + std::to_string(g) + ": alpha " +
                               format_double(alphas(g)) + " is not positive");
        else if (alphas(g) >= bound)
            warnings.push_back("step " + std::to_string(g) + ": alpha " +
                               format_double(alphas(g)) +
                               " is at or above the fixed-step convergence bound " +
                               format_double(bound));
    }
    return warnings;
}

}  // namespace rankforge
