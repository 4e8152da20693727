#pragma once

#include <Eigen/Dense>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "rankforge/unfold.hpp"

namespace rankforge::ad {

class Tape;

/// Lightweight handle to a node on a tape. Values are dense double matrices;
/// scalars are 1x1 and vectors n x 1.
struct Tensor {
    Tape* tape = nullptr;
    int id = -1;

    const Eigen::MatrixXd& value() const;
    const Eigen::MatrixXd& grad() const;
    long rows() const;
    long cols() const;
};

/// Reverse-mode tape: ops append nodes in evaluation order, so a single
/// reverse sweep visits them in valid topological order.
class Tape {
public:
    Tensor input(Eigen::MatrixXd value, bool requires_grad);
    Tensor constant(Eigen::MatrixXd value);
    Tensor scalar(double v);

    /// Accumulates d(loss)/d(node) into every node that requires grad.
    /// loss must be 1x1.
    void backward(Tensor loss);

    void zero_grad();
    size_t size() const { return nodes_.size(); }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    struct Node {
        Eigen::MatrixXd value;
        Eigen::MatrixXd grad;
        bool requires_grad = false;
        std::function<void()> backward;
    };

    std::deque<Node> nodes_;
    std::vector<std::string> warnings_;

    Tensor emit(Eigen::MatrixXd value, bool requires_grad, std::function<void()> backward);
    Node& node(int id) { return nodes_[static_cast<size_t>(id)]; }
    void warn(std::string msg) { warnings_.push_back(std::move(msg)); }

    friend struct Tensor;
    friend struct OpAccess;
};

// Elementwise binary ops accept equal shapes or a 1x1 scalar on either side.
Tensor add(Tensor a, Tensor b);
Tensor sub(Tensor a, Tensor b);
Tensor mul(Tensor a, Tensor b);
Tensor div(Tensor a, Tensor b);  ///< errors on any zero denominator entry
Tensor neg(Tensor a);

Tensor matmul(Tensor a, Tensor b);
Tensor transpose(Tensor a);
Tensor slice(Tensor a, int r0, int c0, int rows, int cols);
Tensor concat_rows(Tensor a, Tensor b);

Tensor exp(Tensor a);
Tensor sigmoid(Tensor a);
Tensor relu(Tensor a);

Tensor sum(Tensor a);
Tensor mean(Tensor a);
Tensor l2_norm(Tensor a);
Tensor squared_frobenius(Tensor a);

/// Keeps entries where mask is nonzero, zeroes the rest. mask is a constant.
Tensor masked_select(Tensor a, const Eigen::MatrixXd& mask);

/// x / ||x||_2 for a column vector, e1 with zero gradient (and a tape
/// warning) when x = 0.
Tensor unit_normalize(Tensor a);

/// Q a or Q^T a through the structured fast multiply.
Tensor qmul(Tensor a, const OrthogonalReducer& q, bool transposed = false);

/// Pairwise squared distances of rows: (n x d) -> (n x n), exactly symmetric
/// with zero diagonal.
Tensor pairwise_sqdist(Tensor z);

/// (n x 1) -> diagonal n x n.
Tensor diag_embed(Tensor v);

struct AdamState {
    std::vector<Eigen::MatrixXd> m;
    std::vector<Eigen::MatrixXd> v;
    long t = 0;
};

/// Standard Adam with bias correction; weight decay enters the gradient as
/// an l2 term.
void adam_step(const std::vector<Eigen::MatrixXd*>& params,
               const std::vector<Eigen::MatrixXd>& grads, AdamState& state, double lr,
               double weight_decay = 0.0, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8);

void sgd_step(const std::vector<Eigen::MatrixXd*>& params,
              const std::vector<Eigen::MatrixXd>& grads, double lr,
              double weight_decay = 0.0);

}  // namespace rankforge::ad
