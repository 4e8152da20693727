#include "rankforge/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace rankforge::ad {

struct OpAccess {
    static Tensor emit(Tape& t, Eigen::MatrixXd v, bool rg, std::function<void()> bw) {
        return t.emit(std::move(v), rg, std::move(bw));
    }
    static const Eigen::MatrixXd& value(const Tensor& x) { return x.tape->node(x.id).value; }
    static const Eigen::MatrixXd& val(Tape& t, int id) { return t.node(id).value; }
    static const Eigen::MatrixXd& grad_of(Tape& t, int id) { return t.node(id).grad; }
    static void set_bw(Tape& t, int id, std::function<void()> f) {
        t.node(id).backward = std::move(f);
    }
    static bool needs_grad(const Tensor& x) { return x.tape->node(x.id).requires_grad; }
    static void accum(Tape& t, int id, const Eigen::MatrixXd& g) {
        auto& n = t.node(id);
        if (!n.requires_grad) return;
        if (n.grad.size() == 0) n.grad = Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
        n.grad += g;
    }
    static void warn(Tape& t, std::string m) { t.warn(std::move(m)); }
};

namespace {

using OA = OpAccess;

bool is_scalar(const Eigen::MatrixXd& m) { return m.rows() == 1 && m.cols() == 1; }

Tape* same_tape(Tensor a, Tensor b) {
    if (a.tape == nullptr || a.tape != b.tape)
        throw std::invalid_argument("tensors must live on the same tape");
    return a.tape;
}

void check_binary_shapes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (is_scalar(a) || is_scalar(b)) return;
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("shape mismatch in elementwise op");
}

Eigen::MatrixXd expand(const Eigen::MatrixXd& m, long r, long c) {
    if (m.rows() == r && m.cols() == c) return m;
    return Eigen::MatrixXd::Constant(r, c, m(0, 0));
}

/// Sums a broadcast gradient back down when the input was a 1x1 scalar.
Eigen::MatrixXd reduce_like(const Eigen::MatrixXd& g, const Eigen::MatrixXd& target) {
    if (g.rows() == target.rows() && g.cols() == target.cols()) return g;
    Eigen::MatrixXd out(1, 1);
    out(0, 0) = g.sum();
    return out;
}

}  // namespace

const Eigen::MatrixXd& Tensor::value() const { return OA::value(*this); }
const Eigen::MatrixXd& Tensor::grad() const { return tape->node(id).grad; }
long Tensor::rows() const { return value().rows(); }
long Tensor::cols() const { return value().cols(); }

Tensor Tape::emit(Eigen::MatrixXd value, bool requires_grad, std::function<void()> backward) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Tensor{this, static_cast<int>(nodes_.size()) - 1};
}

Tensor Tape::input(Eigen::MatrixXd value, bool requires_grad) {
    return emit(std::move(value), requires_grad, nullptr);
}

Tensor Tape::constant(Eigen::MatrixXd value) { return emit(std::move(value), false, nullptr); }

Tensor Tape::scalar(double v) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = v;
    return constant(std::move(m));
}

void Tape::backward(Tensor loss) {
    if (loss.tape != this) throw std::invalid_argument("loss lives on another tape");
    auto& ln = node(loss.id);
    if (ln.value.rows() != 1 || ln.value.cols() != 1)
        throw std::invalid_argument("backward target must be a scalar");
    if (!ln.requires_grad) return;
    if (ln.grad.size() == 0) ln.grad = Eigen::MatrixXd::Zero(1, 1);
    ln.grad(0, 0) += 1.0;
    for (int id = loss.id; id >= 0; --id) {
        Node& n = node(id);
        if (n.backward && n.grad.size() != 0) n.backward();
    }
}

void Tape::zero_grad() {
    for (auto& n : nodes_) n.grad.resize(0, 0);
}

namespace {

Tensor binary_elementwise(Tensor a, Tensor b, char op) {
    Tape& t = *same_tape(a, b);
    const Eigen::MatrixXd& av = a.value();
    const Eigen::MatrixXd& bv = b.value();
    check_binary_shapes(av, bv);
    long r = std::max(av.rows(), bv.rows());
    long c = std::max(av.cols(), bv.cols());
    Eigen::MatrixXd ae = expand(av, r, c), be = expand(bv, r, c);
    Eigen::MatrixXd out;
    switch (op) {
        case '+': out = ae + be; break;
        case '-': out = ae - be; break;
        case '*': out = ae.cwiseProduct(be); break;
        case '/':
            if ((be.array() == 0.0).any())
                throw std::domain_error("division by zero on the tape; mask the support first");
            out = ae.cwiseQuotient(be);
            break;
        default: throw std::logic_error("bad op");
    }
    bool rg = OA::needs_grad(a) || OA::needs_grad(b);
    Tensor result = OA::emit(t, std::move(out), rg, nullptr);
    if (!rg) return result;
    Tape* tp = &t;
    int aid = a.id, bid = b.id, oid = result.id;
    Eigen::MatrixXd ae_saved, be_saved;
    if (op == '*' || op == '/') { ae_saved = ae; be_saved = be; }
    auto bw = [tp, aid, bid, oid, op, ae_saved, be_saved]() {
        const Eigen::MatrixXd& go = OA::grad_of(*tp, oid);
        const Eigen::MatrixXd& av = OA::val(*tp, aid);
        const Eigen::MatrixXd& bv = OA::val(*tp, bid);
        switch (op) {
            case '+':
                OA::accum(*tp, aid, reduce_like(go, av));
                OA::accum(*tp, bid, reduce_like(go, bv));
                break;
            case '-':
                OA::accum(*tp, aid, reduce_like(go, av));
                OA::accum(*tp, bid, reduce_like(-go, bv));
                break;
            case '*':
                OA::accum(*tp, aid, reduce_like(go.cwiseProduct(be_saved), av));
                OA::accum(*tp, bid, reduce_like(go.cwiseProduct(ae_saved), bv));
                break;
            case '/': {
                Eigen::MatrixXd ga = go.cwiseQuotient(be_saved);
                Eigen::MatrixXd gb =
                    -go.cwiseProduct(ae_saved).cwiseQuotient(be_saved.cwiseProduct(be_saved));
                OA::accum(*tp, aid, reduce_like(ga, av));
                OA::accum(*tp, bid, reduce_like(gb, bv));
                break;
            }
        }
    };
    OA::set_bw(*tp, result.id, std::move(bw));
    return result;
}

}  // namespace

Tensor add(Tensor a, Tensor b) { return binary_elementwise(a, b, '+'); }
Tensor sub(Tensor a, Tensor b) { return binary_elementwise(a, b, '-'); }
Tensor mul(Tensor a, Tensor b) { return binary_elementwise(a, b, '*'); }
Tensor div(Tensor a, Tensor b) { return binary_elementwise(a, b, '/'); }

Tensor neg(Tensor a) {
    Tape& t = *a.tape;
    bool rg = OA::needs_grad(a);
    Tensor out = OA::emit(t, -a.value(), rg, nullptr);
    if (!rg) return out;
    Tape* tp = &t;
    int aid = a.id, oid = out.id;
    OA::set_bw(*tp, oid, [tp, aid, oid]() { OA::accum(*tp, aid, -OA::grad_of(*tp, oid)); });
    return out;
}

Tensor matmul(Tensor a, Tensor b) {
    Tape& t = *same_tape(a, b);
    const Eigen::MatrixXd& av = a.value();
    const Eigen::MatrixXd& bv = b.value();
    if (av.cols() != bv.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
    bool rg = OA::needs_grad(a) || OA::needs_grad(b);
    Tensor out = OA::emit(t, av * bv, rg, nullptr);
    if (!rg) return out;
    Tape* tp = &t;
    int aid = a.id, bid = b.id, oid = out.id;
    OA::set_bw(*tp, oid, [tp, aid, bid, oid]() {
        const Eigen::MatrixXd& go = OA::grad_of(*tp, oid);
        OA::accum(*tp, aid, go * OA::val(*tp, bid).transpose());
        OA::accum(*tp, bid, OA::val(*tp, aid).transpose() * go);
    });
    return out;
}

Tensor transpose(Tensor a) {
    Tape& t = *a.tape;
    bool rg = OA::needs_grad(a);
    Tensor out = OA::emit(t, a.value().transpose(), rg, nullptr);
    if (!rg) return out;
    Tape* tp = &t;
    int aid = a.id, oid = out.id;
    OA::set_bw(*tp, oid, [tp, aid, oid]() {
        OA::accum(*tp, aid, OA::grad_of(*tp, oid).transpose());
    });
    return out;
}

Tensor slice(Tensor a, int r0, int c0, int rows, int cols) {
    Tape& t = *a.tape;
    const Eigen::MatrixXd& av = a.value();
    if (r0 < 0 || c0 < 0 || rows < 1 || cols < 1 || r0 + rows > av.rows() ||
        c0 + cols > av.cols())
        throw std::invalid_argument("slice out of range");
    bool rg = OA::needs_grad(a);
    Tensor out = OA::emit(t, av.block(r0, c0, rows, cols), rg, nullptr);
    if (!rg) return out;
    Tape* tp = &t;
    int aid = a.id, oid = out.id;
    OA::set_bw(*tp, oid, [tp, aid, oid, r0, c0, rows, cols]() {
        const Eigen::MatrixXd& av = OA::val(*tp, aid);
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(av.rows(), av.cols());
        g.block(r0, c0, rows, cols) = OA::grad_of(*tp, oid);
        OA::accum(*tp, aid, g);
    });
    return out;
}

Tensor concat_rows(Tensor a, Tensor b) {
    Tape& t = *same_tape(a, b);
    const Eigen::MatrixXd& av = a.value();
    const Eigen::MatrixXd& bv = b.value();
    if (av.cols() != bv.cols()) throw std::invalid_argument("concat_rows: column mismatch");
    Eigen::MatrixXd out(av.rows() + bv.rows(), av.cols());
    out.topRows(av.rows()) = av;
    out.bottomRows(bv.rows()) = bv;
    bool rg = OA::needs_grad(a) || OA::needs_grad(b);
    Tensor res = OA::emit(t, std::move(out), rg, nullptr);
    if (!rg) return res;
    Tape* tp = &t;
    int aid = a.id, bid = b.id, oid = res.id;
    long ar = av.rows(), br = bv.rows();
    OA::set_bw(*tp, oid, [tp, aid, bid, oid, ar, br]() {
        const Eigen::MatrixXd& go = OA::grad_of(*tp, oid);
        OA::accum(*tp, aid, go.topRows(ar));
        OA::accum(*tp, bid, go.bottomRows(br));
    });
    return res;
}

namespace {

Tensor unary_elementwise(Tensor a, char op) {
    Tape& t = *a.tape;
    const Eigen::MatrixXd& av = a.value();
    Eigen::MatrixXd out;
    switch (op) {
        case 'e': out = av.array().exp(); break;
        case 's': out = (1.0 / (1.0 + (-av.array()).exp())).matrix(); break;
        case 'r': out = av.cwiseMax(0.0); break;
        default: throw std::logic_error("bad op");
    }
    bool rg = OA::needs_grad(a);
    Tensor res = OA::emit(t, std::move(out), rg, nullptr);
    if (!rg) return res;
    Tape* tp = &t;
    int aid = a.id, oid = res.id;
    OA::set_bw(*tp, oid, [tp, aid, oid, op]() {
        const Eigen::MatrixXd& go = OA::grad_of(*tp, oid);
        const Eigen::MatrixXd& ov = OA::val(*tp, oid);
        const Eigen::MatrixXd& av = OA::val(*tp, aid);
        Eigen::MatrixXd g;
        switch (op) {
            case 'e': g = go.cwiseProduct(ov); break;
            case 's': g = go.cwiseProduct(ov.cwiseProduct(Eigen::MatrixXd::Ones(ov.rows(), ov.cols()) - ov)); break;
            case 'r': g = go.cwiseProduct((av.array() > 0.0).cast<double>().matrix()); break;
        }
        OA::accum(*tp, aid, g);
    });
    return res;
}

}  // namespace

Tensor exp(Tensor a) { return unary_elementwise(a, 'e'); }
Tensor sigmoid(Tensor a) { return unary_elementwise(a, 's'); }
Tensor relu(Tensor a) { return unary_elementwise(a, 'r'); }

Tensor sum(Tensor a) {
    Tape& t = *a.tape;
    Eigen::MatrixXd out(1, 1);
    out(0, 0) = a.value().sum();
    bool rg = OA::needs_grad(a);
    Tensor res = OA::emit(t, std::move(out), rg, nullptr);
    if (!rg) return res;
    Tape* tp = &t;
    int aid = a.id, oid = res.id;
    OA::set_bw(*tp, oid, [tp, aid, oid]() {
        const Eigen::MatrixXd& av = OA::val(*tp, aid);
        double g = OA::grad_of(*tp, oid)(0, 0);
        OA::accum(*tp, aid, Eigen::MatrixXd::Constant(av.rows(), av.cols(), g));
    });
    return res;
}

Tensor mean(Tensor a) {
    Tape& t = *a.tape;
    Eigen::MatrixXd out(1, 1);
    out(0, 0) = a.value().mean();
    bool rg = OA::needs_grad(a);
    Tensor res = OA::emit(t, std::move(out), rg, nullptr);
    if (!rg) return res;
    Tape* tp = &t;
    int aid = a.id, oid = res.id;
    OA::set_bw(*tp, oid, [tp, aid, oid]() {
        const Eigen::MatrixXd& av = OA::val(*tp, aid);
        double g = OA::grad_of(*tp, oid)(0, 0) / static_cast<double>(av.size());
        OA::accum(*tp, aid, Eigen::MatrixXd::Constant(av.rows(), av.cols(), g));
    });
    return res;
}

Tensor l2_norm(Tensor a) {
    Tape& t = *a.tape;
    Eigen::MatrixXd out(1, 1);
    out(0, 0) = a.value().norm();
    bool rg = OA::needs_grad(a);
    Tensor res = OA::emit(t, std::move(out), rg, nullptr);
    if (!rg) return res;
    Tape* tp = &t;
    int aid = a.id, oid = res.id;
    OA::set_bw(*tp, oid, [tp, aid, oid]() {
        const Eigen::MatrixXd& av = OA::val(*tp, aid);
        double norm = OA::val(*tp, oid)(0, 0);
        double g = OA::grad_of(*tp, oid)(0, 0);
        if (norm == 0.0) {
            OA::warn(*tp, "l2_norm gradient at the zero vector set to zero");
            return;
        }
        OA::accum(*tp, aid, (g / norm) * av);
    });
    return res;
}

Tensor squared_frobenius(Tensor a) {
    Tape& t = *a.tape;
    Eigen::MatrixXd out(1, 1);
    out(0, 0) = a.value().squaredNorm();
    bool rg = OA::needs_grad(a);
    Tensor res = OA::emit(t, std::move(out), rg, nullptr);
    if (!rg) return res;
    Tape* tp = &t;
    int aid = a.id, oid = res.id;
    OA::set_bw(*tp, oid, [tp, aid, oid]() {
        double g = OA::grad_of(*tp, oid)(0, 0);
        OA::accum(*tp, aid, (2.0 * g) * OA::val(*tp, aid));
    });
    return res;
}

Tensor masked_select(Tensor a, const Eigen::MatrixXd& mask) {
    Tape& t = *a.tape;
    const Eigen::MatrixXd& av = a.value();
    if (mask.rows() != av.rows() || mask.cols() != av.cols())
        throw std::invalid_argument("masked_select: mask shape mismatch");
    Eigen::MatrixXd keep = (mask.array() != 0.0).cast<double>();
    bool rg = OA::needs_grad(a);
    Tensor res = OA::emit(t, av.cwiseProduct(keep), rg, nullptr);
    if (!rg) return res;
    Tape* tp = &t;
    int aid = a.id, oid = res.id;
    OA::set_bw(*tp, oid, [tp, aid, oid, keep]() {
        OA::accum(*tp, aid, OA::grad_of(*tp, oid).cwiseProduct(keep));
    });
    return res;
}

Tensor unit_normalize(Tensor a) {
    Tape& t = *a.tape;
    const Eigen::MatrixXd& av = a.value();
    if (av.cols() != 1) throw std::invalid_argument("unit_normalize expects a column vector");
    double norm = av.norm();
    bool rg = OA::needs_grad(a);
    if (norm == 0.0) {
        OA::warn(t, "unit_normalize hit the zero vector; returning e1 with zero gradient");
        Eigen::MatrixXd e1 = Eigen::MatrixXd::Zero(av.rows(), 1);
        e1(0, 0) = 1.0;
        return OA::emit(t, std::move(e1), rg, nullptr);
    }
    Tensor res = OA::emit(t, av / norm, rg, nullptr);
    if (!rg) return res;
    Tape* tp = &t;
    int aid = a.id, oid = res.id;
    OA::set_bw(*tp, oid, [tp, aid, oid, norm]() {
        const Eigen::MatrixXd& go = OA::grad_of(*tp, oid);
        const Eigen::MatrixXd& u = OA::val(*tp, oid);
        Eigen::MatrixXd g = (go - u * (u.transpose() * go)) / norm;
        OA::accum(*tp, aid, g);
    });
    return res;
}

Tensor qmul(Tensor a, const OrthogonalReducer& q, bool transposed) {
    Tape& t = *a.tape;
    const Eigen::MatrixXd& av = a.value();
    Eigen::MatrixXd out = transposed ? q.tmul(av) : q.mul(av);
    bool rg = OA::needs_grad(a);
    Tensor res = OA::emit(t, std::move(out), rg, nullptr);
    if (!rg) return res;
    Tape* tp = &t;
    int aid = a.id, oid = res.id;
    OrthogonalReducer qc = q;
    OA::set_bw(*tp, oid, [tp, aid, oid, qc, transposed]() {
        const Eigen::MatrixXd& go = OA::grad_of(*tp, oid);
        OA::accum(*tp, aid, transposed ? qc.mul(go) : qc.tmul(go));
    });
    return res;
}

Tensor pairwise_sqdist(Tensor z) {
    Tape& t = *z.tape;
    const Eigen::MatrixXd& zv = z.value();
    const long n = zv.rows();
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (long i = 0; i < n; ++i) {
        for (long j = i + 1; j < n; ++j) {
            double d = (zv.row(i) - zv.row(j)).squaredNorm();
            D(i, j) = d;
            D(j, i) = d;
        }
    }
    bool rg = OA::needs_grad(z);
    Tensor res = OA::emit(t, std::move(D), rg, nullptr);
    if (!rg) return res;
    Tape* tp = &t;
    int zid = z.id, oid = res.id;
    OA::set_bw(*tp, oid, [tp, zid, oid]() {
        const Eigen::MatrixXd& go = OA::grad_of(*tp, oid);
        const Eigen::MatrixXd& zv = OA::val(*tp, zid);
        Eigen::MatrixXd H = go + go.transpose();
        Eigen::VectorXd hs = H.rowwise().sum();
        Eigen::MatrixXd g = 2.0 * (hs.asDiagonal() * zv - H * zv);
        OA::accum(*tp, zid, g);
    });
    return res;
}

Tensor diag_embed(Tensor v) {
    Tape& t = *v.tape;
    const Eigen::MatrixXd& vv = v.value();
    if (vv.cols() != 1) throw std::invalid_argument("diag_embed expects a column vector");
    Eigen::MatrixXd out = Eigen::MatrixXd(vv.col(0).asDiagonal());
    bool rg = OA::needs_grad(v);
    Tensor res = OA::emit(t, std::move(out), rg, nullptr);
    if (!rg) return res;
    Tape* tp = &t;
    int vid = v.id, oid = res.id;
    OA::set_bw(*tp, oid, [tp, vid, oid]() {
        OA::accum(*tp, vid, OA::grad_of(*tp, oid).diagonal());
    });
    return res;
}

void adam_step(const std::vector<Eigen::MatrixXd*>& params,
               const std::vector<Eigen::MatrixXd>& grads, AdamState& state, double lr,
               double weight_decay, double beta1, double beta2, double eps) {
    if (params.size() != grads.size()) throw std::invalid_argument("adam: param/grad mismatch");
    if (state.m.empty()) {
        for (const auto* p : params) {
            state.m.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
            state.v.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
        }
    }
    state.t += 1;
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < params.size(); ++i) {
        Eigen::MatrixXd g = grads[i] + weight_decay * (*params[i]);
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g.cwiseProduct(g);
        Eigen::MatrixXd mhat = state.m[i] / bc1;
        Eigen::MatrixXd vhat = state.v[i] / bc2;
        params[i]->noalias() -= (lr * mhat.array() / (vhat.array().sqrt() + eps)).matrix();
    }
}

void sgd_step(const std::vector<Eigen::MatrixXd*>& params,
              const std::vector<Eigen::MatrixXd>& grads, double lr, double weight_decay) {
    if (params.size() != grads.size()) throw std::invalid_argument("sgd: param/grad mismatch");
    for (size_t i = 0; i < params.size(); ++i)
        *params[i] -= lr * (grads[i] + weight_decay * (*params[i]));
}

}  // namespace rankforge::ad
