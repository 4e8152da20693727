#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "rankforge/autodiff.hpp"
#include "rankforge/rng.hpp"

using namespace rankforge;
using rankforge::testutil::max_abs_diff;
namespace ad = rankforge::ad;

namespace {

using Builder = std::function<ad::Tensor(ad::Tape&, std::vector<ad::Tensor>&)>;

double eval_loss(const Builder& f, const std::vector<Eigen::MatrixXd>& vals) {
    ad::Tape tape;
    std::vector<ad::Tensor> in;
    for (const auto& v : vals) in.push_back(tape.input(v, false));
    return f(tape, in).value()(0, 0);
}

// central differences against the reverse sweep, every input entry
void check_gradients(const Builder& f, std::vector<Eigen::MatrixXd> vals, double tol = 1e-5) {
    ad::Tape tape;
    std::vector<ad::Tensor> in;
    for (const auto& v : vals) in.push_back(tape.input(v, true));
    ad::Tensor loss = f(tape, in);
    tape.backward(loss);

    const double h = 1e-6;
    for (size_t p = 0; p < vals.size(); ++p) {
        Eigen::MatrixXd g = in[p].grad();
        REQUIRE(g.rows() == vals[p].rows());
        REQUIRE(g.cols() == vals[p].cols());
        for (long i = 0; i < vals[p].rows(); ++i)
            for (long j = 0; j < vals[p].cols(); ++j) {
                auto vp = vals;
                auto vm = vals;
                vp[p](i, j) += h;
                vm[p](i, j) -= h;
                double fd = (eval_loss(f, vp) - eval_loss(f, vm)) / (2.0 * h);
                CAPTURE(p);
                CAPTURE(i);
                CAPTURE(j);
                CHECK(std::abs(g(i, j) - fd) <= tol * std::max(1.0, std::abs(fd)));
            }
    }
}

Eigen::MatrixXd rand_mat(long r, long c, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Rng rng(seed);
    Eigen::MatrixXd m(r, c);
    for (long i = 0; i < r; ++i)
        for (long j = 0; j < c; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

}  // namespace

TEST_CASE("elementwise ops differentiate") {
    auto A = rand_mat(3, 4, 1);
    auto B = rand_mat(3, 4, 2, 0.5, 2.0);  // positive: safe div denominator
    check_gradients(
        [](ad::Tape&, std::vector<ad::Tensor>& in) {
            return ad::sum(ad::add(ad::mul(in[0], in[1]), ad::sub(in[0], ad::neg(in[1]))));
        },
        {A, B});
    check_gradients(
        [](ad::Tape&, std::vector<ad::Tensor>& in) { return ad::sum(ad::div(in[0], in[1])); },
        {A, B});
}

TEST_CASE("scalar broadcast on either side") {
    auto A = rand_mat(2, 3, 3);
    Eigen::MatrixXd s(1, 1);
    s << 1.7;
    check_gradients(
        [](ad::Tape&, std::vector<ad::Tensor>& in) {
            return ad::sum(ad::add(ad::mul(in[1], in[0]), ad::div(in[0], in[1])));
        },
        {A, s});
    check_gradients(
        [](ad::Tape&, std::vector<ad::Tensor>& in) { return ad::sum(ad::sub(in[1], in[0])); },
        {A, s});
}

TEST_CASE("structural ops differentiate") {
    auto A = rand_mat(3, 2, 4);
    auto B = rand_mat(2, 4, 5);
    check_gradients(
        [](ad::Tape&, std::vector<ad::Tensor>& in) {
            return ad::sum(ad::matmul(in[0], in[1]));
        },
        {A, B});
    check_gradients(
        [](ad::Tape&, std::vector<ad::Tensor>& in) {
            return ad::sum(ad::slice(ad::transpose(in[0]), 0, 1, 2, 2));
        },
        {A});
    check_gradients(
        [](ad::Tape&, std::vector<ad::Tensor>& in) {
            return ad::squared_frobenius(ad::concat_rows(in[0], in[1]));
        },
        {rand_mat(2, 3, 6), rand_mat(4, 3, 7)});
    check_gradients(
        [](ad::Tape&, std::vector<ad::Tensor>& in) {
            return ad::sum(ad::matmul(ad::diag_embed(in[0]), in[1]));
        },
        {rand_mat(3, 1, 8), rand_mat(3, 2, 9)});
}

TEST_CASE("nonlinearities differentiate") {
    auto A = rand_mat(3, 3, 10);
    check_gradients(
        [](ad::Tape&, std::vector<ad::Tensor>& in) { return ad::sum(ad::exp(in[0])); }, {A});
    check_gradients(
        [](ad::Tape&, std::vector<ad::Tensor>& in) { return ad::sum(ad::sigmoid(in[0])); }, {A});
    // keep entries away from the relu kink
    auto shifted = rand_mat(3, 3, 11).array().abs() + 0.1;
    check_gradients(
        [](ad::Tape& t, std::vector<ad::Tensor>& in) {
            return ad::sum(ad::relu(ad::sub(in[0], t.scalar(0.05))));
        },
        {Eigen::MatrixXd(shifted)});
}

TEST_CASE("reductions differentiate") {
    auto A = rand_mat(4, 2, 12);
    check_gradients(
        [](ad::Tape&, std::vector<ad::Tensor>& in) { return ad::mean(in[0]); }, {A});
    check_gradients(
        [](ad::Tape&, std::vector<ad::Tensor>& in) { return ad::l2_norm(in[0]); }, {A});
    check_gradients(
        [](ad::Tape&, std::vector<ad::Tensor>& in) { return ad::squared_frobenius(in[0]); }, {A});
}

TEST_CASE("masking, normalization, reducer and pairwise distances differentiate") {
    Eigen::MatrixXd mask(3, 3);
    mask << 1, 0, 1, 0, 1, 0, 1, 1, 0;
    check_gradients(
        [mask](ad::Tape&, std::vector<ad::Tensor>& in) {
            return ad::sum(ad::masked_select(in[0], mask));
        },
        {rand_mat(3, 3, 13)});

    auto v = rand_mat(5, 1, 14, 0.2, 1.0);
    check_gradients(
        [](ad::Tape&, std::vector<ad::Tensor>& in) {
            return ad::sum(ad::mul(ad::unit_normalize(in[0]), in[1]));
        },
        {v, rand_mat(5, 1, 15)});

    OrthogonalReducer Q(5);
    check_gradients(
        [&Q](ad::Tape&, std::vector<ad::Tensor>& in) {
            return ad::sum(ad::mul(ad::qmul(in[0], Q, false), in[1]));
        },
        {rand_mat(5, 2, 16), rand_mat(5, 2, 17)});
    check_gradients(
        [&Q](ad::Tape&, std::vector<ad::Tensor>& in) {
            return ad::sum(ad::mul(ad::qmul(in[0], Q, true), in[1]));
        },
        {rand_mat(5, 2, 18), rand_mat(5, 2, 19)});

    check_gradients(
        [](ad::Tape&, std::vector<ad::Tensor>& in) {
            return ad::sum(ad::mul(ad::pairwise_sqdist(in[0]), in[1]));
        },
        {rand_mat(4, 3, 20), rand_mat(4, 4, 21)});
}

TEST_CASE("pairwise_sqdist is exactly symmetric with a zero diagonal") {
    ad::Tape tape;
    ad::Tensor z = tape.input(rand_mat(6, 3, 22), false);
    Eigen::MatrixXd D = ad::pairwise_sqdist(z).value();
    CHECK(max_abs_diff(D, D.transpose()) == 0.0);
    CHECK(D.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(D.minCoeff() >= 0.0);
}

TEST_CASE("gradients accumulate across reuse") {
    ad::Tape tape;
    Eigen::MatrixXd x0(1, 1);
    x0 << 3.0;
    ad::Tensor x = tape.input(x0, true);
    ad::Tensor loss = ad::sum(ad::add(x, ad::mul(x, x)));  // x + x^2
    tape.backward(loss);
    CHECK(x.grad()(0, 0) == doctest::Approx(1.0 + 2.0 * 3.0));

    tape.zero_grad();
    CHECK(x.grad().size() == 0);  // cleared grads stay empty until backward

    tape.backward(loss);
    CHECK(x.grad()(0, 0) == doctest::Approx(7.0));  // no stale accumulation
}

TEST_CASE("tape guards") {
    ad::Tape tape;
    ad::Tensor a = tape.input(rand_mat(2, 2, 23), true);
    CHECK_THROWS_WITH(tape.backward(a), doctest::Contains("scalar"));

    ad::Tensor z = tape.constant(Eigen::MatrixXd::Zero(2, 2));
    CHECK_THROWS_WITH(ad::div(a, z), doctest::Contains("division by zero"));

    ad::Tape other;
    ad::Tensor b = other.input(rand_mat(2, 2, 24), false);
    CHECK_THROWS_WITH(ad::add(a, b), doctest::Contains("same tape"));
    CHECK_THROWS_WITH(ad::add(a, tape.input(rand_mat(3, 2, 25), false)),
                      doctest::Contains("shape mismatch"));
}

TEST_CASE("unit_normalize at zero returns e1, warns, and passes no gradient") {
    ad::Tape tape;
    ad::Tensor x = tape.input(Eigen::MatrixXd::Zero(4, 1), true);
    ad::Tensor y = ad::unit_normalize(x);
    CHECK(y.value()(0, 0) == 1.0);
    CHECK(y.value().bottomRows(3).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(tape.warnings().size() == 1);
    CHECK(tape.warnings()[0].find("zero vector") != std::string::npos);
    tape.backward(ad::sum(y));
    // no gradient reaches x: either never materialized or identically zero
    CHECK((x.grad().size() == 0 || x.grad().cwiseAbs().maxCoeff() == 0.0));
}

TEST_CASE("sgd step") {
    Eigen::MatrixXd w(1, 1), g(1, 1);
    w << 1.0;
    g << 2.0;
    std::vector<Eigen::MatrixXd*> params{&w};
    ad::sgd_step(params, {g}, 0.1);
    CHECK(w(0, 0) == doctest::Approx(0.8));

    // weight decay folds into the gradient
    w << 1.0;
    ad::sgd_step(params, {g}, 0.1, 0.5);
    CHECK(w(0, 0) == doctest::Approx(1.0 - 0.1 * (2.0 + 0.5 * 1.0)));
}

TEST_CASE("adam matches a hand-stepped reference") {
    const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    Eigen::MatrixXd w(2, 1);
    w << 1.0, -2.0;
    Eigen::MatrixXd g1(2, 1), g2(2, 1);
    g1 << 0.5, -1.5;
    g2 << -0.25, 2.0;

    // reference: scalar recurrences written out longhand
    Eigen::MatrixXd wr = w;
    Eigen::Vector2d m = Eigen::Vector2d::Zero(), v = Eigen::Vector2d::Zero();
    auto ref_step = [&](const Eigen::MatrixXd& grad, int t) {
        for (int i = 0; i < 2; ++i) {
            m(i) = b1 * m(i) + (1 - b1) * grad(i, 0);
            v(i) = b2 * v(i) + (1 - b2) * grad(i, 0) * grad(i, 0);
            double mhat = m(i) / (1 - std::pow(b1, t));
            double vhat = v(i) / (1 - std::pow(b2, t));
            wr(i, 0) -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    };

    ad::AdamState st;
    std::vector<Eigen::MatrixXd*> params{&w};
    ad::adam_step(params, {g1}, st, lr);
    ref_step(g1, 1);
    CHECK(max_abs_diff(w, wr) < 1e-15);

    ad::adam_step(params, {g2}, st, lr);
    ref_step(g2, 2);
    CHECK(max_abs_diff(w, wr) < 1e-15);

    // first-step magnitude is ~lr in every coordinate
    Eigen::MatrixXd w0(3, 1);
    w0 << 5.0, -1.0, 0.5;
    Eigen::MatrixXd before = w0;
    ad::AdamState st2;
    std::vector<Eigen::MatrixXd*> p2{&w0};
    ad::adam_step(p2, {rand_mat(3, 1, 40, 0.5, 2.0)}, st2, lr);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(std::abs(w0(i, 0) - before(i, 0)) - lr) < 1e-6);
}
