#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "rankforge/metrics.hpp"

using namespace rankforge;
using namespace rankforge::testutil;

TEST_CASE("transforms") {
    ScoreVector r(3);
    r << -1.0, 0.0, 2.0;
    ScoreVector s = apply_transform(r, ScoreTransform::Sigmoid);
    CHECK(s(0) == doctest::Approx(1.0 / (1.0 + std::exp(1.0))));
    CHECK(s(1) == doctest::Approx(0.5));
    ScoreVector a = apply_transform(r, ScoreTransform::AffineHalf);
    CHECK(a(0) == 0.0);
    CHECK(a(2) == 1.5);
    CHECK(max_abs_diff(apply_transform(r, ScoreTransform::None), r) == 0.0);
}

TEST_CASE("scores_to_ranks breaks ties by index") {
    ScoreVector r(4);
    r << 0.5, 2.0, 0.5, -1.0;
    Ranking R = scores_to_ranks(r);
    CHECK(R == Ranking{2, 1, 3, 4});
    // ranking_to_scores round-trips the order
    CHECK(scores_to_ranks(ranking_to_scores(R)) == R);
}

TEST_CASE("upset_simple identities") {
    DiGraph t = transitive_tournament(6);
    ComparisonMatrices cm = comparison_matrices(t);

    ScoreVector perfect(6), constant = ScoreVector::Ones(6), reversed(6);
    for (int i = 0; i < 6; ++i) {
        perfect(i) = 6.0 - i;
        reversed(i) = double(i);
    }
    CHECK(upset_simple(cm, perfect) == 0.0);
    CHECK(upset_simple(cm, constant) == 1.0);  // exact by construction
    CHECK(upset_simple(cm, reversed) == 4.0);

    // constant scores give exactly 1 on any graph with decisive pairs
    for (int s = 0; s < 5; ++s) {
        DiGraph g = random_digraph(8, 0.6, 100 + s);
        ComparisonMatrices c2 = comparison_matrices(g);
        long decisive = 0;
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                if (c2.Mprime(i, j) != 0.0) ++decisive;
        CHECK(upset_simple(c2, ScoreVector::Ones(8)) ==
              double(decisive) / double(c2.t));
    }
}

TEST_CASE("upset_naive identities") {
    DiGraph t = transitive_tournament(5);
    ComparisonMatrices cm = comparison_matrices(t);
    ScoreVector perfect(5), reversed(5);
    for (int i = 0; i < 5; ++i) {
        perfect(i) = 5.0 - i;
        reversed(i) = double(i);
    }
    CHECK(upset_naive(cm, perfect) == 0.0);
    CHECK(upset_naive(cm, reversed) == 1.0);
    CHECK(upset_naive(cm, ScoreVector::Ones(5)) == 1.0);  // ties disagree with decisive pairs
}

TEST_CASE("upset_ratio hand oracle") {
    // one edge of weight 1, scores (0.75, 0.25) used raw:
    // both ordered pairs contribute ((0.5) - (+-1))^2 = 0.25
    ComparisonMatrices cm = comparison_matrices(single_edge());
    ScoreVector s(2);
    s << 0.75, 0.25;
    MetricConfig raw{ScoreTransform::None, 0.01};
    CHECK(upset_ratio(cm, s, raw) == doctest::Approx(0.25));

    ScoreVector bad(2);
    bad << 1.0, -1.0;
    CHECK_THROWS_WITH(upset_ratio(cm, bad, raw), doctest::Contains("sum to zero"));
}

TEST_CASE("upset_margin hand oracle") {
    // winner scored below loser: hinge = 0.6 - 0.4 + 0.01, weight 2 M = 2, t = 2
    ComparisonMatrices cm = comparison_matrices(single_edge());
    ScoreVector s(2);
    s << 0.4, 0.6;
    CHECK(upset_margin(cm, s) == doctest::Approx(2.0 * 0.21 / 2.0));
    // correctly ordered with enough gap: zero
    ScoreVector good(2);
    good << 0.9, 0.1;
    CHECK(upset_margin(cm, good) == 0.0);
}

TEST_CASE("sign upsets are invariant under strictly monotone transforms") {
    for (int s = 0; s < 20; ++s) {
        DiGraph g = random_digraph(9, 0.5, 500 + s);
        ComparisonMatrices cm = comparison_matrices(g);
        Rng rng(900 + s);
        ScoreVector r(9);
        for (int i = 0; i < 9; ++i) r(i) = rng.uniform(-3.0, 3.0);
        ScoreVector exp_r = r.array().exp();
        ScoreVector affine = 2.0 * r.array() + 5.0;
        CHECK(upset_simple(cm, r) == upset_simple(cm, exp_r));
        CHECK(upset_simple(cm, r) == upset_simple(cm, affine));
        CHECK(upset_naive(cm, r) == upset_naive(cm, exp_r));
        CHECK(upset_naive(cm, r) == upset_naive(cm, affine));
    }
}

TEST_CASE("metrics are invariant under node relabeling") {
    DiGraph g = random_digraph(8, 0.6, 42);
    Rng rng(43);
    ScoreVector r(8);
    for (int i = 0; i < 8; ++i) r(i) = rng.uniform(-1.0, 1.0);
    ComparisonMatrices cm = comparison_matrices(g);

    auto perm = random_permutation(8, 7);
    DiGraph pg = DiGraph::from_adjacency(permute_matrix(g.A, perm));
    ComparisonMatrices pcm = comparison_matrices(pg);
    ScoreVector pr = permute_vector(r, perm);

    CHECK(upset_simple(cm, r) == doctest::Approx(upset_simple(pcm, pr)).epsilon(1e-14));
    CHECK(upset_naive(cm, r) == doctest::Approx(upset_naive(pcm, pr)).epsilon(1e-14));
    CHECK(upset_ratio(cm, r) == doctest::Approx(upset_ratio(pcm, pr)).epsilon(1e-12));
    CHECK(upset_margin(cm, r) == doctest::Approx(upset_margin(pcm, pr)).epsilon(1e-12));
}

TEST_CASE("kendall tau closed forms") {
    ScoreVector a(4), rev(4);
    a << 4, 3, 2, 1;
    rev << 1, 2, 3, 4;
    CHECK(kendall_tau(a, a) == 1.0);
    CHECK(kendall_tau(a, rev) == -1.0);

    // one adjacent swap among 4: (C - D) / pairs = (5 - 1) / 6
    ScoreVector b(4);
    b << 4, 2, 3, 1;
    CHECK(kendall_tau(a, b) == doctest::Approx(4.0 / 6.0));

    // tie-aware variant: x = (1,1,2), y = (1,2,3) -> 2 / sqrt(2 * 3)
    ScoreVector x(3), y(3);
    x << 1, 1, 2;
    y << 1, 2, 3;
    CHECK(kendall_tau(x, y) == doctest::Approx(2.0 / std::sqrt(6.0)));

    ScoreVector flat = ScoreVector::Ones(3);
    CHECK_THROWS_WITH(kendall_tau(flat, y), doctest::Contains("entirely tied"));
}

TEST_CASE("kendall tau brute-force cross-check on rankings") {
    // independent oracle: direct tau-b formula over index pairs
    for (int s = 0; s < 10; ++s) {
        Rng rng(1000 + s);
        int n = 5 + int(rng.uniform() * 10);
        ScoreVector a(n), b(n);
        for (int i = 0; i < n; ++i) {
            a(i) = std::floor(rng.uniform() * 4);  // coarse values force ties
            b(i) = std::floor(rng.uniform() * 4);
        }
        long long C = 0, D = 0, tx = 0, ty = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                double dx = a(i) - a(j), dy = b(i) - b(j);
                if (dx == 0 && dy == 0) continue;
                if (dx == 0) { ++tx; continue; }
                if (dy == 0) { ++ty; continue; }
                (dx * dy > 0 ? C : D)++;
            }
        if (C + D + ty == 0 || C + D + tx == 0) continue;
        double expected = double(C - D) / std::sqrt(double(C + D + ty) * double(C + D + tx));
        CHECK(kendall_tau(a, b) == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("similarity pretrain loss") {
    DiGraph t = transitive_tournament(4);
    SerialSimilarity sr = serialrank_similarity(t);
    CHECK(similarity_pretrain_loss(sr.SprimeNorm, sr) == 0.0);
    Eigen::MatrixXd off = sr.SprimeNorm;
    off(0, 0) += 2.0;
    CHECK(similarity_pretrain_loss(off, sr) == doctest::Approx(4.0 / 16.0));
    CHECK_THROWS_WITH(similarity_pretrain_loss(Eigen::MatrixXd::Zero(3, 3), sr),
                      doctest::Contains("shape mismatch"));
}
