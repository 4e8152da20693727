#include "rankforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rankforge {

namespace {

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_scores(const ComparisonMatrices& cm, const ScoreVector& r) {
    if (r.size() != cm.Mprime.rows()) throw std::invalid_argument("score length mismatch");
    if (!r.allFinite()) throw std::invalid_argument("scores contain non-finite values");
    if (cm.t == 0) throw std::invalid_argument("graph has no comparisons");
}

}  // namespace

ScoreVector apply_transform(const ScoreVector& r, ScoreTransform t) {
    switch (t) {
        case ScoreTransform::None:
            return r;
        case ScoreTransform::Sigmoid:
            return r.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
        case ScoreTransform::AffineHalf:
            return (r.array() + 1.0) / 2.0;
    }
    throw std::logic_error("unknown transform");
}

Ranking scores_to_ranks(const ScoreVector& r) {
    if (!r.allFinite()) throw std::invalid_argument("scores contain non-finite values");
    const int n = static_cast<int>(r.size());
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return r(a) > r(b); });
    Ranking ranks(static_cast<size_t>(n));
    for (int pos = 0; pos < n; ++pos)
        ranks[static_cast<size_t>(order[static_cast<size_t>(pos)])] = pos + 1;
    return ranks;
}

ScoreVector ranking_to_scores(const Ranking& R) {
    ScoreVector r(static_cast<long>(R.size()));
    for (size_t i = 0; i < R.size(); ++i) r(static_cast<long>(i)) = -static_cast<double>(R[i]);
    return r;
}

double upset_naive(const ComparisonMatrices& cm, const ScoreVector& r) {
    check_scores(cm, r);
    const long n = r.size();
    long long mismatches = 0;
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j)
            if (cm.Mprime(i, j) != 0.0 && sign_of(r(i) - r(j)) != sign_of(cm.Mprime(i, j)))
                ++mismatches;
    return static_cast<double>(mismatches) / static_cast<double>(cm.t);
}

double upset_ratio(const ComparisonMatrices& cm, const ScoreVector& r, const MetricConfig& cfg) {
    check_scores(cm, r);
    ScoreVector s = apply_transform(r, cfg.transform);
    const long n = s.size();
    double acc = 0.0;
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) {
            if (cm.support(i, j) == 0.0) continue;
            double denom = s(i) + s(j);
            if (denom == 0.0)
                throw std::domain_error("transformed scores sum to zero on a supported pair");
            double d = (s(i) - s(j)) / denom - cm.M(i, j);
            acc += d * d;
        }
    }
    return acc / static_cast<double>(cm.t);
}

double upset_margin(const ComparisonMatrices& cm, const ScoreVector& r, const MetricConfig& cfg) {
    check_scores(cm, r);
    const long n = r.size();
    double acc = 0.0;
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) {
            double m = cm.M(i, j);
            double w = m + std::abs(m);
            if (w == 0.0) continue;
            double hinge = r(j) - r(i) + cfg.margin;
            if (hinge > 0.0) acc += w * hinge;
        }
    }
    return acc / static_cast<double>(cm.t);
}

double upset_simple(const ComparisonMatrices& cm, const ScoreVector& r) {
    check_scores(cm, r);
    const long n = r.size();
    double acc = 0.0;
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) {
            if (cm.Mprime(i, j) == 0.0) continue;
            double d = sign_of(r(i) - r(j)) - sign_of(cm.Mprime(i, j));
            acc += d * d;
        }
    }
    return acc / static_cast<double>(cm.t);
}

double upset_simple(const ComparisonMatrices& cm, const Ranking& R) {
    return upset_simple(cm, ranking_to_scores(R));
}

namespace {

double tau_b(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n != y.size()) throw std::invalid_argument("kendall_tau: length mismatch");
    if (n < 2) throw std::invalid_argument("kendall_tau: need at least two items");
    long long concordant = 0, discordant = 0, only_x_tied = 0, only_y_tied = 0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            double dx = x[i] - x[j], dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) continue;
            if (dx == 0.0) { ++only_x_tied; continue; }
            if (dy == 0.0) { ++only_y_tied; continue; }
            if ((dx > 0.0) == (dy > 0.0)) ++concordant; else ++discordant;
        }
    }
    double nx = static_cast<double>(concordant + discordant + only_y_tied);
    double ny = static_cast<double>(concordant + discordant + only_x_tied);
    if (nx == 0.0 || ny == 0.0)
        throw std::domain_error("kendall_tau undefined: a side is entirely tied");
    return static_cast<double>(concordant - discordant) / std::sqrt(nx * ny);
}

}  // namespace

double kendall_tau(const ScoreVector& a, const ScoreVector& b) {
    if (!a.allFinite() || !b.allFinite())
        throw std::invalid_argument("kendall_tau: non-finite scores");
    std::vector<double> x(a.data(), a.data() + a.size());
    std::vector<double> y(b.data(), b.data() + b.size());
    return tau_b(x, y);
}

double kendall_tau(const Ranking& a, const Ranking& b) {
    std::vector<double> x(a.size()), y(b.size());
    for (size_t i = 0; i < a.size(); ++i) x[i] = -static_cast<double>(a[i]);
    for (size_t i = 0; i < b.size(); ++i) y[i] = -static_cast<double>(b[i]);
    return tau_b(x, y);
}

double similarity_pretrain_loss(const Eigen::MatrixXd& S, const SerialSimilarity& sr) {
    if (S.rows() != sr.SprimeNorm.rows() || S.cols() != sr.SprimeNorm.cols())
        throw std::invalid_argument("similarity shape mismatch");
    double n = static_cast<double>(S.rows());
    return (S - sr.SprimeNorm).squaredNorm() / (n * n);
}

}  // namespace rankforge
