#include "rankforge/baselines.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rankforge {

namespace {

Eigen::MatrixXd rank2_reconstruction(const Eigen::MatrixXd& B) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    long k = std::min<long>(2, sv.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(B.rows(), B.cols());
    for (long i = 0; i < k; ++i)
        out += sv(i) * svd.matrixU().col(i) * svd.matrixV().col(i).transpose();
    return out;
}

}  // namespace

BaselineResult pagerank(const DiGraph& g, const BaselineConfig& cfg) {
    const int n = g.n();
    // Walk on A^T so that losing mass flows to the winner.
    Eigen::MatrixXd P(n, n);
    for (int i = 0; i < n; ++i) {
        double s = g.A.col(i).sum();  // out-weights of i in A^T
        if (s > 0.0)
            P.row(i) = g.A.col(i).transpose() / s;
        else
            P.row(i).setConstant(1.0 / n);
    }
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
    double resid = 0.0;
    int it = 0;
    for (; it < cfg.power_max_iter; ++it) {
        Eigen::VectorXd next =
            cfg.damping * (P.transpose() * x) +
            Eigen::VectorXd::Constant(n, (1.0 - cfg.damping) / n);
        resid = (next - x).lpNorm<1>();
        x = next;
        if (resid < cfg.power_tol) break;
    }
    return BaselineResult{x, resid, it + 1};
}

BaselineResult eigenvector_centrality(const DiGraph& g, const BaselineConfig& cfg) {
    const int n = g.n();
    // Power iteration on I + A (same eigenvectors as A, robust on nilpotent
    // or reducible tournaments); a node inherits strength from everyone it
    // beat.
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
    double resid = 0.0;
    int it = 0;
    for (; it < cfg.power_max_iter; ++it) {
        Eigen::VectorXd next = x + g.A * x;
        double s = next.lpNorm<1>();
        if (s == 0.0) break;
        next /= s;
        resid = (next - x).lpNorm<1>();
        x = next;
        if (resid < cfg.power_tol) break;
    }
    return BaselineResult{x, resid, it + 1};
}

BaselineResult rank_centrality(const DiGraph& g, const BaselineConfig& cfg) {
    const int n = g.n();
    Eigen::VectorXi deg(n);
    int dmax = 0;
    for (int i = 0; i < n; ++i) {
        int d = 0;
        for (int j = 0; j < n; ++j)
            if (j != i && g.A(i, j) + g.A(j, i) > 0.0) ++d;
        deg(i) = d;
        dmax = std::max(dmax, d);
    }
    if (dmax == 0) throw std::runtime_error("rank_centrality: graph has no comparisons");
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            double tot = g.A(i, j) + g.A(j, i);
            if (tot > 0.0) {
                P(i, j) = g.A(j, i) / (dmax * tot);
                off += P(i, j);
            }
        }
        P(i, i) = 1.0 - off;
    }
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / n);
    double resid = 0.0;
    int it = 0;
    for (; it < cfg.power_max_iter; ++it) {
        Eigen::VectorXd next = P.transpose() * pi;
        next /= next.lpNorm<1>();
        resid = (next - pi).lpNorm<1>();
        pi = next;
        if (resid < cfg.power_tol) break;
    }
    return BaselineResult{pi, resid, it + 1};
}

BaselineResult davids_score(const DiGraph& g, const BaselineConfig&) {
    const int n = g.n();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double tot = g.A(i, j) + g.A(j, i);
            if (i != j && tot > 0.0) P(i, j) = g.A(i, j) / tot;
        }
    Eigen::VectorXd w = P.rowwise().sum();
    Eigen::VectorXd l = P.colwise().sum();
    Eigen::VectorXd w2 = P * w;
    Eigen::VectorXd l2 = P.transpose() * l;
    return BaselineResult{w + w2 - l - l2, 0.0, 0};
}

BaselineResult btl(const DiGraph& g, const BaselineConfig& cfg) {
    const int n = g.n();
    Eigen::MatrixXd N = g.A + g.A.transpose();
    Eigen::VectorXd wins = g.A.rowwise().sum();
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
    double resid = 0.0;
    int it = 0;
    for (; it < cfg.btl_max_iter; ++it) {
        Eigen::VectorXd next(n);
        for (int i = 0; i < n; ++i) {
            double denom = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i && N(i, j) > 0.0) denom += N(i, j) / (w(i) + w(j));
            next(i) = denom > 0.0 ? wins(i) / denom : w(i);
        }
        double s = next.sum();
        if (s <= 0.0) throw std::runtime_error("btl: iteration collapsed");
        next /= s;
        resid = (next - w).cwiseAbs().maxCoeff();
        w = next;
        if (resid < cfg.btl_tol) break;
    }
    Eigen::VectorXd scores =
        w.unaryExpr([](double v) { return std::log(std::max(v, 1e-300)); });
    return BaselineResult{scores, resid, it + 1};
}

BaselineResult spring_rank(const DiGraph& g, const BaselineConfig& cfg) {
    Eigen::VectorXd dout = g.A.rowwise().sum();
    Eigen::VectorXd din = g.A.colwise().sum();
    Eigen::MatrixXd K = Eigen::MatrixXd((dout + din).asDiagonal()) - (g.A + g.A.transpose());
    K.diagonal().array() += cfg.spring_reg;
    Eigen::VectorXd b = dout - din;
    Eigen::VectorXd s = K.ldlt().solve(b);
    double resid = (K * s - b).norm();
    s.array() -= s.mean();
    return BaselineResult{s, resid, 0};
}

BaselineResult serial_rank(const DiGraph& g, const BaselineConfig&) {
    const int n = g.n();
    ComparisonMatrices cm = comparison_matrices(g);
    if (cm.C.cwiseAbs().maxCoeff() == 0.0)
        throw std::runtime_error("serial_rank: degenerate spectrum (no decisive comparisons)");
    SerialSimilarity sim = serialrank_similarity(g);
    Eigen::MatrixXd L = graph_laplacian(sim.Sprime);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    if (es.info() != Eigen::Success) throw std::runtime_error("serial_rank: eigensolver failed");
    const auto& ev = es.eigenvalues();
    double scale = std::max(1.0, std::abs(ev(n - 1)));
    if (n > 2 && ev(2) - ev(1) <= 1e-12 * scale)
        throw std::runtime_error("serial_rank: degenerate spectrum");
    Eigen::VectorXd fiedler = es.eigenvectors().col(1);
    double up_pos = upset_simple(cm, fiedler);
    double up_neg = upset_simple(cm, ScoreVector(-fiedler));
    Eigen::VectorXd scores = up_neg < up_pos ? ScoreVector(-fiedler) : fiedler;
    double resid = (L * scores - ev(1) * scores).norm();
    return BaselineResult{scores, resid, 0};
}

BaselineResult sync_rank(const DiGraph& g, const BaselineConfig&) {
    const int n = g.n();
    ComparisonMatrices cm = comparison_matrices(g);
    if (cm.t == 0) throw std::runtime_error("sync_rank: graph has no comparisons");
    const double theta = M_PI * static_cast<double>(n - 1) / static_cast<double>(n);
    Eigen::MatrixXd Re = Eigen::MatrixXd::Zero(n, n), Im = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && cm.support(i, j) != 0.0) {
                Re(i, j) = std::cos(theta * cm.C(i, j));
                Im(i, j) = std::sin(theta * cm.C(i, j));
            }
    Eigen::MatrixXd E(2 * n, 2 * n);
    E << Re, -Im, Im, Re;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E);
    if (es.info() != Eigen::Success) throw std::runtime_error("sync_rank: eigensolver failed");
    Eigen::VectorXd top = es.eigenvectors().col(2 * n - 1);
    Eigen::VectorXd x = top.head(n), y = top.tail(n);

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> angle(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) angle[static_cast<size_t>(i)] = std::atan2(y(i), x(i));
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return angle[static_cast<size_t>(a)] < angle[static_cast<size_t>(b)]; });

    // The eigenvector pins ranks only up to a cyclic rotation and direction;
    // pick the linearization with the fewest naive upsets.
    ScoreVector best_scores;
    double best_upset = std::numeric_limits<double>::infinity();
    for (int dir = 0; dir < 2; ++dir) {
        for (int rot = 0; rot < n; ++rot) {
            ScoreVector s(n);
            for (int pos = 0; pos < n; ++pos) {
                int node = order[static_cast<size_t>(dir == 0 ? (rot + pos) % n
                                                              : (rot + n - pos) % n)];
                s(node) = static_cast<double>(n - pos);
            }
            double u = upset_naive(cm, s);
            if (u < best_upset) {
                best_upset = u;
                best_scores = s;
            }
        }
    }
    double lambda = es.eigenvalues()(2 * n - 1);
    double resid = (E * top - lambda * top).norm();
    return BaselineResult{best_scores, resid, 0};
}

BaselineResult svd_rs(const DiGraph& g, const BaselineConfig&) {
    ComparisonMatrices cm = comparison_matrices(g);
    Eigen::MatrixXd rec = rank2_reconstruction(cm.Mprime);
    return BaselineResult{rec.rowwise().mean(), 0.0, 0};
}

BaselineResult svd_nrs(const DiGraph& g, const BaselineConfig& cfg) {
    ComparisonMatrices cm = comparison_matrices(g);
    Eigen::VectorXd deg = cm.support.rowwise().sum().cwiseMax(1.0);
    Eigen::MatrixXd normalized = deg.cwiseInverse().asDiagonal() * cm.Mprime;
    Eigen::MatrixXd rec = Eigen::MatrixXd(deg.asDiagonal()) * rank2_reconstruction(normalized);
    rec = 0.5 * (rec - rec.transpose());  // estimated offsets are skew by construction
    // Least-squares refit of scores to the reconstructed offsets on the
    // observed support.
    Eigen::MatrixXd LH = Eigen::MatrixXd(cm.support.rowwise().sum().asDiagonal()) - cm.support;
    LH.diagonal().array() += cfg.spring_reg;
    Eigen::VectorXd b = cm.support.cwiseProduct(rec).rowwise().sum();
    Eigen::VectorXd s = LH.ldlt().solve(b);
    double resid = (LH * s - b).norm();
    s.array() -= s.mean();
    return BaselineResult{s, resid, 0};
}

const std::vector<std::string>& baseline_names() {
    static const std::vector<std::string> names = {
        "pagerank",   "eigencentrality", "rankcentrality", "davidscore", "btl",
        "springrank", "serialrank",      "syncrank",       "svd_rs",     "svd_nrs"};
    return names;
}

BaselineResult run_baseline(const std::string& name, const DiGraph& g,
                            const BaselineConfig& cfg) {
    if (name == "pagerank") return pagerank(g, cfg);
    if (name == "eigencentrality") return eigenvector_centrality(g, cfg);
    if (name == "rankcentrality") return rank_centrality(g, cfg);
    if (name == "davidscore") return davids_score(g, cfg);
    if (name == "btl") return btl(g, cfg);
    if (name == "springrank") return spring_rank(g, cfg);
    if (name == "serialrank") return serial_rank(g, cfg);
    if (name == "syncrank") return sync_rank(g, cfg);
    if (name == "svd_rs") return svd_rs(g, cfg);
    if (name == "svd_nrs") return svd_nrs(g, cfg);
    if (name == "mvr") throw std::runtime_error("mvr is not implemented (out of scope)");
    throw std::runtime_error("unknown ranking method: " + name);
}

}  // namespace rankforge
