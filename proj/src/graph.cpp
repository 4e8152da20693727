#include "rankforge/graph.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rankforge/io.hpp"
#include "rankforge/rng.hpp"

namespace rankforge {

std::string DiGraph::label(int i) const {
    if (!labels.empty()) return labels[static_cast<size_t>(i)];
    return std::to_string(i);
}

DiGraph DiGraph::from_adjacency(Eigen::MatrixXd A, std::vector<std::string> labels) {
    if (A.rows() < 1 || A.rows() != A.cols())
        throw std::invalid_argument("adjacency must be square with n >= 1");
    if (!A.allFinite()) throw std::invalid_argument("adjacency has non-finite entries");
    if (A.minCoeff() < 0.0) throw std::invalid_argument("adjacency has negative entries");
    for (long i = 0; i < A.rows(); ++i)
        if (A(i, i) != 0.0) throw std::invalid_argument("adjacency has a nonzero diagonal entry");
    if (!labels.empty() && static_cast<long>(labels.size()) != A.rows())
        throw std::invalid_argument("label count does not match node count");
    return DiGraph{std::move(A), std::move(labels)};
}

namespace {

struct RawEdge {
    std::string src, dst;
    double w;
    long row;
};

bool parse_index(const std::string& tok, long& out) {
    if (tok.empty()) return false;
    char* end = nullptr;
    errno = 0;
    long v = std::strtol(tok.c_str(), &end, 10);
    if (errno != 0 || end != tok.c_str() + tok.size() || v < 0) return false;
    out = v;
    return true;
}

}  // namespace

DiGraph load_edge_list(const std::string& path, std::optional<double> finer_offset) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list: " + path);

    std::vector<RawEdge> edges;
    std::string line;
    long row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string src, dst, wtok, extra;
        if (!(ss >> src >> dst >> wtok) || (ss >> extra))
            throw std::runtime_error(path + ": malformed row " + std::to_string(row));
        char* end = nullptr;
        errno = 0;
        double w = std::strtod(wtok.c_str(), &end);
        if (errno != 0 || end != wtok.c_str() + wtok.size() || !std::isfinite(w))
            throw std::runtime_error(path + ": malformed weight at row " + std::to_string(row));
        if (w < 0.0)
            throw std::runtime_error(path + ": negative weight at row " + std::to_string(row));
        if (src == dst) {
            if (w != 0.0)
                throw std::runtime_error(path + ": self-loop with nonzero weight at row " +
                                         std::to_string(row));
            continue;
        }
        edges.push_back(RawEdge{std::move(src), std::move(dst), w, row});
    }
    if (edges.empty()) throw std::runtime_error(path + ": no edges");

    bool all_indices = true;
    long max_index = -1;
    for (const auto& e : edges) {
        long a, b;
        if (!parse_index(e.src, a) || !parse_index(e.dst, b)) {
            all_indices = false;
            break;
        }
        max_index = std::max({max_index, a, b});
    }

    std::vector<std::string> labels;
    std::map<std::string, int> index_of;
    int n;
    if (all_indices) {
        n = static_cast<int>(max_index + 1);
    } else {
        for (const auto& e : edges) {
            for (const std::string* tok : {&e.src, &e.dst})
                if (index_of.emplace(*tok, static_cast<int>(labels.size())).second)
                    labels.push_back(*tok);
        }
        n = static_cast<int>(labels.size());
    }

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    std::set<std::pair<int, int>> present;
    for (const auto& e : edges) {
        int i, j;
        if (all_indices) {
            long a = 0, b = 0;
            parse_index(e.src, a);
            parse_index(e.dst, b);
            i = static_cast<int>(a);
            j = static_cast<int>(b);
        } else {
            i = index_of[e.src];
            j = index_of[e.dst];
        }
        A(i, j) += e.w;
        present.emplace(i, j);
    }
    if (finer_offset) {
        for (const auto& [i, j] : present) A(i, j) += *finer_offset;
    }
    return DiGraph::from_adjacency(std::move(A), std::move(labels));
}

void write_edge_list(const DiGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write edge list: " + path);
    for (int i = 0; i < g.n(); ++i)
        for (int j = 0; j < g.n(); ++j)
            if (g.A(i, j) != 0.0)
                out << g.label(i) << '\t' << g.label(j) << '\t' << format_double(g.A(i, j))
                    << '\n';
    if (!out) throw std::runtime_error("failed writing edge list: " + path);
}

ComparisonMatrices comparison_matrices(const DiGraph& g) {
    const int n = g.n();
    ComparisonMatrices cm;
    cm.Mprime = g.A - g.A.transpose();
    cm.M = Eigen::MatrixXd::Zero(n, n);
    cm.C = Eigen::MatrixXd::Zero(n, n);
    cm.support = Eigen::MatrixXd::Zero(n, n);
    cm.t = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double total = g.A(i, j) + g.A(j, i);
            if (total > 0.0) {
                ++cm.t;
                cm.support(i, j) = 1.0;
                cm.M(i, j) = cm.Mprime(i, j) / total;
            }
            double d = cm.Mprime(i, j);
            cm.C(i, j) = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        }
    }
    return cm;
}

SerialSimilarity serialrank_similarity(const DiGraph& g) {
    const int n = g.n();
    ComparisonMatrices cm = comparison_matrices(g);
    SerialSimilarity s;
    s.Sprime = 0.5 * (static_cast<double>(n) * Eigen::MatrixXd::Ones(n, n) +
                      cm.C * cm.C.transpose());
    s.SprimeNorm = s.Sprime / s.Sprime.maxCoeff();
    return s;
}

Eigen::MatrixXd graph_laplacian(const Eigen::MatrixXd& S) {
    if (S.rows() != S.cols()) throw std::invalid_argument("similarity must be square");
    if (!S.allFinite()) throw std::invalid_argument("similarity has non-finite entries");
    if (S.minCoeff() < 0.0) throw std::invalid_argument("similarity has negative entries");
    double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw std::invalid_argument("similarity not symmetric");
    return Eigen::MatrixXd(S.rowwise().sum().asDiagonal()) - S;
}

namespace {

// Matrix-vector product with B = [[0, -W], [W, 0]], the real symmetric
// embedding of i W for skew-symmetric W.
Eigen::VectorXd embedding_mul(const Eigen::MatrixXd& W, const Eigen::VectorXd& v) {
    const long n = W.rows();
    Eigen::VectorXd out(2 * n);
    out.head(n) = -W * v.tail(n);
    out.tail(n) = W * v.head(n);
    return out;
}

void project_out(Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& basis) {
    for (const auto& u : basis) v -= u.dot(v) * u;
}

}  // namespace

Eigen::MatrixXd hermitian_features(const DiGraph& g, int k,
                                   std::vector<std::string>* warnings) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    const int n = g.n();
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, 2 * k);
    int k_eff = std::min(k, n / 2);
    if (2 * k > n && warnings)
        warnings->push_back("feature request 2k = " + std::to_string(2 * k) + " exceeds n = " +
                            std::to_string(n) + "; trailing columns zero-padded");

    Eigen::MatrixXd W = g.A - g.A.transpose();
    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, W.row(i).cwiseAbs().sum());
    if (scale == 0.0 || k_eff == 0) return X;  // symmetric comparisons carry no phase signal

    const double tol = 1e-10;
    const int max_iter = 10000;
    const double shift = scale;
    std::vector<Eigen::VectorXd> basis;  // found eigenvectors and their i-rotated twins

    for (int idx = 0; idx < k_eff; ++idx) {
        Rng rng(mix_seed(0x48464541u + static_cast<std::uint64_t>(idx)));
        Eigen::VectorXd v(2 * n);
        for (long i = 0; i < 2 * n; ++i) v(i) = rng.normal();
        project_out(v, basis);
        v.normalize();

        bool converged = false;
        for (int it = 0; it < max_iter; ++it) {
            Eigen::VectorXd w = embedding_mul(W, v) + shift * v;
            project_out(w, basis);
            double norm = w.norm();
            if (norm == 0.0) {
                for (long i = 0; i < 2 * n; ++i) w(i) = rng.normal();
                project_out(w, basis);
                norm = w.norm();
            }
            w /= norm;
            if ((w - v).cwiseAbs().maxCoeff() <= tol) {
                v = w;
                converged = true;
                break;
            }
            v = w;
        }
        double lambda = v.dot(embedding_mul(W, v));
        if (!converged && warnings)
            warnings->push_back("hermitian feature " + std::to_string(idx) +
                                ": power iteration hit the iteration cap");

        if (lambda <= 1e-8 * scale) break;  // remaining spectrum is numerically zero

        // Complex eigenvector v_c = x + i y; fix the phase so the largest
        // entry is real positive, making features reproducible.
        Eigen::VectorXd x = v.head(n), y = v.tail(n);
        int kmax = 0;
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
            double m = x(i) * x(i) + y(i) * y(i);
            if (m > best) {
                best = m;
                kmax = i;
            }
        }
        double mod = std::sqrt(best);
        double pr = x(kmax) / mod, pi = -y(kmax) / mod;  // conj(v_k) / |v_k|
        Eigen::VectorXd re = pr * x - pi * y;
        Eigen::VectorXd im = pr * y + pi * x;
        X.col(2 * idx) = re;
        X.col(2 * idx + 1) = im;

        Eigen::VectorXd twin(2 * n);
        twin.head(n) = -v.tail(n);
        twin.tail(n) = v.head(n);
        basis.push_back(v);
        basis.push_back(twin.normalized());
    }
    return X;
}

}  // namespace rankforge
