#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rankforge/io.hpp"
#include "rankforge/model.hpp"
#include "rankforge/synth.hpp"

namespace py = pybind11;
using namespace rankforge;

namespace {

ScoreTransform transform_arg(const std::string& s) {
    if (s == "sigmoid") return ScoreTransform::Sigmoid;
    if (s == "none") return ScoreTransform::None;
    if (s == "affine_half") return ScoreTransform::AffineHalf;
    throw std::invalid_argument("unknown transform: " + s);
}

VariantSpec make_spec(const std::string& variant, const std::string& loss,
                      const std::string& pretrain, const std::string& baseline, int k, int d,
                      int hidden, int gamma, double alpha_init, bool freeze_alpha) {
    VariantSpec spec;
    spec.variant = variant_from_string(variant);
    spec.loss = loss_mode_from_string(loss);
    spec.pretrain = pretrain_mode_from_string(pretrain);
    spec.baseline = baseline;
    spec.k = k;
    spec.d = d;
    spec.hidden = hidden;
    spec.gamma = gamma;
    spec.alpha_init = alpha_init;
    spec.freeze_alpha = freeze_alpha;
    return spec;
}

py::dict report_to_dict(const TrainReport& rep) {
    py::dict out;
    out["scores"] = Eigen::VectorXd(rep.scores);
    out["selected_epoch"] = rep.selected_epoch;
    out["final_loss"] = rep.final_loss;
    out["wall_seconds"] = rep.wall_seconds;
    out["warnings"] = rep.warnings;
    py::list hist;
    for (const EpochRecord& e : rep.history) {
        py::dict he;
        he["epoch"] = e.epoch;
        he["pretrain"] = e.pretrain;
        he["loss"] = e.loss;
        he["upset_simple"] = e.upset_simple;
        he["upset_naive"] = e.upset_naive;
        he["upset_ratio"] = e.upset_ratio;
        hist.append(he);
    }
    out["history"] = hist;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "ranking recovery from pairwise-comparison digraphs";

    m.def(
        "load_edge_list",
        [](const std::string& path, std::optional<double> finer_offset) {
            DiGraph g = load_edge_list(path, finer_offset);
            std::vector<std::string> labels;
            for (int i = 0; i < g.n(); ++i) labels.push_back(g.label(i));
            return py::make_tuple(g.A, labels);
        },
        py::arg("path"), py::arg("finer_offset") = std::nullopt,
        "Read a tab-separated edge list; returns (adjacency, labels).");

    m.def(
        "write_edge_list",
        [](const Eigen::MatrixXd& A, const std::string& path) {
            write_edge_list(DiGraph::from_adjacency(A), path);
        },
        py::arg("adjacency"), py::arg("path"));

    m.def(
        "generate_ero",
        [](int n, double p, double eta, const std::string& style, std::uint64_t seed) {
            EroConfig cfg;
            cfg.n = n;
            cfg.p = p;
            cfg.eta = eta;
            cfg.style = score_style_from_string(style);
            cfg.seed = seed;
            EroSample s = generate_ero(cfg);
            return py::make_tuple(s.graph.A, s.truth);
        },
        py::arg("n"), py::arg("p") = 1.0, py::arg("eta") = 0.0, py::arg("style") = "uniform",
        py::arg("seed") = 0,
        "Sample an Erdos-Renyi-outliers comparison graph; returns (adjacency, truth).");

    m.def("baseline_names", []() { return baseline_names(); });

    m.def(
        "run_baseline",
        [](const std::string& name, const Eigen::MatrixXd& A) {
            return run_baseline(name, DiGraph::from_adjacency(A)).scores;
        },
        py::arg("method"), py::arg("adjacency"));

    m.def(
        "hermitian_features",
        [](const Eigen::MatrixXd& A, int k) {
            return hermitian_features(DiGraph::from_adjacency(A), k, nullptr);
        },
        py::arg("adjacency"), py::arg("k") = 5);

    m.def(
        "proximal_steps",
        [](const Eigen::VectorXd& r0, const Eigen::MatrixXd& L, const Eigen::VectorXd& alphas) {
            OrthogonalReducer q(static_cast<int>(r0.size()));
            return proximal_steps(r0, L, q, alphas, nullptr);
        },
        py::arg("r0"), py::arg("laplacian"), py::arg("alphas"),
        "Refine an initial guess toward the Fiedler vector on the unit sphere.");

    m.def(
        "upset_simple",
        [](const Eigen::MatrixXd& A, const Eigen::VectorXd& scores) {
            return upset_simple(comparison_matrices(DiGraph::from_adjacency(A)), scores);
        },
        py::arg("adjacency"), py::arg("scores"));

    m.def(
        "upset_naive",
        [](const Eigen::MatrixXd& A, const Eigen::VectorXd& scores) {
            return upset_naive(comparison_matrices(DiGraph::from_adjacency(A)), scores);
        },
        py::arg("adjacency"), py::arg("scores"));

    m.def(
        "upset_ratio",
        [](const Eigen::MatrixXd& A, const Eigen::VectorXd& scores,
           const std::string& transform) {
            MetricConfig mc;
            mc.transform = transform_arg(transform);
            return upset_ratio(comparison_matrices(DiGraph::from_adjacency(A)), scores, mc);
        },
        py::arg("adjacency"), py::arg("scores"), py::arg("transform") = "sigmoid");

    m.def(
        "kendall_tau",
        [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return kendall_tau(a, b); },
        py::arg("a"), py::arg("b"), "Tau-b rank correlation of two score vectors.");

    m.def(
        "train",
        [](const Eigen::MatrixXd& A, const std::string& variant, const std::string& loss,
           const std::string& pretrain, const std::string& baseline, int k, int d, int hidden,
           int gamma, double alpha_init, bool freeze_alpha, int epochs, int patience,
           int pretrain_epochs, double lr, double weight_decay, const std::string& selection,
           std::uint64_t seed, std::optional<std::string> checkpoint) {
            VariantSpec spec = make_spec(variant, loss, pretrain, baseline, k, d, hidden, gamma,
                                         alpha_init, freeze_alpha);
            TrainConfig cfg;
            cfg.max_epochs = epochs;
            cfg.patience = patience;
            cfg.pretrain_epochs = pretrain_epochs;
            cfg.lr = lr;
            cfg.weight_decay = weight_decay;
            cfg.selection = selection;
            cfg.seed = seed;
            TrainedModel tm = train(DiGraph::from_adjacency(A), spec, cfg);
            if (checkpoint) save_checkpoint(tm, *checkpoint);
            return report_to_dict(tm.report);
        },
        py::arg("adjacency"), py::arg("variant") = "proximal_dist", py::arg("loss") = "ratio",
        py::arg("pretrain") = "serialrank_similarity", py::arg("baseline") = "", py::arg("k") = 5,
        py::arg("d") = 16, py::arg("hidden") = 0, py::arg("gamma") = 5,
        py::arg("alpha_init") = 0.0, py::arg("freeze_alpha") = false, py::arg("epochs") = 1000,
        py::arg("patience") = 200, py::arg("pretrain_epochs") = 50, py::arg("lr") = 0.01,
        py::arg("weight_decay") = 5e-4, py::arg("selection") = "upset_simple",
        py::arg("seed") = 0, py::arg("checkpoint") = std::nullopt,
        "Fit a ranking model; returns the training report as a dict.");

    m.def(
        "apply_checkpoint",
        [](const std::string& path, const Eigen::MatrixXd& A) {
            TrainedModel tm = load_checkpoint(path);
            return apply_model(tm.state, tm.spec, DiGraph::from_adjacency(A));
        },
        py::arg("path"), py::arg("adjacency"),
        "Apply a trained checkpoint to a (possibly new) comparison graph.");
}
