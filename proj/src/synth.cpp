#include "rankforge/synth.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "rankforge/io.hpp"
#include "rankforge/rng.hpp"

namespace rankforge {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

ScoreStyle score_style_from_string(const std::string& s) {
    if (s == "uniform") return ScoreStyle::Uniform;
    if (s == "gamma") return ScoreStyle::Gamma;
    throw std::invalid_argument("unknown score style: " + s);
}

std::string to_string(ScoreStyle s) {
    return s == ScoreStyle::Uniform ? "uniform" : "gamma";
}

EroSample generate_ero(const EroConfig& cfg) {
    if (cfg.n < 2) throw std::invalid_argument("ERO model needs n >= 2");
    if (cfg.p < 0.0 || cfg.p > 1.0) throw std::invalid_argument("p must be in [0, 1]");
    if (cfg.eta < 0.0 || cfg.eta > 1.0) throw std::invalid_argument("eta must be in [0, 1]");
    Rng rng(cfg.seed);

    Eigen::VectorXd s(cfg.n);
    for (int i = 0; i < cfg.n; ++i)
        s(i) = cfg.style == ScoreStyle::Uniform ? rng.uniform() : rng.gamma(0.5);
    const double range = s.maxCoeff() - s.minCoeff();

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(cfg.n, cfg.n);
    for (int i = 0; i < cfg.n; ++i) {
        for (int j = i + 1; j < cfg.n; ++j) {
            if (rng.uniform() >= cfg.p) continue;
            double m;
            if (rng.uniform() < cfg.eta)
                m = rng.uniform(-range, range);
            else
                m = s(i) - s(j);
            if (m > 0.0)
                A(i, j) += m;
            else if (m < 0.0)
                A(j, i) += -m;
        }
    }
    return EroSample{DiGraph::from_adjacency(std::move(A)), std::move(s)};
}

std::string run_sweep(const SweepConfig& cfg) {
    namespace fs = std::filesystem;
    if (cfg.out_dir.empty()) throw std::invalid_argument("sweep needs an output directory");
    fs::create_directories(cfg.out_dir);

    nlohmann::json manifest;
    manifest["n"] = cfg.n;
    manifest["seeds"] = cfg.seeds;
    manifest["cells"] = nlohmann::json::array();

    for (ScoreStyle style : cfg.styles) {
        for (double p : cfg.ps) {
            for (double eta : cfg.etas) {
                for (int rep = 0; rep < cfg.seeds; ++rep) {
                    EroConfig ec;
                    ec.n = cfg.n;
                    ec.p = p;
                    ec.eta = eta;
                    ec.style = style;
                    ec.seed = mix_seed(cfg.seed0 ^
                                       (static_cast<std::uint64_t>(rep) * 0x9e3779b97f4a7c15ull) ^
                                       fnv1a(to_string(style) + "/" + format_double(p) + "/" +
                                             format_double(eta)));
                    EroSample sample = generate_ero(ec);

                    std::string stem = to_string(style) + "_p" + format_double(p) + "_eta" +
                                       format_double(eta) + "_r" + std::to_string(rep);
                    std::string graph_path = (fs::path(cfg.out_dir) / (stem + ".tsv")).string();
                    std::string truth_path =
                        (fs::path(cfg.out_dir) / (stem + ".truth.tsv")).string();
                    write_edge_list(sample.graph, graph_path);
                    write_truth_tsv(truth_path, sample.truth);

                    nlohmann::json cell;
                    cell["style"] = to_string(style);
                    cell["p"] = p;
                    cell["eta"] = eta;
                    cell["rep"] = rep;
                    cell["seed"] = ec.seed;
                    cell["graph"] = stem + ".tsv";
                    cell["truth"] = stem + ".truth.tsv";
                    manifest["cells"].push_back(cell);
                }
            }
        }
    }

    std::string manifest_path = (fs::path(cfg.out_dir) / "manifest.json").string();
    std::ofstream out(manifest_path);
    if (!out) throw std::runtime_error("cannot write manifest: " + manifest_path);
    out << manifest.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing manifest: " + manifest_path);
    return manifest_path;
}

}  // namespace rankforge
