#pragma once

#include <cstdint>

#include "rankforge/graph.hpp"

namespace rankforge {

enum class ScoreStyle { Uniform, Gamma };

ScoreStyle score_style_from_string(const std::string& s);
std::string to_string(ScoreStyle s);

/// Erdos-Renyi outliers model: planted scores s, each unordered pair sampled
/// with density p, the measurement is the true offset s_i - s_j with
/// probability 1 - eta and otherwise an outlier uniform on the score range;
/// the positive direction of the measurement becomes a directed edge weight.
struct EroConfig {
    int n = 350;
    double p = 1.0;
    double eta = 0.0;
    ScoreStyle style = ScoreStyle::Uniform;
    std::uint64_t seed = 0;
};

struct EroSample {
    DiGraph graph;
    Eigen::VectorXd truth;
};

EroSample generate_ero(const EroConfig& cfg);

struct SweepConfig {
    int n = 350;
    std::vector<double> ps{1.0};
    std::vector<double> etas{0.0};
    std::vector<ScoreStyle> styles{ScoreStyle::Uniform};
    int seeds = 10;
    std::uint64_t seed0 = 0;
    std::string out_dir;
};

/// Generates every (p, eta, style, seed) cell, writes edge lists and
/// ground-truth score files, and returns the path of the JSON manifest
/// describing them.
std::string run_sweep(const SweepConfig& cfg);

}  // namespace rankforge
