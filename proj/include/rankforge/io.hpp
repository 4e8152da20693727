#pragma once

#include <string>
#include <vector>

#include "rankforge/metrics.hpp"

namespace rankforge {

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

/// node <TAB> score <TAB> rank, one row per node.
void write_scores_tsv(const std::string& path, const DiGraph& g, const ScoreVector& scores);

/// node <TAB> score.
void write_truth_tsv(const std::string& path, const Eigen::VectorXd& truth);
Eigen::VectorXd read_truth_tsv(const std::string& path);

/// Reads the score column of a scores TSV (ranks are recomputed on demand);
/// optionally also returns the node labels.
ScoreVector read_scores_tsv(const std::string& path, std::vector<std::string>* labels = nullptr);

struct MetricRow {
    std::string method;
    std::string metric;
    double value = 0.0;
    long seed = 0;
};

/// method,metric,value,seed with a header row.
void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace rankforge
