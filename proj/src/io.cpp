#include "rankforge/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rankforge {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_scores_tsv(const std::string& path, const DiGraph& g, const ScoreVector& scores) {
    if (scores.size() != g.n()) throw std::invalid_argument("score length does not match graph");
    Ranking ranks = scores_to_ranks(scores);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scores: " + path);
    for (int i = 0; i < g.n(); ++i)
        out << g.label(i) << '\t' << format_double(scores(i)) << '\t' << ranks[static_cast<size_t>(i)]
            << '\n';
    if (!out) throw std::runtime_error("failed writing scores: " + path);
}

void write_truth_tsv(const std::string& path, const Eigen::VectorXd& truth) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write truth: " + path);
    for (long i = 0; i < truth.size(); ++i)
        out << i << '\t' << format_double(truth(i)) << '\n';
    if (!out) throw std::runtime_error("failed writing truth: " + path);
}

namespace {

std::vector<std::vector<std::string>> read_tsv_rows(const std::string& path, size_t min_cols) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    long rowno = 0;
    while (std::getline(in, line)) {
        ++rowno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::vector<std::string> cols;
        std::string tok;
        while (ss >> tok) cols.push_back(tok);
        if (cols.size() < min_cols)
            throw std::runtime_error(path + ": malformed row " + std::to_string(rowno));
        rows.push_back(std::move(cols));
    }
    return rows;
}

double parse_double(const std::string& s, const std::string& path) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path + ": bad numeric field '" + s + "'");
    }
}

}  // namespace

Eigen::VectorXd read_truth_tsv(const std::string& path) {
    auto rows = read_tsv_rows(path, 2);
    Eigen::VectorXd v(static_cast<long>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) v(static_cast<long>(i)) = parse_double(rows[i][1], path);
    return v;
}

ScoreVector read_scores_tsv(const std::string& path, std::vector<std::string>* labels) {
    auto rows = read_tsv_rows(path, 2);
    ScoreVector v(static_cast<long>(rows.size()));
    if (labels) labels->clear();
    for (size_t i = 0; i < rows.size(); ++i) {
        v(static_cast<long>(i)) = parse_double(rows[i][1], path);
        if (labels) labels->push_back(rows[i][0]);
    }
    return v;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write metrics: " + path);
    out << "method,metric,value,seed\n";
    for (const auto& r : rows)
        out << r.method << ',' << r.metric << ',' << format_double(r.value) << ',' << r.seed
            << '\n';
    if (!out) throw std::runtime_error("failed writing metrics: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing file: " + path);
}

}  // namespace rankforge
