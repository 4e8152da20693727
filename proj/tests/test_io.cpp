#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "rankforge/io.hpp"

using namespace rankforge;
using namespace rankforge::testutil;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("rf_io_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.0, -0.0, 0.1, 1.0 / 3.0, -2.5e-7, 1e300, 12345.678901234567}) {
        std::string s = format_double(v);
        CHECK(std::stod(s) == v);
        CHECK(s.find(' ') == std::string::npos);
    }
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("scores tsv round trip with labels and ranks") {
    DiGraph g = transitive_tournament(3);
    g.labels = {"x", "y", "z"};
    ScoreVector s(3);
    s << 0.25, 1.0 / 3.0, -1.5;
    TempFile f("scores.tsv");
    write_scores_tsv(f.path, g, s);

    std::string content = read_text_file(f.path);
    CHECK(content == "x\t0.25\t2\ny\t" + format_double(1.0 / 3.0) + "\t1\nz\t-1.5\t3\n");

    std::vector<std::string> labels;
    ScoreVector back = read_scores_tsv(f.path, &labels);
    CHECK(max_abs_diff(back, s) == 0.0);
    CHECK(labels == g.labels);

    ScoreVector wrong(2);
    wrong << 1, 2;
    CHECK_THROWS_WITH(write_scores_tsv(f.path, g, wrong), doctest::Contains("length"));
}

TEST_CASE("truth tsv round trip") {
    Eigen::VectorXd t(4);
    t << 0.9, 0.1, 1.0 / 7.0, 2e-5;
    TempFile f("truth.tsv");
    write_truth_tsv(f.path, t);
    CHECK(max_abs_diff(read_truth_tsv(f.path), t) == 0.0);
}

TEST_CASE("tsv read errors") {
    CHECK_THROWS_WITH(read_truth_tsv("missing_file.tsv"), doctest::Contains("cannot open"));
    TempFile f("bad.tsv");
    write_text_file(f.path, "0\n");
    CHECK_THROWS_WITH(read_truth_tsv(f.path), doctest::Contains("malformed row 1"));
    write_text_file(f.path, "0\tnot_a_number\n");
    CHECK_THROWS_WITH(read_truth_tsv(f.path), doctest::Contains("bad numeric field"));
}

TEST_CASE("metrics csv bytes") {
    TempFile f("metrics.csv");
    write_metrics_csv(f.path, {{"serialrank", "kendall_tau", 0.5, 3}, {"btl", "upset_naive", 0.0, 0}});
    CHECK(read_text_file(f.path) ==
          "method,metric,value,seed\nserialrank,kendall_tau,0.5,3\nbtl,upset_naive,0,0\n");
}
