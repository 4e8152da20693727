#include "rankforge/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "rankforge/io.hpp"
#include "rankforge/model.hpp"
#include "rankforge/rng.hpp"
#include "rankforge/synth.hpp"

namespace rankforge::cli {

namespace {

int thread_budget(size_t tasks) {
    unsigned hw = std::thread::hardware_concurrency();
    int cap = hw > 0 ? static_cast<int>(hw) : 1;
    if (const char* env = std::getenv("RANKFORGE_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) cap = static_cast<int>(v);
    }
    return std::max(1, std::min<int>(cap, static_cast<int>(tasks)));
}

/// Runs tasks on a small pool; results land in pre-assigned slots so output
/// order never depends on scheduling.
void run_parallel(const std::vector<std::function<void()>>& tasks) {
    if (tasks.empty()) return;
    const int workers = thread_budget(tasks.size());
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(tasks.size());
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                tasks[i]();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

ScoreTransform transform_from_string(const std::string& s) {
    if (s == "sigmoid") return ScoreTransform::Sigmoid;
    if (s == "none") return ScoreTransform::None;
    if (s == "affine_half") return ScoreTransform::AffineHalf;
    throw std::invalid_argument("unknown transform: " + s);
}

std::vector<MetricRow> score_metrics(const std::string& method, const DiGraph& g,
                                     const ScoreVector& scores, ScoreTransform transform,
                                     const std::optional<Eigen::VectorXd>& truth, long seed) {
    ComparisonMatrices cm = comparison_matrices(g);
    MetricConfig mc;
    mc.transform = transform;
    std::vector<MetricRow> rows;
    rows.push_back({method, "upset_simple", upset_simple(cm, scores), seed});
    rows.push_back({method, "upset_naive", upset_naive(cm, scores), seed});
    rows.push_back({method, "upset_ratio", upset_ratio(cm, scores, mc), seed});
    if (truth) {
        if (truth->size() != g.n())
            throw std::runtime_error("truth length does not match the graph");
        rows.push_back({method, "kendall_tau", kendall_tau(scores, *truth), seed});
    }
    return rows;
}

struct TrainFlags {
    std::string variant = "proximal_dist";
    std::string baseline;
    std::string loss = "ratio";
    std::string pretrain = "serialrank";
    std::string selection = "upset_simple";
    int epochs = 1000;
    int patience = 200;
    int pretrain_epochs = 50;
    double lr = 0.01;
    double weight_decay = 5e-4;
    int k = 5;
    int d = 16;
    int hidden = 0;
    int gamma = 5;
    double alpha_init = 0.0;
    bool freeze_alpha = false;
    std::uint64_t seed = 0;
};

void add_train_flags(CLI::App* cmd, TrainFlags& tf, bool variants_repeatable,
                     std::vector<std::string>* variants) {
    if (variants_repeatable)
        cmd->add_option("--variant", *variants, "model variants to train and report");
    else
        cmd->add_option("--variant", tf.variant, "model variant");
    cmd->add_option("--baseline", tf.baseline, "initial-guess method for proximal_baseline");
    cmd->add_option("--loss", tf.loss, "training loss: ratio, margin or sum");
    cmd->add_option("--pretrain", tf.pretrain, "pretraining mode: warmup, serialrank or none");
    cmd->add_option("--selection", tf.selection, "epoch selection metric");
    cmd->add_option("--epochs", tf.epochs, "main-phase epoch cap");
    cmd->add_option("--patience", tf.patience, "early-stopping patience");
    cmd->add_option("--pretrain-epochs", tf.pretrain_epochs, "pretraining epochs");
    cmd->add_option("--lr", tf.lr, "Adam learning rate (proximal main phase uses 10x SGD)");
    cmd->add_option("--weight-decay", tf.weight_decay, "l2 weight decay");
    cmd->add_option("--k", tf.k, "spectral feature pairs");
    cmd->add_option("--d", tf.d, "embedding dimension");
    cmd->add_option("--hidden", tf.hidden, "hidden width per direction (0: 2*d)");
    cmd->add_option("--gamma", tf.gamma, "unfolded proximal steps");
    cmd->add_option("--alpha-init", tf.alpha_init, "step-size init (0: 1/(n-1))");
    cmd->add_flag("--freeze-alpha", tf.freeze_alpha, "keep step sizes fixed");
    cmd->add_option("--seed", tf.seed, "rng seed");
}

VariantSpec spec_from_flags(const TrainFlags& tf, const std::string& variant_name) {
    VariantSpec spec;
    spec.variant = variant_from_string(variant_name);
    spec.loss = loss_mode_from_string(tf.loss);
    spec.pretrain = pretrain_mode_from_string(tf.pretrain);
    if (spec.variant == Variant::ProximalBaseline && tf.baseline.empty())
        throw CLI::ValidationError("--baseline is required for proximal_baseline");
    if (spec.variant != Variant::ProximalBaseline && !tf.baseline.empty())
        throw CLI::ValidationError("--baseline is only valid with proximal_baseline");
    spec.baseline = tf.baseline;
    spec.k = tf.k;
    spec.d = tf.d;
    spec.hidden = tf.hidden;
    spec.gamma = tf.gamma;
    spec.alpha_init = tf.alpha_init;
    spec.freeze_alpha = tf.freeze_alpha;
    return spec;
}

TrainConfig config_from_flags(const TrainFlags& tf) {
    TrainConfig cfg;
    cfg.max_epochs = tf.epochs;
    cfg.patience = tf.patience;
    cfg.pretrain_epochs = tf.pretrain_epochs;
    cfg.lr = tf.lr;
    cfg.weight_decay = tf.weight_decay;
    cfg.selection = tf.selection;
    cfg.seed = tf.seed;
    return cfg;
}

// ---- generate ----

struct GenerateArgs {
    int n = 350;
    std::vector<double> ps;
    std::vector<double> etas;
    std::vector<std::string> styles;
    std::uint64_t seed = 0;
    int reps = 10;
    std::string graph_path, truth_path, sweep_dir;
};

void cmd_generate(const GenerateArgs& a) {
    std::vector<double> ps = a.ps.empty() ? std::vector<double>{1.0} : a.ps;
    std::vector<double> etas = a.etas.empty() ? std::vector<double>{0.0} : a.etas;
    std::vector<ScoreStyle> styles;
    for (const std::string& s : a.styles.empty() ? std::vector<std::string>{"uniform"} : a.styles)
        styles.push_back(score_style_from_string(s));

    if (!a.sweep_dir.empty()) {
        SweepConfig sc;
        sc.n = a.n;
        sc.ps = ps;
        sc.etas = etas;
        sc.styles = styles;
        sc.seeds = a.reps;
        sc.seed0 = a.seed;
        sc.out_dir = a.sweep_dir;
        std::cout << run_sweep(sc) << "\n";
        return;
    }
    EroConfig ec;
    ec.n = a.n;
    ec.p = ps.front();
    ec.eta = etas.front();
    ec.style = styles.front();
    ec.seed = a.seed;
    EroSample sample = generate_ero(ec);
    write_edge_list(sample.graph, a.graph_path);
    if (!a.truth_path.empty()) write_truth_tsv(a.truth_path, sample.truth);
    std::cout << "wrote " << a.graph_path << "\n";
}

// ---- rank ----

struct RankArgs {
    std::string graph_path, method, checkpoint, scores_path, metrics_path, truth_path;
    std::string transform;  // empty: per-source default
    std::optional<double> finer_offset;
    long seed = 0;
};

void cmd_rank(const RankArgs& a) {
    DiGraph g = load_edge_list(a.graph_path, a.finer_offset);
    ScoreVector scores;
    std::string method_name;
    bool proximal_output = false;
    if (!a.checkpoint.empty()) {
        TrainedModel tm = load_checkpoint(a.checkpoint);
        scores = apply_model(tm.state, tm.spec, g);
        method_name = to_string(tm.spec.variant);
        proximal_output = tm.spec.proximal();
    } else {
        scores = run_baseline(a.method, g).scores;
        method_name = a.method;
    }
    write_scores_tsv(a.scores_path, g, scores);
    if (!a.metrics_path.empty()) {
        ScoreTransform tr = a.transform.empty()
                                ? (proximal_output ? ScoreTransform::AffineHalf
                                                   : ScoreTransform::Sigmoid)
                                : transform_from_string(a.transform);
        std::optional<Eigen::VectorXd> truth;
        if (!a.truth_path.empty()) truth = read_truth_tsv(a.truth_path);
        write_metrics_csv(a.metrics_path,
                          score_metrics(method_name, g, scores, tr, truth, a.seed));
    }
}

// ---- train ----

struct TrainArgs {
    TrainFlags tf;
    std::string graph_path, checkpoint, scores_path, metrics_path, truth_path;
    std::optional<double> finer_offset;
};

void cmd_train(const TrainArgs& a) {
    DiGraph g = load_edge_list(a.graph_path, a.finer_offset);
    VariantSpec spec = spec_from_flags(a.tf, a.tf.variant);
    TrainConfig cfg = config_from_flags(a.tf);
    TrainedModel tm = train(g, spec, cfg);
    save_checkpoint(tm, a.checkpoint);
    if (!a.scores_path.empty()) write_scores_tsv(a.scores_path, g, tm.report.scores);
    if (!a.metrics_path.empty()) {
        std::optional<Eigen::VectorXd> truth;
        if (!a.truth_path.empty()) truth = read_truth_tsv(a.truth_path);
        ScoreTransform tr =
            spec.proximal() ? ScoreTransform::AffineHalf : ScoreTransform::Sigmoid;
        write_metrics_csv(a.metrics_path,
                          score_metrics(to_string(spec.variant), g, tm.report.scores, tr, truth,
                                        static_cast<long>(a.tf.seed)));
    }
    // Wall time goes to stdout only; files stay byte-stable across runs.
    std::cout << "selected epoch " << tm.report.selected_epoch << " (loss "
              << format_double(tm.report.final_loss) << ") in "
              << format_double(tm.report.wall_seconds) << "s over "
              << tm.report.history.size() << " epochs\n";
    for (const std::string& w : tm.report.warnings) std::cerr << "warning: " << w << "\n";
}

// ---- eval ----

struct EvalArgs {
    std::string scores_path, graph_path, truth_path, metrics_path;
    std::string transform = "sigmoid";
    std::optional<double> finer_offset;
    long seed = 0;
};

void cmd_eval(const EvalArgs& a) {
    DiGraph g = load_edge_list(a.graph_path, a.finer_offset);
    std::vector<std::string> labels;
    ScoreVector file_scores = read_scores_tsv(a.scores_path, &labels);
    std::map<std::string, double> by_label;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (!by_label.emplace(labels[i], file_scores(static_cast<long>(i))).second)
            throw std::runtime_error("duplicate node '" + labels[i] + "' in " + a.scores_path);
    }
    if (static_cast<int>(by_label.size()) != g.n())
        throw std::runtime_error("node sets differ between scores and graph");
    ScoreVector scores(g.n());
    for (int i = 0; i < g.n(); ++i) {
        auto it = by_label.find(g.label(i));
        if (it == by_label.end())
            throw std::runtime_error("node '" + g.label(i) + "' missing from " + a.scores_path);
        scores(i) = it->second;
    }
    std::optional<Eigen::VectorXd> truth;
    if (!a.truth_path.empty()) truth = read_truth_tsv(a.truth_path);
    std::string stem = std::filesystem::path(a.scores_path).stem().string();
    write_metrics_csv(a.metrics_path, score_metrics(stem, g, scores,
                                                    transform_from_string(a.transform), truth,
                                                    a.seed));
}

// ---- report ----

struct ReportArgs {
    TrainFlags tf;
    std::string manifest_path, out_path, plot_path;
    std::vector<std::string> methods;
    std::vector<std::string> variants;
};

struct ReportCell {
    std::string style;
    double p = 0.0, eta = 0.0;
    std::uint64_t seed = 0;
    std::string graph, truth;
};

struct CellResult {
    double tau = 0.0, upset = 0.0;
    bool ok = false;
};

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

void cmd_report(const ReportArgs& a) {
    nlohmann::json manifest = nlohmann::json::parse(read_text_file(a.manifest_path));
    std::filesystem::path base = std::filesystem::path(a.manifest_path).parent_path();
    std::vector<ReportCell> cells;
    for (const auto& c : manifest.at("cells")) {
        ReportCell rc;
        rc.style = c.at("style").get<std::string>();
        rc.p = c.at("p").get<double>();
        rc.eta = c.at("eta").get<double>();
        rc.seed = c.at("seed").get<std::uint64_t>();
        rc.graph = (base / c.at("graph").get<std::string>()).string();
        rc.truth = (base / c.at("truth").get<std::string>()).string();
        cells.push_back(std::move(rc));
    }

    struct Entry {
        std::string name;
        bool trained = false;
    };
    std::vector<Entry> entries;
    for (const std::string& m : a.methods) entries.push_back({m, false});
    for (const std::string& v : a.variants) entries.push_back({v, true});

    std::vector<CellResult> results(entries.size() * cells.size());
    std::vector<std::function<void()>> tasks;
    for (size_t e = 0; e < entries.size(); ++e) {
        for (size_t c = 0; c < cells.size(); ++c) {
            tasks.push_back([&, e, c]() {
                const Entry& entry = entries[e];
                const ReportCell& cell = cells[c];
                DiGraph g = load_edge_list(cell.graph);
                Eigen::VectorXd truth = read_truth_tsv(cell.truth);
                ScoreVector scores;
                if (entry.trained) {
                    VariantSpec spec = spec_from_flags(a.tf, entry.name);
                    TrainConfig cfg = config_from_flags(a.tf);
                    cfg.seed = mix_seed(cell.seed ^ fnv1a(entry.name) ^ a.tf.seed);
                    scores = train(g, spec, cfg).report.scores;
                } else {
                    scores = run_baseline(entry.name, g).scores;
                }
                CellResult& r = results[e * cells.size() + c];
                r.tau = kendall_tau(scores, truth);
                r.upset = upset_simple(comparison_matrices(g), scores);
                r.ok = true;
            });
        }
    }
    run_parallel(tasks);

    // Aggregate over reps within each (entry, style, p, eta) group, keeping
    // first-appearance order of groups.
    std::ofstream out(a.out_path);
    if (!out) throw std::runtime_error("cannot write report: " + a.out_path);
    out << "method,style,p,eta,metric,mean,std,count\n";
    struct SeriesPoint {
        double eta, mean;
    };
    std::map<std::string, std::vector<SeriesPoint>> plot_series;
    for (size_t e = 0; e < entries.size(); ++e) {
        std::vector<std::string> group_order;
        std::map<std::string, std::vector<size_t>> groups;
        for (size_t c = 0; c < cells.size(); ++c) {
            std::string key = cells[c].style + "," + format_double(cells[c].p) + "," +
                              format_double(cells[c].eta);
            auto [it, inserted] = groups.emplace(key, std::vector<size_t>{});
            if (inserted) group_order.push_back(key);
            it->second.push_back(c);
        }
        for (const std::string& key : group_order) {
            const std::vector<size_t>& idx = groups[key];
            auto aggregate = [&](auto pick) {
                double mean = 0.0;
                for (size_t c : idx) mean += pick(results[e * cells.size() + c]);
                mean /= static_cast<double>(idx.size());
                double var = 0.0;
                for (size_t c : idx) {
                    double d = pick(results[e * cells.size() + c]) - mean;
                    var += d * d;
                }
                double sd = idx.size() > 1
                                ? std::sqrt(var / static_cast<double>(idx.size() - 1))
                                : 0.0;
                return std::pair<double, double>{mean, sd};
            };
            auto [tau_mean, tau_sd] = aggregate([](const CellResult& r) { return r.tau; });
            auto [up_mean, up_sd] = aggregate([](const CellResult& r) { return r.upset; });
            out << entries[e].name << ',' << key << ",kendall_tau," << format_double(tau_mean)
                << ',' << format_double(tau_sd) << ',' << idx.size() << "\n";
            out << entries[e].name << ',' << key << ",upset_simple," << format_double(up_mean)
                << ',' << format_double(up_sd) << ',' << idx.size() << "\n";
            plot_series[entries[e].name + " (" + cells[idx.front()].style + ")"].push_back(
                {cells[idx.front()].eta, tau_mean});
        }
    }
    if (!out) throw std::runtime_error("failed writing report: " + a.out_path);
    out.close();

    if (!a.plot_path.empty()) {
        static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                        "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
        const double W = 640, H = 480, ml = 60, mr = 160, mt = 20, mb = 50;
        double xmin = 0.0, xmax = 1.0;
        std::ostringstream svg;
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
            << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        auto X = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (W - ml - mr); };
        auto Y = [&](double v) { return H - mb - (v + 1.0) / 2.0 * (H - mt - mb); };
        svg << "<line x1=\"" << X(xmin) << "\" y1=\"" << Y(-1) << "\" x2=\"" << X(xmax)
            << "\" y2=\"" << Y(-1) << "\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << X(xmin) << "\" y1=\"" << Y(-1) << "\" x2=\"" << X(xmin)
            << "\" y2=\"" << Y(1) << "\" stroke=\"black\"/>\n";
        for (double tick : {-1.0, -0.5, 0.0, 0.5, 1.0})
            svg << "<text x=\"" << ml - 35 << "\" y=\"" << Y(tick) + 4
                << "\" font-size=\"12\">" << format_double(tick) << "</text>\n";
        for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0})
            svg << "<text x=\"" << X(tick) - 8 << "\" y=\"" << H - mb + 20
                << "\" font-size=\"12\">" << format_double(tick) << "</text>\n";
        svg << "<text x=\"" << W / 2 - 40 << "\" y=\"" << H - 10
            << "\" font-size=\"13\">noise level</text>\n";
        svg << "<text x=\"12\" y=\"" << H / 2 << "\" font-size=\"13\" transform=\"rotate(-90 12 "
            << H / 2 << ")\">kendall tau</text>\n";
        size_t ci = 0;
        for (const auto& [name, pts] : plot_series) {
            const char* color = palette[ci % 8];
            svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
            for (const auto& pt : pts)
                svg << format_double(X(pt.eta)) << ',' << format_double(Y(pt.mean)) << ' ';
            svg << "\"/>\n";
            for (const auto& pt : pts)
                svg << "<circle cx=\"" << format_double(X(pt.eta)) << "\" cy=\""
                    << format_double(Y(pt.mean)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
            svg << "<text x=\"" << W - mr + 10 << "\" y=\"" << mt + 16 * (ci + 1)
                << "\" font-size=\"12\" fill=\"" << color << "\">" << name << "</text>\n";
            ++ci;
        }
        svg << "</svg>\n";
        write_text_file(a.plot_path, svg.str());
    }
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"ranking recovery from pairwise-comparison digraphs"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* cgen = app.add_subcommand("generate", "synthesize comparison graphs");
    cgen->add_option("--n", gen.n, "nodes")->check(CLI::Range(2, 1000000));
    cgen->add_option("--p", gen.ps, "pair density (repeatable)");
    cgen->add_option("--eta", gen.etas, "outlier probability (repeatable)");
    cgen->add_option("--style", gen.styles, "score distribution: uniform or gamma (repeatable)");
    cgen->add_option("--seed", gen.seed, "rng seed");
    cgen->add_option("--reps", gen.reps, "instances per cell in sweep mode");
    auto* ograph = cgen->add_option("--graph", gen.graph_path, "edge-list output path");
    cgen->add_option("--truth", gen.truth_path, "ground-truth score output path");
    auto* osweep = cgen->add_option("--sweep-dir", gen.sweep_dir, "sweep output directory");
    ograph->excludes(osweep);
    cgen->callback([&]() {
        if (gen.graph_path.empty() && gen.sweep_dir.empty())
            throw CLI::ValidationError("generate needs --graph or --sweep-dir");
        cmd_generate(gen);
    });

    RankArgs rank;
    CLI::App* crank = app.add_subcommand("rank", "score one graph with a baseline or checkpoint");
    crank->add_option("--graph", rank.graph_path, "edge-list input")->required();
    auto* omethod = crank->add_option("--method", rank.method, "baseline method name");
    auto* ockpt = crank->add_option("--checkpoint", rank.checkpoint, "trained model to apply");
    omethod->excludes(ockpt);
    crank->add_option("--scores", rank.scores_path, "scores TSV output")->required();
    crank->add_option("--metrics", rank.metrics_path, "metrics CSV output");
    crank->add_option("--truth", rank.truth_path, "ground-truth scores for kendall_tau");
    crank->add_option("--transform", rank.transform, "upset_ratio transform override");
    double rank_finer = 0.0;
    auto* ofiner =
        crank->add_option("--finer-offset", rank_finer, "add to every observed pair weight");
    crank->add_option("--seed", rank.seed, "seed column for metrics rows");
    crank->callback([&]() {
        if (rank.method.empty() && rank.checkpoint.empty())
            throw CLI::ValidationError("rank needs --method or --checkpoint");
        if (ofiner->count() > 0) rank.finer_offset = rank_finer;
        cmd_rank(rank);
    });

    TrainArgs tr;
    CLI::App* ctrain = app.add_subcommand("train", "fit a ranking model on one graph");
    ctrain->add_option("--graph", tr.graph_path, "edge-list input")->required();
    ctrain->add_option("--checkpoint", tr.checkpoint, "checkpoint JSON output")->required();
    ctrain->add_option("--scores", tr.scores_path, "selected-epoch scores TSV output");
    ctrain->add_option("--metrics", tr.metrics_path, "metrics CSV output");
    ctrain->add_option("--truth", tr.truth_path, "ground-truth scores for kendall_tau");
    double train_finer = 0.0;
    auto* otfiner =
        ctrain->add_option("--finer-offset", train_finer, "add to every observed pair weight");
    add_train_flags(ctrain, tr.tf, false, nullptr);
    ctrain->callback([&]() {
        if (otfiner->count() > 0) tr.finer_offset = train_finer;
        cmd_train(tr);
    });

    EvalArgs ev;
    CLI::App* ceval = app.add_subcommand("eval", "compute metrics for a scores file");
    ceval->add_option("--scores", ev.scores_path, "scores TSV input")->required();
    ceval->add_option("--graph", ev.graph_path, "edge-list input")->required();
    ceval->add_option("--truth", ev.truth_path, "ground-truth scores for kendall_tau");
    ceval->add_option("--metrics", ev.metrics_path, "metrics CSV output")->required();
    ceval->add_option("--transform", ev.transform, "upset_ratio transform");
    double eval_finer = 0.0;
    auto* oefiner =
        ceval->add_option("--finer-offset", eval_finer, "add to every observed pair weight");
    ceval->add_option("--seed", ev.seed, "seed column for metrics rows");
    ceval->callback([&]() {
        if (oefiner->count() > 0) ev.finer_offset = eval_finer;
        cmd_eval(ev);
    });

    ReportArgs rep;
    CLI::App* creport = app.add_subcommand("report", "aggregate methods over a sweep manifest");
    creport->add_option("--manifest", rep.manifest_path, "sweep manifest JSON")->required();
    creport->add_option("--out", rep.out_path, "aggregated CSV output")->required();
    creport->add_option("--plot", rep.plot_path, "optional SVG plot output");
    creport->add_option("--method", rep.methods, "baseline methods (repeatable)");
    add_train_flags(creport, rep.tf, true, &rep.variants);
    creport->callback([&]() { cmd_report(rep); });

    std::vector<char*> argv;
    std::string prog = "rankforge";
    argv.push_back(prog.data());
    std::vector<std::string> copy = args;
    for (std::string& s : copy) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace rankforge::cli
