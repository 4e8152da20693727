#include "rankforge/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "rankforge/io.hpp"
#include "rankforge/metrics.hpp"
#include "rankforge/rng.hpp"

namespace rankforge {

using ad::Tape;
using ad::Tensor;

Variant variant_from_string(const std::string& s) {
    if (s == "dist") return Variant::Dist;
    if (s == "innerproduct") return Variant::InnerProduct;
    if (s == "proximal_dist") return Variant::ProximalDist;
    if (s == "proximal_innerproduct") return Variant::ProximalInnerProduct;
    if (s == "proximal_baseline") return Variant::ProximalBaseline;
    throw std::invalid_argument("unknown variant: " + s);
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Dist: return "dist";
        case Variant::InnerProduct: return "innerproduct";
        case Variant::ProximalDist: return "proximal_dist";
        case Variant::ProximalInnerProduct: return "proximal_innerproduct";
        case Variant::ProximalBaseline: return "proximal_baseline";
    }
    throw std::logic_error("unknown variant");
}

LossMode loss_mode_from_string(const std::string& s) {
    if (s == "ratio") return LossMode::Ratio;
    if (s == "margin") return LossMode::Margin;
    if (s == "sum") return LossMode::Sum;
    throw std::invalid_argument("unknown loss mode: " + s);
}

std::string to_string(LossMode m) {
    switch (m) {
        case LossMode::Ratio: return "ratio";
        case LossMode::Margin: return "margin";
        case LossMode::Sum: return "sum";
    }
    throw std::logic_error("unknown loss mode");
}

PretrainMode pretrain_mode_from_string(const std::string& s) {
    if (s == "none") return PretrainMode::None;
    if (s == "non_proximal_warmup" || s == "warmup") return PretrainMode::NonProximalWarmup;
    if (s == "serialrank_similarity" || s == "serialrank")
        return PretrainMode::SerialRankSimilarity;
    throw std::invalid_argument("unknown pretrain mode: " + s);
}

std::string to_string(PretrainMode m) {
    switch (m) {
        case PretrainMode::None: return "none";
        case PretrainMode::NonProximalWarmup: return "non_proximal_warmup";
        case PretrainMode::SerialRankSimilarity: return "serialrank_similarity";
    }
    throw std::logic_error("unknown pretrain mode");
}

std::vector<Eigen::MatrixXd*> ModelState::params() {
    return {&Ws1, &Ws2, &Wt1, &Wt2, &Wout, &a, &b, &sigma, &alphas};
}

std::vector<const Eigen::MatrixXd*> ModelState::params() const {
    return {&Ws1, &Ws2, &Wt1, &Wt2, &Wout, &a, &b, &sigma, &alphas};
}

const std::vector<std::string>& ModelState::param_names() {
    static const std::vector<std::string> names = {"Ws1", "Ws2",  "Wt1", "Wt2",   "Wout",
                                                   "a",   "bias", "sigma", "alphas"};
    return names;
}

namespace {

void validate_spec(const VariantSpec& spec) {
    if (spec.k < 1) throw std::invalid_argument("k must be >= 1");
    if (spec.d < 1) throw std::invalid_argument("d must be >= 1");
    if (spec.hidden < 0) throw std::invalid_argument("hidden must be >= 0");
    if (spec.gamma < 1) throw std::invalid_argument("gamma must be >= 1");
    if (spec.alpha_init < 0.0) throw std::invalid_argument("alpha_init must be >= 0");
    bool needs_baseline = spec.variant == Variant::ProximalBaseline;
    if (needs_baseline && spec.baseline.empty())
        throw std::invalid_argument("proximal_baseline requires a baseline method name");
    if (!needs_baseline && !spec.baseline.empty())
        throw std::invalid_argument("a baseline method is only accepted by proximal_baseline");
}

void validate_train_config(const TrainConfig& cfg) {
    if (cfg.max_epochs < 1 || cfg.patience < 1 || cfg.pretrain_epochs < 1)
        throw std::invalid_argument("epoch counts must be positive");
    if (cfg.lr <= 0.0) throw std::invalid_argument("learning rate must be positive");
    if (cfg.weight_decay < 0.0) throw std::invalid_argument("weight decay must be >= 0");
    if (cfg.selection != "upset_simple" && cfg.selection != "upset_naive")
        throw std::invalid_argument("selection metric must be upset_simple or upset_naive");
}

Eigen::MatrixXd row_normalized_selfloop(const Eigen::MatrixXd& A) {
    const long n = A.rows();
    Eigen::MatrixXd M = A + Eigen::MatrixXd::Identity(n, n);
    for (long i = 0; i < n; ++i) {
        double s = M.row(i).sum();
        if (s > 0.0) M.row(i) /= s;
    }
    return M;
}

struct GraphContext {
    int n = 0;
    ComparisonMatrices cm;
    Eigen::MatrixXd X;
    Eigen::MatrixXd As, At;
    Eigen::MatrixXd sim_target;  // serialrank S'/max, when requested
    bool has_sim_target = false;
    Eigen::VectorXd baseline_r0;
    bool has_baseline = false;
    std::optional<OrthogonalReducer> Q;
    std::vector<std::string> warnings;
};

GraphContext make_context(const DiGraph& g, const VariantSpec& spec, bool need_sim_target,
                          const std::optional<ScoreVector>& baseline_r0) {
    GraphContext ctx;
    ctx.n = g.n();
    ctx.cm = comparison_matrices(g);
    ctx.X = hermitian_features(g, spec.k, &ctx.warnings);
    ctx.As = row_normalized_selfloop(g.A);
    ctx.At = row_normalized_selfloop(g.A.transpose());
    if (need_sim_target) {
        ctx.sim_target = serialrank_similarity(g).SprimeNorm;
        ctx.has_sim_target = true;
    }
    if (spec.variant == Variant::ProximalBaseline) {
        if (baseline_r0) {
            if (baseline_r0->size() != ctx.n)
                throw std::invalid_argument("baseline score length does not match the graph");
            ctx.baseline_r0 = *baseline_r0;
        } else {
            ctx.baseline_r0 = run_baseline(spec.baseline, g).scores;
        }
        ctx.has_baseline = true;
    } else if (baseline_r0) {
        throw std::invalid_argument("baseline scores are only accepted by proximal_baseline");
    }
    if (spec.proximal()) ctx.Q.emplace(ctx.n);
    return ctx;
}

std::vector<Tensor> params_on_tape(Tape& tape, const ModelState& state, bool requires_grad) {
    std::vector<Tensor> out;
    for (const Eigen::MatrixXd* p : state.params()) out.push_back(tape.input(*p, requires_grad));
    return out;
}

// Parameter slots in ModelState::params() order.
enum { P_WS1 = 0, P_WS2, P_WT1, P_WT2, P_WOUT, P_A, P_B, P_SIGMA, P_ALPHAS };

Tensor build_embedding(Tape& tape, const std::vector<Tensor>& P, const GraphContext& ctx) {
    if (P[P_WS1].rows() != ctx.X.cols())
        throw std::invalid_argument("stored weights expect feature width " +
                                    std::to_string(P[P_WS1].rows()) + " but features have " +
                                    std::to_string(ctx.X.cols()) + " columns");
    Tensor X = tape.constant(ctx.X);
    Tensor As = tape.constant(ctx.As);
    Tensor At = tape.constant(ctx.At);
    Tensor Hs = ad::relu(ad::matmul(ad::matmul(As, X), P[P_WS1]));
    Hs = ad::relu(ad::matmul(ad::matmul(As, Hs), P[P_WS2]));
    Tensor Ht = ad::relu(ad::matmul(ad::matmul(At, X), P[P_WT1]));
    Ht = ad::relu(ad::matmul(ad::matmul(At, Ht), P[P_WT2]));
    const int h = static_cast<int>(P[P_WS2].cols());
    const int d = static_cast<int>(P[P_WOUT].cols());
    Tensor Wtop = ad::slice(P[P_WOUT], 0, 0, h, d);
    Tensor Wbot = ad::slice(P[P_WOUT], h, 0, h, d);
    return ad::add(ad::matmul(Hs, Wtop), ad::matmul(Ht, Wbot));
}

// relu(sigma^2 - floor) + floor keeps the kernel width differentiable while
// bounding it away from zero.
Tensor clamped_sigma2(Tape& tape, const std::vector<Tensor>& P) {
    Tensor s2 = ad::mul(P[P_SIGMA], P[P_SIGMA]);
    return ad::add(ad::relu(ad::sub(s2, tape.scalar(1e-8))), tape.scalar(1e-8));
}

Tensor kernel_denominator(Tape& tape, const std::vector<Tensor>& P) {
    const double d = static_cast<double>(P[P_WOUT].cols());
    return ad::mul(clamped_sigma2(tape, P), tape.scalar(d));
}

Tensor build_head_dist(Tape& tape, const std::vector<Tensor>& P, Tensor Z) {
    Tensor ones_d = tape.constant(Eigen::MatrixXd::Ones(Z.cols(), 1));
    Tensor z2 = ad::matmul(ad::mul(Z, Z), ones_d);
    Tensor za = ad::matmul(Z, P[P_A]);
    Tensor a2 = ad::sum(ad::mul(P[P_A], P[P_A]));
    Tensor dist2 = ad::relu(ad::add(ad::sub(z2, ad::mul(tape.scalar(2.0), za)), a2));
    return ad::exp(ad::neg(ad::div(dist2, kernel_denominator(tape, P))));
}

Tensor build_head_inner(Tape& tape, const std::vector<Tensor>& P, Tensor Z) {
    (void)tape;
    return ad::sigmoid(ad::add(ad::matmul(Z, P[P_A]), P[P_B]));
}

Tensor build_similarity(Tape& tape, const std::vector<Tensor>& P, Tensor Z, bool inner) {
    if (inner) return ad::sigmoid(ad::add(ad::matmul(Z, ad::transpose(Z)), P[P_B]));
    return ad::exp(ad::neg(ad::div(ad::pairwise_sqdist(Z), kernel_denominator(tape, P))));
}

Tensor build_proximal(Tape& tape, const std::vector<Tensor>& P, Tensor S, Tensor r0,
                      const GraphContext& ctx, const VariantSpec& spec) {
    const int n = ctx.n;
    const OrthogonalReducer& Q = *ctx.Q;
    Tensor ones_n = tape.constant(Eigen::MatrixXd::Ones(n, 1));
    Tensor L = ad::sub(ad::diag_embed(ad::matmul(S, ones_n)), S);

    Tensor centered = ad::sub(r0, ad::mean(r0));
    Tensor y = ad::slice(ad::qmul(centered, Q, false), 1, 0, n - 1, 1);
    y = ad::unit_normalize(y);

    Tensor QLQt = ad::qmul(ad::transpose(ad::qmul(L, Q, false)), Q, false);
    Tensor Ltil = ad::slice(QLQt, 1, 1, n - 1, n - 1);

    for (int step = 0; step < spec.gamma; ++step) {
        Tensor alpha = ad::slice(P[P_ALPHAS], step, 0, 1, 1);
        Tensor coef = ad::mul(alpha, tape.scalar(2.0 / static_cast<double>(n)));
        y = ad::sub(y, ad::mul(coef, ad::matmul(Ltil, y)));
        y = ad::unit_normalize(y);
    }
    Tensor lifted = ad::concat_rows(tape.constant(Eigen::MatrixXd::Zero(1, 1)), y);
    return ad::qmul(lifted, Q, true);
}

struct TapeForward {
    Tensor r;          // raw variant output
    Tensor u;          // loss-space scores in (0, 1]
    Tensor S;          // similarity, when the pass built one
    bool has_S = false;
};

// head_only drops the proximal refinement (the warmup pretraining mode).
TapeForward build_forward(Tape& tape, const std::vector<Tensor>& P, const GraphContext& ctx,
                          const VariantSpec& spec, bool head_only, bool need_similarity) {
    Tensor Z = build_embedding(tape, P, ctx);
    TapeForward fw;
    const bool inner = spec.variant == Variant::InnerProduct ||
                       spec.variant == Variant::ProximalInnerProduct;
    if (spec.proximal() && !head_only) {
        fw.S = build_similarity(tape, P, Z, inner);
        fw.has_S = true;
        Tensor r0;
        if (spec.variant == Variant::ProximalBaseline)
            r0 = tape.constant(ctx.baseline_r0);
        else
            r0 = inner ? build_head_inner(tape, P, Z) : build_head_dist(tape, P, Z);
        fw.r = build_proximal(tape, P, fw.S, r0, ctx, spec);
        fw.u = ad::mul(ad::add(fw.r, tape.scalar(1.0)), tape.scalar(0.5));
    } else {
        // ProximalBaseline warms up through the dist head.
        fw.r = inner ? build_head_inner(tape, P, Z) : build_head_dist(tape, P, Z);
        fw.u = fw.r;
        if (need_similarity) {
            fw.S = build_similarity(tape, P, Z, inner);
            fw.has_S = true;
        }
    }
    return fw;
}

Tensor build_ratio_loss(Tape& tape, Tensor u, const GraphContext& ctx) {
    const int n = ctx.n;
    Tensor ones_row = tape.constant(Eigen::MatrixXd::Ones(1, n));
    Tensor Ui = ad::matmul(u, ones_row);
    Tensor Uj = ad::transpose(Ui);
    Tensor denom = ad::add(ad::masked_select(ad::add(Ui, Uj), ctx.cm.support),
                           tape.constant(Eigen::MatrixXd::Ones(n, n) - ctx.cm.support));
    Tensor ratio = ad::div(ad::sub(Ui, Uj), denom);
    Tensor res = ad::masked_select(ad::sub(ratio, tape.constant(ctx.cm.M)), ctx.cm.support);
    return ad::div(ad::sum(ad::mul(res, res)), tape.scalar(static_cast<double>(ctx.cm.t)));
}

Tensor build_margin_loss(Tape& tape, Tensor u, const GraphContext& ctx) {
    const int n = ctx.n;
    Tensor ones_row = tape.constant(Eigen::MatrixXd::Ones(1, n));
    Tensor Ui = ad::matmul(u, ones_row);
    Tensor Uj = ad::transpose(Ui);
    Tensor hinge = ad::relu(ad::add(ad::sub(Uj, Ui), tape.scalar(MetricConfig{}.margin)));
    Eigen::MatrixXd W = ctx.cm.M + ctx.cm.M.cwiseAbs();
    return ad::div(ad::sum(ad::mul(tape.constant(W), hinge)),
                   tape.scalar(static_cast<double>(ctx.cm.t)));
}

Tensor build_main_loss(Tape& tape, Tensor u, const GraphContext& ctx, LossMode mode) {
    switch (mode) {
        case LossMode::Ratio: return build_ratio_loss(tape, u, ctx);
        case LossMode::Margin: return build_margin_loss(tape, u, ctx);
        case LossMode::Sum:
            return ad::add(build_ratio_loss(tape, u, ctx), build_margin_loss(tape, u, ctx));
    }
    throw std::logic_error("unknown loss mode");
}

Tensor build_similarity_loss(Tape& tape, Tensor S, const GraphContext& ctx) {
    Tensor diff = ad::sub(S, tape.constant(ctx.sim_target));
    double n2 = static_cast<double>(ctx.n) * static_cast<double>(ctx.n);
    return ad::div(ad::squared_frobenius(diff), tape.scalar(n2));
}

std::vector<Eigen::MatrixXd> collect_grads(const std::vector<Tensor>& P) {
    std::vector<Eigen::MatrixXd> grads;
    grads.reserve(P.size());
    for (const Tensor& t : P) {
        const Eigen::MatrixXd& gmat = t.grad();
        if (gmat.size() == 0)
            grads.emplace_back(Eigen::MatrixXd::Zero(t.rows(), t.cols()));
        else
            grads.push_back(gmat);
    }
    return grads;
}

}  // namespace

ModelState init_model(const VariantSpec& spec, std::uint64_t seed) {
    validate_spec(spec);
    Rng rng(mix_seed(seed ^ 0x6d6f64656cull));
    const int fin = 2 * spec.k;
    const int h = spec.hidden_or_default();
    const int d = spec.d;
    auto glorot = [&rng](int rows, int cols) {
        double lim = std::sqrt(6.0 / static_cast<double>(rows + cols));
        Eigen::MatrixXd M(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) M(i, j) = rng.uniform(-lim, lim);
        return M;
    };
    ModelState st;
    st.Ws1 = glorot(fin, h);
    st.Ws2 = glorot(h, h);
    st.Wt1 = glorot(fin, h);
    st.Wt2 = glorot(h, h);
    st.Wout = glorot(2 * h, d);
    st.a = glorot(d, 1);
    st.b = Eigen::MatrixXd::Zero(1, 1);
    st.sigma = Eigen::MatrixXd::Ones(1, 1);
    st.alphas = Eigen::MatrixXd::Constant(spec.gamma, 1, spec.alpha_init);
    return st;
}

Eigen::MatrixXd embed(const ModelState& state, const DiGraph& g, const Eigen::MatrixXd& X) {
    if (X.rows() != g.n()) throw std::invalid_argument("feature row count does not match graph");
    GraphContext ctx;
    ctx.n = g.n();
    ctx.X = X;
    ctx.As = row_normalized_selfloop(g.A);
    ctx.At = row_normalized_selfloop(g.A.transpose());
    Tape tape;
    std::vector<Tensor> P = params_on_tape(tape, state, false);
    return build_embedding(tape, P, ctx).value();
}

ScoreVector head_dist(const ModelState& state, const Eigen::MatrixXd& Z) {
    Tape tape;
    std::vector<Tensor> P = params_on_tape(tape, state, false);
    return build_head_dist(tape, P, tape.constant(Z)).value();
}

ScoreVector head_inner(const ModelState& state, const Eigen::MatrixXd& Z) {
    Tape tape;
    std::vector<Tensor> P = params_on_tape(tape, state, false);
    return build_head_inner(tape, P, tape.constant(Z)).value();
}

Eigen::MatrixXd similarity_matrix(const ModelState& state, const Eigen::MatrixXd& Z) {
    Tape tape;
    std::vector<Tensor> P = params_on_tape(tape, state, false);
    return build_similarity(tape, P, tape.constant(Z), false).value();
}

ScoreVector forward_variant(const ModelState& state, const VariantSpec& spec, const DiGraph& g,
                            const std::optional<ScoreVector>& baseline_r0) {
    validate_spec(spec);
    if (spec.variant == Variant::ProximalBaseline && !baseline_r0)
        throw std::invalid_argument("proximal_baseline needs a baseline score vector");
    GraphContext ctx = make_context(g, spec, false, baseline_r0);
    Tape tape;
    std::vector<Tensor> P = params_on_tape(tape, state, false);
    TapeForward fw = build_forward(tape, P, ctx, spec, false, false);
    return fw.r.value();
}

double training_loss(const ModelState& state, const VariantSpec& spec, const DiGraph& g,
                     std::vector<Eigen::MatrixXd>* grads) {
    validate_spec(spec);
    GraphContext ctx = make_context(g, spec, false, std::nullopt);
    Tape tape;
    std::vector<Tensor> P = params_on_tape(tape, state, grads != nullptr);
    TapeForward fw = build_forward(tape, P, ctx, spec, false, false);
    Tensor loss = build_main_loss(tape, fw.u, ctx, spec.loss);
    if (grads) {
        tape.backward(loss);
        *grads = collect_grads(P);
    }
    return loss.value()(0, 0);
}

TrainedModel train(const DiGraph& g, const VariantSpec& spec, const TrainConfig& cfg) {
    validate_spec(spec);
    validate_train_config(cfg);
    auto t_start = std::chrono::steady_clock::now();

    const int n = g.n();
    ModelState state = init_model(spec, cfg.seed);
    if (spec.alpha_init == 0.0 && n >= 2)
        state.alphas.setConstant(1.0 / static_cast<double>(n - 1));

    const bool need_sim = spec.pretrain == PretrainMode::SerialRankSimilarity;
    GraphContext ctx = make_context(g, spec, need_sim, std::nullopt);

    // The RBF similarity only carries gradient signal when pairwise embedding
    // distances are on the order of sigma^2 d, and the embedding scale shrinks
    // with n (spectral features have unit norm). Start the trainable width at
    // the median pairwise distance so S spans (0, 1) from the first epoch.
    if (spec.variant == Variant::ProximalDist || spec.variant == Variant::ProximalBaseline) {
        Eigen::MatrixXd Z0 = embed(state, g, ctx.X);
        std::vector<double> d2;
        d2.reserve(static_cast<size_t>(n) * (n - 1) / 2);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) d2.push_back((Z0.row(i) - Z0.row(j)).squaredNorm());
        if (!d2.empty()) {
            auto mid = d2.begin() + d2.size() / 2;
            std::nth_element(d2.begin(), mid, d2.end());
            if (*mid > 0.0) state.sigma(0, 0) = std::sqrt(*mid / static_cast<double>(spec.d));
        }
    }

    std::set<std::string> warn_set(ctx.warnings.begin(), ctx.warnings.end());
    if (spec.proximal())
        for (const std::string& w :
             check_step_bound(Eigen::VectorXd(state.alphas.col(0)), n))
            warn_set.insert(w);

    TrainReport report;
    ad::AdamState adam;
    ModelState best_state = state;
    ScoreVector best_scores;
    double best_metric = std::numeric_limits<double>::infinity();
    double best_loss = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    double patience_best = std::numeric_limits<double>::infinity();
    int stall = 0;
    int epoch = 0;

    const int pre_epochs = spec.pretrain == PretrainMode::None ? 0 : cfg.pretrain_epochs;
    const bool warmup = spec.pretrain == PretrainMode::NonProximalWarmup;
    const int total_epochs = pre_epochs + cfg.max_epochs;

    for (; epoch < total_epochs; ++epoch) {
        const bool pretrain = epoch < pre_epochs;
        Tape tape;
        std::vector<Tensor> P = params_on_tape(tape, state, true);
        TapeForward fw =
            build_forward(tape, P, ctx, spec, pretrain && warmup, pretrain && need_sim);
        Tensor loss = build_main_loss(tape, fw.u, ctx, spec.loss);
        if (pretrain && need_sim) loss = ad::add(loss, build_similarity_loss(tape, fw.S, ctx));

        const double loss_value = loss.value()(0, 0);
        if (!std::isfinite(loss_value))
            throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                     std::to_string(epoch));

        ScoreVector r = fw.r.value();
        ScoreVector u = fw.u.value();
        EpochRecord rec;
        rec.epoch = epoch;
        rec.pretrain = pretrain;
        rec.loss = loss_value;
        rec.upset_simple = upset_simple(ctx.cm, r);
        rec.upset_naive = upset_naive(ctx.cm, r);
        rec.upset_ratio = upset_ratio(ctx.cm, u, MetricConfig{ScoreTransform::None});
        report.history.push_back(rec);

        // Model selection considers every epoch whose scores came from the
        // full variant pipeline.
        if (!(pretrain && warmup)) {
            double metric = cfg.selection == "upset_naive" ? rec.upset_naive : rec.upset_simple;
            if (metric < best_metric) {
                best_metric = metric;
                best_state = state;
                best_scores = r;
                best_loss = loss_value;
                best_epoch = epoch;
            }
        }

        if (!pretrain) {
            if (loss_value < patience_best) {
                patience_best = loss_value;
                stall = 0;
            } else if (++stall >= cfg.patience) {
                break;
            }
        }

        tape.backward(loss);
        std::vector<Eigen::MatrixXd> grads = collect_grads(P);
        Eigen::MatrixXd alphas_before = state.alphas;
        std::vector<Eigen::MatrixXd*> target = state.params();
        if (pretrain || !spec.proximal())
            ad::adam_step(target, grads, adam, cfg.lr, cfg.weight_decay);
        else
            ad::sgd_step(target, grads, 10.0 * cfg.lr, cfg.weight_decay);
        if (spec.freeze_alpha) state.alphas = alphas_before;

        for (const std::string& w : tape.warnings()) warn_set.insert(w);
    }

    if (best_epoch < 0) throw std::runtime_error("training selected no epoch");
    report.selected_epoch = best_epoch;
    report.scores = best_scores;
    report.final_loss = best_loss;
    report.warnings.assign(warn_set.begin(), warn_set.end());
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return TrainedModel{spec, std::move(best_state), std::move(report)};
}

ScoreVector apply_model(const ModelState& state, const VariantSpec& spec, const DiGraph& g) {
    if (spec.variant == Variant::ProximalBaseline)
        return forward_variant(state, spec, g, ScoreVector(run_baseline(spec.baseline, g).scores));
    return forward_variant(state, spec, g);
}

namespace {

std::uint64_t spec_hash(const VariantSpec& spec) {
    std::string canon = to_string(spec.variant) + "|" + to_string(spec.loss) + "|" +
                        to_string(spec.pretrain) + "|" + spec.baseline + "|" +
                        std::to_string(spec.k) + "|" + std::to_string(spec.d) + "|" +
                        std::to_string(spec.hidden) + "|" + std::to_string(spec.gamma) + "|" +
                        format_double(spec.alpha_init) + "|" +
                        (spec.freeze_alpha ? "1" : "0");
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
    nlohmann::json j;
    j["rows"] = M.rows();
    j["cols"] = M.cols();
    nlohmann::json data = nlohmann::json::array();
    for (long i = 0; i < M.rows(); ++i)
        for (long c = 0; c < M.cols(); ++c) data.push_back(M(i, c));
    j["data"] = std::move(data);
    return j;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    long rows = j.at("rows").get<long>();
    long cols = j.at("cols").get<long>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || static_cast<long>(data.size()) != rows * cols)
        throw std::runtime_error("checkpoint matrix shape mismatch");
    Eigen::MatrixXd M(rows, cols);
    long idx = 0;
    for (long i = 0; i < rows; ++i)
        for (long c = 0; c < cols; ++c) M(i, c) = data[static_cast<size_t>(idx++)].get<double>();
    return M;
}

}  // namespace

void save_checkpoint(const TrainedModel& tm, const std::string& path) {
    nlohmann::json j;
    j["format"] = "rankforge-checkpoint";
    j["version"] = 1;
    nlohmann::json spec;
    spec["variant"] = to_string(tm.spec.variant);
    spec["loss"] = to_string(tm.spec.loss);
    spec["pretrain"] = to_string(tm.spec.pretrain);
    spec["baseline"] = tm.spec.baseline;
    spec["k"] = tm.spec.k;
    spec["d"] = tm.spec.d;
    spec["hidden"] = tm.spec.hidden;
    spec["gamma"] = tm.spec.gamma;
    spec["alpha_init"] = tm.spec.alpha_init;
    spec["freeze_alpha"] = tm.spec.freeze_alpha;
    j["spec"] = std::move(spec);
    j["config_hash"] = spec_hash(tm.spec);

    nlohmann::json params;
    const auto& names = ModelState::param_names();
    auto ptrs = tm.state.params();
    for (size_t i = 0; i < ptrs.size(); ++i) params[names[i]] = matrix_to_json(*ptrs[i]);
    j["state"] = std::move(params);

    nlohmann::json rep;
    rep["selected_epoch"] = tm.report.selected_epoch;
    rep["final_loss"] = tm.report.final_loss;
    rep["scores"] = std::vector<double>(tm.report.scores.data(),
                                        tm.report.scores.data() + tm.report.scores.size());
    rep["warnings"] = tm.report.warnings;
    nlohmann::json hist = nlohmann::json::array();
    for (const EpochRecord& e : tm.report.history) {
        nlohmann::json he;
        he["epoch"] = e.epoch;
        he["pretrain"] = e.pretrain;
        he["loss"] = e.loss;
        he["upset_simple"] = e.upset_simple;
        he["upset_naive"] = e.upset_naive;
        he["upset_ratio"] = e.upset_ratio;
        hist.push_back(std::move(he));
    }
    rep["history"] = std::move(hist);
    j["report"] = std::move(rep);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

TrainedModel load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("invalid checkpoint JSON: " + std::string(e.what()));
    }
    if (j.value("format", "") != "rankforge-checkpoint" || j.value("version", 0) != 1)
        throw std::runtime_error("unrecognized checkpoint format: " + path);

    TrainedModel tm;
    const auto& spec = j.at("spec");
    tm.spec.variant = variant_from_string(spec.at("variant").get<std::string>());
    tm.spec.loss = loss_mode_from_string(spec.at("loss").get<std::string>());
    tm.spec.pretrain = pretrain_mode_from_string(spec.at("pretrain").get<std::string>());
    tm.spec.baseline = spec.at("baseline").get<std::string>();
    tm.spec.k = spec.at("k").get<int>();
    tm.spec.d = spec.at("d").get<int>();
    tm.spec.hidden = spec.at("hidden").get<int>();
    tm.spec.gamma = spec.at("gamma").get<int>();
    tm.spec.alpha_init = spec.at("alpha_init").get<double>();
    tm.spec.freeze_alpha = spec.at("freeze_alpha").get<bool>();
    validate_spec(tm.spec);
    if (j.at("config_hash").get<std::uint64_t>() != spec_hash(tm.spec))
        throw std::runtime_error("checkpoint config hash mismatch: " + path);

    const auto& params = j.at("state");
    const auto& names = ModelState::param_names();
    auto ptrs = tm.state.params();
    for (size_t i = 0; i < ptrs.size(); ++i) *ptrs[i] = matrix_from_json(params.at(names[i]));
    const int h = tm.spec.hidden_or_default();
    if (tm.state.Ws1.rows() != 2 * tm.spec.k || tm.state.Ws1.cols() != h ||
        tm.state.Wout.rows() != 2 * h || tm.state.Wout.cols() != tm.spec.d ||
        tm.state.alphas.rows() != tm.spec.gamma || tm.state.alphas.cols() != 1)
        throw std::runtime_error("checkpoint parameter shapes do not match its config");

    const auto& rep = j.at("report");
    tm.report.selected_epoch = rep.at("selected_epoch").get<int>();
    tm.report.final_loss = rep.at("final_loss").get<double>();
    std::vector<double> sc = rep.at("scores").get<std::vector<double>>();
    tm.report.scores = Eigen::Map<Eigen::VectorXd>(sc.data(), static_cast<long>(sc.size()));
    tm.report.warnings = rep.at("warnings").get<std::vector<std::string>>();
    for (const auto& he : rep.at("history")) {
        EpochRecord e;
        e.epoch = he.at("epoch").get<int>();
        e.pretrain = he.at("pretrain").get<bool>();
        e.loss = he.at("loss").get<double>();
        e.upset_simple = he.at("upset_simple").get<double>();
        e.upset_naive = he.at("upset_naive").get<double>();
        e.upset_ratio = he.at("upset_ratio").get<double>();
        tm.report.history.push_back(e);
    }
    return tm;
}

}  // namespace rankforge
