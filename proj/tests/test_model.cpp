#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "helpers.hpp"
#include "rankforge/io.hpp"
#include "rankforge/model.hpp"
#include "rankforge/synth.hpp"

using namespace rankforge;
using namespace rankforge::testutil;

namespace {

VariantSpec small_spec(Variant v, LossMode loss = LossMode::Ratio) {
    VariantSpec s;
    s.variant = v;
    s.loss = loss;
    s.pretrain = PretrainMode::None;
    s.k = 2;
    s.d = 4;
    s.hidden = 4;
    s.gamma = 3;
    if (v == Variant::ProximalBaseline) s.baseline = "springrank";
    return s;
}

const std::vector<Variant> kAllVariants = {Variant::Dist, Variant::InnerProduct,
                                           Variant::ProximalDist, Variant::ProximalInnerProduct,
                                           Variant::ProximalBaseline};

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("rf_model_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("enum string round trips and CLI aliases") {
    for (Variant v : kAllVariants) CHECK(variant_from_string(to_string(v)) == v);
    for (LossMode m : {LossMode::Ratio, LossMode::Margin, LossMode::Sum})
        CHECK(loss_mode_from_string(to_string(m)) == m);
    for (PretrainMode p :
         {PretrainMode::None, PretrainMode::NonProximalWarmup, PretrainMode::SerialRankSimilarity})
        CHECK(pretrain_mode_from_string(to_string(p)) == p);
    CHECK(variant_from_string("proximal_dist") == Variant::ProximalDist);
    CHECK(pretrain_mode_from_string("warmup") == PretrainMode::NonProximalWarmup);
    CHECK(pretrain_mode_from_string("serialrank") == PretrainMode::SerialRankSimilarity);
    CHECK_THROWS_WITH(variant_from_string("nope"), doctest::Contains("unknown variant"));
    CHECK_THROWS_WITH(pretrain_mode_from_string("nope"), doctest::Contains("unknown pretrain"));
}

TEST_CASE("spec validation") {
    VariantSpec s = small_spec(Variant::Dist);
    s.baseline = "springrank";
    CHECK_THROWS_WITH((void)init_model(s, 0), doctest::Contains("only accepted by"));
    VariantSpec p = small_spec(Variant::ProximalBaseline);
    p.baseline.clear();
    CHECK_THROWS_WITH((void)init_model(p, 0), doctest::Contains("requires a baseline"));
    VariantSpec bad = small_spec(Variant::Dist);
    bad.k = 0;
    CHECK_THROWS_WITH((void)init_model(bad, 0), doctest::Contains("k must be"));
}

TEST_CASE("init_model shapes, bounds, determinism") {
    VariantSpec s = small_spec(Variant::ProximalDist);
    s.alpha_init = 0.125;
    ModelState a = init_model(s, 7);
    CHECK(a.Ws1.rows() == 2 * s.k);
    CHECK(a.Ws1.cols() == s.hidden);
    CHECK(a.Wout.rows() == 2 * s.hidden);
    CHECK(a.Wout.cols() == s.d);
    CHECK(a.a.rows() == s.d);
    CHECK(a.b.rows() == 1);
    CHECK(a.sigma(0, 0) == 1.0);
    CHECK(a.alphas.rows() == s.gamma);
    CHECK((a.alphas.array() == 0.125).all());

    // Glorot bound on the fan-in/fan-out uniform init
    double bound = std::sqrt(6.0 / (a.Ws1.rows() + a.Ws1.cols()));
    CHECK(a.Ws1.cwiseAbs().maxCoeff() <= bound);
    CHECK(a.Ws1.cwiseAbs().maxCoeff() > 0.0);

    ModelState b = init_model(s, 7);
    CHECK(max_abs_diff(a.Ws1, b.Ws1) == 0.0);
    CHECK(max_abs_diff(a.Wout, b.Wout) == 0.0);
    ModelState c = init_model(s, 8);
    CHECK(max_abs_diff(a.Ws1, c.Ws1) > 0.0);
}

TEST_CASE("embedding is permutation equivariant and finite on empty graphs") {
    DiGraph g = random_digraph(9, 0.7, 3);
    VariantSpec s = small_spec(Variant::Dist);
    ModelState st = init_model(s, 1);
    Eigen::MatrixXd X = hermitian_features(g, s.k);
    Eigen::MatrixXd Z = embed(st, g, X);
    CHECK(Z.rows() == 9);
    CHECK(Z.cols() == s.d);

    auto perm = random_permutation(9, 2);
    DiGraph pg = DiGraph::from_adjacency(permute_matrix(g.A, perm));
    Eigen::MatrixXd PX(9, X.cols());
    for (int i = 0; i < 9; ++i) PX.row(perm[size_t(i)]) = X.row(i);
    Eigen::MatrixXd PZ = embed(st, pg, PX);
    for (int i = 0; i < 9; ++i)
        CHECK((PZ.row(perm[size_t(i)]) - Z.row(i)).cwiseAbs().maxCoeff() < 1e-9);

    DiGraph empty = DiGraph::from_adjacency(Eigen::MatrixXd::Zero(5, 5));
    Eigen::MatrixXd Ze = embed(st, empty, hermitian_features(empty, s.k));
    CHECK(Ze.allFinite());
}

TEST_CASE("heads and similarity obey their ranges") {
    DiGraph g = random_digraph(8, 0.8, 9);
    VariantSpec s = small_spec(Variant::Dist);
    ModelState st = init_model(s, 5);
    Eigen::MatrixXd Z = embed(st, g, hermitian_features(g, s.k));

    ScoreVector hd = head_dist(st, Z);
    CHECK(hd.minCoeff() > 0.0);
    CHECK(hd.maxCoeff() <= 1.0);

    ScoreVector hi = head_inner(st, Z);
    CHECK(hi.minCoeff() > 0.0);
    CHECK(hi.maxCoeff() < 1.0);

    Eigen::MatrixXd S = similarity_matrix(st, Z);
    CHECK(max_abs_diff(S, S.transpose()) == 0.0);
    for (int i = 0; i < 8; ++i) CHECK(S(i, i) == 1.0);
    CHECK(S.minCoeff() > 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    CHECK(es.eigenvalues()(0) > -1e-9);

    // a point at distance zero from the anchor scores exactly 1
    ModelState at = st;
    at.a = Z.row(0).transpose();
    CHECK(head_dist(at, Z)(0) == doctest::Approx(1.0));
}

TEST_CASE("forward variants: contracts") {
    DiGraph g = random_digraph(10, 0.6, 17);
    for (Variant v : kAllVariants) {
        CAPTURE(to_string(v));
        VariantSpec s = small_spec(v);
        ModelState st = init_model(s, 3);
        ScoreVector r = apply_model(st, s, g);
        CHECK(r.allFinite());
        if (s.proximal()) {
            CHECK(std::abs(r.norm() - 1.0) < 1e-10);
            CHECK(std::abs(r.sum()) < 1e-8);
        } else {
            CHECK(r.minCoeff() > 0.0);
            CHECK(r.maxCoeff() <= 1.0);
        }
    }

    // the dist head variant is exactly the head on the embedding
    VariantSpec ds = small_spec(Variant::Dist);
    ModelState dst = init_model(ds, 11);
    ScoreVector direct = head_dist(dst, embed(dst, g, hermitian_features(g, ds.k)));
    CHECK(max_abs_diff(forward_variant(dst, ds, g), direct) < 1e-14);

    // baseline vector required exactly for proximal_baseline
    VariantSpec pb = small_spec(Variant::ProximalBaseline);
    ModelState pst = init_model(pb, 3);
    CHECK_THROWS_WITH((void)forward_variant(pst, pb, g), doctest::Contains("needs a baseline"));
    VariantSpec pd = small_spec(Variant::ProximalDist);
    ModelState pdst = init_model(pd, 3);
    CHECK_THROWS_WITH((void)forward_variant(pdst, pd, g, ScoreVector(ScoreVector::Ones(10))),
                      doctest::Contains("only accepted by proximal_baseline"));
}

TEST_CASE("zero step sizes leave the baseline ranking untouched") {
    DiGraph g = random_digraph(12, 0.7, 23);
    VariantSpec s = small_spec(Variant::ProximalBaseline);
    ModelState st = init_model(s, 2);
    st.alphas.setZero();
    ScoreVector r = apply_model(st, s, g);
    ScoreVector base = run_baseline("springrank", g).scores;
    // the refinement starts from the centered normalized baseline
    Eigen::VectorXd c = base.array() - base.mean();
    CHECK((r - c / c.norm()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(same_ranking(r, base));
}

TEST_CASE("forward is permutation equivariant") {
    DiGraph g = random_digraph(9, 0.8, 29);
    auto perm = random_permutation(9, 31);
    DiGraph pg = DiGraph::from_adjacency(permute_matrix(g.A, perm));
    for (Variant v : {Variant::Dist, Variant::ProximalBaseline}) {
        CAPTURE(to_string(v));
        VariantSpec s = small_spec(v);
        ModelState st = init_model(s, 13);
        ScoreVector r = apply_model(st, s, g);
        ScoreVector rp = apply_model(st, s, pg);
        CHECK((rp - permute_vector(r, perm)).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("training loss gradients match central differences") {
    DiGraph g = random_digraph(8, 0.8, 41);
    for (Variant v : kAllVariants) {
        for (LossMode loss : {LossMode::Ratio, LossMode::Margin}) {
            CAPTURE(to_string(v));
            CAPTURE(to_string(loss));
            VariantSpec s = small_spec(v, loss);
            ModelState st = init_model(s, 19);
            std::vector<Eigen::MatrixXd> grads;
            training_loss(st, s, g, &grads);
            auto ptrs = st.params();
            REQUIRE(grads.size() == ptrs.size());

            const double h = 1e-6;
            for (size_t p = 0; p < ptrs.size(); ++p) {
                Eigen::MatrixXd& W = *ptrs[p];
                REQUIRE(grads[p].rows() == W.rows());
                for (long i = 0; i < W.rows(); ++i)
                    for (long j = 0; j < W.cols(); ++j) {
                        double keep = W(i, j);
                        W(i, j) = keep + h;
                        double up = training_loss(st, s, g);
                        W(i, j) = keep - h;
                        double dn = training_loss(st, s, g);
                        W(i, j) = keep;
                        double fd = (up - dn) / (2.0 * h);
                        double got = grads[p](i, j);
                        CAPTURE(ModelState::param_names()[p]);
                        CHECK(std::abs(got - fd) <=
                              1e-4 * std::max(1.0, std::abs(got) + std::abs(fd)));
                    }
            }
        }
    }
}

TEST_CASE("training is deterministic") {
    DiGraph g = random_digraph(10, 0.7, 47);
    VariantSpec s = small_spec(Variant::ProximalDist);
    TrainConfig cfg;
    cfg.max_epochs = 6;
    cfg.pretrain_epochs = 2;
    cfg.seed = 99;
    s.pretrain = PretrainMode::SerialRankSimilarity;
    TrainedModel a = train(g, s, cfg);
    TrainedModel b = train(g, s, cfg);
    CHECK(a.report.selected_epoch == b.report.selected_epoch);
    CHECK(max_abs_diff(a.report.scores, b.report.scores) == 0.0);
    CHECK(max_abs_diff(a.state.Ws1, b.state.Ws1) == 0.0);
    REQUIRE(a.report.history.size() == b.report.history.size());
    for (size_t i = 0; i < a.report.history.size(); ++i)
        CHECK(a.report.history[i].loss == b.report.history[i].loss);
}

TEST_CASE("selection follows the configured metric over eligible epochs") {
    DiGraph g = random_digraph(10, 0.8, 53);
    VariantSpec s = small_spec(Variant::Dist);
    s.pretrain = PretrainMode::NonProximalWarmup;
    TrainConfig cfg;
    cfg.max_epochs = 8;
    cfg.pretrain_epochs = 3;
    cfg.seed = 5;
    TrainedModel tm = train(g, s, cfg);

    REQUIRE(!tm.report.history.empty());
    CHECK(tm.report.history.size() == 11);  // 3 warmup + 8 main
    for (int e = 0; e < 3; ++e) CHECK(tm.report.history[size_t(e)].pretrain);

    // warmup epochs score through the head alone and are not selectable
    CHECK(tm.report.selected_epoch >= 3);
    double best = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    for (const auto& rec : tm.report.history) {
        if (rec.pretrain) continue;
        if (rec.upset_simple < best) {
            best = rec.upset_simple;
            best_epoch = rec.epoch;
        }
    }
    CHECK(tm.report.selected_epoch == best_epoch);
    CHECK(tm.report.final_loss ==
          tm.report.history[size_t(tm.report.selected_epoch)].loss);

    // upset_naive selection plumbs through
    TrainConfig cn = cfg;
    cn.selection = "upset_naive";
    TrainedModel tn = train(g, s, cn);
    double bn = std::numeric_limits<double>::infinity();
    int ben = -1;
    for (const auto& rec : tn.report.history) {
        if (rec.pretrain) continue;
        if (rec.upset_naive < bn) {
            bn = rec.upset_naive;
            ben = rec.epoch;
        }
    }
    CHECK(tn.report.selected_epoch == ben);
}

TEST_CASE("frozen step sizes survive training, free ones move") {
    DiGraph g = random_digraph(9, 0.8, 59);
    VariantSpec s = small_spec(Variant::ProximalDist);
    s.alpha_init = 0.05;
    s.freeze_alpha = true;
    TrainConfig cfg;
    cfg.max_epochs = 4;
    cfg.seed = 3;
    TrainedModel frozen = train(g, s, cfg);
    CHECK((frozen.state.alphas.array() == 0.05).all());

    s.freeze_alpha = false;
    TrainedModel free_a = train(g, s, cfg);
    CHECK(max_abs_diff(free_a.state.alphas, Eigen::MatrixXd::Constant(3, 1, 0.05)) > 0.0);
}

TEST_CASE("default step size warns about the convergence bound") {
    DiGraph g = random_digraph(12, 0.8, 61);
    VariantSpec s = small_spec(Variant::ProximalDist);  // alpha_init 0 -> 1/(n-1)
    TrainConfig cfg;
    cfg.max_epochs = 2;
    TrainedModel tm = train(g, s, cfg);
    bool found = false;
    for (const auto& w : tm.report.warnings)
        if (w.find("step") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("the head variant drives naive upsets to zero on a strict order") {
    DiGraph g = transitive_tournament(20);
    VariantSpec s;
    s.variant = Variant::Dist;
    s.loss = LossMode::Ratio;
    s.pretrain = PretrainMode::None;
    s.k = 2;
    s.d = 8;
    s.hidden = 8;
    TrainConfig cfg;
    cfg.max_epochs = 300;
    cfg.patience = 300;
    cfg.seed = 1;
    TrainedModel tm = train(g, s, cfg);
    double best_naive = std::numeric_limits<double>::infinity();
    for (const auto& rec : tm.report.history) best_naive = std::min(best_naive, rec.upset_naive);
    CHECK(best_naive == 0.0);
}

TEST_CASE("refining a baseline never loses more than a whisker") {
    EroConfig ec;
    ec.n = 60;
    ec.p = 0.9;
    ec.eta = 0.2;
    ec.seed = 71;
    EroSample sample = generate_ero(ec);
    ComparisonMatrices cm = comparison_matrices(sample.graph);
    double base_upset = upset_simple(cm, run_baseline("syncrank", sample.graph).scores);

    VariantSpec s = small_spec(Variant::ProximalBaseline);
    s.baseline = "syncrank";
    s.pretrain = PretrainMode::SerialRankSimilarity;
    TrainConfig cfg;
    cfg.pretrain_epochs = 5;
    cfg.max_epochs = 15;
    cfg.seed = 7;
    TrainedModel tm = train(sample.graph, s, cfg);
    double model_upset = upset_simple(cm, tm.report.scores);
    CHECK(model_upset <= base_upset + 0.05);
}

TEST_CASE("apply_model reproduces the selected scores and transfers across sizes") {
    DiGraph g = random_digraph(10, 0.8, 83);
    VariantSpec s = small_spec(Variant::ProximalBaseline);
    s.pretrain = PretrainMode::SerialRankSimilarity;
    TrainConfig cfg;
    cfg.max_epochs = 5;
    cfg.pretrain_epochs = 2;
    cfg.seed = 17;
    TrainedModel tm = train(g, s, cfg);

    ScoreVector replay = apply_model(tm.state, tm.spec, g);
    CHECK(max_abs_diff(replay, tm.report.scores) == 0.0);

    DiGraph other = random_digraph(14, 0.7, 89);
    ScoreVector transferred = apply_model(tm.state, tm.spec, other);
    CHECK(transferred.size() == 14);
    CHECK(transferred.allFinite());

    // state whose shapes disagree with the feature width is rejected
    ModelState broken = tm.state;
    broken.Ws1 = Eigen::MatrixXd::Zero(6, 4);
    CHECK_THROWS_WITH((void)apply_model(broken, tm.spec, g),
                      doctest::Contains("feature width"));
}

TEST_CASE("checkpoints round-trip losslessly and reject tampering") {
    DiGraph g = random_digraph(8, 0.8, 97);
    VariantSpec s = small_spec(Variant::ProximalDist);
    TrainConfig cfg;
    cfg.max_epochs = 3;
    cfg.seed = 23;
    TrainedModel tm = train(g, s, cfg);

    TempFile f("ckpt.json");
    save_checkpoint(tm, f.path);
    TrainedModel back = load_checkpoint(f.path);
    CHECK(back.spec.variant == tm.spec.variant);
    CHECK(back.spec.gamma == tm.spec.gamma);
    auto pa = tm.state.params();
    auto pb = back.state.params();
    for (size_t i = 0; i < pa.size(); ++i) CHECK(max_abs_diff(*pa[i], *pb[i]) == 0.0);
    CHECK(max_abs_diff(back.report.scores, tm.report.scores) == 0.0);
    CHECK(back.report.selected_epoch == tm.report.selected_epoch);
    CHECK(back.report.history.size() == tm.report.history.size());

    // scores from a reloaded checkpoint replay bit for bit
    CHECK(max_abs_diff(apply_model(back.state, back.spec, g), tm.report.scores) == 0.0);

    std::string text = read_text_file(f.path);
    auto pos = text.find("\"gamma\": 3");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 10, "\"gamma\": 4");
    write_text_file(f.path, text);
    CHECK_THROWS_WITH((void)load_checkpoint(f.path), doctest::Contains("hash mismatch"));

    write_text_file(f.path, "{\"format\": \"other\"}");
    CHECK_THROWS_WITH((void)load_checkpoint(f.path), doctest::Contains("unrecognized checkpoint"));
    write_text_file(f.path, "not json");
    CHECK_THROWS_WITH((void)load_checkpoint(f.path), doctest::Contains("invalid checkpoint"));
}
