#pragma once

#include <cstdint>
#include <optional>

#include "rankforge/autodiff.hpp"
#include "rankforge/baselines.hpp"

namespace rankforge {

enum class Variant { Dist, InnerProduct, ProximalDist, ProximalInnerProduct, ProximalBaseline };
enum class LossMode { Ratio, Margin, Sum };
enum class PretrainMode { None, NonProximalWarmup, SerialRankSimilarity };

Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);
LossMode loss_mode_from_string(const std::string& s);
std::string to_string(LossMode m);
PretrainMode pretrain_mode_from_string(const std::string& s);
std::string to_string(PretrainMode m);

struct VariantSpec {
    Variant variant = Variant::ProximalDist;
    LossMode loss = LossMode::Ratio;
    PretrainMode pretrain = PretrainMode::SerialRankSimilarity;
    std::string baseline;                 ///< initial-guess source; set iff ProximalBaseline
    int k = 5;                            ///< Hermitian eigenvector pairs in the input features
    int d = 16;                           ///< embedding dimension
    int hidden = 0;                       ///< hidden width per direction; 0 means 2 d
    int gamma = 5;                        ///< unfolded proximal steps
    double alpha_init = 0.0;              ///< 0 means 1/(n-1)
    bool freeze_alpha = false;
    bool proximal() const {
        return variant == Variant::ProximalDist || variant == Variant::ProximalInnerProduct ||
               variant == Variant::ProximalBaseline;
    }
    int hidden_or_default() const { return hidden > 0 ? hidden : 2 * d; }
};

struct TrainConfig {
    int max_epochs = 1000;
    int patience = 200;       ///< epochs without a training-loss improvement
    int pretrain_epochs = 50;
    double lr = 0.01;         ///< Adam rate; the proximal SGD phase uses 10x
    double weight_decay = 5e-4;
    std::string selection = "upset_simple";  ///< or "upset_naive"
    std::uint64_t seed = 0;
};

/// All trainable parameters. Scalars live in 1x1 matrices so optimizers and
/// serialization can treat parameters uniformly.
struct ModelState {
    Eigen::MatrixXd Ws1, Ws2;  ///< source-direction hop weights (2k x h, h x h)
    Eigen::MatrixXd Wt1, Wt2;  ///< target-direction hop weights
    Eigen::MatrixXd Wout;      ///< 2h x d projection
    Eigen::MatrixXd a;         ///< d x 1 scoring anchor
    Eigen::MatrixXd b;         ///< 1x1 inner-product bias
    Eigen::MatrixXd sigma;     ///< 1x1 kernel width
    Eigen::MatrixXd alphas;    ///< gamma x 1 proximal step sizes

    std::vector<Eigen::MatrixXd*> params();
    std::vector<const Eigen::MatrixXd*> params() const;
    static const std::vector<std::string>& param_names();
};

ModelState init_model(const VariantSpec& spec, std::uint64_t seed);

struct EpochRecord {
    int epoch = 0;
    bool pretrain = false;
    double loss = 0.0;
    double upset_simple = 0.0;
    double upset_naive = 0.0;
    double upset_ratio = 0.0;
};

struct TrainReport {
    std::vector<EpochRecord> history;
    int selected_epoch = -1;
    ScoreVector scores;  ///< output of the selected epoch (pre-transform)
    double final_loss = 0.0;
    double wall_seconds = 0.0;  ///< not serialized; outputs stay byte-stable
    std::vector<std::string> warnings;
};

struct TrainedModel {
    VariantSpec spec;
    ModelState state;
    TrainReport report;
};

/// Node embeddings: two rounds of relu message passing along each edge
/// direction on the self-looped row-normalized adjacency, concatenated and
/// projected to d columns.
Eigen::MatrixXd embed(const ModelState& state, const DiGraph& g, const Eigen::MatrixXd& X);

/// exp(-||a - z_i||^2 / (sigma^2 d)), in (0, 1].
ScoreVector head_dist(const ModelState& state, const Eigen::MatrixXd& Z);

/// sigmoid(z_i . a + b), in (0, 1).
ScoreVector head_inner(const ModelState& state, const Eigen::MatrixXd& Z);

/// S_ij = exp(-||z_i - z_j||^2 / (sigma^2 d)): symmetric, unit diagonal,
/// positive semidefinite.
Eigen::MatrixXd similarity_matrix(const ModelState& state, const Eigen::MatrixXd& Z);

/// One forward pass of the given variant; proximal variants refine their
/// initial guess through the unfolded steps. baseline_r0 must be supplied
/// exactly when the variant is ProximalBaseline. Returns raw scores
/// (proximal: unit-norm zero-sum; otherwise positive head outputs).
ScoreVector forward_variant(const ModelState& state, const VariantSpec& spec, const DiGraph& g,
                            const std::optional<ScoreVector>& baseline_r0 = std::nullopt);

/// Main-phase training loss for one forward pass; fills per-parameter
/// gradients (in params() order) when grads is non-null.
double training_loss(const ModelState& state, const VariantSpec& spec, const DiGraph& g,
                     std::vector<Eigen::MatrixXd>* grads = nullptr);

TrainedModel train(const DiGraph& g, const VariantSpec& spec, const TrainConfig& cfg);

/// Forward pass with a trained state on a possibly different graph of any
/// size (weights are size-independent). On the training graph this
/// reproduces the selected-epoch scores exactly.
ScoreVector apply_model(const ModelState& state, const VariantSpec& spec, const DiGraph& g);

void save_checkpoint(const TrainedModel& tm, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

}  // namespace rankforge
