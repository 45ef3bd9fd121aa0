#ifndef TSBENCH_MODELS_HPP
#define TSBENCH_MODELS_HPP

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsbench/autodiff.hpp"
#include "tsbench/nn.hpp"
#include "tsbench/rng.hpp"
#include "tsbench/schedule.hpp"
#include "tsbench/series.hpp"

namespace tsbench {

// ---------------------------------------------------------------------------
// Conditions
// ---------------------------------------------------------------------------

enum class ConditionMode { none, class_label, history, mask };

std::string to_string(ConditionMode m);
ConditionMode condition_mode_from_string(const std::string& s);

/// Row-aligned batch of conditioning inputs for one of the four modes.
struct ConditionBatch {
    ConditionMode mode = ConditionMode::none;
    std::size_t rows = 0;
    std::vector<int> labels; // class_label
    Array3 history;          // history: [B, L_obs, D]
    Array3 observed;         // mask: X~ = X (.) m, [B, T, D]
    Array3 mask;             // mask: m, [B, T, D]

    static ConditionBatch none(std::size_t rows);
    static ConditionBatch of_labels(std::vector<int> labels);
    static ConditionBatch of_history(Array3 history);
    static ConditionBatch of_mask(Array3 observed, Array3 mask);

    ConditionBatch subset(const std::vector<std::size_t>& idx) const;
    void validate() const;
};

/// Targets plus aligned conditions; what a model trains on.
struct TrainingDataset {
    Array3 targets; // [N, T, D]
    ConditionBatch cond;

    std::size_t n() const { return targets.n; }
};

// ---------------------------------------------------------------------------
// Trainer
// ---------------------------------------------------------------------------

struct TrainerConfig {
    std::size_t max_epochs = 300;
    std::size_t patience = 10;
    std::size_t batch_size = 64;
    double lr = 1e-3;
    double grad_clip = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
    std::string to_json() const;
    static TrainerConfig from_json(const std::string& text);
};

struct TrainingLog {
    std::vector<double> val_metrics; // one entry per epoch run
    std::size_t stop_epoch = 0;      // epochs actually executed
    std::size_t best_epoch = 0;      // 1-based epoch of the restored parameters
    double best_metric = 0.0;
};

/// Output geometry plus condition geometry.
struct ModelGeometry {
    std::size_t t = 0, d = 0;           // generated window shape
    std::size_t cond_t = 0, cond_d = 0; // history/mask condition shape
    int n_classes = 0;                  // class-label conditions

    void validate(ConditionMode mode) const;
};

// ---------------------------------------------------------------------------
// Condition encoder: embedding lookup for class labels, MLP over the
// flattened conditioning array for history/mask conditions.
// ---------------------------------------------------------------------------

class ConditionEncoder {
public:
    ConditionEncoder() = default;
    ConditionEncoder(nn::ParamStore& ps, const std::string& name, ConditionMode mode,
                     const ModelGeometry& geo, std::size_t width, Rng& rng);

    /// [B, width] embedding; undefined Var for mode none.
    ad::Var operator()(const ConditionBatch& cond) const;

    std::size_t width() const { return mode_ == ConditionMode::none ? 0 : width_; }
    const nn::Embedding& label_table() const { return emb_; }

private:
    ConditionMode mode_ = ConditionMode::none;
    std::size_t width_ = 0;
    nn::Embedding emb_;
    nn::Mlp mlp_;
};

// ---------------------------------------------------------------------------
// Base model contract: train step, validation step, sample.
// ---------------------------------------------------------------------------

class GenerativeModel {
public:
    virtual ~GenerativeModel() = default;

    virtual std::string name() const = 0;
    virtual std::string config_json() const = 0;

    ConditionMode condition_mode() const { return cond_mode_; }
    const ModelGeometry& geometry() const { return geo_; }
    bool is_fitted() const { return fitted_; }

    nn::ParamStore& param_store() { return params_; }
    const nn::ParamStore& param_store() const { return params_; }

    /// One optimization step on a batch; returns the training loss.
    virtual double train_step(const Array3& targets, const ConditionBatch& cond, Rng& rng) = 0;

    /// Family-specific validation metric (lower is better), a pure function
    /// of (parameters, val, seed).
    virtual double validation_metric(const TrainingDataset& val, std::uint64_t seed) = 0;

    /// Early-stopped training: halts at min(last-improvement + patience,
    /// max_epochs); best-validation parameters are restored.
    TrainingLog fit(const TrainingDataset& train, const TrainingDataset& val,
                    const TrainerConfig& cfg);

    /// [n_draws * B, T, D]; row s*B + j is draw s conditioned on row j.
    /// A model trained with one condition mode rejects other modes.
    Array3 sample(std::size_t n_draws, const ConditionBatch& cond, std::uint64_t seed,
                  bool allow_unfitted = false);

    void save_checkpoint(const std::filesystem::path& dir, const std::string& scaler_json = "",
                         const std::string& trainer_json = "") const;

protected:
    GenerativeModel(ModelGeometry geo, ConditionMode mode) : geo_(geo), cond_mode_(mode) {}

    /// One batch of draws [B, T, D] for the given conditions.
    virtual Array3 sample_batch(const ConditionBatch& cond, Rng& rng) = 0;

    /// Called by fit before the first epoch; records per-feature data range.
    virtual void at_fit_start(const TrainingDataset& train);

    void check_condition(const ConditionBatch& cond) const;
    void check_geometry(const TrainingDataset& ds) const;

    ModelGeometry geo_;
    ConditionMode cond_mode_ = ConditionMode::none;
    nn::ParamStore params_;
    bool fitted_ = false;
    std::vector<double> data_min_, data_max_; // per feature, from fit
    friend std::unique_ptr<GenerativeModel> load_checkpoint(const std::filesystem::path&,
                                                            std::string*, std::string*);
};

// ---------------------------------------------------------------------------
// VanillaVAE: MLP encoder/decoder trained as a beta-VAE.
// ---------------------------------------------------------------------------

struct VaeConfig {
    std::size_t latent = 16;
    std::vector<std::size_t> hidden = {128, 128, 128};
    double beta = 1.0;
    std::size_t cond_width = 16;

    void validate() const;
};

/// Closed-form KL divergence between N(mu, diag(exp(logvar))) and N(0, I):
/// sum over dims of 0.5 (mu^2 + sigma^2 - 1 - log sigma^2).
double gaussian_kl(const std::vector<double>& mu, const std::vector<double>& logvar);

class VanillaVae final : public GenerativeModel {
public:
    VanillaVae(const VaeConfig& cfg, const ModelGeometry& geo, ConditionMode mode,
               std::uint64_t seed);

    std::string name() const override { return "vanilla_vae"; }
    std::string config_json() const override;

    /// (reconstruction, kl), both batch means; total loss = recon + beta*kl.
    std::pair<double, double> elbo_terms(const Array3& batch, const ConditionBatch& cond,
                                         std::uint64_t noise_seed);

    /// Training loss for a seeded reparameterization draw; optionally the
    /// parameter gradients, without updating anything.
    double loss_and_grads(const Array3& targets, const ConditionBatch& cond, std::uint64_t seed,
                          std::vector<ad::Tensor>* grads);

    double train_step(const Array3& targets, const ConditionBatch& cond, Rng& rng) override;
    double validation_metric(const TrainingDataset& val, std::uint64_t seed) override;

    const VaeConfig& config() const { return cfg_; }

protected:
    Array3 sample_batch(const ConditionBatch& cond, Rng& rng) override;

private:
    ad::Var loss_terms(const ad::Var& x_flat, const ConditionBatch& cond, const ad::Tensor& eps,
                       ad::Var* recon_out, ad::Var* kl_out);

    VaeConfig cfg_;
    ConditionEncoder cond_enc_;
    nn::Mlp encoder_, decoder_;
    nn::Adam opt_;
};

// ---------------------------------------------------------------------------
// VanillaGAN: MLP generator/critic trained as a Wasserstein GAN with
// gradient penalty.
// ---------------------------------------------------------------------------

struct GanConfig {
    std::size_t latent = 16;
    std::vector<std::size_t> hidden = {128, 128, 128};
    std::size_t cond_width = 16;
    double lambda_gp = 10.0;
    std::size_t n_critic = 5;
    std::size_t val_sample_cap = 1024;

    void validate() const;
};

struct WganLossTerms {
    double critic_loss = 0.0;
    double generator_loss = 0.0;
    double penalty = 0.0; // unweighted mean((|grad| - 1)^2)
};

/// mean((||d critic/d x||_2 - 1)^2) at the given points; `points` must be a
/// leaf with requires_grad so the inner gradient can be formed.
ad::Var wgan_gradient_penalty(const std::function<ad::Var(const ad::Var&)>& critic,
                              const ad::Var& points);

/// Per-row random interpolates u*real + (1-u)*fake as a differentiable leaf.
ad::Var wgan_interpolates(const ad::Tensor& real, const ad::Tensor& fake, Rng& rng);

class VanillaGan final : public GenerativeModel {
public:
    VanillaGan(const GanConfig& cfg, const ModelGeometry& geo, ConditionMode mode,
               std::uint64_t seed);

    std::string name() const override { return "vanilla_gan"; }
    std::string config_json() const override;

    /// Loss terms for a real/fake pair without touching the parameters.
    WganLossTerms wgan_losses(const Array3& real, const Array3& fake, const ConditionBatch& cond,
                              std::uint64_t seed);

    /// Critic loss (drift + lambda * penalty) against a seeded fake batch;
    /// gradients are w.r.t. the critic parameters only.
    double critic_loss_and_grads(const Array3& real, const ConditionBatch& cond,
                                 std::uint64_t seed, std::vector<ad::Tensor>* grads);

    /// Generator loss -mean critic(G(z)); gradients w.r.t. the generator
    /// (and condition-encoder) parameters.
    double generator_loss_and_grads(std::size_t batch, const ConditionBatch& cond,
                                    std::uint64_t seed, std::vector<ad::Tensor>* grads);

    const std::vector<ad::Var>& critic_params() const { return critic_params_; }
    const std::vector<ad::Var>& generator_params() const { return gen_params_; }

    double train_step(const Array3& targets, const ConditionBatch& cond, Rng& rng) override;
    double validation_metric(const TrainingDataset& val, std::uint64_t seed) override;

    const GanConfig& config() const { return cfg_; }

protected:
    Array3 sample_batch(const ConditionBatch& cond, Rng& rng) override;

private:
    ad::Var critic_forward(const ad::Var& x_flat, const ad::Var& cond_emb) const;
    ad::Var generator_forward(const ad::Var& z, const ad::Var& cond_emb) const;

    GanConfig cfg_;
    ConditionEncoder cond_enc_;
    nn::Mlp generator_, critic_;
    nn::Adam gen_opt_, critic_opt_;
    std::vector<ad::Var> gen_params_, critic_params_;
    std::size_t critic_steps_ = 0;
};

// ---------------------------------------------------------------------------
// VanillaDDPM: transformer denoiser, linear/cosine schedule, predicts
// epsilon or x0.
// ---------------------------------------------------------------------------

enum class DdpmPredict { epsilon, x0 };

struct DdpmConfig {
    std::size_t steps = 1000;
    ScheduleKind schedule = ScheduleKind::linear;
    double beta_lo = 1e-4;
    double beta_hi = 0.02;
    DdpmPredict predict = DdpmPredict::epsilon;
    std::size_t width = 128;
    std::size_t blocks = 4;
    std::size_t heads = 4;

    void validate() const;
};

/// x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps, 1 <= t <= n_steps.
Array3 ddpm_forward_diffuse(const Array3& x0, std::size_t t, const NoiseSchedule& schedule,
                            const Array3& eps);

using DenoiserFn =
    std::function<ad::Var(const ad::Var& x_t, const std::vector<std::size_t>& t)>;

/// MSE between the denoiser output and the mode's target at the given
/// per-row steps.
ad::Var ddpm_training_loss(const DenoiserFn& denoiser, const ad::Var& x0,
                           const std::vector<std::size_t>& t, const ad::Var& eps,
                           DdpmPredict mode, const NoiseSchedule& schedule);

class VanillaDdpm final : public GenerativeModel {
public:
    VanillaDdpm(const DdpmConfig& cfg, const ModelGeometry& geo, ConditionMode mode,
                std::uint64_t seed);

    std::string name() const override { return "vanilla_ddpm"; }
    std::string config_json() const override;

    /// Training loss at seeded (t, eps) draws; optional parameter gradients.
    double loss_and_grads(const Array3& targets, const ConditionBatch& cond, std::uint64_t seed,
                          std::vector<ad::Tensor>* grads);

    double train_step(const Array3& targets, const ConditionBatch& cond, Rng& rng) override;
    double validation_metric(const TrainingDataset& val, std::uint64_t seed) override;

    const NoiseSchedule& schedule() const { return schedule_; }
    const DdpmConfig& config() const { return cfg_; }

    /// Denoiser closure bound to the given conditions.
    DenoiserFn denoiser(const ConditionBatch& cond) const;

protected:
    Array3 sample_batch(const ConditionBatch& cond, Rng& rng) override;

private:
    ad::Var denoise(const ad::Var& x_t, const std::vector<std::size_t>& t,
                    const ad::Var& cond_emb) const;

    DdpmConfig cfg_;
    NoiseSchedule schedule_;
    ConditionEncoder cond_enc_;
    nn::Linear token_in_, token_out_;
    nn::Mlp step_mlp_;
    struct Block {
        nn::Linear cond_proj;
        nn::LayerNorm ln1, ln2;
        nn::Linear qkv, attn_out;
        nn::Linear mlp1, mlp2;
    };
    std::vector<Block> blocks_;
    nn::LayerNorm final_ln_;
    nn::Adam opt_;
};

// ---------------------------------------------------------------------------
// VanillaMAF: masked autoregressive flow over flattened windows.
// ---------------------------------------------------------------------------

struct MafConfig {
    std::size_t n_layers = 5;
    std::vector<std::size_t> hidden = {128, 128, 128};
    std::size_t cond_width = 16;
    double scale_cap = 5.0; // soft bound on log-scales

    void validate() const;
};

struct MafForwardResult {
    ad::Tensor z;                // [B, W]
    std::vector<double> log_det; // per row
};

class VanillaMaf final : public GenerativeModel {
public:
    VanillaMaf(const MafConfig& cfg, const ModelGeometry& geo, ConditionMode mode,
               std::uint64_t seed);

    std::string name() const override { return "vanilla_maf"; }
    std::string config_json() const override;

    /// Data -> latent with the triangular-Jacobian log-determinant.
    MafForwardResult forward_flat(const ad::Tensor& x, const ConditionBatch& cond) const;
    /// Latent -> data by sequential per-coordinate inversion.
    ad::Tensor inverse_flat(const ad::Tensor& z, const ConditionBatch& cond) const;

    /// Mean log-likelihood of a flattened batch.
    double log_likelihood(const ad::Tensor& x, const ConditionBatch& cond) const;

    /// Negative log-likelihood loss; optional parameter gradients.
    double loss_and_grads(const Array3& targets, const ConditionBatch& cond,
                          std::vector<ad::Tensor>* grads);

    double train_step(const Array3& targets, const ConditionBatch& cond, Rng& rng) override;
    double validation_metric(const TrainingDataset& val, std::uint64_t seed) override;

    const MafConfig& config() const { return cfg_; }

protected:
    Array3 sample_batch(const ConditionBatch& cond, Rng& rng) override;

private:
    struct Made {
        std::vector<nn::Linear> linears;
        std::vector<ad::Var> masks;  // constants, aligned with linears
        std::vector<int> in_degrees; // degree per flattened coordinate
    };

    // (mu, alpha) of one MADE given current x and condition embedding
    std::pair<ad::Var, ad::Var> made_forward(const Made& made, const ad::Var& x,
                                             const ad::Var& cond_emb, std::size_t layer_idx) const;

    MafConfig cfg_;
    ConditionEncoder cond_enc_;
    std::vector<Made> layers_;
    nn::Adam opt_;
};

// ---------------------------------------------------------------------------
// Factory / checkpoints
// ---------------------------------------------------------------------------

/// Build a model by name ("vanilla_vae", "vanilla_gan", "vanilla_ddpm",
/// "vanilla_maf") from a JSON config ("{}" for defaults). Unknown keys are
/// rejected.
std::unique_ptr<GenerativeModel> make_model(const std::string& name,
                                            const std::string& config_json,
                                            const ModelGeometry& geo, ConditionMode mode,
                                            std::uint64_t seed);

/// Restore a model (parameters + config + fitted flag) from a checkpoint
/// directory. Optionally returns the scaler / trainer JSON stored with it.
std::unique_ptr<GenerativeModel> load_checkpoint(const std::filesystem::path& dir,
                                                 std::string* scaler_json = nullptr,
                                                 std::string* trainer_json = nullptr);

} // namespace tsbench

#endif
