#include <cmath>

#include <nlohmann/json.hpp>

#include "tsbench/models.hpp"

namespace tsbench {

using ad::Var;
using nlohmann::json;

void VaeConfig::validate() const {
    if (latent < 1) throw ParamError("VAE latent width must be >= 1");
    if (beta < 0.0) throw ParamError("VAE beta must be >= 0");
}

double gaussian_kl(const std::vector<double>& mu, const std::vector<double>& logvar) {
    if (mu.size() != logvar.size()) throw SizingError("gaussian_kl: size mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        kl += 0.5 * (mu[i] * mu[i] + std::exp(logvar[i]) - 1.0 - logvar[i]);
    return kl;
}

VanillaVae::VanillaVae(const VaeConfig& cfg, const ModelGeometry& geo, ConditionMode mode,
                       std::uint64_t seed)
    : GenerativeModel(geo, mode), cfg_(cfg) {
    cfg_.validate();
    geo.validate(mode);
    Rng rng(derive_seed(seed, "vanilla_vae/init"));
    cond_enc_ = ConditionEncoder(params_, "cond", mode, geo, cfg_.cond_width, rng);
    std::size_t flat = geo.t * geo.d;
    std::size_t cw = cond_enc_.width();
    encoder_ = nn::Mlp(params_, "enc", flat + cw, cfg_.hidden, 2 * cfg_.latent, rng);
    decoder_ = nn::Mlp(params_, "dec", cfg_.latent + cw, cfg_.hidden, flat, rng);
    opt_ = nn::Adam(1e-3);
}

std::string VanillaVae::config_json() const {
    json j;
    j["latent"] = cfg_.latent;
    j["hidden"] = cfg_.hidden;
    j["beta"] = cfg_.beta;
    j["cond_width"] = cfg_.cond_width;
    return j.dump();
}

Var VanillaVae::loss_terms(const Var& x_flat, const ConditionBatch& cond, const ad::Tensor& eps,
                           Var* recon_out, Var* kl_out) {
    std::size_t b = x_flat.shape()[0];
    Var emb = cond_enc_(cond);
    Var enc_in = emb.defined() ? ad::concat({x_flat, emb}, 1) : x_flat;
    Var stats = encoder_(enc_in);
    Var mu = ad::slice(stats, 1, 0, cfg_.latent);
    Var logvar = ad::slice(stats, 1, cfg_.latent, 2 * cfg_.latent);

    Var z = ad::add(mu, ad::mul(ad::exp(ad::mul_scalar(logvar, 0.5)), ad::constant(eps)));
    Var dec_in = emb.defined() ? ad::concat({z, emb}, 1) : z;
    Var xhat = decoder_(dec_in);

    // reconstruction: batch mean of the per-sample squared error
    Var recon = ad::mul_scalar(ad::sum(ad::square(ad::sub(xhat, x_flat))),
                               1.0 / static_cast<double>(b));
    // kl: batch mean of sum_dims 0.5 (mu^2 + sigma^2 - 1 - log sigma^2)
    Var kl = ad::mul_scalar(
        ad::sum(ad::mul_scalar(
            ad::sub(ad::sub(ad::add(ad::square(mu), ad::exp(logvar)), ad::constant(1.0)), logvar),
            0.5)),
        1.0 / static_cast<double>(b));

    if (recon_out) *recon_out = recon;
    if (kl_out) *kl_out = kl;
    return ad::add(recon, ad::mul_scalar(kl, cfg_.beta));
}

std::pair<double, double> VanillaVae::elbo_terms(const Array3& batch, const ConditionBatch& cond,
                                                 std::uint64_t noise_seed) {
    check_condition(cond);
    ad::NoGradGuard guard;
    Rng rng(noise_seed);
    ad::Tensor eps({batch.n, cfg_.latent});
    for (double& x : eps.v) x = rng.normal();
    Var x = ad::constant(ad::Tensor({batch.n, batch.t * batch.d}, batch.v));
    Var recon, kl;
    loss_terms(x, cond, eps, &recon, &kl);
    return {recon.val().v[0], kl.val().v[0]};
}

double VanillaVae::loss_and_grads(const Array3& targets, const ConditionBatch& cond,
                                  std::uint64_t seed, std::vector<ad::Tensor>* grads) {
    check_condition(cond);
    Rng rng(seed);
    ad::Tensor eps({targets.n, cfg_.latent});
    for (double& x : eps.v) x = rng.normal();
    Var x = ad::constant(ad::Tensor({targets.n, targets.t * targets.d}, targets.v));
    Var loss = loss_terms(x, cond, eps, nullptr, nullptr);
    if (grads) *grads = ad::grad(loss, params_.vars());
    return loss.val().v[0];
}

double VanillaVae::train_step(const Array3& targets, const ConditionBatch& cond, Rng& rng) {
    std::vector<ad::Tensor> grads;
    double loss = loss_and_grads(targets, cond, rng.next_u64(), &grads);
    nn::clip_grad_norm(grads, 1.0);
    auto params = params_.vars();
    opt_.step(params, grads);
    return loss;
}

double VanillaVae::validation_metric(const TrainingDataset& val, std::uint64_t seed) {
    check_condition(val.cond);
    ad::NoGradGuard guard;
    Rng rng(seed);
    ad::Tensor eps({val.n(), cfg_.latent});
    for (double& x : eps.v) x = rng.normal();
    Var x = ad::constant(ad::Tensor({val.n(), val.targets.t * val.targets.d}, val.targets.v));
    Var loss = loss_terms(x, val.cond, eps, nullptr, nullptr);
    return loss.val().v[0];
}

Array3 VanillaVae::sample_batch(const ConditionBatch& cond, Rng& rng) {
    std::size_t b = cond.rows;
    ad::Tensor z({b, cfg_.latent});
    for (double& x : z.v) x = rng.normal();
    Var emb = cond_enc_(cond);
    Var zin = ad::constant(std::move(z));
    Var dec_in = emb.defined() ? ad::concat({zin, emb}, 1) : zin;
    Var xhat = decoder_(dec_in);
    Array3 out(b, geo_.t, geo_.d);
    out.v = xhat.val().v;
    return out;
}

} // namespace tsbench
