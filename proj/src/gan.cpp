#include <cmath>

#include <nlohmann/json.hpp>

#include "tsbench/metrics.hpp"
#include "tsbench/models.hpp"

namespace tsbench {

using ad::Var;
using nlohmann::json;

void GanConfig::validate() const {
    if (latent < 1) throw ParamError("GAN latent width must be >= 1");
    if (lambda_gp < 0.0) throw ParamError("lambda_gp must be >= 0");
    if (n_critic < 1) throw ParamError("n_critic must be >= 1");
}

Var wgan_gradient_penalty(const std::function<Var(const Var&)>& critic, const Var& points) {
    if (!points.requires_grad())
        throw UsageError("gradient penalty needs differentiable interpolates");
    Var score = ad::sum(critic(points));
    Var gx = ad::grad_graph(score, {points})[0]; // rows are independent samples
    Var norm = ad::sqrt(ad::add_scalar(ad::sum_axis(ad::square(gx), 1, false), 1e-12));
    return ad::mean(ad::square(ad::add_scalar(norm, -1.0)));
}

Var wgan_interpolates(const ad::Tensor& real, const ad::Tensor& fake, Rng& rng) {
    if (real.shape != fake.shape) throw SizingError("interpolates: real/fake shapes differ");
    std::size_t b = real.shape[0], w = real.size() / b;
    ad::Tensor interp(real.shape);
    for (std::size_t i = 0; i < b; ++i) {
        double u = rng.uniform();
        for (std::size_t j = 0; j < w; ++j)
            interp.v[i * w + j] = u * real.v[i * w + j] + (1.0 - u) * fake.v[i * w + j];
    }
    return ad::leaf(std::move(interp));
}

VanillaGan::VanillaGan(const GanConfig& cfg, const ModelGeometry& geo, ConditionMode mode,
                       std::uint64_t seed)
    : GenerativeModel(geo, mode), cfg_(cfg) {
    cfg_.validate();
    geo.validate(mode);
    Rng rng(derive_seed(seed, "vanilla_gan/init"));
    cond_enc_ = ConditionEncoder(params_, "cond", mode, geo, cfg_.cond_width, rng);
    std::size_t flat = geo.t * geo.d;
    std::size_t cw = cond_enc_.width();
    generator_ = nn::Mlp(params_, "gen", cfg_.latent + cw, cfg_.hidden, flat, rng);
    critic_ = nn::Mlp(params_, "critic", flat + cw, cfg_.hidden, 1, rng);

    // split the parameter list: generator updates never touch critic weights
    for (const auto& [pname, var] : params_.entries()) {
        if (pname.rfind("critic", 0) == 0)
            critic_params_.push_back(var);
        else
            gen_params_.push_back(var); // generator + condition encoder
    }
    gen_opt_ = nn::Adam(1e-4, 0.5, 0.9);
    critic_opt_ = nn::Adam(1e-4, 0.5, 0.9);
}

std::string VanillaGan::config_json() const {
    json j;
    j["latent"] = cfg_.latent;
    j["hidden"] = cfg_.hidden;
    j["cond_width"] = cfg_.cond_width;
    j["lambda_gp"] = cfg_.lambda_gp;
    j["n_critic"] = cfg_.n_critic;
    j["val_sample_cap"] = cfg_.val_sample_cap;
    return j.dump();
}

Var VanillaGan::critic_forward(const Var& x_flat, const Var& cond_emb) const {
    Var in = cond_emb.defined() ? ad::concat({x_flat, cond_emb}, 1) : x_flat;
    return critic_(in);
}

Var VanillaGan::generator_forward(const Var& z, const Var& cond_emb) const {
    Var in = cond_emb.defined() ? ad::concat({z, cond_emb}, 1) : z;
    return generator_(in);
}

WganLossTerms VanillaGan::wgan_losses(const Array3& real, const Array3& fake,
                                      const ConditionBatch& cond, std::uint64_t seed) {
    check_condition(cond);
    if (!real.same_shape(fake)) throw SizingError("wgan_losses: real/fake shapes differ");
    Rng rng(seed);
    std::size_t b = real.n, w = real.t * real.d;

    Var emb = cond_enc_(cond);
    Var real_v = ad::constant(ad::Tensor({b, w}, real.v));
    Var fake_v = ad::constant(ad::Tensor({b, w}, fake.v));

    Var interp = wgan_interpolates(ad::Tensor({b, w}, real.v), ad::Tensor({b, w}, fake.v), rng);
    auto critic_fn = [&](const Var& x) { return critic_forward(x, emb); };
    Var penalty = wgan_gradient_penalty(critic_fn, interp);

    Var drift = ad::sub(ad::mean(critic_forward(fake_v, emb)), ad::mean(critic_forward(real_v, emb)));
    Var critic_loss = ad::add(drift, ad::mul_scalar(penalty, cfg_.lambda_gp));
    Var gen_loss = ad::neg(ad::mean(critic_forward(fake_v, emb)));

    WganLossTerms terms;
    terms.critic_loss = critic_loss.val().v[0];
    terms.generator_loss = gen_loss.val().v[0];
    terms.penalty = penalty.val().v[0];
    return terms;
}

double VanillaGan::critic_loss_and_grads(const Array3& real, const ConditionBatch& cond,
                                         std::uint64_t seed, std::vector<ad::Tensor>* grads) {
    check_condition(cond);
    std::size_t b = real.n, w = real.t * real.d;
    Rng rng(seed);

    Var emb = cond_enc_(cond);
    ad::Tensor z({b, cfg_.latent});
    for (double& x : z.v) x = rng.normal();
    Var fake = generator_forward(ad::constant(std::move(z)), emb).detach();
    Var real_v = ad::constant(ad::Tensor({b, w}, real.v));

    Var interp = wgan_interpolates(ad::Tensor({b, w}, real.v), fake.val(), rng);
    auto critic_fn = [&](const Var& x) { return critic_forward(x, emb); };
    Var penalty = wgan_gradient_penalty(critic_fn, interp);
    Var critic_loss = ad::add(
        ad::sub(ad::mean(critic_forward(fake, emb)), ad::mean(critic_forward(real_v, emb))),
        ad::mul_scalar(penalty, cfg_.lambda_gp));
    if (grads) *grads = ad::grad(critic_loss, critic_params_);
    return critic_loss.val().v[0];
}

double VanillaGan::generator_loss_and_grads(std::size_t batch, const ConditionBatch& cond,
                                            std::uint64_t seed, std::vector<ad::Tensor>* grads) {
    check_condition(cond);
    Rng rng(seed);
    ad::Tensor z({batch, cfg_.latent});
    for (double& x : z.v) x = rng.normal();
    Var emb = cond_enc_(cond);
    Var fake = generator_forward(ad::constant(std::move(z)), emb);
    Var gen_loss = ad::neg(ad::mean(critic_forward(fake, emb)));
    if (grads) *grads = ad::grad(gen_loss, gen_params_);
    return gen_loss.val().v[0];
}

double VanillaGan::train_step(const Array3& targets, const ConditionBatch& cond, Rng& rng) {
    std::vector<ad::Tensor> cgrads;
    double closs = critic_loss_and_grads(targets, cond, rng.next_u64(), &cgrads);
    nn::clip_grad_norm(cgrads, 1.0);
    critic_opt_.step(critic_params_, cgrads);
    ++critic_steps_;

    if (critic_steps_ % cfg_.n_critic == 0) {
        std::vector<ad::Tensor> ggrads;
        generator_loss_and_grads(targets.n, cond, rng.next_u64(), &ggrads);
        nn::clip_grad_norm(ggrads, 1.0);
        gen_opt_.step(gen_params_, ggrads);
    }
    return closs;
}

double VanillaGan::validation_metric(const TrainingDataset& val, std::uint64_t seed) {
    check_condition(val.cond);
    ad::NoGradGuard guard;
    // Wasserstein distance between validation data and a fixed-size sample
    std::size_t n_gen = std::min<std::size_t>(cfg_.val_sample_cap, val.n());
    std::vector<std::size_t> idx(n_gen);
    for (std::size_t i = 0; i < n_gen; ++i) idx[i] = i;
    ConditionBatch cond = val.cond.subset(idx);
    Rng rng(derive_seed(seed, "vanilla_gan/val_sample"));
    Array3 fake = sample_batch(cond, rng);
    return wasserstein_marginal_mean(val.targets, fake);
}

Array3 VanillaGan::sample_batch(const ConditionBatch& cond, Rng& rng) {
    std::size_t b = cond.rows;
    ad::Tensor z({b, cfg_.latent});
    for (double& x : z.v) x = rng.normal();
    Var emb = cond_enc_(cond);
    Var out = generator_forward(ad::constant(std::move(z)), emb);
    Array3 res(b, geo_.t, geo_.d);
    res.v = out.val().v;
    return res;
}

} // namespace tsbench
