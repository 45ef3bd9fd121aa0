#include <cmath>

#include <nlohmann/json.hpp>

#include "tsbench/models.hpp"

namespace tsbench {

using ad::Var;
using nlohmann::json;

void DdpmConfig::validate() const {
    if (steps < 1) throw ParamError("DDPM needs steps >= 1");
    if (width < 1 || blocks < 1 || heads < 1) throw ParamError("DDPM backbone sizes must be positive");
    if (width % heads != 0) throw ParamError("DDPM width must be divisible by heads");
}

Array3 ddpm_forward_diffuse(const Array3& x0, std::size_t t, const NoiseSchedule& schedule,
                            const Array3& eps) {
    if (t < 1 || t > schedule.n_steps)
        throw ParamError("diffusion step t=" + std::to_string(t) + " outside [1," +
                         std::to_string(schedule.n_steps) + "]");
    if (!x0.same_shape(eps)) throw SizingError("forward diffusion: x0/eps shapes differ");
    double ab = schedule.alpha_bar(t);
    double c1 = std::sqrt(ab), c2 = std::sqrt(1.0 - ab);
    Array3 out = x0;
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = c1 * x0.v[i] + c2 * eps.v[i];
    return out;
}

ad::Var ddpm_training_loss(const DenoiserFn& denoiser, const Var& x0,
                           const std::vector<std::size_t>& t, const Var& eps, DdpmPredict mode,
                           const NoiseSchedule& schedule) {
    std::size_t b = x0.shape()[0];
    if (t.size() != b) throw SizingError("ddpm loss: one step index per row");
    ad::Tensor c1({b, 1, 1}), c2({b, 1, 1});
    for (std::size_t i = 0; i < b; ++i) {
        if (t[i] < 1 || t[i] > schedule.n_steps) throw ParamError("diffusion step out of range");
        double ab = schedule.alpha_bar(t[i]);
        c1.v[i] = std::sqrt(ab);
        c2.v[i] = std::sqrt(1.0 - ab);
    }
    Var x_t = ad::add(ad::mul(x0, ad::constant(std::move(c1))),
                      ad::mul(eps, ad::constant(std::move(c2))));
    Var out = denoiser(x_t, t);
    Var target = (mode == DdpmPredict::epsilon) ? eps : x0;
    return ad::mean(ad::square(ad::sub(out, target)));
}

namespace {

// sinusoidal embedding of integer positions/steps, width must be even
ad::Tensor sinusoidal_embedding(const std::vector<std::size_t>& pos, std::size_t width) {
    std::size_t half = width / 2;
    ad::Tensor out({pos.size(), width});
    for (std::size_t i = 0; i < pos.size(); ++i) {
        for (std::size_t k = 0; k < half; ++k) {
            double freq = std::exp(-std::log(10000.0) * static_cast<double>(k) /
                                   static_cast<double>(half));
            double x = static_cast<double>(pos[i]) * freq;
            out.v[i * width + k] = std::sin(x);
            out.v[i * width + half + k] = std::cos(x);
        }
    }
    return out;
}

} // namespace

VanillaDdpm::VanillaDdpm(const DdpmConfig& cfg, const ModelGeometry& geo, ConditionMode mode,
                         std::uint64_t seed)
    : GenerativeModel(geo, mode), cfg_(cfg) {
    cfg_.validate();
    geo.validate(mode);
    schedule_ = NoiseSchedule::make(cfg_.schedule, cfg_.steps, cfg_.beta_lo, cfg_.beta_hi);
    Rng rng(derive_seed(seed, "vanilla_ddpm/init"));
    std::size_t w = cfg_.width;
    cond_enc_ = ConditionEncoder(params_, "cond", mode, geo, w, rng);
    token_in_ = nn::Linear(params_, "token_in", geo.d, w, rng);
    step_mlp_ = nn::Mlp(params_, "step_mlp", w, {w}, w, rng, nn::Act::silu);
    blocks_.resize(cfg_.blocks);
    for (std::size_t i = 0; i < cfg_.blocks; ++i) {
        std::string p = "block" + std::to_string(i);
        blocks_[i].cond_proj = nn::Linear(params_, p + ".cond", w, w, rng);
        blocks_[i].ln1 = nn::LayerNorm(params_, p + ".ln1", w);
        blocks_[i].qkv = nn::Linear(params_, p + ".qkv", w, 3 * w, rng);
        blocks_[i].attn_out = nn::Linear(params_, p + ".attn_out", w, w, rng);
        blocks_[i].ln2 = nn::LayerNorm(params_, p + ".ln2", w);
        blocks_[i].mlp1 = nn::Linear(params_, p + ".mlp1", w, 4 * w, rng);
        blocks_[i].mlp2 = nn::Linear(params_, p + ".mlp2", 4 * w, w, rng);
    }
    final_ln_ = nn::LayerNorm(params_, "final_ln", w);
    token_out_ = nn::Linear(params_, "token_out", w, geo.d, rng, /*zero_init=*/true);
    opt_ = nn::Adam(1e-3);
}

std::string VanillaDdpm::config_json() const {
    json j;
    j["steps"] = cfg_.steps;
    j["schedule"] = to_string(cfg_.schedule);
    j["beta_lo"] = cfg_.beta_lo;
    j["beta_hi"] = cfg_.beta_hi;
    j["predict"] = cfg_.predict == DdpmPredict::epsilon ? "epsilon" : "x0";
    j["width"] = cfg_.width;
    j["blocks"] = cfg_.blocks;
    j["heads"] = cfg_.heads;
    return j.dump();
}

Var VanillaDdpm::denoise(const Var& x_t, const std::vector<std::size_t>& t,
                         const Var& cond_emb) const {
    std::size_t b = x_t.shape()[0], tt = x_t.shape()[1], d = x_t.shape()[2];
    std::size_t w = cfg_.width, heads = cfg_.heads, dk = w / heads;

    Var tok = ad::reshape(token_in_(ad::reshape(x_t, {b * tt, d})), {b, tt, w});
    std::vector<std::size_t> positions(tt);
    for (std::size_t j = 0; j < tt; ++j) positions[j] = j;
    tok = ad::add(tok, ad::constant(sinusoidal_embedding(positions, w)));

    Var c = step_mlp_(ad::constant(sinusoidal_embedding(t, w)));
    if (cond_emb.defined()) c = ad::add(c, cond_emb); // condition joins the step embedding

    double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    for (const Block& blk : blocks_) {
        tok = ad::add(tok, ad::reshape(blk.cond_proj(c), {b, 1, w}));

        Var h = blk.ln1(tok);
        Var qkv = ad::reshape(blk.qkv(ad::reshape(h, {b * tt, w})), {b, tt, 3 * w});
        auto split_heads = [&](const Var& m) {
            return ad::reshape(ad::permute(ad::reshape(m, {b, tt, heads, dk}), {0, 2, 1, 3}),
                               {b * heads, tt, dk});
        };
        Var q = split_heads(ad::slice(qkv, 2, 0, w));
        Var k = split_heads(ad::slice(qkv, 2, w, 2 * w));
        Var v = split_heads(ad::slice(qkv, 2, 2 * w, 3 * w));
        Var att = ad::softmax_lastdim(ad::mul_scalar(ad::bmm(q, ad::permute(k, {0, 2, 1})), scale));
        Var mixed = ad::bmm(att, v); // [b*heads, tt, dk]
        Var merged = ad::reshape(
            ad::permute(ad::reshape(mixed, {b, heads, tt, dk}), {0, 2, 1, 3}), {b * tt, w});
        tok = ad::add(tok, ad::reshape(blk.attn_out(merged), {b, tt, w}));

        Var m = blk.ln2(tok);
        Var mid = ad::gelu(blk.mlp1(ad::reshape(m, {b * tt, w})));
        tok = ad::add(tok, ad::reshape(blk.mlp2(mid), {b, tt, w}));
    }

    Var out = token_out_(ad::reshape(final_ln_(tok), {b * tt, w}));
    return ad::reshape(out, {b, tt, d});
}

DenoiserFn VanillaDdpm::denoiser(const ConditionBatch& cond) const {
    check_condition(cond);
    Var emb = cond_enc_(cond);
    return [this, emb](const Var& x_t, const std::vector<std::size_t>& t) {
        return denoise(x_t, t, emb);
    };
}

double VanillaDdpm::loss_and_grads(const Array3& targets, const ConditionBatch& cond,
                                   std::uint64_t seed, std::vector<ad::Tensor>* grads) {
    check_condition(cond);
    Rng rng(seed);
    std::size_t b = targets.n;
    std::vector<std::size_t> t(b);
    for (std::size_t i = 0; i < b; ++i) t[i] = 1 + rng.index(cfg_.steps);
    ad::Tensor eps({b, targets.t, targets.d});
    for (double& x : eps.v) x = rng.normal();
    Var x0 = ad::constant(ad::Tensor({b, targets.t, targets.d}, targets.v));
    Var loss = ddpm_training_loss(denoiser(cond), x0, t, ad::constant(std::move(eps)),
                                  cfg_.predict, schedule_);
    if (grads) *grads = ad::grad(loss, params_.vars());
    return loss.val().v[0];
}

double VanillaDdpm::train_step(const Array3& targets, const ConditionBatch& cond, Rng& rng) {
    std::vector<ad::Tensor> grads;
    double loss = loss_and_grads(targets, cond, rng.next_u64(), &grads);
    nn::clip_grad_norm(grads, 1.0);
    auto params = params_.vars();
    opt_.step(params, grads);
    return loss;
}

double VanillaDdpm::validation_metric(const TrainingDataset& val, std::uint64_t seed) {
    check_condition(val.cond);
    ad::NoGradGuard guard;
    Rng rng(seed);
    std::size_t b = val.n();
    std::vector<std::size_t> t(b);
    for (std::size_t i = 0; i < b; ++i) t[i] = 1 + rng.index(cfg_.steps);
    ad::Tensor eps({b, val.targets.t, val.targets.d});
    for (double& x : eps.v) x = rng.normal();
    Var x0 = ad::constant(ad::Tensor({b, val.targets.t, val.targets.d}, val.targets.v));
    Var loss = ddpm_training_loss(denoiser(val.cond), x0, t, ad::constant(std::move(eps)),
                                  cfg_.predict, schedule_);
    return loss.val().v[0];
}

Array3 VanillaDdpm::sample_batch(const ConditionBatch& cond, Rng& rng) {
    std::size_t b = cond.rows, tt = geo_.t, d = geo_.d;
    Var emb = cond_enc_(cond);

    ad::Tensor x({b, tt, d});
    for (double& v : x.v) v = rng.normal();

    std::vector<std::size_t> tvec(b);
    for (std::size_t step = cfg_.steps; step >= 1; --step) {
        std::fill(tvec.begin(), tvec.end(), step);
        Var out = denoise(ad::constant(x), tvec, emb);

        double ab = schedule_.alpha_bar(step);
        double ab_prev = schedule_.alpha_bar(step - 1);
        double beta = schedule_.beta(step);
        double alpha = schedule_.alpha(step);
        double sab = std::sqrt(ab), somb = std::sqrt(1.0 - ab);

        // predicted x0, clipped to the training data range per feature
        std::vector<double> x0hat(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            double o = out.val().v[i];
            double v = cfg_.predict == DdpmPredict::epsilon ? (x.v[i] - somb * o) / sab : o;
            if (!data_min_.empty()) {
                std::size_t k = i % d;
                v = std::min(std::max(v, data_min_[k]), data_max_[k]);
            }
            x0hat[i] = v;
        }

        if (step > 1) {
            double c0 = std::sqrt(ab_prev) * beta / (1.0 - ab);
            double ct = std::sqrt(alpha) * (1.0 - ab_prev) / (1.0 - ab);
            double sigma = std::sqrt((1.0 - ab_prev) / (1.0 - ab) * beta);
            for (std::size_t i = 0; i < x.size(); ++i)
                x.v[i] = c0 * x0hat[i] + ct * x.v[i] + sigma * rng.normal();
        } else {
            x.v = std::move(x0hat);
        }
    }

    Array3 res(b, tt, d);
    res.v = x.v;
    return res;
}

} // namespace tsbench
