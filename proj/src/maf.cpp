#include <cmath>

#include <nlohmann/json.hpp>

#include "tsbench/models.hpp"

namespace tsbench {

using ad::Var;
using nlohmann::json;

void MafConfig::validate() const {
    if (n_layers < 1) throw ParamError("MAF needs n_layers >= 1");
    if (hidden.empty()) throw ParamError("MAF needs at least one hidden layer");
    if (scale_cap <= 0.0) throw ParamError("scale_cap must be positive");
}

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

VanillaMaf::VanillaMaf(const MafConfig& cfg, const ModelGeometry& geo, ConditionMode mode,
                       std::uint64_t seed)
    : GenerativeModel(geo, mode), cfg_(cfg) {
    cfg_.validate();
    geo.validate(mode);
    Rng rng(derive_seed(seed, "vanilla_maf/init"));
    std::size_t w = geo.t * geo.d;
    cond_enc_ = ConditionEncoder(params_, "cond", mode, geo, cfg_.cond_width, rng);
    std::size_t cw = cond_enc_.width();

    layers_.resize(cfg_.n_layers);
    for (std::size_t l = 0; l < cfg_.n_layers; ++l) {
        Made& made = layers_[l];
        // autoregressive order alternates between layers (reversal)
        made.in_degrees.resize(w);
        for (std::size_t j = 0; j < w; ++j)
            made.in_degrees[j] =
                (l % 2 == 0) ? static_cast<int>(j + 1) : static_cast<int>(w - j);

        std::size_t max_deg = w > 1 ? w - 1 : 1;
        std::vector<std::vector<int>> hidden_degrees(cfg_.hidden.size());
        for (std::size_t h = 0; h < cfg_.hidden.size(); ++h) {
            hidden_degrees[h].resize(cfg_.hidden[h]);
            for (std::size_t k = 0; k < cfg_.hidden[h]; ++k)
                hidden_degrees[h][k] = static_cast<int>(k % max_deg) + 1;
        }

        std::string base = "flow" + std::to_string(l);
        std::size_t prev_width = w + cw;
        for (std::size_t h = 0; h <= cfg_.hidden.size(); ++h) {
            bool last = h == cfg_.hidden.size();
            std::size_t next_width = last ? 2 * w : cfg_.hidden[h];
            made.linears.emplace_back(params_, base + ".l" + std::to_string(h), prev_width,
                                      next_width, rng, /*zero_init=*/last);

            ad::Tensor mask({prev_width, next_width}, 0.0);
            for (std::size_t j = 0; j < prev_width; ++j) {
                int dj;
                if (h == 0)
                    dj = j < w ? made.in_degrees[j] : 0; // condition columns: degree 0
                else
                    dj = hidden_degrees[h - 1][j];
                for (std::size_t k = 0; k < next_width; ++k) {
                    bool connect;
                    if (last) {
                        int out_deg = made.in_degrees[k % w];
                        connect = out_deg > dj; // strict: output i sees only degrees < i
                    } else {
                        connect = hidden_degrees[h][k] >= dj;
                    }
                    if (connect) mask.v[j * next_width + k] = 1.0;
                }
            }
            made.masks.push_back(ad::constant(std::move(mask)));
            prev_width = next_width;
        }
    }
    opt_ = nn::Adam(1e-3);
}

std::string VanillaMaf::config_json() const {
    json j;
    j["n_layers"] = cfg_.n_layers;
    j["hidden"] = cfg_.hidden;
    j["cond_width"] = cfg_.cond_width;
    j["scale_cap"] = cfg_.scale_cap;
    return j.dump();
}

std::pair<Var, Var> VanillaMaf::made_forward(const Made& made, const Var& x, const Var& cond_emb,
                                             std::size_t layer_idx) const {
    std::size_t w = geo_.t * geo_.d;
    Var h = cond_emb.defined() ? ad::concat({x, cond_emb}, 1) : x;
    for (std::size_t i = 0; i < made.linears.size(); ++i) {
        Var masked_w = ad::mul(made.linears[i].w, made.masks[i]);
        h = ad::add(ad::matmul(h, masked_w), made.linears[i].b);
        if (i + 1 < made.linears.size()) h = ad::tanh(h);
    }
    Var mu = ad::slice(h, 1, 0, w);
    Var raw = ad::slice(h, 1, w, 2 * w);
    // soft bound keeps exp(alpha) finite during training
    Var alpha = ad::mul_scalar(ad::tanh(ad::mul_scalar(raw, 1.0 / cfg_.scale_cap)), cfg_.scale_cap);
    if (!alpha.val().all_finite())
        throw NumericalError("vanilla_maf: non-finite scale", static_cast<int>(layer_idx));
    return {mu, alpha};
}

MafForwardResult VanillaMaf::forward_flat(const ad::Tensor& x, const ConditionBatch& cond) const {
    check_condition(cond);
    if (x.shape.size() != 2 || x.shape[1] != geo_.t * geo_.d)
        throw SizingError("maf forward expects [N, T*D]");
    ad::NoGradGuard guard;
    Var emb = cond_enc_(cond);
    Var z = ad::constant(x);
    Var logdet = ad::constant(ad::Tensor({x.shape[0]}));
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        auto [mu, alpha] = made_forward(layers_[l], z, emb, l);
        z = ad::mul(ad::sub(z, mu), ad::exp(ad::neg(alpha)));
        logdet = ad::sub(logdet, ad::sum_axis(alpha, 1, false));
    }
    MafForwardResult out;
    out.z = z.val();
    out.log_det = logdet.val().v;
    return out;
}

ad::Tensor VanillaMaf::inverse_flat(const ad::Tensor& z, const ConditionBatch& cond) const {
    check_condition(cond);
    std::size_t w = geo_.t * geo_.d;
    if (z.shape.size() != 2 || z.shape[1] != w) throw SizingError("maf inverse expects [N, T*D]");
    ad::NoGradGuard guard;
    Var emb = cond_enc_(cond);
    std::size_t b = z.shape[0];

    ad::Tensor cur = z;
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const Made& made = layers_[li];
        ad::Tensor x({b, w});
        for (std::size_t deg = 1; deg <= w; ++deg) {
            auto [mu, alpha] = made_forward(made, ad::constant(x), emb, li);
            if (!mu.val().all_finite())
                throw NumericalError("vanilla_maf: non-finite intermediate",
                                     static_cast<int>(li));
            for (std::size_t j = 0; j < w; ++j) {
                if (made.in_degrees[j] != static_cast<int>(deg)) continue;
                for (std::size_t i = 0; i < b; ++i)
                    x.v[i * w + j] = cur.v[i * w + j] * std::exp(alpha.val().v[i * w + j]) +
                                     mu.val().v[i * w + j];
            }
        }
        cur = std::move(x);
    }
    return cur;
}

double VanillaMaf::log_likelihood(const ad::Tensor& x, const ConditionBatch& cond) const {
    MafForwardResult f = forward_flat(x, cond);
    std::size_t b = x.shape[0], w = x.shape[1];
    double total = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        double ss = 0.0;
        for (std::size_t j = 0; j < w; ++j) ss += f.z.v[i * w + j] * f.z.v[i * w + j];
        total += -0.5 * static_cast<double>(w) * kLog2Pi - 0.5 * ss + f.log_det[i];
    }
    return total / static_cast<double>(b);
}

double VanillaMaf::loss_and_grads(const Array3& targets, const ConditionBatch& cond,
                                  std::vector<ad::Tensor>* grads) {
    check_condition(cond);
    std::size_t b = targets.n, w = targets.t * targets.d;
    Var emb = cond_enc_(cond);
    Var z = ad::constant(ad::Tensor({b, w}, targets.v));
    Var logdet = ad::constant(ad::Tensor({b}));
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        auto [mu, alpha] = made_forward(layers_[l], z, emb, l);
        z = ad::mul(ad::sub(z, mu), ad::exp(ad::neg(alpha)));
        logdet = ad::sub(logdet, ad::sum_axis(alpha, 1, false));
    }
    // negative log-likelihood
    Var nll = ad::mul_scalar(
        ad::sub(ad::mul_scalar(ad::sum(ad::square(z)), 0.5), ad::sum(logdet)),
        1.0 / static_cast<double>(b));
    nll = ad::add_scalar(nll, 0.5 * static_cast<double>(w) * kLog2Pi);
    if (grads) *grads = ad::grad(nll, params_.vars());
    return nll.val().v[0];
}

double VanillaMaf::train_step(const Array3& targets, const ConditionBatch& cond, Rng&) {
    std::vector<ad::Tensor> grads;
    double loss = loss_and_grads(targets, cond, &grads);
    nn::clip_grad_norm(grads, 1.0);
    auto params = params_.vars();
    opt_.step(params, grads);
    return loss;
}

double VanillaMaf::validation_metric(const TrainingDataset& val, std::uint64_t) {
    check_condition(val.cond);
    ad::Tensor x({val.n(), val.targets.t * val.targets.d}, val.targets.v);
    return -log_likelihood(x, val.cond);
}

Array3 VanillaMaf::sample_batch(const ConditionBatch& cond, Rng& rng) {
    std::size_t b = cond.rows, w = geo_.t * geo_.d;
    ad::Tensor z({b, w});
    for (double& x : z.v) x = rng.normal();
    ad::Tensor x = inverse_flat(z, cond);
    Array3 out(b, geo_.t, geo_.d);
    out.v = std::move(x.v);
    return out;
}

} // namespace tsbench
