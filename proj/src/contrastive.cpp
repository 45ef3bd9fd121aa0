// Reduced contrastive sequence encoder behind Context-FID: dilated causal
// convolutions trained with instance + temporal contrastive terms over
// overlapping crops, pooled hierarchically over the time axis.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tsbench/autodiff.hpp"
#include "tsbench/data.hpp"
#include "tsbench/metrics.hpp"
#include "tsbench/nn.hpp"
#include "tsbench/rng.hpp"

namespace tsbench {

using ad::Var;

namespace {

// causal conv over [B, T, Win]: y_t = bias + sum_k shift(x, k*dilation) Wk
struct CausalConv {
    std::vector<Var> taps; // kernel size entries of [win, wout]
    Var bias;

    CausalConv() = default;
    CausalConv(nn::ParamStore& ps, const std::string& name, std::size_t win, std::size_t wout,
               std::size_t kernel, Rng& rng) {
        for (std::size_t k = 0; k < kernel; ++k)
            taps.push_back(
                ps.create(name + ".w" + std::to_string(k),
                          nn::glorot_uniform(win * kernel, wout, {win, wout}, rng)));
        bias = ps.create(name + ".b", ad::Tensor({wout}));
    }

    Var operator()(const Var& x, std::size_t dilation) const {
        std::size_t b = x.shape()[0], t = x.shape()[1], win = x.shape()[2];
        std::size_t wout = taps[0].shape()[1];
        Var acc;
        for (std::size_t k = 0; k < taps.size(); ++k) {
            std::size_t shift = k * dilation;
            if (shift >= t) continue;
            Var part = x;
            if (shift > 0) {
                Var zeros = ad::constant(ad::Tensor({b, shift, win}));
                part = ad::concat({zeros, ad::slice(x, 1, 0, t - shift)}, 1);
            }
            Var mm = ad::reshape(ad::matmul(ad::reshape(part, {b * t, win}), taps[k]),
                                 {b, t, wout});
            acc = acc.defined() ? ad::add(acc, mm) : mm;
        }
        return ad::add(acc, bias);
    }
};

struct Encoder {
    nn::ParamStore ps;
    nn::Linear proj;
    std::vector<std::pair<CausalConv, CausalConv>> blocks;
    std::vector<std::size_t> dilations;
    std::size_t width;

    Encoder(std::size_t d, std::size_t width_, std::uint64_t seed) : width(width_) {
        Rng rng(derive_seed(seed, "cfid/init"));
        proj = nn::Linear(ps, "proj", d, width, rng);
        dilations = {1, 2};
        for (std::size_t bI = 0; bI < dilations.size(); ++bI) {
            blocks.emplace_back(
                CausalConv(ps, "blk" + std::to_string(bI) + ".a", width, width, 3, rng),
                CausalConv(ps, "blk" + std::to_string(bI) + ".b", width, width, 3, rng));
        }
    }

    // per-timestep representations [B, T, width]
    Var reps(const Var& x) const {
        std::size_t b = x.shape()[0], t = x.shape()[1], d = x.shape()[2];
        Var h = ad::reshape(proj(ad::reshape(x, {b * t, d})), {b, t, width});
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            Var mid = ad::gelu(blocks[i].first(h, dilations[i]));
            h = ad::add(h, blocks[i].second(mid, dilations[i]));
        }
        return h;
    }
};

Var l2_normalize_lastdim(const Var& z) {
    std::size_t last = z.shape().size() - 1;
    Var norm = ad::sqrt(ad::add_scalar(ad::sum_axis(ad::square(z), last, true), 1e-12));
    return ad::div(z, norm);
}

// -mean_i log softmax(sim)_ii over the last dim of a [G, n, n] stack
Var info_nce(const Var& sims) {
    std::size_t g = sims.shape()[0], n = sims.shape()[1];
    ad::Tensor eye({n, n});
    for (std::size_t i = 0; i < n; ++i) eye.v[i * n + i] = 1.0;
    Var diag = ad::sum_axis(ad::mul(sims, ad::constant(std::move(eye))), 2, false); // [g, n]
    Var lse = ad::reshape(ad::logsumexp_lastdim(sims), {g, n});
    return ad::mean(ad::sub(lse, diag));
}

// average-pool the time axis by 2 (truncating an odd tail)
Var pool_time(const Var& z) {
    std::size_t b = z.shape()[0], t = z.shape()[1], w = z.shape()[2];
    std::size_t t2 = t / 2;
    Var even = ad::slice(z, 1, 0, 2 * t2);
    return ad::mean_axis(ad::reshape(even, {b, t2, 2, w}), 2, false);
}

// instance + temporal contrastive losses, summed over pooling levels
Var hierarchical_loss(Var z1, Var z2, double temperature) {
    Var total;
    std::size_t levels = 0;
    while (true) {
        std::size_t b = z1.shape()[0], lo = z1.shape()[1];
        Var n1 = l2_normalize_lastdim(z1);
        Var n2 = l2_normalize_lastdim(z2);

        Var level_loss;
        if (b > 1) {
            // instance discrimination at each timestamp: [lo, B, B]
            Var a = ad::permute(n1, {1, 0, 2});
            Var c = ad::permute(n2, {1, 2, 0});
            Var sims = ad::mul_scalar(ad::bmm(a, c), 1.0 / temperature);
            level_loss = ad::mul_scalar(
                ad::add(info_nce(sims), info_nce(ad::permute(sims, {0, 2, 1}))), 0.5);
        }
        if (lo > 1) {
            // timestamp discrimination within each instance: [B, lo, lo]
            Var sims = ad::mul_scalar(ad::bmm(n1, ad::permute(n2, {0, 2, 1})), 1.0 / temperature);
            Var tmp = ad::mul_scalar(
                ad::add(info_nce(sims), info_nce(ad::permute(sims, {0, 2, 1}))), 0.5);
            level_loss = level_loss.defined() ? ad::add(level_loss, tmp) : tmp;
        }
        if (level_loss.defined()) {
            total = total.defined() ? ad::add(total, level_loss) : level_loss;
            ++levels;
        }
        if (lo <= 1) break;
        z1 = pool_time(z1);
        z2 = pool_time(z2);
    }
    if (!total.defined()) return ad::constant(0.0);
    return ad::mul_scalar(total, 1.0 / static_cast<double>(levels));
}

void train_encoder(Encoder& enc, const Array3& real, const ContrastiveConfig& cfg,
                   std::uint64_t seed) {
    nn::Adam opt(cfg.lr);
    auto params = enc.ps.vars();
    std::vector<std::size_t> order(real.n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "cfid/train"));

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(seed, "cfid/epoch/" + std::to_string(epoch)));
        shuffle_rng.shuffle(order);
        for (std::size_t lo = 0; lo < real.n; lo += cfg.batch_size) {
            std::size_t hi = std::min(lo + cfg.batch_size, real.n);
            std::vector<std::size_t> idx(order.begin() + lo, order.begin() + hi);
            Array3 batch = take_rows(real, idx);
            std::size_t b = batch.n, t = batch.t, d = batch.d;

            // two overlapping random crops sharing [o1, o2)
            std::size_t o1 = rng.index(t);
            std::size_t o2 = o1 + 1 + rng.index(t - o1);
            std::size_t l1 = rng.index(o1 + 1);
            std::size_t r2 = o2 + rng.index(t - o2 + 1);

            Var x = ad::constant(ad::Tensor({b, t, d}, batch.v));
            Var v1 = enc.reps(ad::slice(x, 1, l1, o2));
            Var v2 = enc.reps(ad::slice(x, 1, o1, r2));
            Var z1 = ad::slice(v1, 1, o1 - l1, o2 - l1);
            Var z2 = ad::slice(v2, 1, 0, o2 - o1);

            Var loss = hierarchical_loss(z1, z2, cfg.temperature);
            if (!loss.requires_grad()) continue;
            auto grads = ad::grad(loss, params);
            nn::clip_grad_norm(grads, 1.0);
            opt.step(params, grads);
        }
    }
}

Eigen::MatrixXd encode_set(const Encoder& enc, const Array3& set) {
    ad::NoGradGuard guard;
    Var x = ad::constant(ad::Tensor({set.n, set.t, set.d}, set.v));
    Var z = ad::mean_axis(enc.reps(x), 1, false); // [N, width]
    Eigen::MatrixXd out(set.n, enc.width);
    for (std::size_t i = 0; i < set.n; ++i)
        for (std::size_t j = 0; j < enc.width; ++j) out(i, j) = z.val().v[i * enc.width + j];
    return out;
}

} // namespace

double context_fid(const SeriesSet& real, const SeriesSet& fake, const ContrastiveConfig& cfg,
                   std::uint64_t seed) {
    if (real.values.empty() || fake.values.empty()) throw ParamError("context_fid: empty set");
    if (real.t() != fake.t() || real.d() != fake.d())
        throw SizingError("context_fid: geometry mismatch");
    if (real.n() < cfg.width + 1 || fake.n() < cfg.width + 1)
        throw InsufficientDataError("context_fid: covariance fit needs >= width+1 = " +
                                    std::to_string(cfg.width + 1) + " samples per set");

    Encoder enc(real.d(), cfg.width, seed); // retrained per dataset
    train_encoder(enc, real.values, cfg, seed);

    Eigen::MatrixXd er = encode_set(enc, real.values);
    Eigen::MatrixXd ef = encode_set(enc, fake.values);
    Eigen::VectorXd mu_r, mu_f;
    Eigen::MatrixXd sig_r, sig_f;
    fit_gaussian_moments(er, mu_r, sig_r);
    fit_gaussian_moments(ef, mu_f, sig_f);
    return frechet_distance(mu_r, sig_r, mu_f, sig_f);
}

} // namespace tsbench
