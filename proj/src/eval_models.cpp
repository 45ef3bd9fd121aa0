// Post-hoc GRU evaluators behind the discriminative and predictive scores.

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

// numerically stable binary cross entropy on logits:
// softplus(l) - y*l, softplus(l) = relu(l) + log(1 + exp(-|l|))
Var bce_with_logits(const Var& logits, const Var& labels) {
    Var softplus =
        ad::add(ad::relu(logits), ad::log(ad::add_scalar(ad::exp(ad::neg(ad::abs(logits))), 1.0)));
    return ad::mean(ad::sub(softplus, ad::mul(labels, logits)));
}

struct MixedData {
    Array3 train_x;
    std::vector<double> train_y;
    Array3 test_x;
    std::vector<double> test_y;
};

// label real=1/fake=0, shuffle-mix, fixed 8:2 split
MixedData mix_and_split(const SeriesSet& real, const SeriesSet& fake, std::uint64_t seed) {
    std::size_t n = real.n() + fake.n();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    std::size_t n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));
    n_train = std::min(std::max<std::size_t>(n_train, 1), n - 1);

    std::size_t t = real.t(), d = real.d();
    MixedData out;
    out.train_x = Array3(n_train, t, d);
    out.test_x = Array3(n - n_train, t, d);
    out.train_y.resize(n_train);
    out.test_y.resize(n - n_train);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t src = order[i];
        const Array3& a = src < real.n() ? real.values : fake.values;
        std::size_t row = src < real.n() ? src : src - real.n();
        double label = src < real.n() ? 1.0 : 0.0;
        double* dst = i < n_train ? &out.train_x.v[i * t * d]
                                  : &out.test_x.v[(i - n_train) * t * d];
        std::copy(a.v.begin() + row * t * d, a.v.begin() + (row + 1) * t * d, dst);
        (i < n_train ? out.train_y[i] : out.test_y[i - n_train]) = label;
    }
    return out;
}

double ds_one_seed(const SeriesSet& real, const SeriesSet& fake, const EvaluatorConfig& cfg,
                   std::uint64_t seed) {
    MixedData data = mix_and_split(real, fake, derive_seed(seed, "ds/mix"));
    std::size_t t = real.t(), d = real.d();

    Rng init_rng(derive_seed(seed, "ds/init"));
    nn::ParamStore ps;
    nn::Gru gru(ps, "gru", d, cfg.hidden, init_rng);
    nn::Linear head(ps, "head", cfg.hidden, 1, init_rng);
    nn::Adam opt(cfg.lr);
    auto params = ps.vars();

    std::size_t n_train = data.train_x.n;
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(seed, "ds/epoch/" + std::to_string(epoch)));
        shuffle_rng.shuffle(order);
        for (std::size_t lo = 0; lo < n_train; lo += cfg.batch_size) {
            std::size_t hi = std::min(lo + cfg.batch_size, n_train);
            std::vector<std::size_t> idx(order.begin() + lo, order.begin() + hi);
            Array3 bx = take_rows(data.train_x, idx);
            ad::Tensor by({idx.size(), 1});
            for (std::size_t i = 0; i < idx.size(); ++i) by.v[i] = data.train_y[idx[i]];
            Var x = ad::constant(ad::Tensor({idx.size(), t, d}, bx.v));
            Var logits = head(gru.last(x));
            Var loss = bce_with_logits(logits, ad::constant(std::move(by)));
            auto grads = ad::grad(loss, params);
            nn::clip_grad_norm(grads, 1.0);
            opt.step(params, grads);
        }
    }

    ad::NoGradGuard guard;
    Var x = ad::constant(ad::Tensor({data.test_x.n, t, d}, data.test_x.v));
    Var logits = head(gru.last(x));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.test_x.n; ++i) {
        double pred = logits.val().v[i] > 0.0 ? 1.0 : 0.0;
        correct += pred == data.test_y[i];
    }
    double acc = static_cast<double>(correct) / static_cast<double>(data.test_x.n);
    return std::abs(0.5 - acc);
}

// one-step-ahead GRU forecaster: train on `train`, return MAE on `test`
double tstr_mae(const Array3& train, const Array3& test, const EvaluatorConfig& cfg,
                std::uint64_t seed) {
    std::size_t t = train.t, d = train.d;
    Rng init_rng(derive_seed(seed, "ps/init"));
    nn::ParamStore ps;
    nn::Gru gru(ps, "gru", d, cfg.hidden, init_rng);
    nn::Linear head(ps, "head", cfg.hidden, d, init_rng);
    nn::Adam opt(cfg.lr);
    auto params = ps.vars();

    auto one_step_mae = [&](const Array3& batch) {
        std::size_t b = batch.n;
        Var x = ad::constant(ad::Tensor({b, t, d}, batch.v));
        Var inputs = ad::slice(x, 1, 0, t - 1);
        Var target = ad::slice(x, 1, 1, t);
        Var states = gru.run(inputs); // [b, t-1, hidden]
        Var preds = ad::reshape(head(ad::reshape(states, {b * (t - 1), cfg.hidden})),
                                {b, t - 1, d});
        return ad::mean(ad::abs(ad::sub(preds, target)));
    };

    std::vector<std::size_t> order(train.n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(seed, "ps/epoch/" + std::to_string(epoch)));
        shuffle_rng.shuffle(order);
        for (std::size_t lo = 0; lo < train.n; lo += cfg.batch_size) {
            std::size_t hi = std::min(lo + cfg.batch_size, train.n);
            std::vector<std::size_t> idx(order.begin() + lo, order.begin() + hi);
            Var loss = one_step_mae(take_rows(train, idx));
            auto grads = ad::grad(loss, params);
            nn::clip_grad_norm(grads, 1.0);
            opt.step(params, grads);
        }
    }

    ad::NoGradGuard guard;
    return one_step_mae(test).val().v[0];
}

} // namespace

double discriminative_score(const SeriesSet& real, const SeriesSet& fake,
                            const EvaluatorConfig& cfg) {
    if (real.values.empty() || fake.values.empty())
        throw ParamError("discriminative score: empty set");
    if (real.t() != fake.t() || real.d() != fake.d())
        throw SizingError("discriminative score: geometry mismatch");
    if (real.n() + fake.n() < 10)
        throw InsufficientDataError("discriminative score needs at least 10 total samples");
    double acc = 0.0;
    for (std::size_t s = 0; s < cfg.n_seeds; ++s)
        acc += ds_one_seed(real, fake, cfg, derive_seed(cfg.seed, "ds/" + std::to_string(s)));
    return acc / static_cast<double>(cfg.n_seeds);
}

double predictive_score(const SeriesSet& real, const SeriesSet& fake, const EvaluatorConfig& cfg) {
    if (real.values.empty() || fake.values.empty())
        throw ParamError("predictive score: empty set");
    if (real.t() != fake.t() || real.d() != fake.d())
        throw SizingError("predictive score: geometry mismatch");
    if (real.t() < 2) throw SizingError("predictive score needs T >= 2");
    double acc = 0.0;
    for (std::size_t s = 0; s < cfg.n_seeds; ++s)
        acc += tstr_mae(fake.values, real.values, cfg,
                        derive_seed(cfg.seed, "ps/" + std::to_string(s)));
    return acc / static_cast<double>(cfg.n_seeds);
}

} // namespace tsbench
