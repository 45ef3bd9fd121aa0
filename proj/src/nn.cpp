#include "tsbench/nn.hpp"

#include <algorithm>
#include <cmath>

namespace tsbench::nn {

Var ParamStore::create(const std::string& name, Tensor init) {
    for (const auto& [n, v] : entries_)
        if (n == name) throw UsageError("duplicate parameter name: " + name);
    Var p = ad::leaf(std::move(init));
    entries_.emplace_back(name, p);
    return p;
}

Var ParamStore::operator[](const std::string& name) const {
    for (const auto& [n, v] : entries_)
        if (n == name) return v;
    throw UsageError("unknown parameter: " + name);
}

std::vector<Var> ParamStore::vars() const {
    std::vector<Var> out;
    out.reserve(entries_.size());
    for (const auto& [n, v] : entries_) out.push_back(v);
    return out;
}

std::vector<Tensor> ParamStore::snapshot() const {
    std::vector<Tensor> out;
    out.reserve(entries_.size());
    for (const auto& [n, v] : entries_) out.push_back(v.val());
    return out;
}

void ParamStore::restore(const std::vector<Tensor>& snap) {
    if (snap.size() != entries_.size()) throw UsageError("snapshot size mismatch");
    for (std::size_t i = 0; i < snap.size(); ++i) {
        Var v = entries_[i].second;
        v.mutable_value() = snap[i];
    }
}

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, ad::Shape shape, Rng& rng) {
    double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor t(std::move(shape));
    for (double& x : t.v) x = rng.uniform(-s, s);
    return t;
}

Linear::Linear(ParamStore& ps, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
               bool zero_init) {
    Tensor wt = zero_init ? Tensor({in, out}) : glorot_uniform(in, out, {in, out}, rng);
    w = ps.create(name + ".w", std::move(wt));
    b = ps.create(name + ".b", Tensor({out}));
}

Var activate(const Var& x, Act act) {
    switch (act) {
        case Act::tanh: return ad::tanh(x);
        case Act::relu: return ad::relu(x);
        case Act::gelu: return ad::gelu(x);
        case Act::silu: return ad::silu(x);
    }
    throw UsageError("unknown activation");
}

Mlp::Mlp(ParamStore& ps, const std::string& name, std::size_t in,
         const std::vector<std::size_t>& hidden, std::size_t out, Rng& rng, Act act_,
         bool zero_init_last) {
    act = act_;
    std::size_t prev = in;
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        layers.emplace_back(ps, name + ".l" + std::to_string(i), prev, hidden[i], rng);
        prev = hidden[i];
    }
    layers.emplace_back(ps, name + ".l" + std::to_string(hidden.size()), prev, out, rng,
                        zero_init_last);
}

Var Mlp::operator()(Var x) const {
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) x = activate(layers[i](x), act);
    return layers.back()(x);
}

Embedding::Embedding(ParamStore& ps, const std::string& name, std::size_t rows, std::size_t width,
                     Rng& rng) {
    Tensor t({rows, width});
    for (double& x : t.v) x = rng.normal(0.0, 1.0);
    table = ps.create(name + ".table", std::move(t));
}

LayerNorm::LayerNorm(ParamStore& ps, const std::string& name, std::size_t width) {
    gamma = ps.create(name + ".gamma", Tensor({width}, 1.0));
    beta = ps.create(name + ".beta", Tensor({width}));
}

Var LayerNorm::operator()(const Var& x) const {
    std::size_t last = x.shape().size() - 1;
    Var mu = ad::mean_axis(x, last, true);
    Var centered = ad::sub(x, mu);
    Var var = ad::mean_axis(ad::square(centered), last, true);
    Var norm = ad::div(centered, ad::sqrt(ad::add_scalar(var, eps)));
    return ad::add(ad::mul(norm, gamma), beta);
}

Gru::Gru(ParamStore& ps, const std::string& name, std::size_t in, std::size_t hidden_, Rng& rng) {
    hidden = hidden_;
    wx = ps.create(name + ".wx", glorot_uniform(in, 3 * hidden, {in, 3 * hidden}, rng));
    wh = ps.create(name + ".wh", glorot_uniform(hidden, 3 * hidden, {hidden, 3 * hidden}, rng));
    bx = ps.create(name + ".bx", Tensor({3 * hidden}));
}

Var Gru::run(const Var& x) const {
    std::size_t b = x.shape()[0], t = x.shape()[1], d = x.shape()[2];
    Var h = ad::constant(Tensor({b, hidden}));
    std::vector<Var> states;
    states.reserve(t);
    for (std::size_t step = 0; step < t; ++step) {
        Var xt = ad::reshape(ad::slice(x, 1, step, step + 1), {b, d});
        Var u = ad::add(ad::matmul(xt, wx), bx);
        Var v = ad::matmul(h, wh);
        Var z = ad::sigmoid(ad::add(ad::slice(u, 1, 0, hidden), ad::slice(v, 1, 0, hidden)));
        Var r = ad::sigmoid(
            ad::add(ad::slice(u, 1, hidden, 2 * hidden), ad::slice(v, 1, hidden, 2 * hidden)));
        Var n = ad::tanh(ad::add(ad::slice(u, 1, 2 * hidden, 3 * hidden),
                                 ad::mul(r, ad::slice(v, 1, 2 * hidden, 3 * hidden))));
        h = ad::add(ad::mul(ad::sub(ad::constant(1.0), z), h), ad::mul(z, n));
        states.push_back(ad::reshape(h, {b, 1, hidden}));
    }
    return ad::concat(states, 1);
}

Var Gru::last(const Var& x) const {
    std::size_t b = x.shape()[0], t = x.shape()[1];
    Var all = run(x);
    return ad::reshape(ad::slice(all, 1, t - 1, t), {b, hidden});
}

double clip_grad_norm(std::vector<Tensor>& grads, double max_norm) {
    double ss = 0.0;
    for (const Tensor& g : grads)
        for (double x : g.v) ss += x * x;
    double norm = std::sqrt(ss);
    if (norm > max_norm && norm > 0.0) {
        double k = max_norm / norm;
        for (Tensor& g : grads)
            for (double& x : g.v) x *= k;
    }
    return norm;
}

void Adam::step(std::vector<Var>& params, const std::vector<Tensor>& grads) {
    if (params.size() != grads.size()) throw UsageError("Adam: param/grad count mismatch");
    if (m_.empty()) {
        m_.resize(params.size());
        v_.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i].assign(params[i].size(), 0.0);
            v_[i].assign(params[i].size(), 0.0);
        }
    }
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& val = params[i].mutable_value().v;
        const auto& g = grads[i].v;
        for (std::size_t j = 0; j < val.size(); ++j) {
            m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g[j];
            v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g[j] * g[j];
            double mhat = m_[i][j] / bc1;
            double vhat = v_[i][j] / bc2;
            val[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

} // namespace tsbench::nn
