#ifndef TSBENCH_NN_HPP
#define TSBENCH_NN_HPP

#include <string>
#include <vector>

#include "tsbench/autodiff.hpp"
#include "tsbench/rng.hpp"

namespace tsbench::nn {

using ad::Tensor;
using ad::Var;

/// Named registry of leaf parameters; the unit of optimization,
/// checkpointing and snapshot/restore.
class ParamStore {
public:
    Var create(const std::string& name, Tensor init);
    Var operator[](const std::string& name) const;

    std::vector<Var> vars() const;
    const std::vector<std::pair<std::string, Var>>& entries() const { return entries_; }

    std::vector<Tensor> snapshot() const;
    void restore(const std::vector<Tensor>& snap);

private:
    std::vector<std::pair<std::string, Var>> entries_;
};

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, ad::Shape shape, Rng& rng);

struct Linear {
    Var w; // [in, out]
    Var b; // [out]

    Linear() = default;
    Linear(ParamStore& ps, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
           bool zero_init = false);

    Var operator()(const Var& x) const { return ad::add(ad::matmul(x, w), b); }
};

enum class Act { tanh, relu, gelu, silu };

Var activate(const Var& x, Act act);

/// Plain MLP; activation between layers, linear output.
struct Mlp {
    std::vector<Linear> layers;
    Act act = Act::tanh;

    Mlp() = default;
    Mlp(ParamStore& ps, const std::string& name, std::size_t in,
        const std::vector<std::size_t>& hidden, std::size_t out, Rng& rng, Act act = Act::tanh,
        bool zero_init_last = false);

    Var operator()(Var x) const;
};

struct Embedding {
    Var table; // [rows, width]

    Embedding() = default;
    Embedding(ParamStore& ps, const std::string& name, std::size_t rows, std::size_t width,
              Rng& rng);

    Var operator()(const std::vector<std::size_t>& idx) const {
        return ad::gather_rows(table, idx);
    }
};

struct LayerNorm {
    Var gamma, beta;
    double eps = 1e-5;

    LayerNorm() = default;
    LayerNorm(ParamStore& ps, const std::string& name, std::size_t width);

    Var operator()(const Var& x) const; // normalizes the last axis
};

/// Single-layer GRU over [B, T, D] inputs.
struct Gru {
    Var wx; // [D, 3H]
    Var wh; // [H, 3H]
    Var bx; // [3H]
    std::size_t hidden = 0;

    Gru() = default;
    Gru(ParamStore& ps, const std::string& name, std::size_t in, std::size_t hidden, Rng& rng);

    /// All hidden states [B, T, H]; initial state zero.
    Var run(const Var& x) const;
    /// Final hidden state [B, H].
    Var last(const Var& x) const;
};

/// Global-norm gradient clipping; returns the pre-clip norm.
double clip_grad_norm(std::vector<Tensor>& grads, double max_norm);

/// Adam with bias correction.
class Adam {
public:
    Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(std::vector<Var>& params, const std::vector<Tensor>& grads);
    double lr() const { return lr_; }

private:
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

} // namespace tsbench::nn

#endif
