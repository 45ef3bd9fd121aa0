#ifndef TSBENCH_AUTODIFF_HPP
#define TSBENCH_AUTODIFF_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tsbench/errors.hpp"

namespace tsbench::ad {

using Shape = std::vector<std::size_t>;

/// Dense row-major N-d value.
struct Tensor {
    Shape shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(Shape s, double fill = 0.0) : shape(std::move(s)) {
        v.assign(numel(shape), fill);
    }
    Tensor(Shape s, std::vector<double> data) : shape(std::move(s)), v(std::move(data)) {
        if (v.size() != numel(shape)) throw SizingError("tensor data does not match shape");
    }

    static std::size_t numel(const Shape& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return n;
    }
    std::size_t size() const { return v.size(); }
    std::size_t rank() const { return shape.size(); }
    bool all_finite() const;
    std::string shape_str() const;
};

/// Reverse-mode variable: a value plus (optionally) the graph that produced
/// it. Backward functions are written in terms of Var ops themselves, so
/// gradients can be differentiated again (create_graph semantics), which
/// gradient-penalty training relies on.
class Var {
public:
    struct Node {
        Tensor value;
        bool requires_grad = false;
        std::vector<Var> parents;
        // maps upstream grad -> grads w.r.t. each parent (Vars so that
        // second-order differentiation works)
        std::function<std::vector<Var>(const Var&)> backward;
    };

    Var() = default;
    explicit Var(Tensor value, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(n_); }
    const Tensor& val() const { return n_->value; }
    const Shape& shape() const { return n_->value.shape; }
    std::size_t size() const { return n_->value.size(); }
    bool requires_grad() const { return n_ && n_->requires_grad; }
    Node* node() const { return n_.get(); }

    /// Same value, cut off from the graph.
    Var detach() const;

    /// Mutable access to the underlying tensor; used by optimizers on leaf
    /// parameters between steps, never on interior graph nodes.
    Tensor& mutable_value() { return n_->value; }

    static Var make_op(Tensor value, std::vector<Var> parents,
                       std::function<std::vector<Var>(const Var&)> backward);

private:
    std::shared_ptr<Node> n_;
};

/// When disabled, ops produce plain constants (no graph). Used internally
/// during first-order backward passes and available for inference code.
bool grad_enabled();

struct NoGradGuard {
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

// --- construction ---
Var constant(Tensor t);
Var constant(double x);  // shape [1]
Var leaf(Tensor t);      // requires_grad = true

// --- elementwise (broadcasting, numpy-style right alignment) ---
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);

Var neg(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var sqrt(const Var& a);
Var abs(const Var& a);
Var relu(const Var& a);
Var pow_scalar(const Var& a, double p);
Var add_scalar(const Var& a, double s);
Var mul_scalar(const Var& a, double s);

// --- linear algebra ---
Var matmul(const Var& a, const Var& b); // [m,k] x [k,n]
Var bmm(const Var& a, const Var& b);    // [g,m,k] x [g,k,n]

// --- structure ---
Var reshape(const Var& a, Shape s);
Var permute(const Var& a, const std::vector<std::size_t>& axes);
Var slice(const Var& a, std::size_t axis, std::size_t begin, std::size_t end);
Var concat(const std::vector<Var>& parts, std::size_t axis);
Var gather_rows(const Var& table, const std::vector<std::size_t>& idx);

// --- reductions ---
Var sum(const Var& a);  // -> shape [1]
Var mean(const Var& a); // -> shape [1]
Var sum_axis(const Var& a, std::size_t axis, bool keepdim);
Var mean_axis(const Var& a, std::size_t axis, bool keepdim);

// --- composed helpers ---
Var square(const Var& a);
Var softmax_lastdim(const Var& a);
Var logsumexp_lastdim(const Var& a); // keepdim=false
Var silu(const Var& a);
Var gelu(const Var& a); // tanh approximation

/// First-order gradients of a scalar loss w.r.t. each listed variable.
/// Variables the loss does not reach get zero tensors.
std::vector<Tensor> grad(const Var& loss, const std::vector<Var>& wrt);

/// Gradients that remain part of the graph (differentiable again).
std::vector<Var> grad_graph(const Var& loss, const std::vector<Var>& wrt);

} // namespace tsbench::ad

#endif
