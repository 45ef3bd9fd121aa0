#include "tsbench/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Dense>

namespace tsbench::ad {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const EMat>;
using MMap = Eigen::Map<EMat>;

bool Tensor::all_finite() const {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

Var::Var(Tensor value, bool requires_grad) : n_(std::make_shared<Node>()) {
    n_->value = std::move(value);
    n_->requires_grad = requires_grad;
}

Var Var::detach() const {
    Var out;
    out.n_ = std::make_shared<Node>();
    out.n_->value = n_->value;
    out.n_->requires_grad = false;
    return out;
}

Var Var::make_op(Tensor value, std::vector<Var> parents,
                 std::function<std::vector<Var>(const Var&)> backward) {
    Var out;
    out.n_ = std::make_shared<Node>();
    out.n_->value = std::move(value);
    bool needs = false;
    if (g_grad_enabled)
        for (const Var& p : parents)
            if (p.requires_grad()) needs = true;
    out.n_->requires_grad = needs;
    if (needs) {
        out.n_->parents = std::move(parents);
        out.n_->backward = std::move(backward);
    }
    return out;
}

Var constant(Tensor t) { return Var(std::move(t), false); }
Var constant(double x) { return Var(Tensor({1}, {x}), false); }
Var leaf(Tensor t) { return Var(std::move(t), true); }

// ---------------------------------------------------------------------------
// broadcasting
// ---------------------------------------------------------------------------

namespace {

Shape broadcast_shape(const Shape& a, const Shape& b) {
    std::size_t r = std::max(a.size(), b.size());
    Shape out(r);
    for (std::size_t i = 0; i < r; ++i) {
        std::size_t da = i < r - a.size() ? 1 : a[i - (r - a.size())];
        std::size_t db = i < r - b.size() ? 1 : b[i - (r - b.size())];
        if (da != db && da != 1 && db != 1)
            throw SizingError("broadcast mismatch between shapes");
        out[i] = std::max(da, db);
    }
    return out;
}

std::vector<std::size_t> row_strides(const Shape& s) {
    std::vector<std::size_t> st(s.size(), 1);
    for (std::size_t i = s.size(); i-- > 1;) st[i - 1] = st[i] * s[i];
    return st;
}

// strides of `s` expanded to broadcast rank r; broadcast axes get stride 0
std::vector<std::size_t> bcast_strides(const Shape& s, std::size_t r) {
    std::vector<std::size_t> st(r, 0);
    auto own = row_strides(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::size_t axis = r - s.size() + i;
        st[axis] = (s[i] == 1) ? 0 : own[i];
    }
    return st;
}

template <typename F>
Tensor elementwise_binary(const Tensor& a, const Tensor& b, F&& f) {
    Shape os = broadcast_shape(a.shape, b.shape);
    Tensor out(os);
    std::size_t n = out.size();
    if (a.shape == b.shape) { // fast path
        for (std::size_t i = 0; i < n; ++i) out.v[i] = f(a.v[i], b.v[i]);
        return out;
    }
    auto sa = bcast_strides(a.shape, os.size());
    auto sb = bcast_strides(b.shape, os.size());
    std::vector<std::size_t> idx(os.size(), 0);
    std::size_t ia = 0, ib = 0;
    for (std::size_t i = 0; i < n; ++i) {
        out.v[i] = f(a.v[ia], b.v[ib]);
        for (std::size_t ax = os.size(); ax-- > 0;) {
            ++idx[ax];
            ia += sa[ax];
            ib += sb[ax];
            if (idx[ax] < os[ax]) break;
            ia -= sa[ax] * os[ax];
            ib -= sb[ax] * os[ax];
            idx[ax] = 0;
        }
    }
    return out;
}

// Reduce a broadcast gradient back to the original operand shape.
Var reduce_to(const Var& g, const Shape& target) {
    Var r = g;
    while (r.shape().size() > target.size()) r = sum_axis(r, 0, false);
    for (std::size_t i = 0; i < target.size(); ++i)
        if (target[i] == 1 && r.shape()[i] > 1) r = sum_axis(r, i, true);
    if (r.shape() != target) r = reshape(r, target);
    return r;
}

template <typename F>
Tensor elementwise_unary(const Tensor& a, F&& f) {
    Tensor out(a.shape);
    for (std::size_t i = 0; i < a.size(); ++i) out.v[i] = f(a.v[i]);
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// elementwise ops
// ---------------------------------------------------------------------------

Var add(const Var& a, const Var& b) {
    Tensor out = elementwise_binary(a.val(), b.val(), [](double x, double y) { return x + y; });
    Shape sa = a.shape(), sb = b.shape();
    return Var::make_op(std::move(out), {a, b}, [sa, sb](const Var& g) -> std::vector<Var> {
        return {reduce_to(g, sa), reduce_to(g, sb)};
    });
}

Var sub(const Var& a, const Var& b) {
    Tensor out = elementwise_binary(a.val(), b.val(), [](double x, double y) { return x - y; });
    Shape sa = a.shape(), sb = b.shape();
    return Var::make_op(std::move(out), {a, b}, [sa, sb](const Var& g) -> std::vector<Var> {
        return {reduce_to(g, sa), neg(reduce_to(g, sb))};
    });
}

Var mul(const Var& a, const Var& b) {
    Tensor out = elementwise_binary(a.val(), b.val(), [](double x, double y) { return x * y; });
    return Var::make_op(std::move(out), {a, b}, [a, b](const Var& g) -> std::vector<Var> {
        return {reduce_to(mul(g, b), a.shape()), reduce_to(mul(g, a), b.shape())};
    });
}

Var div(const Var& a, const Var& b) {
    Tensor out = elementwise_binary(a.val(), b.val(), [](double x, double y) { return x / y; });
    return Var::make_op(std::move(out), {a, b}, [a, b](const Var& g) -> std::vector<Var> {
        Var da = reduce_to(div(g, b), a.shape());
        Var db = reduce_to(neg(div(mul(g, a), mul(b, b))), b.shape());
        return {da, db};
    });
}

Var neg(const Var& a) {
    Tensor out = elementwise_unary(a.val(), [](double x) { return -x; });
    return Var::make_op(std::move(out), {a},
                        [](const Var& g) -> std::vector<Var> { return {neg(g)}; });
}

Var exp(const Var& a) {
    Tensor out = elementwise_unary(a.val(), [](double x) { return std::exp(x); });
    return Var::make_op(std::move(out), {a}, [a](const Var& g) -> std::vector<Var> {
        return {mul(g, exp(a))};
    });
}

Var log(const Var& a) {
    Tensor out = elementwise_unary(a.val(), [](double x) { return std::log(x); });
    return Var::make_op(std::move(out), {a}, [a](const Var& g) -> std::vector<Var> {
        return {div(g, a)};
    });
}

Var tanh(const Var& a) {
    Tensor out = elementwise_unary(a.val(), [](double x) { return std::tanh(x); });
    return Var::make_op(std::move(out), {a}, [a](const Var& g) -> std::vector<Var> {
        Var y = tanh(a);
        return {mul(g, sub(constant(1.0), mul(y, y)))};
    });
}

Var sigmoid(const Var& a) {
    Tensor out = elementwise_unary(a.val(), [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    return Var::make_op(std::move(out), {a}, [a](const Var& g) -> std::vector<Var> {
        Var y = sigmoid(a);
        return {mul(g, mul(y, sub(constant(1.0), y)))};
    });
}

Var sqrt(const Var& a) {
    Tensor out = elementwise_unary(a.val(), [](double x) { return std::sqrt(x); });
    return Var::make_op(std::move(out), {a}, [a](const Var& g) -> std::vector<Var> {
        return {div(mul_scalar(g, 0.5), sqrt(a))};
    });
}

Var abs(const Var& a) {
    Tensor out = elementwise_unary(a.val(), [](double x) { return std::abs(x); });
    return Var::make_op(std::move(out), {a}, [a](const Var& g) -> std::vector<Var> {
        Tensor sgn(a.shape());
        for (std::size_t i = 0; i < sgn.size(); ++i)
            sgn.v[i] = a.val().v[i] > 0 ? 1.0 : (a.val().v[i] < 0 ? -1.0 : 0.0);
        return {mul(g, constant(std::move(sgn)))};
    });
}

Var relu(const Var& a) {
    Tensor out = elementwise_unary(a.val(), [](double x) { return x > 0 ? x : 0.0; });
    return Var::make_op(std::move(out), {a}, [a](const Var& g) -> std::vector<Var> {
        Tensor m(a.shape());
        for (std::size_t i = 0; i < m.size(); ++i) m.v[i] = a.val().v[i] > 0 ? 1.0 : 0.0;
        return {mul(g, constant(std::move(m)))};
    });
}

Var pow_scalar(const Var& a, double p) {
    Tensor out = elementwise_unary(a.val(), [p](double x) { return std::pow(x, p); });
    return Var::make_op(std::move(out), {a}, [a, p](const Var& g) -> std::vector<Var> {
        return {mul(g, mul_scalar(pow_scalar(a, p - 1.0), p))};
    });
}

Var add_scalar(const Var& a, double s) {
    Tensor out = elementwise_unary(a.val(), [s](double x) { return x + s; });
    return Var::make_op(std::move(out), {a},
                        [](const Var& g) -> std::vector<Var> { return {g}; });
}

Var mul_scalar(const Var& a, double s) {
    Tensor out = elementwise_unary(a.val(), [s](double x) { return x * s; });
    return Var::make_op(std::move(out), {a}, [s](const Var& g) -> std::vector<Var> {
        return {mul_scalar(g, s)};
    });
}

// ---------------------------------------------------------------------------
// linear algebra
// ---------------------------------------------------------------------------

Var matmul(const Var& a, const Var& b) {
    if (a.shape().size() != 2 || b.shape().size() != 2 || a.shape()[1] != b.shape()[0])
        throw SizingError("matmul expects [m,k] x [k,n], got " + a.val().shape_str() + " x " +
                          b.val().shape_str());
    std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
    Tensor out({m, n});
    MMap(out.v.data(), m, n) = CMap(a.val().v.data(), m, k) * CMap(b.val().v.data(), k, n);
    return Var::make_op(std::move(out), {a, b}, [a, b](const Var& g) -> std::vector<Var> {
        return {matmul(g, permute(b, {1, 0})), matmul(permute(a, {1, 0}), g)};
    });
}

Var bmm(const Var& a, const Var& b) {
    if (a.shape().size() != 3 || b.shape().size() != 3 || a.shape()[0] != b.shape()[0] ||
        a.shape()[2] != b.shape()[1])
        throw SizingError("bmm expects [g,m,k] x [g,k,n], got " + a.val().shape_str() + " x " +
                          b.val().shape_str());
    std::size_t gn = a.shape()[0], m = a.shape()[1], k = a.shape()[2], n = b.shape()[2];
    Tensor out({gn, m, n});
    for (std::size_t i = 0; i < gn; ++i)
        MMap(out.v.data() + i * m * n, m, n) =
            CMap(a.val().v.data() + i * m * k, m, k) * CMap(b.val().v.data() + i * k * n, k, n);
    return Var::make_op(std::move(out), {a, b}, [a, b](const Var& g) -> std::vector<Var> {
        return {bmm(g, permute(b, {0, 2, 1})), bmm(permute(a, {0, 2, 1}), g)};
    });
}

// ---------------------------------------------------------------------------
// structure
// ---------------------------------------------------------------------------

Var reshape(const Var& a, Shape s) {
    if (Tensor::numel(s) != a.size())
        throw SizingError("reshape changes element count");
    Tensor out(std::move(s), a.val().v);
    Shape orig = a.shape();
    return Var::make_op(std::move(out), {a}, [orig](const Var& g) -> std::vector<Var> {
        return {reshape(g, orig)};
    });
}

Var permute(const Var& a, const std::vector<std::size_t>& axes) {
    const Shape& s = a.shape();
    if (axes.size() != s.size()) throw SizingError("permute rank mismatch");
    Shape os(s.size());
    for (std::size_t i = 0; i < axes.size(); ++i) os[i] = s[axes[i]];
    Tensor out(os);
    auto in_st = row_strides(s);
    auto out_st = row_strides(os);
    std::size_t n = out.size();
    std::vector<std::size_t> idx(s.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t src = 0;
        for (std::size_t ax = 0; ax < os.size(); ++ax) src += idx[ax] * in_st[axes[ax]];
        out.v[i] = a.val().v[src];
        for (std::size_t ax = os.size(); ax-- > 0;) {
            if (++idx[ax] < os[ax]) break;
            idx[ax] = 0;
        }
    }
    (void)out_st;
    std::vector<std::size_t> inv(axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i) inv[axes[i]] = i;
    return Var::make_op(std::move(out), {a}, [inv](const Var& g) -> std::vector<Var> {
        return {permute(g, inv)};
    });
}

Var slice(const Var& a, std::size_t axis, std::size_t begin, std::size_t end) {
    const Shape& s = a.shape();
    if (axis >= s.size() || begin >= end || end > s[axis])
        throw SizingError("bad slice bounds");
    Shape os = s;
    os[axis] = end - begin;
    Tensor out(os);
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
    for (std::size_t o = 0; o < outer; ++o)
        std::copy(a.val().v.begin() + (o * s[axis] + begin) * inner,
                  a.val().v.begin() + (o * s[axis] + end) * inner,
                  out.v.begin() + o * (end - begin) * inner);
    Shape orig = s;
    return Var::make_op(std::move(out), {a},
                        [orig, axis, begin, end](const Var& g) -> std::vector<Var> {
        std::vector<Var> parts;
        if (begin > 0) {
            Shape z = orig;
            z[axis] = begin;
            parts.push_back(constant(Tensor(z)));
        }
        parts.push_back(g);
        if (end < orig[axis]) {
            Shape z = orig;
            z[axis] = orig[axis] - end;
            parts.push_back(constant(Tensor(z)));
        }
        return {concat(parts, axis)};
    });
}

Var concat(const std::vector<Var>& parts, std::size_t axis) {
    if (parts.empty()) throw SizingError("concat of nothing");
    Shape os = parts[0].shape();
    if (axis >= os.size()) throw SizingError("concat axis out of range");
    std::size_t total = 0;
    for (const Var& p : parts) {
        if (p.shape().size() != os.size()) throw SizingError("concat rank mismatch");
        for (std::size_t i = 0; i < os.size(); ++i)
            if (i != axis && p.shape()[i] != os[i]) throw SizingError("concat shape mismatch");
        total += p.shape()[axis];
    }
    os[axis] = total;
    Tensor out(os);
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= os[i];
    for (std::size_t i = axis + 1; i < os.size(); ++i) inner *= os[i];
    std::size_t offset = 0;
    for (const Var& p : parts) {
        std::size_t len = p.shape()[axis];
        for (std::size_t o = 0; o < outer; ++o)
            std::copy(p.val().v.begin() + o * len * inner, p.val().v.begin() + (o + 1) * len * inner,
                      out.v.begin() + (o * total + offset) * inner);
        offset += len;
    }
    std::vector<std::size_t> lens;
    for (const Var& p : parts) lens.push_back(p.shape()[axis]);
    return Var::make_op(std::move(out), parts, [lens, axis](const Var& g) -> std::vector<Var> {
        std::vector<Var> grads;
        std::size_t at = 0;
        for (std::size_t len : lens) {
            grads.push_back(slice(g, axis, at, at + len));
            at += len;
        }
        return grads;
    });
}

Var gather_rows(const Var& table, const std::vector<std::size_t>& idx) {
    if (table.shape().size() != 2) throw SizingError("gather_rows expects a 2-d table");
    std::size_t r = table.shape()[0], c = table.shape()[1];
    Tensor out({idx.size(), c});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= r) throw ParamError("gather_rows index out of range");
        std::copy(table.val().v.begin() + idx[i] * c, table.val().v.begin() + (idx[i] + 1) * c,
                  out.v.begin() + i * c);
    }
    return Var::make_op(std::move(out), {table}, [idx, r](const Var& g) -> std::vector<Var> {
        // scatter-add expressed as one-hot^T @ g so it stays differentiable
        Tensor onehot({g.shape()[0], r});
        for (std::size_t i = 0; i < idx.size(); ++i) onehot.v[i * r + idx[i]] = 1.0;
        return {matmul(permute(constant(std::move(onehot)), {1, 0}), g)};
    });
}

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------

Var sum(const Var& a) {
    double s = std::accumulate(a.val().v.begin(), a.val().v.end(), 0.0);
    Shape orig = a.shape();
    return Var::make_op(Tensor({1}, {s}), {a}, [orig](const Var& g) -> std::vector<Var> {
        Shape ones_rank(orig.size(), 1);
        return {mul(constant(Tensor(orig, 1.0)), reshape(g, ones_rank))};
    });
}

Var mean(const Var& a) { return mul_scalar(sum(a), 1.0 / static_cast<double>(a.size())); }

Var sum_axis(const Var& a, std::size_t axis, bool keepdim) {
    const Shape& s = a.shape();
    if (axis >= s.size()) throw SizingError("sum_axis out of range");
    Shape os;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i == axis) {
            if (keepdim) os.push_back(1);
        } else {
            os.push_back(s[i]);
        }
    }
    if (os.empty()) os.push_back(1);
    Tensor out(os);
    std::size_t outer = 1, mid = s[axis], inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t m = 0; m < mid; ++m)
            for (std::size_t in = 0; in < inner; ++in)
                out.v[o * inner + in] += a.val().v[(o * mid + m) * inner + in];
    Shape orig = s;
    return Var::make_op(std::move(out), {a},
                        [orig, axis, keepdim](const Var& g) -> std::vector<Var> {
        Shape keep = orig;
        keep[axis] = 1;
        Var gk = keepdim && g.shape().size() == keep.size() ? g : reshape(g, keep);
        return {mul(constant(Tensor(orig, 1.0)), gk)};
    });
}

Var mean_axis(const Var& a, std::size_t axis, bool keepdim) {
    return mul_scalar(sum_axis(a, axis, keepdim), 1.0 / static_cast<double>(a.shape()[axis]));
}

// ---------------------------------------------------------------------------
// composed helpers
// ---------------------------------------------------------------------------

Var square(const Var& a) { return mul(a, a); }

Var logsumexp_lastdim(const Var& a) {
    // stability shift is detached; gradient is unchanged by a constant shift
    std::size_t last = a.shape().size() - 1;
    const Shape& s = a.shape();
    Shape ms = s;
    ms[last] = 1;
    Tensor mx(ms, -std::numeric_limits<double>::infinity());
    std::size_t inner = s[last], outer = a.size() / inner;
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < inner; ++i)
            mx.v[o] = std::max(mx.v[o], a.val().v[o * inner + i]);
    Var shift = constant(std::move(mx));
    Var z = sub(a, shift);
    Var lse = add(log(sum_axis(exp(z), last, true)), shift);
    return sum_axis(lse, last, false); // collapse the kept dim
}

Var softmax_lastdim(const Var& a) {
    std::size_t last = a.shape().size() - 1;
    const Shape& s = a.shape();
    Shape ms = s;
    ms[last] = 1;
    Tensor mx(ms, -std::numeric_limits<double>::infinity());
    std::size_t inner = s[last], outer = a.size() / inner;
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < inner; ++i)
            mx.v[o] = std::max(mx.v[o], a.val().v[o * inner + i]);
    Var z = exp(sub(a, constant(std::move(mx))));
    return div(z, sum_axis(z, last, true));
}

Var silu(const Var& a) { return mul(a, sigmoid(a)); }

Var gelu(const Var& a) {
    // 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3)))
    Var inner = mul_scalar(add(a, mul_scalar(mul(a, square(a)), 0.044715)), 0.7978845608028654);
    return mul(mul_scalar(a, 0.5), add_scalar(tanh(inner), 1.0));
}

// ---------------------------------------------------------------------------
// backward
// ---------------------------------------------------------------------------

namespace {

void topo_order(Var::Node* root, std::vector<Var::Node*>& order) {
    std::unordered_set<Var::Node*> visited;
    std::vector<std::pair<Var::Node*, std::size_t>> stack;
    stack.emplace_back(root, 0);
    visited.insert(root);
    while (!stack.empty()) {
        auto& [nd, next] = stack.back();
        if (next < nd->parents.size()) {
            Var::Node* p = nd->parents[next].node();
            ++next;
            if (p && p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(nd);
            stack.pop_back();
        }
    }
}

std::vector<Var> backward_pass(const Var& loss, const std::vector<Var>& wrt, bool create_graph) {
    if (!loss.defined()) throw StateError("backward on undefined variable");
    if (loss.size() != 1) throw SizingError("backward expects a scalar loss");

    std::optional<NoGradGuard> guard;
    if (!create_graph) guard.emplace();

    std::unordered_map<Var::Node*, Var> gmap;
    gmap[loss.node()] = constant(Tensor({1}, {1.0}));

    if (loss.requires_grad()) {
        std::vector<Var::Node*> order;
        topo_order(loss.node(), order);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            Var::Node* nd = *it;
            auto git = gmap.find(nd);
            if (git == gmap.end() || !nd->backward) continue;
            Var gout = git->second;
            if (gout.shape() != nd->value.shape) gout = reshape(gout, nd->value.shape);
            std::vector<Var> pg = nd->backward(gout);
            for (std::size_t i = 0; i < nd->parents.size(); ++i) {
                Var::Node* p = nd->parents[i].node();
                if (!p || !p->requires_grad || !pg[i].defined()) continue;
                auto exist = gmap.find(p);
                if (exist == gmap.end())
                    gmap.emplace(p, pg[i]);
                else
                    exist->second = add(exist->second, pg[i]);
            }
        }
    }

    std::vector<Var> out;
    out.reserve(wrt.size());
    for (const Var& w : wrt) {
        auto it = gmap.find(w.node());
        if (it != gmap.end() && w.requires_grad())
            out.push_back(it->second.shape() == w.shape() ? it->second
                                                          : reshape(it->second, w.shape()));
        else
            out.push_back(constant(Tensor(w.shape())));
    }
    return out;
}

} // namespace

std::vector<Tensor> grad(const Var& loss, const std::vector<Var>& wrt) {
    std::vector<Var> g = backward_pass(loss, wrt, false);
    std::vector<Tensor> out;
    out.reserve(g.size());
    for (Var& v : g) out.push_back(v.val());
    return out;
}

std::vector<Var> grad_graph(const Var& loss, const std::vector<Var>& wrt) {
    return backward_pass(loss, wrt, true);
}

} // namespace tsbench::ad
