#include <doctest.h>

#include <cmath>
#include <functional>

#include "tsbench/autodiff.hpp"
#include "tsbench/nn.hpp"
#include "tsbench/rng.hpp"

using namespace tsbench;
using namespace tsbench::ad;

namespace {

Tensor random_tensor(Shape s, Rng& rng, double scale = 1.0) {
    Tensor t(std::move(s));
    for (double& x : t.v) x = scale * rng.normal();
    return t;
}

// central finite differences of f w.r.t. every entry of each leaf
double relative_err(double a, double b) {
    double denom = std::max({std::abs(a), std::abs(b), 1e-6});
    return std::abs(a - b) / denom;
}

void check_gradients(const std::function<Var()>& f, std::vector<Var> leaves, double tol = 1e-6,
                     double h = 1e-6) {
    Var loss = f();
    std::vector<Tensor> g = grad(loss, leaves);
    for (std::size_t li = 0; li < leaves.size(); ++li) {
        for (std::size_t j = 0; j < leaves[li].size(); ++j) {
            double orig = leaves[li].val().v[j];
            leaves[li].mutable_value().v[j] = orig + h;
            double up = f().val().v[0];
            leaves[li].mutable_value().v[j] = orig - h;
            double dn = f().val().v[0];
            leaves[li].mutable_value().v[j] = orig;
            double fd = (up - dn) / (2 * h);
            INFO("leaf ", li, " entry ", j, " ad=", g[li].v[j], " fd=", fd);
            CHECK(relative_err(g[li].v[j], fd) < tol);
        }
    }
}

} // namespace

TEST_CASE("elementwise ops with broadcasting match finite differences") {
    Rng rng(1);
    Var a = leaf(random_tensor({3, 4}, rng));
    Var b = leaf(random_tensor({4}, rng));
    check_gradients(
        [&] {
            Var x = add(mul(a, b), sub(a, mul_scalar(b, 0.5)));
            return mean(mul(x, x));
        },
        {a, b}, 1e-5);
}

TEST_CASE("unary chain matches finite differences") {
    Rng rng(2);
    Var a = leaf(random_tensor({2, 5}, rng, 0.5));
    check_gradients(
        [&] {
            Var x = tanh(a);
            x = add(x, sigmoid(a));
            x = add(x, exp(mul_scalar(a, 0.3)));
            x = add(x, log(add_scalar(square(a), 1.0)));
            x = add(x, sqrt(add_scalar(square(a), 0.7)));
            return sum(mul(x, x));
        },
        {a}, 1e-5);
}

TEST_CASE("matmul and reductions match finite differences") {
    Rng rng(3);
    Var a = leaf(random_tensor({3, 4}, rng));
    Var b = leaf(random_tensor({4, 2}, rng));
    check_gradients(
        [&] {
            Var y = matmul(a, b);
            Var m = mean_axis(y, 0, false);
            return sum(square(m));
        },
        {a, b}, 1e-5);
}

TEST_CASE("bmm permute reshape slice concat match finite differences") {
    Rng rng(4);
    Var a = leaf(random_tensor({2, 3, 4}, rng));
    Var b = leaf(random_tensor({2, 4, 3}, rng));
    check_gradients(
        [&] {
            Var y = bmm(a, b);                     // [2,3,3]
            Var p = permute(y, {1, 0, 2});         // [3,2,3]
            Var s1 = slice(p, 2, 0, 2);            // [3,2,2]
            Var s2 = slice(p, 2, 1, 3);            // [3,2,2]
            Var c = concat({s1, s2}, 0);           // [6,2,2]
            Var r = reshape(c, {6, 4});
            return mean(square(r));
        },
        {a, b}, 1e-5);
}

TEST_CASE("softmax logsumexp gelu silu match finite differences") {
    Rng rng(5);
    Var a = leaf(random_tensor({3, 6}, rng));
    check_gradients(
        [&] {
            Var s = softmax_lastdim(a);
            Var l = logsumexp_lastdim(a); // [3]
            return add(sum(square(s)), sum(mul(l, l)));
        },
        {a}, 1e-5);
    check_gradients([&] { return sum(square(gelu(a))); }, {a}, 1e-5);
    check_gradients([&] { return sum(square(silu(a))); }, {a}, 1e-5);
}

TEST_CASE("gather_rows routes gradients to looked-up rows only") {
    Rng rng(6);
    Var table = leaf(random_tensor({5, 3}, rng));
    std::vector<std::size_t> idx = {1, 3, 1};
    Var y = gather_rows(table, idx);
    Var loss = sum(square(y));
    std::vector<Tensor> g = grad(loss, {table});
    for (std::size_t r = 0; r < 5; ++r) {
        bool used = (r == 1 || r == 3);
        for (std::size_t c = 0; c < 3; ++c) {
            double expected = 0.0;
            if (used)
                for (std::size_t k = 0; k < idx.size(); ++k)
                    if (idx[k] == r) expected += 2.0 * table.val().v[r * 3 + c];
            CHECK(g[0].v[r * 3 + c] == doctest::Approx(expected).epsilon(1e-9));
        }
    }
}

TEST_CASE("second-order gradients: grad of gradient norm matches finite differences") {
    // phi(w) = || d/dx f(x; w) ||^2 for f = sum(tanh(x W)); checks that
    // grad_graph output stays differentiable w.r.t. w
    Rng rng(7);
    Var w = leaf(random_tensor({3, 3}, rng, 0.7));
    Var x = leaf(random_tensor({2, 3}, rng));

    auto phi = [&]() {
        Var y = sum(tanh(matmul(x, w)));
        Var gx = grad_graph(y, {x})[0];
        return sum(square(gx));
    };

    Var loss = phi();
    std::vector<Tensor> gw = grad(loss, {w});

    double h = 1e-6;
    for (std::size_t j = 0; j < w.size(); ++j) {
        double orig = w.val().v[j];
        w.mutable_value().v[j] = orig + h;
        double up = phi().val().v[0];
        w.mutable_value().v[j] = orig - h;
        double dn = phi().val().v[0];
        w.mutable_value().v[j] = orig;
        double fd = (up - dn) / (2 * h);
        CHECK(relative_err(gw[0].v[j], fd) < 1e-4);
    }
}

TEST_CASE("detach cuts the graph") {
    Var a = leaf(Tensor({2}, {1.0, 2.0}));
    Var y = sum(square(a.detach()));
    CHECK_FALSE(y.requires_grad());
    std::vector<Tensor> g = grad(sum(add(square(a), y)), {a});
    CHECK(g[0].v[0] == doctest::Approx(2.0));
    CHECK(g[0].v[1] == doctest::Approx(4.0));
}

TEST_CASE("grad returns zeros for unreachable leaves") {
    Var a = leaf(Tensor({2}, {1.0, 2.0}));
    Var b = leaf(Tensor({2}, {3.0, 4.0}));
    std::vector<Tensor> g = grad(sum(a), {a, b});
    CHECK(g[1].v == std::vector<double>{0.0, 0.0});
}

TEST_CASE("layer norm and GRU match finite differences") {
    Rng rng(8);
    nn::ParamStore ps;
    nn::LayerNorm ln(ps, "ln", 4);
    Var x = leaf(random_tensor({2, 3, 4}, rng));
    {
        auto leaves = ps.vars();
        leaves.push_back(x);
        check_gradients([&] { return mean(square(ln(x))); }, leaves, 1e-4);
    }
    nn::ParamStore ps2;
    nn::Gru gru(ps2, "gru", 2, 3, rng);
    Var xs = leaf(random_tensor({2, 4, 2}, rng));
    auto leaves = ps2.vars();
    leaves.push_back(xs);
    check_gradients([&] { return mean(square(gru.run(xs))); }, leaves, 1e-4);
}

TEST_CASE("adam drives a quadratic toward its minimum") {
    Var p = leaf(Tensor({2}, {5.0, -3.0}));
    std::vector<Var> params = {p};
    nn::Adam opt(0.1);
    for (int i = 0; i < 300; ++i) {
        Var loss = sum(square(sub(p, constant(Tensor({2}, {1.0, 2.0})))));
        auto g = grad(loss, params);
        opt.step(params, g);
    }
    CHECK(p.val().v[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(p.val().v[1] == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("clip_grad_norm rescales to the requested norm") {
    std::vector<Tensor> g;
    g.push_back(Tensor({2}, {3.0, 4.0})); // norm 5
    double pre = nn::clip_grad_norm(g, 1.0);
    CHECK(pre == doctest::Approx(5.0));
    CHECK(std::sqrt(g[0].v[0] * g[0].v[0] + g[0].v[1] * g[0].v[1]) == doctest::Approx(1.0));
}
