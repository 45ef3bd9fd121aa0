#include <doctest.h>

#include <cmath>

#include "tsbench/synth.hpp"

using namespace tsbench;

TEST_CASE("spiral curve with b=0 is a circle of radius a") {
    for (double a : {0.1, 0.3, 0.49}) {
        Array3 c = spiral_curve(a, 0.0, 1, 48);
        for (std::size_t j = 0; j < c.t; ++j) {
            double r2 = c.at(0, j, 0) * c.at(0, j, 0) + c.at(0, j, 1) * c.at(0, j, 1);
            CHECK(r2 == doctest::Approx(a * a).epsilon(1e-12));
        }
    }
}

TEST_CASE("spiral curve starts at (sign*a, 0)") {
    Array3 pos = spiral_curve(0.25, 0.1, 1, 24);
    CHECK(pos.at(0, 0, 0) == doctest::Approx(0.25));
    CHECK(pos.at(0, 0, 1) == doctest::Approx(0.0));
    Array3 negc = spiral_curve(0.25, 0.1, -1, 24);
    CHECK(negc.at(0, 0, 0) == doctest::Approx(-0.25));
    CHECK(negc.at(0, 0, 1) == doctest::Approx(0.0));
}

// brute-force oracle: every successive displacement cross product shares a sign
static bool constant_turn_sign(const Array3& vals, std::size_t row, int expected_sign) {
    for (std::size_t j = 0; j + 2 < vals.t; ++j) {
        double ux = vals.at(row, j + 1, 0) - vals.at(row, j, 0);
        double uy = vals.at(row, j + 1, 1) - vals.at(row, j, 1);
        double vx = vals.at(row, j + 2, 0) - vals.at(row, j + 1, 0);
        double vy = vals.at(row, j + 2, 1) - vals.at(row, j + 1, 1);
        double cr = ux * vy - uy * vx;
        if (cr * expected_sign <= 0.0) return false;
    }
    return true;
}

TEST_CASE("noise-free spirals have constant curvature sign determined by the label") {
    Spiral2DParams p;
    p.n_samples = 64;
    p.length = 24;
    p.noise_std = 0.0;
    p.seed = 7;
    LabeledSeriesSet set = gen_spiral2d(p);

    bool saw_label0 = false, saw_label1 = false;
    for (std::size_t i = 0; i < set.values.n; ++i) {
        int expected = set.labels[i] == 0 ? 1 : -1;
        CHECK(constant_turn_sign(set.values, i, expected));
        CHECK(chirality_label(set.values, i) == set.labels[i]);
        saw_label0 |= set.labels[i] == 0;
        saw_label1 |= set.labels[i] == 1;
    }
    CHECK(saw_label0);
    CHECK(saw_label1);
}

TEST_CASE("noise-free label follows the x1 sign") {
    Spiral2DParams p;
    p.n_samples = 32;
    p.length = 24;
    p.noise_std = 0.0;
    p.seed = 21;
    LabeledSeriesSet set = gen_spiral2d(p);
    for (std::size_t i = 0; i < set.values.n; ++i) {
        // at t=0, x1 = sign*a; labels: 0 <-> positive sign
        double x1 = set.values.at(i, 0, 0);
        if (std::abs(x1) > 1e-9) CHECK((x1 > 0 ? 0 : 1) == set.labels[i]);
    }
}

TEST_CASE("spiral generation is seed deterministic and shape correct") {
    Spiral2DParams p;
    p.n_samples = 10;
    p.length = 24;
    p.noise_std = 0.01;
    p.seed = 3;
    LabeledSeriesSet a = gen_spiral2d(p);
    LabeledSeriesSet b = gen_spiral2d(p);
    CHECK(a.values.v == b.values.v);
    CHECK(a.labels == b.labels);
    CHECK(a.values.n == 10);
    CHECK(a.values.t == 24);
    CHECK(a.values.d == 2);

    p.seed = 4;
    LabeledSeriesSet c = gen_spiral2d(p);
    CHECK(a.values.v != c.values.v);
}

TEST_CASE("spiral rejects invalid parameters") {
    Spiral2DParams p;
    p.n_samples = 0;
    p.length = 24;
    CHECK_THROWS_AS(gen_spiral2d(p), ParamError);
    p.n_samples = 4;
    p.length = 1;
    CHECK_THROWS_AS(gen_spiral2d(p), ParamError);
    p.length = 24;
    p.noise_std = -0.1;
    CHECK_THROWS_AS(gen_spiral2d(p), ParamError);
}

TEST_CASE("raw sine value at t=0 is sin(phase)") {
    auto w = sine_wave(0.3, 0.9, 16);
    CHECK(w[0] == doctest::Approx(std::sin(0.9)).epsilon(1e-12));
}

TEST_CASE("sine set lies in [0,1] and has requested shape") {
    SineNDParams p;
    p.n_samples = 40;
    p.length = 24;
    p.dims = 5;
    p.seed = 11;
    SeriesSet set = gen_sine_nd(p);
    CHECK(set.n() == 40);
    CHECK(set.t() == 24);
    CHECK(set.d() == 5);
    double lo = 1e300, hi = -1e300;
    for (double x : set.values.v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0);
    // min-max normalization per series/dim touches both bounds
    CHECK(lo == doctest::Approx(0.0));
    CHECK(hi == doctest::Approx(1.0));
}

TEST_CASE("sine generation determinism contract") {
    SineNDParams p;
    p.n_samples = 6;
    p.length = 12;
    p.dims = 2;
    p.seed = 5;
    SeriesSet a = gen_sine_nd(p);
    SeriesSet b = gen_sine_nd(p);
    CHECK(a.values.v == b.values.v);
    p.seed = 6;
    SeriesSet c = gen_sine_nd(p);
    CHECK(a.values.v != c.values.v);
}

TEST_CASE("sine rejects invalid parameters") {
    SineNDParams p;
    p.n_samples = 3;
    p.length = 12;
    p.dims = 0;
    CHECK_THROWS_AS(gen_sine_nd(p), ParamError);
}
