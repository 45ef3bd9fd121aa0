#include "tsbench/synth.hpp"

#include <cmath>

#include "tsbench/rng.hpp"

namespace tsbench {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void Spiral2DParams::validate() const {
    if (n_samples < 1) throw ParamError("Spiral2D: n_samples must be >= 1");
    if (length < 2) throw ParamError("Spiral2D: length must be >= 2");
    if (noise_std < 0.0) throw ParamError("Spiral2D: noise_std must be >= 0");
}

void SineNDParams::validate() const {
    if (n_samples < 1) throw ParamError("SineND: n_samples must be >= 1");
    if (length < 2) throw ParamError("SineND: length must be >= 2");
    if (dims < 1) throw ParamError("SineND: dims must be >= 1");
}

Array3 spiral_curve(double a, double b, int sign, std::size_t length) {
    Array3 out(1, length, 2);
    double step = 4.0 * kPi / static_cast<double>(length - 1);
    for (std::size_t j = 0; j < length; ++j) {
        double t = step * static_cast<double>(j);
        double r = a + b * t;
        out.at(0, j, 0) = sign * r * std::cos(t);
        out.at(0, j, 1) = r * std::sin(t);
    }
    return out;
}

std::vector<double> sine_wave(double freq, double phase, std::size_t length) {
    std::vector<double> w(length);
    for (std::size_t j = 0; j < length; ++j)
        w[j] = std::sin(freq * static_cast<double>(j) + phase);
    return w;
}

LabeledSeriesSet gen_spiral2d(const Spiral2DParams& params) {
    params.validate();
    Rng rng(params.seed);

    LabeledSeriesSet set;
    set.values = Array3(params.n_samples, params.length, 2);
    set.labels.resize(params.n_samples);
    set.n_classes = 2;

    for (std::size_t i = 0; i < params.n_samples; ++i) {
        double a = rng.uniform(0.0, 0.5);
        double b = rng.uniform(0.0, 0.2);
        int sign = rng.bernoulli(0.5) ? 1 : -1;
        set.labels[i] = (sign > 0) ? 0 : 1;

        Array3 curve = spiral_curve(a, b, sign, params.length);
        for (std::size_t j = 0; j < params.length; ++j) {
            set.values.at(i, j, 0) = curve.at(0, j, 0) + rng.normal(0.0, params.noise_std);
            set.values.at(i, j, 1) = curve.at(0, j, 1) + rng.normal(0.0, params.noise_std);
        }
    }
    set.check_invariants();
    return set;
}

SeriesSet gen_sine_nd(const SineNDParams& params) {
    params.validate();
    Rng rng(params.seed);

    Array3 values(params.n_samples, params.length, params.dims);
    for (std::size_t i = 0; i < params.n_samples; ++i) {
        for (std::size_t k = 0; k < params.dims; ++k) {
            double a = rng.uniform(0.05, 0.4);
            double b = rng.uniform(0.0, 1.5);
            std::vector<double> w = sine_wave(a, b, params.length);
            double lo = w[0], hi = w[0];
            for (double x : w) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            double span = hi - lo;
            if (span < 1e-12) span = 1.0; // degenerate flat wave maps to 0
            for (std::size_t j = 0; j < params.length; ++j)
                values.at(i, j, k) = (w[j] - lo) / span;
        }
    }
    SeriesSet set(std::move(values));
    set.check_invariants();
    return set;
}

int spiral_chirality(const Array3& values, std::size_t row) {
    double total = 0.0;
    for (std::size_t j = 0; j + 2 < values.t; ++j) {
        double ux = values.at(row, j + 1, 0) - values.at(row, j, 0);
        double uy = values.at(row, j + 1, 1) - values.at(row, j, 1);
        double vx = values.at(row, j + 2, 0) - values.at(row, j + 1, 0);
        double vy = values.at(row, j + 2, 1) - values.at(row, j + 1, 1);
        total += ux * vy - uy * vx;
    }
    if (total > 0.0) return 1;
    if (total < 0.0) return -1;
    return 0;
}

int chirality_label(const Array3& values, std::size_t row) {
    return spiral_chirality(values, row) >= 0 ? 0 : 1;
}

} // namespace tsbench
