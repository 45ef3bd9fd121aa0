#ifndef TSBENCH_SYNTH_HPP
#define TSBENCH_SYNTH_HPP

#include <cstdint>

#include "tsbench/series.hpp"

namespace tsbench {

/// Parameters for the two-class spiral simulator. Each sample is a 2-D
/// curve r(t) = a + b*t evaluated on a uniform grid over [0, 4*pi]
/// (both endpoints included), with x1 = sign * r * cos(t), x2 = r * sin(t).
struct Spiral2DParams {
    std::size_t n_samples = 0;
    std::size_t length = 0;      // grid points over [0, 4*pi]
    double noise_std = 0.01;     // additive Gaussian std per coordinate
    std::uint64_t seed = 0;

    void validate() const;
};

/// Parameters for the N-variate sine simulator: per sample and dimension,
/// x(t) = sin(a*t + b) on the integer grid t = 0..length-1, then each
/// series/dimension is min-max rescaled into [0, 1].
struct SineNDParams {
    std::size_t n_samples = 0;
    std::size_t length = 0;
    std::size_t dims = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// One noise-free spiral curve [length, 2] for the given coefficients.
/// sign must be +1 or -1. Exposed so geometry tests can pin a and b.
Array3 spiral_curve(double a, double b, int sign, std::size_t length);

/// One raw (pre-normalization) sine wave of the given frequency/phase.
std::vector<double> sine_wave(double freq, double phase, std::size_t length);

/// Two-class spiral set. Label 0 = positive x1 sign, label 1 = negative.
LabeledSeriesSet gen_spiral2d(const Spiral2DParams& params);

/// N-variate sine set, values in [0, 1].
SeriesSet gen_sine_nd(const SineNDParams& params);

/// Discrete signed-curvature chirality of one [T, 2] trajectory: sign of
/// the summed cross products of successive displacement vectors.
/// Returns +1 (counter-clockwise), -1 (clockwise) or 0 (degenerate).
int spiral_chirality(const Array3& values, std::size_t row);

/// Label a generated spiral by the analytic chirality test: 0 when the
/// trajectory turns counter-clockwise, 1 when clockwise.
int chirality_label(const Array3& values, std::size_t row);

} // namespace tsbench

#endif
