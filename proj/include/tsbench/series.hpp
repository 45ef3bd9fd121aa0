#ifndef TSBENCH_SERIES_HPP
#define TSBENCH_SERIES_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tsbench/errors.hpp"

namespace tsbench {

/// Dense row-major [n, t, d] array of doubles. The universal shape for
/// batches of multivariate time series windows.
struct Array3 {
    std::size_t n = 0, t = 0, d = 0;
    std::vector<double> v;

    Array3() = default;
    Array3(std::size_t n_, std::size_t t_, std::size_t d_, double fill = 0.0)
        : n(n_), t(t_), d(d_), v(n_ * t_ * d_, fill) {}

    std::size_t size() const { return n * t * d; }
    bool empty() const { return size() == 0; }

    double& at(std::size_t i, std::size_t j, std::size_t k) { return v[(i * t + j) * d + k]; }
    double at(std::size_t i, std::size_t j, std::size_t k) const { return v[(i * t + j) * d + k]; }

    bool same_shape(const Array3& o) const { return n == o.n && t == o.t && d == o.d; }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }

    std::string shape_str() const {
        return "[" + std::to_string(n) + "," + std::to_string(t) + "," + std::to_string(d) + "]";
    }
};

/// Batch of multivariate series, optionally on an explicit time grid
/// (timestamps shared across the batch, strictly increasing).
struct SeriesSet {
    Array3 values;
    std::vector<double> timestamps; // empty = implicit grid 0..t-1

    SeriesSet() = default;
    explicit SeriesSet(Array3 a) : values(std::move(a)) {}
    SeriesSet(Array3 a, std::vector<double> ts) : values(std::move(a)), timestamps(std::move(ts)) {}

    std::size_t n() const { return values.n; }
    std::size_t t() const { return values.t; }
    std::size_t d() const { return values.d; }

    void check_invariants() const {
        if (values.n < 1 || values.t < 1 || values.d < 1)
            throw SizingError("SeriesSet requires N,T,D >= 1, got " + values.shape_str());
        if (!values.all_finite()) throw ParamError("SeriesSet contains non-finite values");
        if (!timestamps.empty()) {
            if (timestamps.size() != values.t)
                throw SizingError("timestamps length must equal T");
            for (std::size_t i = 1; i < timestamps.size(); ++i)
                if (!(timestamps[i] > timestamps[i - 1]))
                    throw ParamError("timestamps must be strictly increasing");
        }
    }
};

/// Binary observation indicator aligned with a SeriesSet: 1 = observed,
/// 0 = missing.
struct Mask {
    Array3 bits;

    Mask() = default;
    explicit Mask(Array3 b) : bits(std::move(b)) {}
    Mask(std::size_t n, std::size_t t, std::size_t d, double fill = 1.0) : bits(n, t, d, fill) {}

    void check_invariants() const {
        for (double b : bits.v)
            if (b != 0.0 && b != 1.0) throw ParamError("mask entries must be 0 or 1");
    }

    std::size_t count_observed() const {
        std::size_t c = 0;
        for (double b : bits.v) c += (b == 1.0);
        return c;
    }
};

/// Series batch with integer class labels in {0, ..., n_classes-1}.
struct LabeledSeriesSet {
    Array3 values;
    std::vector<int> labels;
    int n_classes = 0;

    void check_invariants() const {
        if (labels.size() != values.n)
            throw SizingError("labels length must equal N");
        if (!values.all_finite()) throw ParamError("values contain non-finite entries");
        for (int y : labels)
            if (y < 0 || y >= n_classes)
                throw ParamError("label " + std::to_string(y) + " outside [0," +
                                 std::to_string(n_classes) + ")");
    }
};

/// History/target windows for forecasting; contiguous non-overlapping
/// slices of the same underlying windows.
struct ForecastPair {
    Array3 history; // [N, L_obs, D]
    Array3 target;  // [N, L_pred, D]
};

} // namespace tsbench

#endif
