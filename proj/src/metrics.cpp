#include "tsbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "tsbench/rng.hpp"

namespace tsbench {

using nlohmann::json;

double metric_mse(const Array3& prediction, const Array3& target) {
    if (!prediction.same_shape(target))
        throw SizingError("mse: shape mismatch " + prediction.shape_str() + " vs " +
                          target.shape_str());
    double acc = 0.0;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        double d = prediction.v[i] - target.v[i];
        acc += d * d;
    }
    return acc / static_cast<double>(prediction.size());
}

double metric_mse_missing(const Array3& prediction, const Array3& target, const Mask& mask) {
    if (!prediction.same_shape(target) || !prediction.same_shape(mask.bits))
        throw SizingError("masked mse: shape mismatch");
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        if (mask.bits.v[i] == 0.0) {
            double d = prediction.v[i] - target.v[i];
            acc += d * d;
            ++count;
        }
    }
    if (count == 0) throw ParamError("masked mse: mask has no missing entries");
    return acc / static_cast<double>(count);
}

double crps_empirical(std::vector<double> ensemble, double y) {
    if (ensemble.empty()) throw ParamError("crps: empty ensemble");
    std::sort(ensemble.begin(), ensemble.end());
    double s = static_cast<double>(ensemble.size());
    double term1 = 0.0;
    for (double x : ensemble) term1 += std::abs(x - y);
    term1 /= s;
    // sum_{i<j} (x_(j) - x_(i)) via sorted weights
    double pair_sum = 0.0;
    for (std::size_t k = 0; k < ensemble.size(); ++k)
        pair_sum += ensemble[k] * (2.0 * static_cast<double>(k) - s + 1.0);
    return term1 - pair_sum / (s * s);
}

double crps_mean(const Array3& draws, std::size_t n_draws, const Array3& target,
                 const Mask* missing_only) {
    if (n_draws == 0) throw ParamError("crps: empty draw axis");
    if (draws.n != n_draws * target.n || draws.t != target.t || draws.d != target.d)
        throw SizingError("crps: draws must be n_draws stacked copies of the target geometry");
    if (missing_only && !missing_only->bits.same_shape(target))
        throw SizingError("crps: mask shape mismatch");

    std::size_t per = target.t * target.d;
    std::vector<double> ens(n_draws);
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < target.n; ++i) {
        for (std::size_t p = 0; p < per; ++p) {
            if (missing_only && missing_only->bits.v[i * per + p] != 0.0) continue;
            for (std::size_t s = 0; s < n_draws; ++s)
                ens[s] = draws.v[(s * target.n + i) * per + p];
            acc += crps_empirical(ens, target.v[i * per + p]);
            ++count;
        }
    }
    if (count == 0) throw ParamError("crps: no entries selected");
    return acc / static_cast<double>(count);
}

double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw ParamError("wasserstein_1d: empty sample set");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a.size() == b.size()) {
        // sorted-sample coupling
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
        return acc / static_cast<double>(a.size());
    }
    // quantile-function integration over the union of breakpoints
    std::vector<double> all;
    all.reserve(a.size() + b.size());
    all.insert(all.end(), a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    double acc = 0.0;
    double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    for (std::size_t i = 0; i + 1 < all.size(); ++i) {
        double gap = all[i + 1] - all[i];
        if (gap <= 0.0) continue;
        double fa = static_cast<double>(std::upper_bound(a.begin(), a.end(), all[i]) - a.begin()) / na;
        double fb = static_cast<double>(std::upper_bound(b.begin(), b.end(), all[i]) - b.begin()) / nb;
        acc += std::abs(fa - fb) * gap;
    }
    return acc;
}

double wasserstein_marginal_mean(const Array3& a, const Array3& b) {
    if (a.empty() || b.empty()) throw ParamError("wasserstein: empty sample set");
    if (a.t != b.t || a.d != b.d) throw SizingError("wasserstein: window geometry mismatch");
    std::size_t per = a.t * a.d;
    std::vector<double> xa(a.n), xb(b.n);
    double acc = 0.0;
    for (std::size_t p = 0; p < per; ++p) {
        for (std::size_t i = 0; i < a.n; ++i) xa[i] = a.v[i * per + p];
        for (std::size_t i = 0; i < b.n; ++i) xb[i] = b.v[i * per + p];
        acc += wasserstein_1d(xa, xb);
    }
    return acc / static_cast<double>(per);
}

double sliced_wasserstein(const Array3& a, const Array3& b, std::size_t n_projections,
                          std::uint64_t seed) {
    if (n_projections < 1) throw ParamError("sliced_wasserstein: need n_projections >= 1");
    if (a.empty() || b.empty()) throw ParamError("sliced_wasserstein: empty sample set");
    if (a.t != b.t || a.d != b.d) throw SizingError("sliced_wasserstein: geometry mismatch");
    std::size_t w = a.t * a.d;
    Rng rng(seed);
    std::vector<double> theta(w), pa(a.n), pb(b.n);
    double acc = 0.0;
    for (std::size_t p = 0; p < n_projections; ++p) {
        double norm = 0.0;
        for (double& x : theta) {
            x = rng.normal();
            norm += x * x;
        }
        norm = std::sqrt(norm);
        if (norm < 1e-12) norm = 1.0;
        for (double& x : theta) x /= norm;
        for (std::size_t i = 0; i < a.n; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < w; ++j) dot += a.v[i * w + j] * theta[j];
            pa[i] = dot;
        }
        for (std::size_t i = 0; i < b.n; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < w; ++j) dot += b.v[i * w + j] * theta[j];
            pb[i] = dot;
        }
        acc += wasserstein_1d(pa, pb);
    }
    return acc / static_cast<double>(n_projections);
}

namespace {

// PSD square root by eigendecomposition of the symmetrized matrix,
// eigenvalues clamped at 0
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

} // namespace

double frechet_distance(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& sigma1,
                        const Eigen::VectorXd& mu2, const Eigen::MatrixXd& sigma2) {
    if (mu1.size() != mu2.size() || sigma1.rows() != sigma2.rows() ||
        sigma1.rows() != mu1.size() || sigma1.rows() != sigma1.cols() ||
        sigma2.rows() != sigma2.cols())
        throw SizingError("frechet_distance: dimension mismatch");

    Eigen::MatrixXd s1_half = psd_sqrt(sigma1);
    Eigen::MatrixXd inner = s1_half * (0.5 * (sigma2 + sigma2.transpose())) * s1_half;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (inner + inner.transpose()));
    double trace_sqrt = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

    double fd = (mu1 - mu2).squaredNorm() + sigma1.trace() + sigma2.trace() - 2.0 * trace_sqrt;
    return std::max(0.0, fd);
}

void fit_gaussian_moments(const Eigen::MatrixXd& rows, Eigen::VectorXd& mu,
                          Eigen::MatrixXd& sigma) {
    if (rows.rows() < 2) throw InsufficientDataError("moment fit needs >= 2 samples");
    mu = rows.colwise().mean();
    Eigen::MatrixXd centered = rows.rowwise() - mu.transpose();
    sigma = centered.transpose() * centered / static_cast<double>(rows.rows() - 1);
}

// ---------------------------------------------------------------------------
// MetricReport
// ---------------------------------------------------------------------------

std::string EvaluatorConfig::to_json() const {
    json j;
    j["hidden"] = hidden;
    j["epochs"] = epochs;
    j["batch_size"] = batch_size;
    j["lr"] = lr;
    j["split"] = "8:2";
    j["n_seeds"] = n_seeds;
    j["seed"] = seed;
    return j.dump();
}

std::string ContrastiveConfig::to_json() const {
    json j;
    j["width"] = width;
    j["epochs"] = epochs;
    j["batch_size"] = batch_size;
    j["lr"] = lr;
    j["temperature"] = temperature;
    return j.dump();
}

void MetricReport::set(const std::string& name, double value) { values[name] = value; }

double MetricReport::get(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) throw UsageError("metric '" + name + "' not in report");
    return it->second;
}

void MetricReport::check_invariants() const {
    for (const auto& [name, v] : values) {
        if (!std::isfinite(v)) throw ParamError("metric '" + name + "' is not finite");
        if (name == "discriminative_score" && (v < 0.0 || v > 0.5))
            throw ParamError("discriminative score outside [0, 0.5]");
        if ((name == "wasserstein" || name == "sliced_wasserstein" || name == "context_fid" ||
             name == "crps") &&
            v < 0.0)
            throw ParamError("distance metric '" + name + "' is negative");
    }
}

std::string MetricReport::to_json() const {
    json j;
    for (const auto& [name, v] : values) j[name] = v;
    j["metadata"] = json::parse(metadata_json);
    return j.dump(2);
}

MetricReport MetricReport::from_json(const std::string& text) {
    json j = json::parse(text);
    MetricReport r;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "metadata")
            r.metadata_json = it.value().dump();
        else
            r.values[it.key()] = it.value().get<double>();
    }
    return r;
}

} // namespace tsbench
