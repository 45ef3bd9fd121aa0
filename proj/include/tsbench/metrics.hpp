#ifndef TSBENCH_METRICS_HPP
#define TSBENCH_METRICS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsbench/series.hpp"

namespace tsbench {

// ---------------------------------------------------------------------------
// Model-free metrics
// ---------------------------------------------------------------------------

/// Mean of squared elementwise differences over all entries.
double metric_mse(const Array3& prediction, const Array3& target);

/// MSE restricted to entries where the mask is 0 (the imputed positions).
double metric_mse_missing(const Array3& prediction, const Array3& target, const Mask& mask);

/// Energy-form CRPS of a scalar ensemble against one observation:
/// (1/S) sum |x_i - y| - (1/(2 S^2)) sum_ij |x_i - x_j|.
double crps_empirical(std::vector<double> ensemble, double y);

/// CRPS averaged over all target entries; draws are draw-major
/// [S*N, T, D] as produced by GenerativeModel::sample. With a mask,
/// averages over missing entries only.
double crps_mean(const Array3& draws, std::size_t n_draws, const Array3& target,
                 const Mask* missing_only = nullptr);

/// Order-1 Wasserstein distance between two empirical distributions.
double wasserstein_1d(std::vector<double> a, std::vector<double> b);

/// Mean of wasserstein_1d over per-feature-per-timestep marginals.
double wasserstein_marginal_mean(const Array3& a, const Array3& b);

/// Average 1-d Wasserstein distance over seeded random unit projections of
/// the flattened samples.
double sliced_wasserstein(const Array3& a, const Array3& b, std::size_t n_projections,
                          std::uint64_t seed);

/// Frechet distance between two Gaussians:
/// ||mu1 - mu2||^2 + tr(S1 + S2 - 2 (S1 S2)^(1/2)), matrix square roots by
/// eigendecomposition with eigenvalues clamped at 0.
double frechet_distance(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& sigma1,
                        const Eigen::VectorXd& mu2, const Eigen::MatrixXd& sigma2);

/// Mean and covariance of row vectors.
void fit_gaussian_moments(const Eigen::MatrixXd& rows, Eigen::VectorXd& mu, Eigen::MatrixXd& sigma);

// ---------------------------------------------------------------------------
// Model-based metrics
// ---------------------------------------------------------------------------

/// Post-hoc recurrent evaluator settings (GRU hidden width, epochs, the
/// fixed 8:2 mixed-set split, seeds).
struct EvaluatorConfig {
    std::size_t hidden = 64;
    std::size_t epochs = 50;
    std::size_t batch_size = 128;
    double lr = 1e-3;
    std::size_t n_seeds = 3; // metric = mean over this many evaluator seeds
    std::uint64_t seed = 0;

    std::string to_json() const;
};

/// |0.5 - accuracy| of a GRU classifier separating real from generated
/// series, averaged over n_seeds evaluator seeds. Always within [0, 0.5].
double discriminative_score(const SeriesSet& real, const SeriesSet& fake,
                            const EvaluatorConfig& cfg);

/// Train-on-synthetic-test-on-real MAE of a GRU one-step-ahead forecaster,
/// averaged over n_seeds evaluator seeds.
double predictive_score(const SeriesSet& real, const SeriesSet& fake, const EvaluatorConfig& cfg);

/// Reduced contrastive sequence encoder settings (stand-in for a full
/// contrastive representation model at desk scale).
struct ContrastiveConfig {
    std::size_t width = 64;
    std::size_t epochs = 20;
    std::size_t batch_size = 128;
    double lr = 1e-3;
    double temperature = 0.2;

    std::string to_json() const;
};

/// Frechet distance between Gaussian moment fits of learned embeddings of
/// the two sets; the encoder is retrained on the real set per call.
double context_fid(const SeriesSet& real, const SeriesSet& fake, const ContrastiveConfig& cfg,
                   std::uint64_t seed);

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

/// Named scalar results of one evaluation plus the evaluator settings that
/// produced them.
struct MetricReport {
    std::map<std::string, double> values;  // insertion-stable via std::map ordering
    std::string metadata_json = "{}";      // seeds, evaluator configs

    void set(const std::string& name, double value);
    double get(const std::string& name) const;
    bool has(const std::string& name) const { return values.count(name) > 0; }

    void check_invariants() const;

    std::string to_json() const;
    static MetricReport from_json(const std::string& text);
};

} // namespace tsbench

#endif
