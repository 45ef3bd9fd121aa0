#ifndef TSBENCH_SCHEDULE_HPP
#define TSBENCH_SCHEDULE_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "tsbench/errors.hpp"

namespace tsbench {

enum class ScheduleKind { linear, cosine };

/// Forward-corruption schedule of a denoising diffusion model: the beta_t
/// series with derived alpha_t = 1 - beta_t and alpha_bar_t = prod alpha_s.
/// Indexing is 1-based through the accessors; alpha_bar(0) = 1.
struct NoiseSchedule {
    ScheduleKind kind = ScheduleKind::linear;
    std::size_t n_steps = 0;
    std::vector<double> betas;      // [n_steps]
    std::vector<double> alphas;     // [n_steps]
    std::vector<double> alpha_bars; // [n_steps]

    static NoiseSchedule make(ScheduleKind kind, std::size_t n_steps, double beta_lo = 1e-4,
                              double beta_hi = 0.02);

    double beta(std::size_t t) const { return betas.at(t - 1); }
    double alpha(std::size_t t) const { return alphas.at(t - 1); }
    double alpha_bar(std::size_t t) const { return t == 0 ? 1.0 : alpha_bars.at(t - 1); }

    void check_invariants() const;
};

ScheduleKind schedule_kind_from_string(const std::string& s);
std::string to_string(ScheduleKind k);

} // namespace tsbench

#endif
