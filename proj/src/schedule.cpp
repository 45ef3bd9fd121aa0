#include "tsbench/schedule.hpp"

#include <cmath>

namespace tsbench {

NoiseSchedule NoiseSchedule::make(ScheduleKind kind, std::size_t n_steps, double beta_lo,
                                  double beta_hi) {
    if (n_steps < 1) throw ParamError("schedule needs n_steps >= 1");
    NoiseSchedule s;
    s.kind = kind;
    s.n_steps = n_steps;
    s.betas.resize(n_steps);

    if (kind == ScheduleKind::linear) {
        if (!(beta_lo > 0.0 && beta_hi < 1.0 && beta_lo <= beta_hi))
            throw ParamError("linear schedule requires 0 < beta_lo <= beta_hi < 1");
        for (std::size_t i = 0; i < n_steps; ++i) {
            double f = n_steps == 1 ? 0.0
                                    : static_cast<double>(i) / static_cast<double>(n_steps - 1);
            s.betas[i] = beta_lo + f * (beta_hi - beta_lo);
        }
    } else {
        // squared-cosine alpha_bar profile; betas derived from its ratios
        const double off = 0.008;
        auto f = [&](double u) {
            double x = (u + off) / (1.0 + off) * 1.5707963267948966;
            double c = std::cos(x);
            return c * c;
        };
        double f0 = f(0.0);
        double prev = 1.0;
        for (std::size_t i = 0; i < n_steps; ++i) {
            double ab = f(static_cast<double>(i + 1) / static_cast<double>(n_steps)) / f0;
            double beta = 1.0 - ab / prev;
            s.betas[i] = std::min(std::max(beta, 1e-8), 0.999);
            prev *= 1.0 - s.betas[i];
        }
    }

    s.alphas.resize(n_steps);
    s.alpha_bars.resize(n_steps);
    double bar = 1.0;
    for (std::size_t i = 0; i < n_steps; ++i) {
        s.alphas[i] = 1.0 - s.betas[i];
        bar *= s.alphas[i];
        s.alpha_bars[i] = bar;
    }
    s.check_invariants();
    return s;
}

void NoiseSchedule::check_invariants() const {
    for (double b : betas)
        if (!(b > 0.0 && b < 1.0)) throw ParamError("schedule betas must lie in (0,1)");
    double prev = 1.0;
    for (double ab : alpha_bars) {
        if (!(ab < prev)) throw ParamError("alpha_bar must be strictly decreasing");
        prev = ab;
    }
}

ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "linear") return ScheduleKind::linear;
    if (s == "cosine") return ScheduleKind::cosine;
    throw ParamError("unknown schedule kind: " + s);
}

std::string to_string(ScheduleKind k) {
    return k == ScheduleKind::linear ? "linear" : "cosine";
}

} // namespace tsbench
