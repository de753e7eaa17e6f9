#include "latentmark/schedule.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

namespace latentmark {

void DiffusionSchedule::validate() const {
    if (alpha_bar.empty()) throw ConfigError("schedule has no levels");
    if (alpha_bar[0] != 1.0) throw ConfigError("alpha_bar[0] must be 1");
    for (std::size_t t = 1; t < alpha_bar.size(); ++t) {
        const double a = alpha_bar[t];
        if (!(a > 0.0 && a < alpha_bar[t - 1] && a <= 1.0)) {
            throw ConfigError("alpha_bar must be strictly decreasing in (0, 1], bad level at t=" +
                              std::to_string(t));
        }
    }
}

DiffusionSchedule DiffusionSchedule::linear_beta(int T, int base_steps, double beta_start,
                                                 double beta_end) {
    if (T < 0) throw ConfigError("T must be >= 0");
    if (T == 0) return DiffusionSchedule{{1.0}};
    if (base_steps == 0) base_steps = T;
    if (base_steps < T) throw ConfigError("base_steps must be >= T");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
        throw ConfigError("betas must satisfy 0 < beta_start <= beta_end < 1");
    }

    std::vector<double> base(std::size_t(base_steps) + 1);
    base[0] = 1.0;
    for (int i = 1; i <= base_steps; ++i) {
        const double frac = base_steps > 1 ? double(i - 1) / double(base_steps - 1) : 0.0;
        const double beta = beta_start + (beta_end - beta_start) * frac;
        base[i] = base[i - 1] * (1.0 - beta);
    }

    DiffusionSchedule s;
    s.alpha_bar.resize(std::size_t(T) + 1);
    for (int t = 0; t <= T; ++t) {
        const auto idx = std::size_t(std::llround(double(t) * base_steps / T));
        s.alpha_bar[t] = base[idx];
    }
    s.validate();
    return s;
}

void DiffusionSchedule::dump(std::ostream& os) const {
    char buf[64];
    for (double a : alpha_bar) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", a);
        os << buf;
    }
}

DiffusionSchedule DiffusionSchedule::load(std::istream& is) {
    DiffusionSchedule s;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::size_t pos = 0;
        const double v = std::stod(line, &pos);
        s.alpha_bar.push_back(v);
    }
    s.validate();
    return s;
}

std::pair<double, double> ddim_coeffs(const DiffusionSchedule& schedule, int t) {
    if (t < 1 || t > schedule.steps()) {
        throw ConfigError("ddim_coeffs: t=" + std::to_string(t) + " outside [1, " +
                          std::to_string(schedule.steps()) + "]");
    }
    const double prev = schedule.alpha_bar[std::size_t(t) - 1];
    const double cur = schedule.alpha_bar[std::size_t(t)];
    const double a = std::sqrt(prev / cur);
    const double b = std::sqrt(1.0 - prev) - std::sqrt(prev * (1.0 - cur) / cur);
    return {a, b};
}

}  // namespace latentmark
