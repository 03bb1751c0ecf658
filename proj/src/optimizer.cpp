#include "vpc/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace vpc {

namespace {

constexpr double kArmijoC = 1e-4;
constexpr double kShrink = 0.5;
constexpr double kGrow = 1.3;

struct Attractor {
    std::size_t winner = 0;
    double weight = 0.0;  // current penalty weight rho
    bool active = false;
};

double penalty_value(const CoefficientTrajectory& traj, const Attractor& at) {
    if (!at.active || at.weight == 0.0) return 0.0;
    const std::size_t last = traj.step_count();
    const double lambda = traj.norm_at(last);
    const double w = std::norm(traj.at(at.winner, last)) / lambda;
    const double miss = 1.0 - w;
    return at.weight * miss * miss;
}

void add_penalty_gradient(const CoefficientTrajectory& traj, const Attractor& at,
                          std::vector<Complex>& g) {
    if (!at.active || at.weight == 0.0) return;
    const std::size_t last = traj.step_count();
    const std::size_t cols = traj.sample_count();
    const double lambda = traj.norm_at(last);
    const double w = std::norm(traj.at(at.winner, last)) / lambda;
    const double miss = 1.0 - w;
    for (std::size_t n = 0; n < traj.mode_count(); ++n) {
        const double dw_dp = ((n == at.winner ? 1.0 : 0.0) - w) / lambda;
        g[n * cols + last] += -2.0 * at.weight * miss * dw_dp * traj.at(n, last);
    }
}

double evaluate(const CoefficientTrajectory& traj, const FunctionalParams& params,
                const ExperimentGeometry& geometry, const DetectorModel& detector,
                const Attractor& at) {
    return total_action(traj, params, geometry, detector) + penalty_value(traj, at);
}

/// Removes the per-slice radial component (the direction that only
/// rescales Lambda) and zeroes the fixed boundary slice.
double project_tangent(const CoefficientTrajectory& traj, std::vector<Complex>& g) {
    const std::size_t cols = traj.sample_count();
    const std::size_t last = traj.step_count();
    double norm2 = 0.0;
    for (std::size_t n = 0; n < traj.mode_count(); ++n) g[n * cols] = Complex(0.0, 0.0);
    for (std::size_t m = 1; m <= last; ++m) {
        double dot = 0.0;
        double lambda = 0.0;
        for (std::size_t n = 0; n < traj.mode_count(); ++n) {
            const Complex c = traj.at(n, m);
            const Complex& gv = g[n * cols + m];
            dot += gv.real() * c.real() + gv.imag() * c.imag();
            lambda += std::norm(c);
        }
        const double coef = dot / lambda;
        for (std::size_t n = 0; n < traj.mode_count(); ++n) {
            Complex& gv = g[n * cols + m];
            gv -= coef * traj.at(n, m);
            norm2 += std::norm(gv);
        }
    }
    return norm2;
}

/// Deterministic stall perturbation: rescales moduli along a per-mode
/// direction zeta, ramped smoothly away from the pinned boundary, then
/// retracts to the sphere. Exact weight ties are saddle points of the
/// projected descent (the objective is invariant under per-mode phase
/// rotation, so nothing else breaks them).
CoefficientTrajectory perturbed(const CoefficientTrajectory& cur,
                                const std::vector<double>& zeta, double delta, double t_b) {
    CoefficientTrajectory next = cur;
    const std::size_t last = cur.step_count();
    for (std::size_t n = 0; n < cur.mode_count(); ++n) {
        if (zeta[n] == 0.0) continue;
        for (std::size_t m = 1; m <= last; ++m) {
            const double t = cur.time_at(m);
            double s = (t - cur.t_start()) / (t_b - cur.t_start());
            s = std::clamp(s, 0.0, 1.0);
            s = s * s * (3.0 - 2.0 * s);
            next.at(n, m) *= 1.0 + delta * zeta[n] * s;
        }
    }
    next.renormalize(1);
    return next;
}

/// Transfer between the two leading modes at t_f, boosting the lower
/// index (the documented tie-break).
std::vector<double> top_pair_direction(const CoefficientTrajectory& cur) {
    const std::size_t last = cur.step_count();
    std::size_t first = 0, second = 1;
    if (std::norm(cur.at(1, last)) > std::norm(cur.at(0, last))) std::swap(first, second);
    for (std::size_t n = 2; n < cur.mode_count(); ++n) {
        const double w = std::norm(cur.at(n, last));
        if (w > std::norm(cur.at(first, last))) {
            second = first;
            first = n;
        } else if (w > std::norm(cur.at(second, last))) {
            second = n;
        }
    }
    std::vector<double> zeta(cur.mode_count(), 0.0);
    zeta[std::min(first, second)] = 1.0;
    zeta[std::max(first, second)] = -1.0;
    return zeta;
}

/// Low indices up, high indices down; breaks multi-way ties.
std::vector<double> rank_direction(std::size_t n_modes) {
    std::vector<double> zeta(n_modes);
    for (std::size_t n = 0; n < n_modes; ++n) {
        zeta[n] = n_modes > 1
                      ? 1.0 - 2.0 * static_cast<double>(n) / static_cast<double>(n_modes - 1)
                      : 1.0;
    }
    return zeta;
}

std::vector<double> hashed_direction(std::size_t n_modes, std::size_t attempt) {
    std::vector<double> zeta(n_modes);
    for (std::size_t n = 0; n < n_modes; ++n) {
        std::uint64_t h = (attempt * 0x9e3779b97f4a7c15ull) ^ (n * 0xbf58476d1ce4e5b9ull);
        h ^= h >> 31;
        h *= 0x94d049bb133111ebull;
        zeta[n] = (h & 1) ? 1.0 : -1.0;
    }
    return zeta;
}

std::size_t argmax_final_weight(const CoefficientTrajectory& traj, double* value) {
    const std::size_t last = traj.step_count();
    const double lambda = traj.norm_at(last);
    std::size_t best = 0;
    double best_w = -1.0;
    for (std::size_t n = 0; n < traj.mode_count(); ++n) {
        const double w = std::norm(traj.at(n, last)) / lambda;
        if (w > best_w) {
            best_w = w;
            best = n;
        }
    }
    if (value) *value = best_w;
    return best;
}

OptimizationReport descend(const CoefficientTrajectory& initial, const OptimizerConfig& cfg,
                           const FunctionalParams& params, const ExperimentGeometry& geometry,
                           const DetectorModel& detector, Attractor at) {
    cfg.validate();
    OptimizationReport report{initial, {}, std::nullopt, false, false, 0, 0.0, 0.0};
    CoefficientTrajectory& cur = report.final_trajectory;
    cur.renormalize(1);

    const std::size_t cols = cur.sample_count();
    const std::size_t stages = at.active ? std::max<std::size_t>(cfg.penalty_stages, 1) : 1;
    const std::size_t block = std::max<std::size_t>(cfg.max_iters / stages, 1);
    const double rho_final = at.weight;
    constexpr std::size_t kMaxEscapes = 64;

    double step = cfg.step_size;
    std::size_t iters = 0;
    std::size_t escapes_used = 0;
    bool converged = false;

    for (std::size_t stage = 0; stage < stages && iters < cfg.max_iters; ++stage) {
        if (at.active) {
            // Geometric ramp ending at the full attractor weight.
            at.weight = rho_final / std::pow(10.0, static_cast<double>(stages - 1 - stage));
        }
        double f = evaluate(cur, params, geometry, detector, at);
        converged = false;
        const std::size_t stage_end = (stage + 1 == stages) ? cfg.max_iters : (stage + 1) * block;

        // A stalled descent may be sitting on a tie saddle; a perturbation
        // is kept only when it does not increase the objective.
        auto try_escape = [&]() -> bool {
            double w_gate;
            if (at.active) {
                const std::size_t last = cur.step_count();
                w_gate = std::norm(cur.at(at.winner, last)) / cur.norm_at(last);
            } else {
                argmax_final_weight(cur, &w_gate);
            }
            if (w_gate >= cfg.collapse_threshold) return false;
            auto attempt_direction = [&](const std::vector<double>& zeta,
                                         std::initializer_list<double> deltas) {
                for (double delta : deltas) {
                    CoefficientTrajectory cand = perturbed(cur, zeta, delta, geometry.t_b());
                    const double fc = evaluate(cand, params, geometry, detector, at);
                    if (fc <= f + 1e-12 * std::max(1.0, std::abs(f))) {
                        cur = std::move(cand);
                        f = fc;
                        return true;
                    }
                }
                return false;
            };
            // Aggressive transfer between the two leading modes first,
            // then the gentler whole-spectrum patterns.
            if (attempt_direction(top_pair_direction(cur), {0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3})) {
                return true;
            }
            if (attempt_direction(rank_direction(cur.mode_count()), {1e-3, 1e-4, 1e-5})) {
                return true;
            }
            for (int local = 0; local < 2 && escapes_used < kMaxEscapes; ++local) {
                if (attempt_direction(hashed_direction(cur.mode_count(), ++escapes_used),
                                      {1e-3, 1e-4, 1e-5})) {
                    return true;
                }
            }
            return false;
        };

        std::size_t since_escape_probe = 0;
        while (iters < stage_end) {
            // Periodic opportunistic escape: ties decay so slowly toward
            // their saddle that waiting for a full stall wastes most of
            // the iteration budget.
            if (++since_escape_probe >= 50) {
                since_escape_probe = 0;
                try_escape();
            }
            std::vector<Complex> g = total_action_gradient(cur, params, geometry, detector);
            add_penalty_gradient(cur, at, g);
            const double gnorm2 = project_tangent(cur, g);

            bool stalled = false;
            if (gnorm2 < 1e-30) {
                stalled = true;
            } else {
                CoefficientTrajectory trial = cur;
                bool accepted = false;
                double f_trial = f;
                double eta = step;
                for (int backtrack = 0; backtrack < 60; ++backtrack) {
                    trial = cur;
                    for (std::size_t idx = 0; idx < g.size(); ++idx) {
                        trial.data()[idx] -= eta * g[idx];
                    }
                    // Re-pin the boundary exactly, then retract to the sphere.
                    for (std::size_t n = 0; n < cur.mode_count(); ++n) {
                        trial.data()[n * cols] = cur.at(n, 0);
                    }
                    trial.renormalize(1);
                    f_trial = evaluate(trial, params, geometry, detector, at);
                    if (f_trial <= f - kArmijoC * eta * gnorm2) {
                        accepted = true;
                        break;
                    }
                    eta *= kShrink;
                }
                if (!accepted) {
                    stalled = true;  // no decrease at any step length
                } else {
                    cur = std::move(trial);
                    report.objective_trace.push_back(f_trial);
                    ++iters;
                    step = (eta >= step) ? eta * kGrow : eta;
                    const double decrease = (f - f_trial) / std::max(std::abs(f), 1e-300);
                    f = f_trial;
                    if (decrease < cfg.tolerance) stalled = true;
                }
            }

            if (stalled) {
                if (try_escape()) continue;
                converged = true;
                break;
            }
        }
    }

    report.iterations = iters;
    report.converged = converged;
    report.objective_final = total_action(cur, params, geometry, detector);
    double max_w = 0.0;
    const std::size_t best = argmax_final_weight(cur, &max_w);
    report.final_max_weight = max_w;
    report.collapsed = max_w >= cfg.collapse_threshold;
    if (report.collapsed) report.winner = best;
    if (at.active) {
        // The conditioned run only counts as converged when the attractor
        // actually pulled its winner to threshold.
        const double lambda = cur.norm_at(cur.step_count());
        const double w_win = std::norm(cur.at(at.winner, cur.step_count())) / lambda;
        if (w_win < cfg.collapse_threshold) report.converged = false;
    }
    return report;
}

}  // namespace

void OptimizerConfig::validate() const {
    if (!(step_size > 0.0)) throw ConfigError("optimizer step size must be positive");
    if (!(tolerance > 0.0 && tolerance < 1.0)) throw ConfigError("tolerance must be in (0, 1)");
    if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (!(collapse_threshold > 0.0 && collapse_threshold <= 1.0)) {
        throw ConfigError("collapse threshold must be in (0, 1]");
    }
}

OptimizationReport relax(const CoefficientTrajectory& initial, const OptimizerConfig& config,
                         const FunctionalParams& params, const ExperimentGeometry& geometry,
                         const DetectorModel& detector) {
    return descend(initial, config, params, geometry, detector, Attractor{});
}

OptimizationReport relax_conditioned(const CoefficientTrajectory& initial,
                                     std::size_t winner, const OptimizerConfig& config,
                                     const FunctionalParams& params,
                                     const ExperimentGeometry& geometry,
                                     const DetectorModel& detector) {
    if (winner >= initial.mode_count()) throw ConfigError("winner index out of range");
    Attractor at;
    at.winner = winner;
    at.weight = config.penalty_weight;
    at.active = true;
    return descend(initial, config, params, geometry, detector, at);
}

}  // namespace vpc
