#include "vpc/functional.hpp"

#include <cmath>

namespace vpc {

namespace detail {

std::pair<std::size_t, std::size_t> epoch_nodes(const CoefficientTrajectory& traj,
                                                const ExperimentGeometry& g) {
    const double tol = 1e-9 * traj.dt();
    if (std::abs(traj.t_start() - g.t_i()) > tol || std::abs(traj.t_end() - g.t_f()) > tol) {
        throw GridError("trajectory grid does not span [t_i, t_f]");
    }
    return {traj.node_index(g.t_a()), traj.node_index(g.t_b())};
}

}  // namespace detail

namespace {

struct FamilyConstants {
    double k_atomic = 0.0;      // (3 + 4 dx2 dE2) * N
    double k_excitation = 0.0;  // 8 (L3/L) dx2 gap^2
    double k_post = 0.0;        // 2 dp2_xi
    double transit_scale = 0.0; // m_e^2 / (t_b - t_a)^4
};

FamilyConstants family_constants(const FunctionalParams& p, const ExperimentGeometry& g,
                                 std::size_t n_modes) {
    const EpochLengths el = epoch_lengths(g);
    FamilyConstants c;
    // Particle count: the electron plus one atom per mode.
    const double n_total = static_cast<double>(n_modes) + 1.0;
    c.k_atomic = (3.0 + 4.0 * p.dx2_phi * p.dE2_phi) * n_total + p.o1_floor;
    c.k_excitation = 8.0 * (el.l3 / el.total) * p.dx2_phi * p.energy_gap * p.energy_gap;
    c.k_post = 2.0 * p.dp2_xi;
    const double l2sq = el.l2 * el.l2;
    c.transit_scale = p.electron_mass * p.electron_mass / (l2sq * l2sq);
    return c;
}

/// Weighted label moments of one time slice: S0 = sum w, and per
/// transverse axis S1 = sum w b, S2 = sum w b^2, plus Q = sum w^2. The
/// pairwise separation sum P_q = sum_ij w_i w_j (b_iq - b_jq)^2 equals
/// 2 (S0 S2 - S1^2) exactly.
struct SliceMoments {
    double s0 = 0.0;
    double q = 0.0;
    double s1[2] = {0.0, 0.0};
    double s2[2] = {0.0, 0.0};

    double pairwise(int axis) const { return 2.0 * (s0 * s2[axis] - s1[axis] * s1[axis]); }
};

SliceMoments slice_moments(const double* w, std::size_t n, std::size_t stride,
                           const std::vector<Vec3>& labels) {
    SliceMoments mo;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w[i * stride];
        mo.s0 += wi;
        mo.q += wi * wi;
        for (int a = 0; a < 2; ++a) {
            const double b = labels[i][a + 1];
            mo.s1[a] += wi * b;
            mo.s2[a] += wi * b * b;
        }
    }
    return mo;
}

}  // namespace

double coeff_atomic(std::size_t, std::size_t, std::size_t k, std::size_t l,
                    const FunctionalParams& params, const ExperimentGeometry& geometry,
                    std::size_t n_modes) {
    const FamilyConstants c = family_constants(params, geometry, n_modes);
    return c.k_atomic + (k == l ? 0.0 : c.k_excitation);
}

double coeff_transit(double t, std::size_t i, std::size_t j, std::size_t k, std::size_t l,
                     const FunctionalParams& params, const ExperimentGeometry& geometry,
                     const DetectorModel& detector) {
    const auto& b = detector.labels_at(t);
    const double dta = t - geometry.t_a();
    const double l2 = geometry.t_b() - geometry.t_a();
    double sum = 0.0;
    for (int a = 1; a <= 2; ++a) {
        const double dij = b[i][a] - b[j][a];
        const double dkl = b[k][a] - b[l][a];
        sum += dij * dij * dkl * dkl;
    }
    const double m2 = params.electron_mass * params.electron_mass;
    return m2 * dta * dta / (l2 * l2 * l2 * l2) * sum;
}

double coeff_post_screen(std::size_t i, std::size_t j, const FunctionalParams& params,
                         const DetectorModel& detector) {
    const auto& b = detector.labels();
    return 2.0 * params.dp2_xi * transverse_dist2(b[i], b[j]);
}

ActionBreakdown uncertainty_action(const CoefficientTrajectory& traj,
                                   const FunctionalParams& params,
                                   const ExperimentGeometry& geometry,
                                   const DetectorModel& detector) {
    if (detector.mode_count() != traj.mode_count()) {
        throw ConfigError("detector labels do not match trajectory mode count");
    }
    const auto [ia, ib] = detail::epoch_nodes(traj, geometry);
    const std::size_t cols = traj.sample_count();
    const std::size_t last = traj.step_count();
    const std::size_t n = traj.mode_count();
    const FamilyConstants c = family_constants(params, geometry, n);
    const std::vector<double> w = mode_weights(traj);
    const double dt = traj.dt();

    ActionBreakdown out;
    for (std::size_t m = 0; m <= last; ++m) {
        const double t = traj.time_at(m);
        const SliceMoments mo = slice_moments(&w[m], n, cols, detector.labels_at(t));
        const double s0sq = mo.s0 * mo.s0;

        const double wa = dt * ((m == 0 || m == last) ? 0.5 : 1.0);
        out.atomic += wa * (c.k_atomic * s0sq * s0sq +
                            c.k_excitation * s0sq * (s0sq - mo.q));

        if (m >= ia && m <= ib) {
            const double wb = dt * ((m == ia || m == ib) ? 0.5 : 1.0);
            const double dta = t - geometry.t_a();
            const double p2 = mo.pairwise(0), p3 = mo.pairwise(1);
            out.transit += wb * c.transit_scale * dta * dta * (p2 * p2 + p3 * p3);
        }
        if (m >= ib) {
            const double wc = dt * ((m == ib || m == last) ? 0.5 : 1.0);
            out.post_screen += wc * c.k_post * s0sq * (mo.pairwise(0) + mo.pairwise(1));
        }
    }
    out.total = out.atomic + out.transit + out.post_screen;
    return out;
}

double smoothness_action(const CoefficientTrajectory& traj) {
    const std::size_t last = traj.step_count();
    const std::size_t n = traj.mode_count();
    const double dt = traj.dt();
    double acc = 0.0;
    for (std::size_t mode = 0; mode < n; ++mode) {
        for (std::size_t m = 0; m <= last; ++m) {
            Complex vel;
            if (m == 0) {
                vel = (traj.at(mode, 1) - traj.at(mode, 0)) / dt;
            } else if (m == last) {
                vel = (traj.at(mode, last) - traj.at(mode, last - 1)) / dt;
            } else {
                vel = (traj.at(mode, m + 1) - traj.at(mode, m - 1)) / (2.0 * dt);
            }
            const double wq = dt * ((m == 0 || m == last) ? 0.5 : 1.0);
            acc += wq * std::norm(vel);
        }
    }
    return acc;
}

double total_action(const CoefficientTrajectory& traj, const FunctionalParams& params,
                    const ExperimentGeometry& geometry, const DetectorModel& detector) {
    return smoothness_action(traj) +
           params.epsilon * uncertainty_action(traj, params, geometry, detector).total;
}

std::vector<Complex> smoothness_gradient(const CoefficientTrajectory& traj) {
    const std::size_t last = traj.step_count();
    const std::size_t cols = traj.sample_count();
    const std::size_t n = traj.mode_count();
    const double dt = traj.dt();
    std::vector<Complex> g(n * cols, Complex(0.0, 0.0));
    for (std::size_t mode = 0; mode < n; ++mode) {
        Complex* gm = &g[mode * cols];
        for (std::size_t m = 0; m <= last; ++m) {
            const double wq = dt * ((m == 0 || m == last) ? 0.5 : 1.0);
            if (m == 0) {
                const Complex v = wq * (traj.at(mode, 1) - traj.at(mode, 0)) / (dt * dt);
                gm[1] += v;
                gm[0] -= v;
            } else if (m == last) {
                const Complex v = wq * (traj.at(mode, last) - traj.at(mode, last - 1)) / (dt * dt);
                gm[last] += v;
                gm[last - 1] -= v;
            } else {
                const Complex v =
                    wq * (traj.at(mode, m + 1) - traj.at(mode, m - 1)) / (4.0 * dt * dt);
                gm[m + 1] += v;
                gm[m - 1] -= v;
            }
        }
    }
    return g;
}

void add_uncertainty_gradient(const CoefficientTrajectory& traj,
                              const FunctionalParams& params,
                              const ExperimentGeometry& geometry,
                              const DetectorModel& detector, double scale,
                              std::vector<Complex>& out) {
    const auto [ia, ib] = detail::epoch_nodes(traj, geometry);
    const std::size_t cols = traj.sample_count();
    const std::size_t last = traj.step_count();
    const std::size_t n = traj.mode_count();
    const FamilyConstants c = family_constants(params, geometry, n);
    const std::vector<double> w = mode_weights(traj);
    const double dt = traj.dt();

    std::vector<double> diw(n);  // d(integrand)/dw_n, all families combined
    for (std::size_t m = 0; m <= last; ++m) {
        const double t = traj.time_at(m);
        const auto& labels = detector.labels_at(t);
        const SliceMoments mo = slice_moments(&w[m], n, cols, labels);
        const double s0 = mo.s0;
        const double s0sq = s0 * s0;

        const double wa = dt * ((m == 0 || m == last) ? 0.5 : 1.0);
        double wb = 0.0, wc = 0.0;
        double transit_t = 0.0;
        if (m >= ia && m <= ib) {
            wb = dt * ((m == ia || m == ib) ? 0.5 : 1.0);
            const double dta = t - geometry.t_a();
            transit_t = c.transit_scale * dta * dta;
        }
        if (m >= ib) wc = dt * ((m == ib || m == last) ? 0.5 : 1.0);

        const double p[2] = {mo.pairwise(0), mo.pairwise(1)};
        const double psum = p[0] + p[1];

        for (std::size_t i = 0; i < n; ++i) {
            const double wi = w[i * cols + m];
            // dP_q/dw_i = 2 (S2_q + S0 b^2 - 2 b S1_q)
            double dp[2];
            for (int a = 0; a < 2; ++a) {
                const double b = labels[i][a + 1];
                dp[a] = 2.0 * (mo.s2[a] + s0 * b * b - 2.0 * b * mo.s1[a]);
            }
            double d = wa * (4.0 * c.k_atomic * s0sq * s0 +
                             c.k_excitation *
                                 (2.0 * s0 * (s0sq - mo.q) + s0sq * (2.0 * s0 - 2.0 * wi)));
            if (wb > 0.0) {
                d += wb * transit_t * 2.0 * (p[0] * dp[0] + p[1] * dp[1]);
            }
            if (wc > 0.0) {
                d += wc * c.k_post * (2.0 * s0 * psum + s0sq * (dp[0] + dp[1]));
            }
            diw[i] = d;
        }

        // Chain through w = p / Lambda: dI/dp_i = (dI/dw_i - sum_j w_j dI/dw_j) / Lambda,
        // then dI/dC*_i = dI/dp_i * C_i.
        const double lambda = traj.norm_at(m);
        double wdot = 0.0;
        for (std::size_t i = 0; i < n; ++i) wdot += w[i * cols + m] * diw[i];
        const double inv_lambda = 1.0 / lambda;
        for (std::size_t i = 0; i < n; ++i) {
            const double dp_i = (diw[i] - wdot) * inv_lambda;
            out[i * cols + m] += scale * dp_i * traj.at(i, m);
        }
    }
}

std::vector<Complex> total_action_gradient(const CoefficientTrajectory& traj,
                                           const FunctionalParams& params,
                                           const ExperimentGeometry& geometry,
                                           const DetectorModel& detector) {
    std::vector<Complex> g = smoothness_gradient(traj);
    add_uncertainty_gradient(traj, params, geometry, detector, params.epsilon, g);
    return g;
}

}  // namespace vpc
