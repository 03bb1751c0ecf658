#include "vpc/validation.hpp"

#include <algorithm>
#include <cmath>

#include "vpc/ensemble.hpp"
#include "vpc/rng.hpp"

namespace vpc {
namespace validation {

namespace {

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

CoefficientTrajectory random_trajectory(std::size_t n_modes, std::size_t steps,
                                        std::uint64_t seed) {
    CounterRng rng(seed, 101);
    CoefficientTrajectory traj(n_modes, 0.0, 3.0, steps);
    for (std::size_t n = 0; n < n_modes; ++n) {
        for (std::size_t m = 0; m <= steps; ++m) {
            traj.at(n, m) = Complex(0.2 + rng.next_double(), rng.next_double() - 0.5);
        }
    }
    return traj;
}

ExperimentGeometry test_geometry(std::size_t n_atoms) {
    return ExperimentGeometry(line_of_atoms(n_atoms, 0.5, 100.0), 100.0, 1.0, 0.2, 0.0, 1.0,
                              2.0, 3.0);
}

}  // namespace

ActionBreakdown uncertainty_action_direct(const CoefficientTrajectory& traj,
                                          const FunctionalParams& params,
                                          const ExperimentGeometry& geometry,
                                          const DetectorModel& detector) {
    const std::size_t n = traj.mode_count();
    const std::size_t cols = traj.sample_count();
    const std::size_t last = traj.step_count();
    const std::size_t ia = traj.node_index(geometry.t_a());
    const std::size_t ib = traj.node_index(geometry.t_b());
    const std::vector<double> w = mode_weights(traj);
    const double dt = traj.dt();

    ActionBreakdown out;
    for (std::size_t m = 0; m <= last; ++m) {
        const double t = traj.time_at(m);
        double atomic = 0.0, transit = 0.0, post = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = 0; k < n; ++k) {
                    for (std::size_t l = 0; l < n; ++l) {
                        const double ww = w[i * cols + m] * w[j * cols + m] *
                                          w[k * cols + m] * w[l * cols + m];
                        atomic += ww * coeff_atomic(i, j, k, l, params, geometry, n);
                        if (m >= ia && m <= ib) {
                            transit += ww * coeff_transit(t, i, j, k, l, params, geometry,
                                                          detector);
                        }
                        if (m >= ib) {
                            post += ww * coeff_post_screen(i, j, params, detector);
                        }
                    }
                }
            }
        }
        out.atomic += dt * ((m == 0 || m == last) ? 0.5 : 1.0) * atomic;
        if (m >= ia && m <= ib) {
            out.transit += dt * ((m == ia || m == ib) ? 0.5 : 1.0) * transit;
        }
        if (m >= ib) {
            out.post_screen += dt * ((m == ib || m == last) ? 0.5 : 1.0) * post;
        }
    }
    out.total = out.atomic + out.transit + out.post_screen;
    return out;
}

CheckResult check_diagonal_exactness() {
    {
        CheckResult r;
        r.name = "diagonal_exactness";
        r.limit = 1e-10;
        const std::size_t n_modes = 10;
        auto g = test_geometry(n_modes);
        auto det = DetectorModel::position(g.atom_positions());
        auto p = FunctionalParams::with_defaults(1.0, 0.25, 1.0, 1.0, 1.0);
        std::vector<Complex> boundary(n_modes, Complex(0.0, 0.0));
        boundary[3] = 1.0;
        auto traj = CoefficientTrajectory::constant(boundary, 0.0, 3.0, 12);
        auto a2 = uncertainty_action(traj, p, g, det);
        const double expect = (3.0 + 4.0 * p.dx2_phi * p.dE2_phi) *
                              static_cast<double>(n_modes + 1) * 3.0;
        r.measured = rel_err(a2.total, expect);
        r.pass = r.measured < r.limit && a2.transit == 0.0 && a2.post_screen == 0.0;
        r.detail = "one-hot constant trajectory against the closed form";
        return r;
    }
}

CheckResult check_quartic_equivalence() {
    {
        CheckResult r;
        r.name = "quartic_sum_equivalence";
        r.limit = 1e-10;
        double worst = 0.0;
        int rep = 0;
        for (std::size_t n_modes = 2; n_modes <= 6; ++n_modes) {
            auto g = test_geometry(n_modes);
            auto det = DetectorModel::position(g.atom_positions());
            auto p = FunctionalParams::with_defaults(1.0, 0.25, 1.0, 1.5, 0.8);
            for (int i = 0; i < 20; ++i, ++rep) {
                auto traj = random_trajectory(n_modes, 12, 500 + rep);
                auto fast = uncertainty_action(traj, p, g, det);
                auto slow = uncertainty_action_direct(traj, p, g, det);
                worst = std::max(worst, rel_err(fast.total, slow.total));
            }
        }
        r.measured = worst;
        r.pass = worst < r.limit;
        r.detail = "factorized vs direct quadruple sum, 100 random trajectories";
        return r;
    }
}

CheckResult check_gradient() {
    {
        CheckResult r;
        r.name = "gradient_finite_difference";
        r.limit = 1e-6;
        auto g = test_geometry(3);
        auto det = DetectorModel::position(g.atom_positions());
        auto p = FunctionalParams::with_defaults(0.7, 0.25, 1.0, 1.2, 0.9);
        const double h = 1e-5;
        double worst = 0.0;
        for (int rep = 0; rep < 100; ++rep) {
            auto traj = random_trajectory(3, 12, 9000 + rep);
            auto grad = total_action_gradient(traj, p, g, det);
            const std::size_t cols = traj.sample_count();
            double max_fd = 0.0, max_diff = 0.0;
            for (std::size_t n = 0; n < 3; ++n) {
                for (std::size_t m = 0; m < cols; ++m) {
                    for (int part = 0; part < 2; ++part) {
                        auto bump = [&](double delta) {
                            CoefficientTrajectory t2 = traj;
                            Complex& c = t2.at(n, m);
                            c += (part == 0) ? Complex(delta, 0.0) : Complex(0.0, delta);
                            return total_action(t2, p, g, det);
                        };
                        const double fd = (bump(h) - bump(-h)) / (2.0 * h);
                        const double an = 2.0 * ((part == 0) ? grad[n * cols + m].real()
                                                             : grad[n * cols + m].imag());
                        max_fd = std::max(max_fd, std::abs(fd));
                        max_diff = std::max(max_diff, std::abs(fd - an));
                    }
                }
            }
            worst = std::max(worst, max_diff / std::max(max_fd, 1e-12));
        }
        r.measured = worst;
        r.pass = worst < r.limit;
        r.detail = "analytic vs central differences, 100 random 3-mode instances";
        return r;
    }
}

std::vector<CheckResult> run_functional_checks() {
    return {check_diagonal_exactness(), check_quartic_equivalence(), check_gradient()};
}

}  // namespace validation
}  // namespace vpc
