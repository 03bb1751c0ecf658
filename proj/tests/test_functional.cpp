#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "vpc/functional.hpp"
#include "vpc/model.hpp"
#include "vpc/rng.hpp"

using namespace vpc;

namespace {

ExperimentGeometry line_geometry(std::size_t n_atoms, double spacing = 0.5,
                                 double t_i = 0.0, double t_a = 1.0, double t_b = 2.0,
                                 double t_f = 3.0) {
    std::vector<Vec3> atoms;
    const double mid = 0.5 * spacing * static_cast<double>(n_atoms - 1);
    for (std::size_t n = 0; n < n_atoms; ++n) {
        atoms.push_back({100.0, spacing * static_cast<double>(n) - mid, 0.0});
    }
    return ExperimentGeometry(atoms, 100.0, 1.0, 0.2, t_i, t_a, t_b, t_f);
}

CoefficientTrajectory random_trajectory(std::size_t n_modes, std::size_t steps,
                                        std::uint64_t seed, double t_i = 0.0,
                                        double t_f = 3.0) {
    CounterRng rng(seed, 77);
    CoefficientTrajectory traj(n_modes, t_i, t_f, steps);
    for (std::size_t n = 0; n < n_modes; ++n) {
        for (std::size_t m = 0; m <= steps; ++m) {
            traj.at(n, m) = Complex(0.2 + rng.next_double(), rng.next_double() - 0.5);
        }
    }
    return traj;
}

// Independent oracle: the quartic weight sum evaluated by four nested
// index loops per time sample, integrated with the same trapezoid windows.
ActionBreakdown quartic_direct(const CoefficientTrajectory& traj, const FunctionalParams& p,
                          const ExperimentGeometry& g, const DetectorModel& det) {
    const std::size_t n = traj.mode_count();
    const std::size_t cols = traj.sample_count();
    const std::size_t last = traj.step_count();
    const std::size_t ia = traj.node_index(g.t_a());
    const std::size_t ib = traj.node_index(g.t_b());
    const std::vector<double> w = mode_weights(traj);
    const double dt = traj.dt();

    ActionBreakdown out;
    for (std::size_t m = 0; m <= last; ++m) {
        const double t = traj.time_at(m);
        double atomic = 0.0, transit = 0.0, post = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k)
                    for (std::size_t l = 0; l < n; ++l) {
                        const double ww =
                            w[i * cols + m] * w[j * cols + m] * w[k * cols + m] * w[l * cols + m];
                        atomic += ww * coeff_atomic(i, j, k, l, p, g, n);
                        if (m >= ia && m <= ib) {
                            transit += ww * coeff_transit(t, i, j, k, l, p, g, det);
                        }
                        if (m >= ib) {
                            post += ww * coeff_post_screen(i, j, p, det);
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

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

TEST_CASE("atomic coefficient closed form") {
    auto g = line_geometry(4);  // L3/L = 1/3
    FunctionalParams p;
    p.dx2_phi = 0.25;
    p.dE2_phi = 1.0;
    p.energy_gap = 2.0;

    // paper N = 10 -> 9 modes; k == l drops the excitation term
    CHECK(coeff_atomic(0, 1, 2, 2, p, g, 9) == doctest::Approx(40.0));
    CHECK(coeff_atomic(3, 7, 2, 2, p, g, 9) == doctest::Approx(40.0));  // independent of i, j
    // k != l: 40 + 8*(1/3)*0.25*4 = 42.666...
    CHECK(coeff_atomic(0, 1, 2, 3, p, g, 9) == doctest::Approx(40.0 + 8.0 / 3.0).epsilon(1e-12));
    // symmetric under k <-> l
    CHECK(coeff_atomic(0, 1, 3, 2, p, g, 9) == coeff_atomic(0, 1, 2, 3, p, g, 9));
}

TEST_CASE("transit coefficient closed form and symmetries") {
    auto g = line_geometry(4, 1.0);  // atoms at -1.5, -0.5, 0.5, 1.5 -> unit spacing
    FunctionalParams p;
    auto det = DetectorModel::position(g.atom_positions());

    // b_i - b_j = (0,1,0), b_k - b_l = (0,2,0), t - t_a = 1, t_b - t_a = 1:
    // with epochs (0,1,2,3) use t = 2 = t_b -> (t-t_a)^2/(t_b-t_a)^4 = 1
    CHECK(coeff_transit(2.0, 1, 0, 2, 0, p, g, det) == doctest::Approx(4.0));
    // the spec's hand value: (t-t_a) = 1, (t_b-t_a) = 2 -> 1/16 * 1 * 4 = 0.25
    auto g2 = line_geometry(4, 1.0, 0.0, 1.0, 3.0, 4.0);
    auto det2 = DetectorModel::position(g2.atom_positions());
    CHECK(coeff_transit(2.0, 1, 0, 2, 0, p, g2, det2) == doctest::Approx(0.25));

    CHECK(coeff_transit(1.0, 1, 0, 2, 0, p, g, det) == doctest::Approx(0.0));  // t = t_a
    CHECK(coeff_transit(1.5, 2, 2, 1, 0, p, g, det) == doctest::Approx(0.0));  // i == j

    // i<->j, k<->l and pair exchange
    const double v = coeff_transit(1.7, 0, 2, 1, 3, p, g, det);
    CHECK(coeff_transit(1.7, 2, 0, 1, 3, p, g, det) == doctest::Approx(v));
    CHECK(coeff_transit(1.7, 0, 2, 3, 1, p, g, det) == doctest::Approx(v));
    CHECK(coeff_transit(1.7, 1, 3, 0, 2, p, g, det) == doctest::Approx(v));
}

TEST_CASE("post-screen coefficient closed form") {
    FunctionalParams p;
    p.dp2_xi = 0.5;
    auto det = DetectorModel::position({{1.0, 0.0, 0.0}, {1.0, 3.0, 4.0}});
    CHECK(coeff_post_screen(0, 1, p, det) == doctest::Approx(25.0));
    CHECK(coeff_post_screen(1, 0, p, det) == doctest::Approx(25.0));
    CHECK(coeff_post_screen(0, 0, p, det) == doctest::Approx(0.0));
    // label difference confined to the longitudinal axis contributes nothing
    auto det2 = DetectorModel::position({{1.0, 2.0, 0.0}, {7.0, 2.0, 0.0}});
    CHECK(coeff_post_screen(0, 1, p, det2) == doctest::Approx(0.0));
}

TEST_CASE("one-hot diagonal exactness") {
    const std::size_t n_modes = 10;
    auto g = line_geometry(n_modes);
    auto det = DetectorModel::position(g.atom_positions());
    auto p = FunctionalParams::with_defaults(1.0, 0.25, 1.0, 1.0, 1.0);

    for (std::size_t hot : {std::size_t(0), std::size_t(4), std::size_t(9)}) {
        std::vector<Complex> boundary(n_modes, Complex(0.0, 0.0));
        boundary[hot] = 1.0;
        auto traj = CoefficientTrajectory::constant(boundary, g.t_i(), g.t_f(), 12);
        auto a2 = uncertainty_action(traj, p, g, det);
        const double expect = (3.0 + 4.0 * p.dx2_phi * p.dE2_phi) *
                              static_cast<double>(n_modes + 1) * (g.t_f() - g.t_i());
        CHECK(rel_err(a2.total, expect) < 1e-10);
        CHECK(a2.transit == doctest::Approx(0.0));
        CHECK(a2.post_screen == doctest::Approx(0.0));
    }
}

TEST_CASE("factorized action equals the direct quadruple sum") {
    CounterRng seeds(2024, 5);
    for (std::size_t n_modes : {2, 3, 4, 5, 6}) {
        auto g = line_geometry(n_modes);
        auto det = DetectorModel::position(g.atom_positions());
        auto p = FunctionalParams::with_defaults(1.0, 0.25, 1.0, 1.5, 0.8);
        for (int rep = 0; rep < 20; ++rep) {
            auto traj = random_trajectory(n_modes, 12, seeds.next_u64());
            auto fast = uncertainty_action(traj, p, g, det);
            auto slow = quartic_direct(traj, p, g, det);
            CHECK(rel_err(fast.total, slow.total) < 1e-10);
            CHECK(rel_err(fast.atomic, slow.atomic) < 1e-10);
            CHECK(rel_err(fast.transit, slow.transit) < 1e-10);
            CHECK(rel_err(fast.post_screen, slow.post_screen) < 1e-10);
            CHECK(rel_err(fast.total, fast.atomic + fast.transit + fast.post_screen) < 1e-10);
        }
    }
}

TEST_CASE("two-mode constant weights: post-screen term analytic") {
    const double delta = 2.0;
    std::vector<Vec3> atoms = {{100.0, 0.0, 0.0}, {100.0, delta, 0.0}};
    ExperimentGeometry g(atoms, 100.0, 1.0, 0.0, 0.0, 1.0, 2.0, 3.0);
    auto det = DetectorModel::position(atoms);
    auto p = FunctionalParams::with_defaults(1.0, 0.25, 1.0, 1.0, 0.7);

    const double r = 1.0 / std::sqrt(2.0);
    auto traj = CoefficientTrajectory::constant({Complex(r, 0.0), Complex(r, 0.0)}, 0.0, 3.0, 12);
    auto a2 = uncertainty_action(traj, p, g, det);
    // sum_ij w_i w_j d^2 = delta^2/2; contribution 2 dp2 * that * L3
    const double l3 = 1.0;
    CHECK(a2.post_screen == doctest::Approx(p.dp2_xi * delta * delta * l3));
    auto slow = quartic_direct(traj, p, g, det);
    CHECK(rel_err(a2.total, slow.total) < 1e-10);
}

TEST_CASE("epsilon scales the uncertainty term linearly") {
    auto g = line_geometry(3);
    auto det = DetectorModel::position(g.atom_positions());
    auto traj = random_trajectory(3, 12, 99);
    auto p1 = FunctionalParams::with_defaults(0.5, 0.25, 1.0, 1.0, 1.0);
    auto p2 = p1;
    p2.epsilon = 1.0;
    const double a1 = smoothness_action(traj);
    CHECK(total_action(traj, p2, g, det) - a1 ==
          doctest::Approx(2.0 * (total_action(traj, p1, g, det) - a1)));

    // Lower bound: both terms are nonnegative and the atomic family never
    // drops below its diagonal value.
    const double k1 = (3.0 + 4.0 * p1.dx2_phi * p1.dE2_phi) * 4.0;
    CHECK(total_action(traj, p1, g, det) >= p1.epsilon * k1 * 3.0);
}

TEST_CASE("order-one floor shifts the diagonal value by floor times span") {
    auto g = line_geometry(4);
    auto det = DetectorModel::position(g.atom_positions());
    auto p = FunctionalParams::with_defaults(1.0, 0.25, 1.0, 1.0, 1.0);
    std::vector<Complex> boundary = {Complex(1.0, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0),
                                     Complex(0.0, 0.0)};
    auto traj = CoefficientTrajectory::constant(boundary, g.t_i(), g.t_f(), 12);
    const double base = uncertainty_action(traj, p, g, det).total;
    auto p2 = p;
    p2.o1_floor = 0.7;
    const double lifted = uncertainty_action(traj, p2, g, det).total;
    CHECK(lifted - base == doctest::Approx(0.7 * 3.0).epsilon(1e-12));
}

TEST_CASE("grid mismatch raises") {
    auto g = line_geometry(3);
    auto det = DetectorModel::position(g.atom_positions());
    auto p = FunctionalParams::with_defaults(1.0, 0.25, 1.0, 1.0, 1.0);
    auto traj = random_trajectory(3, 12, 1, 0.0, 2.5);  // does not span [t_i, t_f]
    CHECK_THROWS_AS(uncertainty_action(traj, p, g, det), GridError);
    auto traj2 = random_trajectory(2, 12, 1);  // mode count mismatch
    CHECK_THROWS_AS(uncertainty_action(traj2, p, g, det), ConfigError);
}

TEST_CASE("phase invariance of weights and uncertainty action") {
    auto g = line_geometry(4);
    auto det = DetectorModel::position(g.atom_positions());
    auto p = FunctionalParams::with_defaults(1.0, 0.25, 1.0, 1.0, 1.0);
    auto traj = random_trajectory(4, 12, 31);
    auto a2_before = uncertainty_action(traj, p, g, det);
    auto w_before = mode_weights(traj);

    CoefficientTrajectory rotated = traj;
    for (std::size_t m = 0; m <= traj.step_count(); ++m) {
        const Complex phase = std::polar(1.0, 0.3 + 1.7 * static_cast<double>(m));
        for (std::size_t n = 0; n < traj.mode_count(); ++n) rotated.at(n, m) *= phase;
    }
    auto a2_after = uncertainty_action(rotated, p, g, det);
    auto w_after = mode_weights(rotated);
    CHECK(rel_err(a2_before.total, a2_after.total) < 1e-12);
    for (std::size_t i = 0; i < w_before.size(); ++i) {
        CHECK(std::abs(w_before[i] - w_after[i]) < 1e-12);
    }
}

TEST_CASE("monotone growth under enlarged label separation") {
    auto g = line_geometry(4, 1.0);
    auto p = FunctionalParams::with_defaults(1.0, 0.25, 1.0, 1.0, 1.0);
    auto traj = random_trajectory(4, 12, 17);

    auto labels = g.atom_positions();
    auto det_near = DetectorModel::position(labels);
    labels.back()[1] += 2.0;  // push the outer label outward; no separation shrinks
    auto det_far = DetectorModel::position(labels);

    auto near = uncertainty_action(traj, p, g, det_near);
    auto far = uncertainty_action(traj, p, g, det_far);
    CHECK(far.transit >= near.transit);
    CHECK(far.post_screen >= near.post_screen);
}

TEST_CASE("smoothness action: constant, rotating pair, refinement order") {
    auto constant = CoefficientTrajectory::constant({Complex(0.6, 0.0), Complex(0.8, 0.0)},
                                                    0.0, 3.0, 24);
    CHECK(smoothness_action(constant) == doctest::Approx(0.0));

    // C1 = cos(wt), C2 = sin(wt) over one period integrates to 2 pi w.
    const double omega = 1.0;
    const double period = 2.0 * std::numbers::pi / omega;
    auto make = [&](std::size_t steps) {
        CoefficientTrajectory traj(2, 0.0, period, steps);
        for (std::size_t m = 0; m <= steps; ++m) {
            const double t = traj.time_at(m);
            traj.at(0, m) = std::cos(omega * t);
            traj.at(1, m) = std::sin(omega * t);
        }
        return traj;
    };
    const double exact = 2.0 * std::numbers::pi * omega;
    const double coarse = smoothness_action(make(4000));
    CHECK(rel_err(coarse, exact) < 1e-4);

    const double e1 = std::abs(smoothness_action(make(500)) - exact);
    const double e2 = std::abs(smoothness_action(make(1000)) - exact);
    CHECK(e1 / e2 > 2.5);  // second-order convergence
    CHECK(e1 / e2 < 6.0);
}

TEST_CASE("analytic gradient matches central finite differences") {
    auto g = line_geometry(3);
    auto det = DetectorModel::position(g.atom_positions());
    auto p = FunctionalParams::with_defaults(0.7, 0.25, 1.0, 1.2, 0.9);
    const double h = 1e-5;

    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        auto traj = random_trajectory(3, 12, 1000 + static_cast<std::uint64_t>(rep));
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
    CHECK(worst < 1e-6);
}

TEST_CASE("gradient properties: constant one-hot interior, phase direction") {
    auto g = line_geometry(3);
    auto det = DetectorModel::position(g.atom_positions());
    auto p = FunctionalParams::with_defaults(1.0, 0.25, 1.0, 1.0, 1.0);

    auto one_hot = CoefficientTrajectory::constant({Complex(1.0, 0.0), Complex(0.0, 0.0),
                                                    Complex(0.0, 0.0)}, 0.0, 3.0, 12);
    auto g_smooth = smoothness_gradient(one_hot);
    for (const auto& v : g_smooth) CHECK(std::abs(v) < 1e-14);

    // The uncertainty action is invariant along the per-slice phase
    // direction iC, so that directional derivative vanishes.
    auto traj = random_trajectory(3, 12, 5);
    std::vector<Complex> gu(traj.mode_count() * traj.sample_count(), Complex(0.0, 0.0));
    add_uncertainty_gradient(traj, p, g, det, 1.0, gu);
    const std::size_t cols = traj.sample_count();
    for (std::size_t m = 0; m < cols; ++m) {
        double dir = 0.0;
        for (std::size_t n = 0; n < 3; ++n) {
            const Complex step = Complex(0.0, 1.0) * traj.at(n, m);
            const Complex& gv = gu[n * cols + m];
            dir += gv.real() * step.real() + gv.imag() * step.imag();
        }
        CHECK(std::abs(dir) < 1e-10);
    }
}
