#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "vpc/errors.hpp"

// Core domain types for the collapse simulator. Natural units throughout
// (hbar = c = 1, lengths in electron Compton units); minimal-uncertainty
// atom states have dx2 * dp2 = 1/4.

namespace vpc {

using Complex = std::complex<double>;
using Vec3 = std::array<double, 3>;

/// Squared transverse distance between two label vectors (axes 2 and 3;
/// the longitudinal component never enters the coefficient formulas).
inline double transverse_dist2(const Vec3& a, const Vec3& b) {
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return dy * dy + dz * dz;
}

struct EpochLengths {
    double l1 = 0.0;  // t_a - t_i
    double l2 = 0.0;  // t_b - t_a
    double l3 = 0.0;  // t_f - t_b
    double total = 0.0;
};

/// Slit/screen layout, screen-atom equilibrium positions and the four
/// epoch times t_i < t_a < t_b < t_f. Immutable after construction.
class ExperimentGeometry {
public:
    ExperimentGeometry(std::vector<Vec3> atom_positions, double screen_distance,
                       double slit_separation, double slit_width,
                       double t_i, double t_a, double t_b, double t_f);

    const std::vector<Vec3>& atom_positions() const { return atoms_; }
    std::size_t atom_count() const { return atoms_.size(); }
    double screen_distance() const { return screen_distance_; }
    double slit_separation() const { return slit_separation_; }
    double slit_width() const { return slit_width_; }
    double t_i() const { return t_i_; }
    double t_a() const { return t_a_; }
    double t_b() const { return t_b_; }
    double t_f() const { return t_f_; }

private:
    std::vector<Vec3> atoms_;
    double screen_distance_;
    double slit_separation_;
    double slit_width_;
    double t_i_, t_a_, t_b_, t_f_;
};

EpochLengths epoch_lengths(const ExperimentGeometry& geometry);

/// Scalar physics inputs of the weight functional. The cross statistics
/// (theta / phi-theta mixtures) matter only to the quadrature oracle;
/// their defaults follow the ground-state values except dE2_phitheta,
/// which equals the squared energy gap.
struct FunctionalParams {
    double epsilon = 1.0;
    double electron_mass = 1.0;
    double dx2_phi = 0.25;
    double dE2_phi = 1.0;
    double energy_gap = 1.0;
    double dp2_xi = 1.0;

    double dx2_theta = 0.25;
    double dx2_phitheta = 0.25;
    double dp2_phi = 1.0;  // minimal uncertainty: 1 / (4 * dx2_phi)
    double dp2_theta = 1.0;
    double dp2_phitheta = 1.0;
    double dE2_theta = 1.0;
    double dE2_phitheta = 1.0;  // (E1 - E0)^2

    // Optional constant floor standing in for the dropped order-one terms;
    // off by default, used only for sensitivity studies.
    double o1_floor = 0.0;

    /// Minimal-uncertainty defaults for everything derived from dx2_phi,
    /// dE2_phi and the energy gap.
    static FunctionalParams with_defaults(double epsilon, double dx2_phi,
                                          double dE2_phi, double energy_gap,
                                          double dp2_xi,
                                          double electron_mass = 1.0);

    void validate() const;
};

enum class DetectorKind { Position, Wavelength, DelayedChoice };

/// Maps each electron mode to the label vector that enters the
/// separation-dependent coefficient families. Position detectors label
/// modes by atom position; wavelength detectors by a scaled transverse
/// wavenumber; a delayed-choice detector switches between two label sets
/// at switch_time inside (t_a, t_b).
class DetectorModel {
public:
    static DetectorModel position(std::vector<Vec3> atom_positions);
    /// kappas are transverse wavenumbers; scale converts them to the
    /// length units used by the coefficient formulas.
    static DetectorModel wavelength(std::vector<double> kappas, double scale);
    static DetectorModel delayed_choice(DetectorModel pre, DetectorModel post,
                                        double switch_time, double t_a, double t_b);

    DetectorKind kind() const { return kind_; }
    std::size_t mode_count() const;

    /// Labels in effect at time t (identical to labels() except for
    /// delayed-choice detectors before the switch).
    const std::vector<Vec3>& labels_at(double t) const;
    /// Outcome-determining labels (post-switch set for delayed choice).
    const std::vector<Vec3>& labels() const;

    /// Reported per-mode coordinate: transverse y for position labels,
    /// unscaled kappa for wavelength labels.
    double mode_coordinate(std::size_t i) const;

    double switch_time() const { return switch_time_; }
    const DetectorModel& pre_switch() const;
    const DetectorModel& post_switch() const;
    double wavelength_scale() const { return scale_; }
    const std::vector<double>& kappas() const { return kappas_; }

    bool has_time_dependent_labels() const { return kind_ == DetectorKind::DelayedChoice; }

private:
    DetectorModel() = default;

    DetectorKind kind_ = DetectorKind::Position;
    std::vector<Vec3> labels_;
    std::vector<double> kappas_;  // wavelength only
    double scale_ = 1.0;
    double switch_time_ = 0.0;
    std::vector<DetectorModel> sub_;  // [pre, post] for delayed choice
};

/// Complex mode coefficients C[n](t_m) on a uniform grid over [t_i, t_f].
/// Rows are modes, columns are time samples. The grid is built so that
/// t_a and t_b fall exactly on nodes.
class CoefficientTrajectory {
public:
    CoefficientTrajectory(std::size_t n_modes, double t_start, double t_end,
                          std::size_t n_steps);

    /// Constant-in-time extension of a boundary coefficient vector.
    static CoefficientTrajectory constant(const std::vector<Complex>& boundary,
                                          double t_start, double t_end,
                                          std::size_t n_steps);

    std::size_t mode_count() const { return n_modes_; }
    std::size_t sample_count() const { return n_steps_ + 1; }
    std::size_t step_count() const { return n_steps_; }
    double t_start() const { return t_start_; }
    double t_end() const { return t_end_; }
    double dt() const { return dt_; }
    double time_at(std::size_t m) const { return t_start_ + dt_ * static_cast<double>(m); }

    Complex& at(std::size_t mode, std::size_t sample) {
        return c_[mode * (n_steps_ + 1) + sample];
    }
    const Complex& at(std::size_t mode, std::size_t sample) const {
        return c_[mode * (n_steps_ + 1) + sample];
    }

    std::vector<Complex>& data() { return c_; }
    const std::vector<Complex>& data() const { return c_; }

    /// Sum of |C_n|^2 over modes at one sample.
    double norm_at(std::size_t sample) const;

    /// Rescales every sample (or samples from `first` on) to unit norm.
    void renormalize(std::size_t first = 0);

    /// Linear interpolation of one mode's coefficient at arbitrary t
    /// (clamped to the grid span).
    Complex interpolate(std::size_t mode, double t) const;

    /// Index of the grid node equal to t, or throws GridError when t is
    /// not a node (tolerance 1e-9 * dt).
    std::size_t node_index(double t) const;

private:
    std::size_t n_modes_;
    std::size_t n_steps_;
    double t_start_, t_end_, dt_;
    std::vector<Complex> c_;
};

/// Smallest step count >= requested for which t_a and t_b are exact grid
/// nodes of the uniform grid over [t_i, t_f]. Throws GridError if no such
/// count exists within 8x the request.
std::size_t snapped_step_count(const ExperimentGeometry& geometry, std::size_t requested);

/// Normalized weights w[n][m] = |C_n(t_m)|^2 / Lambda(t_m), row-major with
/// stride sample_count. Throws ZeroNormError when a sample norm underflows.
std::vector<double> mode_weights(const CoefficientTrajectory& traj);

}  // namespace vpc
