#pragma once

#include <cstddef>
#include <vector>

#include "vpc/model.hpp"

// The action functional driving collapse. The uncertainty action is a
// quartic form in the normalized mode weights, built from three
// coefficient families:
//   atomic      - zero-point motion plus the excitation-energy spread of
//                 a superposition over excited atoms; active on all of
//                 [t_i, t_f].
//   transit     - separation of candidate electron trajectories while it
//                 crosses from slits to screen; active on (t_a, t_b).
//   post_screen - transverse momentum kick times label separation after
//                 the screen; active on (t_b, t_f).
// The smoothness action penalizes rapid coefficient changes and stands in
// for the wave-equation residual of the full theory.

namespace vpc {

struct ActionBreakdown {
    double atomic = 0.0;
    double transit = 0.0;
    double post_screen = 0.0;
    double total = 0.0;
};

/// Atomic coefficient family: (3 + 4 dx2_phi dE2_phi) N plus the
/// excitation cross term 8 (1 - delta_kl) (L3/L) dx2_phi gap^2, with N the
/// mode count plus one (electron included). Independent of i and j.
double coeff_atomic(std::size_t i, std::size_t j, std::size_t k, std::size_t l,
                    const FunctionalParams& params, const ExperimentGeometry& geometry,
                    std::size_t n_modes);

/// Transit coefficient family at time t:
/// m_e^2 (t-t_a)^2/(t_b-t_a)^4 sum_q (b_iq-b_jq)^2 (b_kq-b_lq)^2 over the
/// transverse axes, with b the detector labels in effect at t.
double coeff_transit(double t, std::size_t i, std::size_t j, std::size_t k, std::size_t l,
                     const FunctionalParams& params, const ExperimentGeometry& geometry,
                     const DetectorModel& detector);

/// Post-screen coefficient family: 2 dp2_xi sum_q (b_iq - b_jq)^2.
/// Independent of k and l.
double coeff_post_screen(std::size_t i, std::size_t j, const FunctionalParams& params,
                         const DetectorModel& detector);

/// Time-integrated quartic weight action, split by coefficient family.
/// Evaluation is O(samples * modes) via the exact factorization of the
/// quartic sum into weighted label moments; equals the direct quadruple
/// sum to roundoff. Trapezoidal in time with the family activation
/// windows resolved on exact epoch nodes.
ActionBreakdown uncertainty_action(const CoefficientTrajectory& traj,
                                   const FunctionalParams& params,
                                   const ExperimentGeometry& geometry,
                                   const DetectorModel& detector);

/// Integral of sum_n |dC_n/dt|^2 over [t_i, t_f]; central differences in
/// the interior, one-sided at the ends, trapezoidal in time. Zero iff the
/// trajectory is constant.
double smoothness_action(const CoefficientTrajectory& traj);

/// smoothness_action + epsilon * uncertainty_action.total
double total_action(const CoefficientTrajectory& traj, const FunctionalParams& params,
                    const ExperimentGeometry& geometry, const DetectorModel& detector);

/// Wirtinger gradient d(total_action)/dC*[n][m] of the discretized
/// objective, row-major with stride sample_count. The derivative with
/// respect to Re/Im C is twice the real/imaginary part of each entry.
std::vector<Complex> total_action_gradient(const CoefficientTrajectory& traj,
                                           const FunctionalParams& params,
                                           const ExperimentGeometry& geometry,
                                           const DetectorModel& detector);

/// Gradient of the smoothness action alone (same layout and convention).
std::vector<Complex> smoothness_gradient(const CoefficientTrajectory& traj);

/// Adds the uncertainty-action gradient, scaled by `scale`, into `out`.
void add_uncertainty_gradient(const CoefficientTrajectory& traj,
                              const FunctionalParams& params,
                              const ExperimentGeometry& geometry,
                              const DetectorModel& detector, double scale,
                              std::vector<Complex>& out);

namespace detail {

/// Checks that the trajectory spans [t_i, t_f] and returns the node
/// indices of t_a and t_b. Throws GridError otherwise.
std::pair<std::size_t, std::size_t> epoch_nodes(const CoefficientTrajectory& traj,
                                                const ExperimentGeometry& geometry);

}  // namespace detail

}  // namespace vpc
