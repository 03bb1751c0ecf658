#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "vpc/functional.hpp"
#include "vpc/model.hpp"

// Minimizes the discretized action over coefficient trajectories with the
// t_i slice held fixed. Each later time slice is constrained to the unit
// sphere (Lambda = 1); descent steps move along the constraint tangent and
// retract by per-slice renormalization, so moduli are projected while
// phases evolve freely.

namespace vpc {

enum class DescentMode { JointDescent, BornConditioned };

struct OptimizerConfig {
    std::size_t max_iters = 400;
    double step_size = 0.05;      // initial trial step; line search adapts
    double tolerance = 1e-8;      // relative objective decrease
    double collapse_threshold = 0.99;
    DescentMode mode = DescentMode::JointDescent;

    // Terminal attractor used by the conditioned mode: quadratic penalty
    // on 1 - w_winner(t_f), ramped geometrically across `penalty_stages`
    // equal iteration blocks up to `penalty_weight`.
    double penalty_weight = 200.0;
    std::size_t penalty_stages = 4;

    void validate() const;
};

struct OptimizationReport {
    CoefficientTrajectory final_trajectory;
    std::vector<double> objective_trace;  // value after each accepted step
    std::optional<std::size_t> winner;
    bool collapsed = false;
    bool converged = false;  // tolerance met before max_iters
    std::size_t iterations = 0;
    double objective_final = 0.0;
    double final_max_weight = 0.0;
};

/// Projected-gradient descent with backtracking Armijo line search
/// (shrink 0.5, sufficient decrease 1e-4). The t_i slice is never
/// modified; every accepted step renormalizes slices 1..M. Reports the
/// argmax-weight mode at t_f as winner when the collapse threshold is met
/// (lowest index wins ties).
OptimizationReport relax(const CoefficientTrajectory& initial, const OptimizerConfig& config,
                         const FunctionalParams& params, const ExperimentGeometry& geometry,
                         const DetectorModel& detector);

/// Same descent with the terminal attractor driving w_winner(t_f) -> 1.
/// Produces the minimal-action trajectory interpolating to the given
/// outcome. A winner whose boundary amplitude is exactly zero is
/// unreachable: the zero mode is a fixed manifold of the descent, so the
/// run ends in non-convergence with the penalty saturated.
OptimizationReport relax_conditioned(const CoefficientTrajectory& initial,
                                     std::size_t winner, const OptimizerConfig& config,
                                     const FunctionalParams& params,
                                     const ExperimentGeometry& geometry,
                                     const DetectorModel& detector);

}  // namespace vpc
