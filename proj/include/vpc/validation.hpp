#pragma once

#include <string>
#include <vector>

#include "vpc/functional.hpp"
#include "vpc/model.hpp"

// Reference evaluations and the invariant checks behind `vpc validate`.
// The reference path deliberately avoids the factorized evaluation: it
// loops over all index quadruples through the per-index coefficient
// functions.

namespace vpc {
namespace validation {

/// O(modes^4) direct evaluation of the uncertainty action.
ActionBreakdown uncertainty_action_direct(const CoefficientTrajectory& traj,
                                          const FunctionalParams& params,
                                          const ExperimentGeometry& geometry,
                                          const DetectorModel& detector);

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double limit = 0.0;
    std::string detail;
};

CheckResult check_diagonal_exactness();
CheckResult check_quartic_equivalence();
CheckResult check_gradient();

/// Diagonal exactness, factorized-vs-direct equivalence on random weight
/// trajectories, and the finite-difference gradient check, at the
/// tolerances the acceptance suite pins.
std::vector<CheckResult> run_functional_checks();

}  // namespace validation
}  // namespace vpc
