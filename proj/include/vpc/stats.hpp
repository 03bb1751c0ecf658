#pragma once

#include <cstddef>
#include <vector>

namespace vpc {

struct ChiSquareResult {
    double statistic = 0.0;
    std::size_t dof = 0;
    double p_value = 1.0;
    bool degenerate = false;  // expected distribution had a single support bin
};

/// Pearson goodness-of-fit of observed counts against expected
/// probabilities. Bins with zero expected probability are excluded; an
/// observation landing in such a bin forces p = 0. A single-support
/// expected distribution yields p = 1 by convention.
ChiSquareResult chi_square_goodness(const std::vector<std::size_t>& observed,
                                    const std::vector<double>& expected_probs);

/// Two-sample chi-square homogeneity test on a pair of count histograms
/// over the same bins. Bins empty in both samples are skipped.
ChiSquareResult chi_square_two_sample(const std::vector<std::size_t>& a,
                                      const std::vector<std::size_t>& b);

/// Upper tail of the chi-square distribution with dof degrees of freedom.
double chi_square_tail(double statistic, std::size_t dof);

}  // namespace vpc
