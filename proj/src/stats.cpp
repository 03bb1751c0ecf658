#include "vpc/stats.hpp"

#include <gsl/gsl_cdf.h>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vpc {

double chi_square_tail(double statistic, std::size_t dof) {
    if (dof == 0) return 1.0;
    if (statistic <= 0.0) return 1.0;
    return gsl_cdf_chisq_Q(statistic, static_cast<double>(dof));
}

ChiSquareResult chi_square_goodness(const std::vector<std::size_t>& observed,
                                    const std::vector<double>& expected_probs) {
    if (observed.size() != expected_probs.size()) {
        throw std::invalid_argument("observed/expected size mismatch");
    }
    std::size_t total = 0;
    for (auto c : observed) total += c;

    // Probabilities this small never produce an expected count at any
    // realistic sample size; the bin is outside the support.
    constexpr double kNegligible = 1e-12;
    std::size_t support = 0;
    for (double p : expected_probs) {
        if (p > kNegligible) ++support;
    }

    ChiSquareResult r;
    if (support <= 1) {
        r.degenerate = true;
        for (std::size_t i = 0; i < observed.size(); ++i) {
            if (expected_probs[i] <= kNegligible && observed[i] > 0) r.p_value = 0.0;
        }
        return r;
    }
    if (total == 0) return r;  // nothing observed; vacuous pass

    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = expected_probs[i] * static_cast<double>(total);
        if (expected_probs[i] <= kNegligible) {
            if (observed[i] > 0) {
                r.statistic = std::numeric_limits<double>::infinity();
                r.dof = support - 1;
                r.p_value = 0.0;
                return r;
            }
            continue;
        }
        const double d = static_cast<double>(observed[i]) - e;
        r.statistic += d * d / e;
    }
    r.dof = support - 1;
    r.p_value = chi_square_tail(r.statistic, r.dof);
    return r;
}

ChiSquareResult chi_square_two_sample(const std::vector<std::size_t>& a,
                                      const std::vector<std::size_t>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("histogram size mismatch");
    double na = 0.0, nb = 0.0;
    for (auto c : a) na += static_cast<double>(c);
    for (auto c : b) nb += static_cast<double>(c);

    ChiSquareResult r;
    if (na == 0.0 || nb == 0.0) return r;

    const double ka = std::sqrt(nb / na);
    const double kb = std::sqrt(na / nb);
    std::size_t used = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double oa = static_cast<double>(a[i]);
        const double ob = static_cast<double>(b[i]);
        if (oa + ob == 0.0) continue;
        const double d = ka * oa - kb * ob;
        r.statistic += d * d / (oa + ob);
        ++used;
    }
    if (used <= 1) {
        r.degenerate = true;
        return r;
    }
    r.dof = used - 1;
    r.p_value = chi_square_tail(r.statistic, r.dof);
    return r;
}

}  // namespace vpc
