#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "vpc/rng.hpp"
#include "vpc/stats.hpp"

using namespace vpc;

TEST_CASE("counter rng is a pure function of seed, stream and counter") {
    CounterRng a(42, 7);
    CounterRng b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    CHECK(CounterRng::mix(42, 7, 0) != CounterRng::mix(43, 7, 0));
    CHECK(CounterRng::mix(42, 7, 0) != CounterRng::mix(42, 8, 0));
    CHECK(CounterRng::mix(42, 7, 0) != CounterRng::mix(42, 7, 1));
}

TEST_CASE("counter rng doubles are uniform in [0,1)") {
    CounterRng rng(123, 1);
    const int bins = 20;
    const int draws = 200000;
    std::vector<std::size_t> counts(bins, 0);
    for (int i = 0; i < draws; ++i) {
        const double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        ++counts[static_cast<int>(u * bins)];
    }
    std::vector<double> expected(bins, 1.0 / bins);
    auto r = chi_square_goodness(counts, expected);
    CHECK(r.p_value > 1e-4);
}

TEST_CASE("chi-square goodness matches frozen reference values") {
    // scipy.stats.chi2.sf(3.5, 2) = 0.17377394345044514
    CHECK(chi_square_tail(3.5, 2) == doctest::Approx(0.17377394345044514).epsilon(1e-10));
    // scipy.stats.chi2.sf(10.0, 5) = 0.0752352461659219
    CHECK(chi_square_tail(10.0, 5) == doctest::Approx(0.0752352461659219).epsilon(1e-10));

    // scipy.stats.chisquare([48, 52], f_exp=[50, 50]) -> stat 0.16, p 0.6891565167793516
    auto r = chi_square_goodness({48, 52}, {0.5, 0.5});
    CHECK(r.statistic == doctest::Approx(0.16));
    CHECK(r.p_value == doctest::Approx(0.6891565167793516).epsilon(1e-9));
}

TEST_CASE("degenerate expected distribution yields p = 1 by convention") {
    auto r = chi_square_goodness({25, 0, 0}, {1.0, 0.0, 0.0});
    CHECK(r.degenerate);
    CHECK(r.p_value == doctest::Approx(1.0));

    auto bad = chi_square_goodness({25, 1, 0}, {1.0, 0.0, 0.0});
    CHECK(bad.p_value == doctest::Approx(0.0));
}

TEST_CASE("two-sample chi-square on identical histograms gives p = 1") {
    std::vector<std::size_t> h = {10, 20, 30, 40};
    auto r = chi_square_two_sample(h, h);
    CHECK(r.statistic == doctest::Approx(0.0));
    CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("two-sample chi-square detects a shifted histogram") {
    std::vector<std::size_t> a = {100, 100, 100, 100};
    std::vector<std::size_t> b = {180, 100, 60, 60};
    auto r = chi_square_two_sample(a, b);
    CHECK(r.p_value < 1e-4);
}

TEST_CASE("two-sample chi-square accepts same-multinomial draws") {
    // Two independent draws from the same 4-way multinomial.
    CounterRng rng(9, 2);
    const double probs[4] = {0.4, 0.3, 0.2, 0.1};
    std::vector<std::size_t> a(4, 0), b(4, 0);
    for (int i = 0; i < 20000; ++i) {
        for (auto* h : {&a, &b}) {
            double u = rng.next_double();
            int bin = 0;
            double acc = probs[0];
            while (bin < 3 && u >= acc) acc += probs[++bin];
            ++(*h)[bin];
        }
    }
    auto r = chi_square_two_sample(a, b);
    CHECK(r.p_value > 0.001);
}
