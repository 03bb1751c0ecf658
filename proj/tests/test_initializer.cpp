#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "vpc/initializer.hpp"
#include "vpc/model.hpp"
#include "vpc/stats.hpp"

using namespace vpc;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Vec3> line_atoms(std::size_t count, double spacing, double X = 100.0) {
    std::vector<Vec3> atoms;
    const double mid = 0.5 * spacing * static_cast<double>(count - 1);
    for (std::size_t n = 0; n < count; ++n) {
        atoms.push_back({X, spacing * static_cast<double>(n) - mid, 0.0});
    }
    return atoms;
}

// Independent oracle: Huygens sum of exp(ikr)/r over aperture sample
// points for both slits, evaluated at each atom.
std::vector<double> huygens_moduli(const SlitSpec& s, const std::vector<Vec3>& atoms) {
    const double k = 2.0 * kPi / s.wavelength;
    std::vector<double> aperture;
    const int per_slit = 101;
    for (double c : {-0.5 * s.separation, 0.5 * s.separation}) {
        if (s.width == 0.0) {
            aperture.push_back(c);
            continue;
        }
        for (int i = 0; i < per_slit; ++i) {
            aperture.push_back(c - 0.5 * s.width +
                               s.width * static_cast<double>(i) / (per_slit - 1));
        }
    }
    std::vector<double> mod(atoms.size());
    for (std::size_t n = 0; n < atoms.size(); ++n) {
        Complex sum(0.0, 0.0);
        for (double yp : aperture) {
            const double dy = atoms[n][1] - yp;
            const double r = std::sqrt(s.screen_distance * s.screen_distance + dy * dy);
            sum += std::polar(1.0 / r, k * r);
        }
        mod[n] = std::abs(sum);
    }
    double norm = 0.0;
    for (double m : mod) norm += m * m;
    norm = std::sqrt(norm);
    for (double& m : mod) m /= norm;
    return mod;
}

}  // namespace

TEST_CASE("central atom carries the maximal amplitude") {
    SlitSpec s(0.1, 1.0, 0.2, 100.0);
    auto det = DetectorModel::position({{100.0, 0.0, 0.0}, {100.0, 2.0, 0.0},
                                        {100.0, 4.0, 0.0}});
    auto c = slit_amplitudes(s, det);
    CHECK(std::abs(c[0]) > std::abs(c[1]));
    CHECK(std::abs(c[0]) > std::abs(c[2]));
    double norm = 0.0;
    for (auto& v : c) norm += std::norm(v);
    CHECK(norm == doctest::Approx(1.0));
}

TEST_CASE("first interference null vanishes for a point aperture") {
    SlitSpec s(0.1, 1.0, 0.0, 100.0);
    const double y_null = s.wavelength * s.screen_distance / (2.0 * s.separation);
    auto det = DetectorModel::position({{100.0, 0.0, 0.0}, {100.0, y_null, 0.0}});
    auto c = slit_amplitudes(s, det);
    CHECK(std::abs(c[1]) < 1e-12);
}

TEST_CASE("far-field amplitudes match the Huygens oracle to 2% RMS") {
    SlitSpec s(0.1, 1.0, 0.2, 100.0);
    auto atoms = line_atoms(64, 0.4);
    auto det = DetectorModel::position(atoms);
    auto c = slit_amplitudes(s, det);
    auto oracle = huygens_moduli(s, atoms);
    double diff2 = 0.0;
    for (std::size_t n = 0; n < atoms.size(); ++n) {
        diff2 += (std::abs(c[n]) - oracle[n]) * (std::abs(c[n]) - oracle[n]);
    }
    CHECK(std::sqrt(diff2) < 0.02);
}

TEST_CASE("amplitude pattern is even in y for a symmetric layout") {
    SlitSpec s(0.1, 1.0, 0.2, 100.0);
    auto atoms = line_atoms(32, 0.4);
    auto det = DetectorModel::position(atoms);
    auto c = slit_amplitudes(s, det);
    for (std::size_t n = 0; n < 16; ++n) {
        CHECK(std::abs(c[n]) == doctest::Approx(std::abs(c[31 - n])).epsilon(1e-12));
    }
}

TEST_CASE("amplitude zeros sit within one atom spacing of the cos nulls") {
    SlitSpec s(0.1, 1.0, 0.0, 100.0);
    const double spacing = 0.4;
    auto atoms = line_atoms(64, spacing);
    auto det = DetectorModel::position(atoms);
    auto c = slit_amplitudes(s, det);

    const double span = std::abs(atoms.back()[1]);
    for (int m = 0;; ++m) {
        const double y_null = (2 * m + 1) * s.wavelength * s.screen_distance /
                              (2.0 * s.separation);
        if (y_null > span) break;
        double best = 1e9;
        double best_amp = 1.0;
        for (std::size_t n = 0; n < atoms.size(); ++n) {
            if (std::abs(atoms[n][1] - y_null) <= spacing) {
                if (std::abs(c[n]) < best_amp) {
                    best_amp = std::abs(c[n]);
                    best = std::abs(atoms[n][1] - y_null);
                }
            }
        }
        CHECK(best <= spacing);
        CHECK(best_amp < 0.05);
    }
}

TEST_CASE("degenerate geometry raises") {
    SlitSpec s(0.1, 1.0, 0.0, 100.0);
    // every atom on an interference null
    const double y_null = s.wavelength * s.screen_distance / (2.0 * s.separation);
    auto det = DetectorModel::position({{100.0, y_null, 0.0}, {100.0, 3.0 * y_null, 0.0}});
    CHECK_THROWS_AS(slit_amplitudes(s, det), DegenerateError);
}

TEST_CASE("wavelength detector weight peaks at the pattern wavenumber") {
    SlitSpec s(0.1, 1.0, 0.0, 100.0);
    const double kappa_pattern = 2.0 * kPi * s.separation /
                                 (s.wavelength * s.screen_distance);
    auto kappas = make_kappa_grid(16, 2.0 * kappa_pattern);
    auto det = DetectorModel::wavelength(kappas, 1.0);
    auto c = wavenumber_amplitudes(s, det);

    std::size_t best = 0;
    for (std::size_t n = 1; n < c.size(); ++n) {
        if (std::abs(c[n]) > std::abs(c[best])) best = n;
    }
    CHECK(std::abs(std::abs(kappas[best]) - kappa_pattern) < 1e-9);

    // Independent route: direct summation of the two-point aperture's
    // far-field intensity against each label.
    const double window = 8.0 * s.fringe_spacing();
    const std::size_t samples = 8192;
    std::vector<double> direct(kappas.size(), 0.0);
    for (std::size_t n = 0; n < kappas.size(); ++n) {
        Complex acc(0.0, 0.0);
        for (std::size_t i = 0; i < samples; ++i) {
            const double y = -0.5 * window + window * (static_cast<double>(i) + 0.5) /
                             static_cast<double>(samples);
            Complex field(0.0, 0.0);
            for (double yp : {-0.5 * s.separation, 0.5 * s.separation}) {
                const double dy = y - yp;
                const double r = std::sqrt(s.screen_distance * s.screen_distance + dy * dy);
                field += std::polar(1.0, 2.0 * kPi / s.wavelength * r);
            }
            acc += std::norm(field) * std::polar(1.0, -kappas[n] * y);
        }
        direct[n] = std::abs(acc);
    }
    std::size_t best_direct = 0;
    for (std::size_t n = 1; n < direct.size(); ++n) {
        if (direct[n] > direct[best_direct]) best_direct = n;
    }
    CHECK(std::abs(kappas[best_direct]) == doctest::Approx(std::abs(kappas[best])));
}

TEST_CASE("single-slit limit concentrates weight at the smallest wavenumber") {
    SlitSpec wide(0.1, 1.0, 0.2, 100.0);
    const double kappa_pattern = 2.0 * kPi * wide.separation /
                                 (wide.wavelength * wide.screen_distance);
    auto kappas = make_kappa_grid(16, 2.0 * kappa_pattern);
    auto det = DetectorModel::wavelength(kappas, 1.0);

    SlitSpec narrow(0.1, 0.01, 0.002, 100.0);
    auto c = wavenumber_amplitudes(narrow, det);
    std::size_t best = 0;
    for (std::size_t n = 1; n < c.size(); ++n) {
        if (std::abs(c[n]) > std::abs(c[best])) best = n;
    }
    double min_abs_kappa = 1e300;
    for (double k : kappas) min_abs_kappa = std::min(min_abs_kappa, std::abs(k));
    CHECK(std::abs(kappas[best]) == doctest::Approx(min_abs_kappa));

    double norm = 0.0;
    for (auto& v : c) norm += std::norm(v);
    CHECK(norm == doctest::Approx(1.0));
}

TEST_CASE("phase sampling keeps moduli and is deterministic per seed") {
    SlitSpec s(0.1, 1.0, 0.2, 100.0);
    auto det = DetectorModel::position(line_atoms(16, 0.4));
    auto base = slit_amplitudes(s, det);

    auto a = sample_phases(base, 321);
    auto b = sample_phases(base, 321);
    auto c = sample_phases(base, 322);
    bool any_different = false;
    for (std::size_t n = 0; n < base.size(); ++n) {
        CHECK(std::abs(a[n]) == doctest::Approx(std::abs(base[n])).epsilon(1e-12));
        CHECK(a[n] == b[n]);
        if (a[n] != c[n]) any_different = true;
    }
    CHECK(any_different);
}

TEST_CASE("correlation window shares phases across adjacent modes") {
    std::vector<Complex> base(6, Complex(1.0 / std::sqrt(6.0), 0.0));
    auto v = sample_phases(base, 17, 2);
    for (std::size_t n = 0; n < 6; n += 2) {
        CHECK(std::arg(v[n]) == doctest::Approx(std::arg(v[n + 1])));
    }
    auto w = sample_phases(base, 17, 1);
    CHECK(std::arg(w[0]) != doctest::Approx(std::arg(w[1])));
    CHECK_THROWS_AS(sample_phases(base, 17, 0), ConfigError);
}

TEST_CASE("sampled phases are uniform on [0, 2pi)") {
    std::vector<Complex> base = {Complex(0.6, 0.0), Complex(0.8, 0.0)};
    const int bins = 32;
    const int draws = 100000;
    std::vector<std::size_t> hist0(bins, 0), hist1(bins, 0);
    for (int s = 0; s < draws; ++s) {
        auto v = sample_phases(base, static_cast<std::uint64_t>(s));
        const double p0 = std::arg(v[0]) < 0 ? std::arg(v[0]) + 2 * kPi : std::arg(v[0]);
        const double p1 = std::arg(v[1]) < 0 ? std::arg(v[1]) + 2 * kPi : std::arg(v[1]);
        ++hist0[std::min(bins - 1, static_cast<int>(p0 / (2 * kPi) * bins))];
        ++hist1[std::min(bins - 1, static_cast<int>(p1 / (2 * kPi) * bins))];
    }
    std::vector<double> expected(bins, 1.0 / bins);
    CHECK(chi_square_goodness(hist0, expected).p_value > 0.001);
    CHECK(chi_square_goodness(hist1, expected).p_value > 0.001);
}
