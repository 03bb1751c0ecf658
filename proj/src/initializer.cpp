#include "vpc/initializer.hpp"

#include <cmath>
#include <numbers>

#include "vpc/rng.hpp"

namespace vpc {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    return std::sin(x) / x;
}

void l2_normalize(std::vector<Complex>& c) {
    double s = 0.0;
    for (const auto& v : c) s += std::norm(v);
    // Base amplitudes are bounded by one, so anything below this is a
    // layout where every label sits on a null.
    if (s < 1e-24) throw DegenerateError("all initial amplitudes vanish");
    const double inv = 1.0 / std::sqrt(s);
    for (auto& v : c) v *= inv;
}

}  // namespace

SlitSpec::SlitSpec(double lambda, double d, double a, double X)
    : wavelength(lambda), separation(d), width(a), screen_distance(X) {
    if (!(lambda > 0.0) || !(d > 0.0) || !(X > 0.0) || a < 0.0 || a >= d) {
        throw ConfigError("slit spec needs lambda, d, X > 0 and 0 <= a < d");
    }
}

SlitSpec SlitSpec::from_geometry(const ExperimentGeometry& g, double lambda) {
    return SlitSpec(lambda, g.slit_separation(), g.slit_width(), g.screen_distance());
}

double two_slit_field(const SlitSpec& s, double y) {
    const double u = kPi * y / (s.wavelength * s.screen_distance);
    return std::cos(u * s.separation) * sinc(u * s.width);
}

std::vector<Complex> slit_amplitudes(const SlitSpec& slits, const DetectorModel& detector) {
    if (detector.kind() == DetectorKind::Wavelength) {
        throw ConfigError("wavelength detectors take amplitudes from wavenumber_amplitudes");
    }
    const auto& labels = detector.labels();
    std::vector<Complex> c(labels.size());
    for (std::size_t n = 0; n < labels.size(); ++n) {
        c[n] = std::abs(two_slit_field(slits, labels[n][1]));
    }
    l2_normalize(c);
    return c;
}

std::vector<Complex> wavenumber_amplitudes(const SlitSpec& slits,
                                           const DetectorModel& detector) {
    if (detector.kind() != DetectorKind::Wavelength) {
        throw ConfigError("wavenumber amplitudes need a wavelength detector");
    }
    // Window covering eight full fringes keeps the matched component clean.
    const double window = 8.0 * slits.fringe_spacing();
    const std::size_t samples = 4096;
    const double h = window / static_cast<double>(samples);

    const auto& kappas = detector.kappas();
    std::vector<Complex> c(kappas.size(), Complex(0.0, 0.0));
    for (std::size_t s = 0; s < samples; ++s) {
        const double y = -0.5 * window + (static_cast<double>(s) + 0.5) * h;
        const double f = two_slit_field(slits, y);
        const double intensity = f * f;
        for (std::size_t n = 0; n < kappas.size(); ++n) {
            c[n] += intensity * std::polar(h, -kappas[n] * y);
        }
    }
    for (auto& v : c) v = std::abs(v);
    l2_normalize(c);
    return c;
}

std::vector<Complex> initial_amplitudes(const SlitSpec& slits, const DetectorModel& detector) {
    if (detector.kind() == DetectorKind::Wavelength) {
        return wavenumber_amplitudes(slits, detector);
    }
    return slit_amplitudes(slits, detector);
}

std::vector<Complex> sample_phases(const std::vector<Complex>& amplitudes,
                                   std::uint64_t seed, std::size_t correlation_window) {
    if (correlation_window < 1) throw ConfigError("phase correlation window must be >= 1");
    CounterRng rng = make_stream(seed, StreamId::Phases);
    std::vector<Complex> out(amplitudes.size());
    double phase = 0.0;
    for (std::size_t n = 0; n < amplitudes.size(); ++n) {
        if (n % correlation_window == 0) phase = 2.0 * kPi * rng.next_double();
        out[n] = amplitudes[n] * std::polar(1.0, phase);
    }
    return out;
}

std::vector<double> make_kappa_grid(std::size_t count, double kappa_max) {
    if (count < 2 || !(kappa_max > 0.0)) {
        throw ConfigError("kappa grid needs at least 2 labels and kappa_max > 0");
    }
    const std::size_t half = count / 2;
    const double step = kappa_max / static_cast<double>(half);
    std::vector<double> kappas;
    kappas.reserve(count);
    for (std::size_t j = half; j >= 1; --j) kappas.push_back(-step * static_cast<double>(j));
    if (count % 2 == 1) kappas.push_back(0.0);
    for (std::size_t j = 1; j <= half; ++j) kappas.push_back(step * static_cast<double>(j));
    return kappas;
}

}  // namespace vpc
