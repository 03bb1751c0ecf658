#pragma once

#include <cstdint>
#include <vector>

#include "vpc/model.hpp"

// Boundary coefficients at t_i. Position-type runs get the far-field
// two-slit pattern sampled at the atom coordinates; wavelength-type runs
// get the transverse Fourier content of the screen intensity pattern at
// the detector's kappa labels. Base amplitudes are real and nonnegative;
// the hidden-variable phases are applied only by sample_phases.

namespace vpc {

struct SlitSpec {
    double wavelength = 0.1;
    double separation = 1.0;
    double width = 0.0;
    double screen_distance = 100.0;

    SlitSpec() = default;
    SlitSpec(double lambda, double d, double a, double X);
    static SlitSpec from_geometry(const ExperimentGeometry& geometry, double lambda);

    /// Spacing between adjacent intensity maxima on the screen, lambda X / d.
    double fringe_spacing() const { return wavelength * screen_distance / separation; }
};

/// Far-field screen amplitude cos(pi d y/(lambda X)) sinc(pi a y/(lambda X)).
double two_slit_field(const SlitSpec& slits, double y);

/// Far-field amplitude |cos(pi d y/(lambda X)) sinc(pi a y/(lambda X))|
/// at each label's transverse coordinate, L2-normalized. Requires a
/// position or delayed-choice detector; throws DegenerateError when every
/// amplitude vanishes.
std::vector<Complex> slit_amplitudes(const SlitSpec& slits, const DetectorModel& detector);

/// Windowed Fourier moduli of the screen intensity pattern at the
/// detector's kappa labels, L2-normalized. Requires a wavelength detector.
std::vector<Complex> wavenumber_amplitudes(const SlitSpec& slits,
                                           const DetectorModel& detector);

/// Dispatches on detector kind.
std::vector<Complex> initial_amplitudes(const SlitSpec& slits, const DetectorModel& detector);

/// Multiplies each component by a unit phase drawn uniform on [0, 2pi);
/// deterministic per seed, moduli unchanged. The default window of 1
/// draws independently per mode; a window w > 1 shares one draw across
/// each block of w adjacent modes, a diagnostic knob for studying phase
/// correlations (no correlated variant is physically endorsed).
std::vector<Complex> sample_phases(const std::vector<Complex>& amplitudes,
                                   std::uint64_t seed,
                                   std::size_t correlation_window = 1);

/// Symmetric uniform kappa grid with `count` labels up to +-kappa_max;
/// even counts skip kappa = 0 (a cavity supports no DC mode).
std::vector<double> make_kappa_grid(std::size_t count, double kappa_max);

}  // namespace vpc
