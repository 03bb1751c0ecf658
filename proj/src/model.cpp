#include "vpc/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace vpc {

ExperimentGeometry::ExperimentGeometry(std::vector<Vec3> atom_positions,
                                       double screen_distance, double slit_separation,
                                       double slit_width, double t_i, double t_a,
                                       double t_b, double t_f)
    : atoms_(std::move(atom_positions)),
      screen_distance_(screen_distance),
      slit_separation_(slit_separation),
      slit_width_(slit_width),
      t_i_(t_i),
      t_a_(t_a),
      t_b_(t_b),
      t_f_(t_f) {
    if (!(t_i < t_a && t_a < t_b && t_b < t_f)) {
        throw ConfigError("epoch times must satisfy t_i < t_a < t_b < t_f");
    }
    if (atoms_.size() < 2) {
        throw ConfigError("geometry needs at least 2 atoms");
    }
    if (!(slit_separation_ > 0.0) || slit_width_ < 0.0 || !(screen_distance_ > 0.0)) {
        throw ConfigError("slit separation and screen distance must be positive");
    }
    for (const auto& b : atoms_) {
        if (b[0] != screen_distance_) {
            throw ConfigError("every atom must lie in the screen plane x1 = X");
        }
    }
    std::set<std::pair<double, double>> seen;
    for (const auto& b : atoms_) {
        if (!seen.insert({b[1], b[2]}).second) {
            throw ConfigError("atom positions must be distinct");
        }
    }
}

EpochLengths epoch_lengths(const ExperimentGeometry& g) {
    EpochLengths l;
    l.l1 = g.t_a() - g.t_i();
    l.l2 = g.t_b() - g.t_a();
    l.l3 = g.t_f() - g.t_b();
    l.total = g.t_f() - g.t_i();
    return l;
}

FunctionalParams FunctionalParams::with_defaults(double epsilon, double dx2_phi,
                                                 double dE2_phi, double energy_gap,
                                                 double dp2_xi, double electron_mass) {
    FunctionalParams p;
    p.epsilon = epsilon;
    p.electron_mass = electron_mass;
    p.dx2_phi = dx2_phi;
    p.dE2_phi = dE2_phi;
    p.energy_gap = energy_gap;
    p.dp2_xi = dp2_xi;
    p.dx2_theta = dx2_phi;
    p.dx2_phitheta = dx2_phi;
    p.dp2_phi = dx2_phi > 0.0 ? 0.25 / dx2_phi : 0.0;
    p.dp2_theta = p.dp2_phi;
    p.dp2_phitheta = p.dp2_phi;
    p.dE2_theta = dE2_phi;
    p.dE2_phitheta = energy_gap * energy_gap;
    p.validate();
    return p;
}

void FunctionalParams::validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    const double vars[] = {dx2_phi,  dE2_phi,   energy_gap, dp2_xi,       dx2_theta,
                           dx2_phitheta, dp2_phi, dp2_theta,  dp2_phitheta, dE2_theta,
                           dE2_phitheta, o1_floor};
    for (double v : vars) {
        if (v < 0.0) throw ConfigError("variances and the energy gap must be nonnegative");
    }
}

DetectorModel DetectorModel::position(std::vector<Vec3> atom_positions) {
    if (atom_positions.empty()) throw ConfigError("position detector needs atom labels");
    DetectorModel d;
    d.kind_ = DetectorKind::Position;
    d.labels_ = std::move(atom_positions);
    return d;
}

DetectorModel DetectorModel::wavelength(std::vector<double> kappas, double scale) {
    if (kappas.empty()) throw ConfigError("wavelength detector needs kappa labels");
    if (!(scale > 0.0)) throw ConfigError("wavelength label scale must be positive");
    DetectorModel d;
    d.kind_ = DetectorKind::Wavelength;
    d.scale_ = scale;
    d.kappas_ = std::move(kappas);
    d.labels_.reserve(d.kappas_.size());
    for (double k : d.kappas_) d.labels_.push_back({0.0, k * scale, 0.0});
    return d;
}

DetectorModel DetectorModel::delayed_choice(DetectorModel pre, DetectorModel post,
                                            double switch_time, double t_a, double t_b) {
    if (pre.kind_ == DetectorKind::DelayedChoice || post.kind_ == DetectorKind::DelayedChoice) {
        throw ConfigError("delayed-choice sub-models cannot themselves be delayed");
    }
    if (pre.mode_count() != post.mode_count()) {
        throw ConfigError("delayed-choice sub-models must label the same mode count");
    }
    if (!(switch_time > t_a && switch_time < t_b)) {
        throw ConfigError("switch time must lie strictly inside (t_a, t_b)");
    }
    DetectorModel d;
    d.kind_ = DetectorKind::DelayedChoice;
    d.switch_time_ = switch_time;
    d.labels_ = post.labels_;
    d.sub_.push_back(std::move(pre));
    d.sub_.push_back(std::move(post));
    return d;
}

std::size_t DetectorModel::mode_count() const { return labels_.size(); }

const std::vector<Vec3>& DetectorModel::labels_at(double t) const {
    if (kind_ == DetectorKind::DelayedChoice) {
        return t < switch_time_ ? sub_[0].labels_ : sub_[1].labels_;
    }
    return labels_;
}

const std::vector<Vec3>& DetectorModel::labels() const { return labels_; }

double DetectorModel::mode_coordinate(std::size_t i) const {
    if (kind_ == DetectorKind::Wavelength) return kappas_.at(i);
    if (kind_ == DetectorKind::DelayedChoice) return sub_[1].mode_coordinate(i);
    return labels_.at(i)[1];
}

const DetectorModel& DetectorModel::pre_switch() const {
    if (kind_ != DetectorKind::DelayedChoice) throw ConfigError("not a delayed-choice detector");
    return sub_[0];
}

const DetectorModel& DetectorModel::post_switch() const {
    if (kind_ != DetectorKind::DelayedChoice) throw ConfigError("not a delayed-choice detector");
    return sub_[1];
}

CoefficientTrajectory::CoefficientTrajectory(std::size_t n_modes, double t_start,
                                             double t_end, std::size_t n_steps)
    : n_modes_(n_modes), n_steps_(n_steps), t_start_(t_start), t_end_(t_end) {
    if (n_modes == 0 || n_steps == 0 || !(t_end > t_start)) {
        throw GridError("trajectory needs modes, steps and a positive time span");
    }
    dt_ = (t_end - t_start) / static_cast<double>(n_steps);
    c_.assign(n_modes * (n_steps + 1), Complex(0.0, 0.0));
}

CoefficientTrajectory CoefficientTrajectory::constant(const std::vector<Complex>& boundary,
                                                      double t_start, double t_end,
                                                      std::size_t n_steps) {
    CoefficientTrajectory traj(boundary.size(), t_start, t_end, n_steps);
    for (std::size_t n = 0; n < boundary.size(); ++n) {
        for (std::size_t m = 0; m <= n_steps; ++m) traj.at(n, m) = boundary[n];
    }
    return traj;
}

double CoefficientTrajectory::norm_at(std::size_t sample) const {
    double s = 0.0;
    for (std::size_t n = 0; n < n_modes_; ++n) s += std::norm(at(n, sample));
    return s;
}

void CoefficientTrajectory::renormalize(std::size_t first) {
    for (std::size_t m = first; m <= n_steps_; ++m) {
        const double lambda = norm_at(m);
        if (lambda < 1e-300) throw ZeroNormError("sample norm underflow during renormalization");
        const double inv = 1.0 / std::sqrt(lambda);
        for (std::size_t n = 0; n < n_modes_; ++n) at(n, m) *= inv;
    }
}

Complex CoefficientTrajectory::interpolate(std::size_t mode, double t) const {
    const double s = std::clamp((t - t_start_) / dt_, 0.0, static_cast<double>(n_steps_));
    const auto lo = static_cast<std::size_t>(std::min(s, static_cast<double>(n_steps_ - 1)));
    const double f = s - static_cast<double>(lo);
    return at(mode, lo) * (1.0 - f) + at(mode, lo + 1) * f;
}

std::size_t CoefficientTrajectory::node_index(double t) const {
    const double s = (t - t_start_) / dt_;
    const double r = std::round(s);
    if (r < 0.0 || r > static_cast<double>(n_steps_) || std::abs(s - r) > 1e-9) {
        throw GridError("time is not a grid node");
    }
    return static_cast<std::size_t>(r);
}

std::size_t snapped_step_count(const ExperimentGeometry& g, std::size_t requested) {
    const double span = g.t_f() - g.t_i();
    for (std::size_t m = std::max<std::size_t>(requested, 3); m <= 8 * requested + 8; ++m) {
        const double h = span / static_cast<double>(m);
        const double sa = (g.t_a() - g.t_i()) / h;
        const double sb = (g.t_b() - g.t_i()) / h;
        if (std::abs(sa - std::round(sa)) < 1e-9 && std::abs(sb - std::round(sb)) < 1e-9 &&
            std::round(sa) >= 1.0 && std::round(sb) > std::round(sa) &&
            std::round(sb) <= static_cast<double>(m) - 1.0) {
            return m;
        }
    }
    throw GridError("no step count within 8x the request places t_a and t_b on grid nodes");
}

std::vector<double> mode_weights(const CoefficientTrajectory& traj) {
    const std::size_t cols = traj.sample_count();
    std::vector<double> w(traj.mode_count() * cols, 0.0);
    for (std::size_t m = 0; m < cols; ++m) {
        const double lambda = traj.norm_at(m);
        if (lambda < 1e-300) throw ZeroNormError("zero norm sample in weight computation");
        for (std::size_t n = 0; n < traj.mode_count(); ++n) {
            w[n * cols + m] = std::norm(traj.at(n, m)) / lambda;
        }
    }
    return w;
}

}  // namespace vpc
