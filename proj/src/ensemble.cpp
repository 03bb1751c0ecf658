#include "vpc/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <thread>

#include "json.hpp"
#include "vpc/rng.hpp"

namespace vpc {

namespace {

using nlohmann::json;

std::size_t effective_workers(std::size_t configured) {
    if (const char* env = std::getenv("VPCOLLAPSE_WORKERS")) {
        const long v = std::atol(env);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    if (configured > 0) return configured;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

double auto_kappa_max(const SlitSpec& slits) {
    return 2.0 * 2.0 * std::numbers::pi * slits.separation /
           (slits.wavelength * slits.screen_distance);
}

DetectorModel build_basic(const BasicDetectorSpec& spec, const std::vector<Vec3>& atoms,
                          const SlitSpec& slits) {
    if (!spec.is_wavelength) return DetectorModel::position(atoms);
    const double kmax = spec.kappa_max > 0.0 ? spec.kappa_max : auto_kappa_max(slits);
    const double scale = spec.scale > 0.0 ? spec.scale : slits.fringe_spacing();
    return DetectorModel::wavelength(make_kappa_grid(spec.kappa_count, kmax), scale);
}

/// Inverse-CDF draw from the expected weights.
std::size_t draw_winner(const std::vector<double>& expected, std::uint64_t seed) {
    CounterRng rng = make_stream(seed, StreamId::Winner);
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t n = 0; n < expected.size(); ++n) {
        acc += expected[n];
        if (u < acc) return n;
    }
    // Round the tail into the last nonzero bin.
    for (std::size_t n = expected.size(); n-- > 0;) {
        if (expected[n] > 0.0) return n;
    }
    return expected.size() - 1;
}

double smoothstep(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}

/// Conditioned initial guess: moduli blend from the boundary weights to
/// the winner's one-hot across (t_a, t_b), per-mode phases kept from the
/// boundary. Every slice is exactly normalized and slice 0 equals the
/// boundary bit for bit.
CoefficientTrajectory conditioned_initial(const std::vector<Complex>& boundary,
                                          std::size_t winner,
                                          const ExperimentGeometry& g, std::size_t steps) {
    CoefficientTrajectory traj(boundary.size(), g.t_i(), g.t_f(), steps);
    std::vector<double> w0(boundary.size());
    for (std::size_t n = 0; n < boundary.size(); ++n) w0[n] = std::norm(boundary[n]);
    for (std::size_t m = 0; m <= steps; ++m) {
        const double t = traj.time_at(m);
        const double s = smoothstep((t - g.t_a()) / (g.t_b() - g.t_a()));
        for (std::size_t n = 0; n < boundary.size(); ++n) {
            if (m == 0) {
                traj.at(n, 0) = boundary[n];
                continue;
            }
            const double target = (n == winner) ? 1.0 : 0.0;
            const double r = std::sqrt((1.0 - s) * w0[n] + s * target);
            const double phase = std::arg(boundary[n] == Complex(0.0, 0.0) ? Complex(1.0, 0.0)
                                                                           : boundary[n]);
            traj.at(n, m) = std::polar(r, phase);
        }
    }
    return traj;
}

json detector_spec_to_json(const BasicDetectorSpec& b) {
    return json{{"kind", b.is_wavelength ? "wavelength" : "position"},
                {"kappa_count", b.kappa_count},
                {"kappa_max", b.kappa_max},
                {"scale", b.scale}};
}

BasicDetectorSpec basic_spec_from_json(const json& j) {
    BasicDetectorSpec b;
    const std::string kind = j.value("kind", "position");
    if (kind == "wavelength") {
        b.is_wavelength = true;
    } else if (kind != "position") {
        throw ConfigError("detector.kind must be position, wavelength or delayed_choice");
    }
    b.kappa_count = j.value("kappa_count", std::size_t(16));
    b.kappa_max = j.value("kappa_max", 0.0);
    b.scale = j.value("scale", 0.0);
    return b;
}

template <typename T>
T require(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing config field: ") + key);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config field '") + key + "': " + e.what());
    }
}

void format_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

std::vector<Vec3> line_of_atoms(std::size_t count, double spacing, double screen_distance) {
    std::vector<Vec3> atoms;
    const double mid = 0.5 * spacing * static_cast<double>(count - 1);
    for (std::size_t n = 0; n < count; ++n) {
        atoms.push_back({screen_distance, spacing * static_cast<double>(n) - mid, 0.0});
    }
    return atoms;
}

ExperimentGeometry RunConfig::make_geometry() const {
    return ExperimentGeometry(atoms, screen_distance, slit_separation, slit_width, t_i, t_a,
                              t_b, t_f);
}

SlitSpec RunConfig::make_slits() const {
    return SlitSpec(lambda, slit_separation, slit_width, screen_distance);
}

DetectorModel RunConfig::make_detector() const {
    const SlitSpec slits = make_slits();
    switch (detector.kind) {
        case DetectorKind::Position:
        case DetectorKind::Wavelength:
            return build_basic(detector.self, atoms, slits);
        case DetectorKind::DelayedChoice: {
            auto pre = build_basic(detector.pre, atoms, slits);
            auto post = build_basic(detector.post, atoms, slits);
            return DetectorModel::delayed_choice(std::move(pre), std::move(post),
                                                 detector.switch_time, t_a, t_b);
        }
    }
    throw ConfigError("unknown detector kind");
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    const int version = j.value("schema_version", 0);
    if (version != kConfigSchemaVersion) {
        throw ConfigError("unsupported schema_version (expected 1)");
    }

    RunConfig c;
    const json& geo = j.contains("geometry") ? j.at("geometry") : json::object();
    c.screen_distance = geo.value("screen_distance", 100.0);
    const json& epochs = geo.contains("epochs") ? geo.at("epochs") : json::object();
    c.t_i = epochs.value("t_i", 0.0);
    c.t_a = epochs.value("t_a", 1.0);
    c.t_b = epochs.value("t_b", 2.0);
    c.t_f = epochs.value("t_f", 3.0);
    if (geo.contains("atoms")) {
        const json& a = geo.at("atoms");
        if (a.contains("positions")) {
            for (const auto& p : a.at("positions")) {
                if (p.size() != 2) throw ConfigError("atom positions are [y, z] pairs");
                c.atoms.push_back({c.screen_distance, p.at(0).get<double>(),
                                   p.at(1).get<double>()});
            }
        } else {
            const auto count = require<std::size_t>(a, "count");
            const auto spacing = require<double>(a, "spacing");
            c.atoms = line_of_atoms(count, spacing, c.screen_distance);
        }
    } else {
        c.atoms = line_of_atoms(64, 0.4, c.screen_distance);
    }

    const json& slits = j.contains("slits") ? j.at("slits") : json::object();
    c.lambda = slits.value("wavelength", 0.1);
    c.slit_separation = slits.value("separation", 1.0);
    c.slit_width = slits.value("width", 0.2);

    if (j.contains("params")) {
        const json& p = j.at("params");
        const double eps = p.value("epsilon", 1.0);
        const double dx2 = p.value("dx2_phi", 0.25);
        const double dE2 = p.value("dE2_phi", 1.0);
        const double gap = p.value("energy_gap", 1.0);
        const double dp2 = p.value("dp2_xi", 1.0);
        const double mass = p.value("electron_mass", 1.0);
        c.params = FunctionalParams::with_defaults(eps, dx2, dE2, gap, dp2, mass);
        if (p.contains("dp2_phi")) c.params.dp2_phi = p.at("dp2_phi").get<double>();
        if (p.contains("dx2_theta")) c.params.dx2_theta = p.at("dx2_theta").get<double>();
        if (p.contains("dE2_theta")) c.params.dE2_theta = p.at("dE2_theta").get<double>();
        c.params.o1_floor = p.value("o1_floor", 0.0);
        c.params.validate();
    }

    if (j.contains("detector")) {
        const json& d = j.at("detector");
        const std::string kind = d.value("kind", "position");
        if (kind == "delayed_choice") {
            c.detector.kind = DetectorKind::DelayedChoice;
            if (!d.contains("pre") || !d.contains("post")) {
                throw ConfigError("delayed_choice detector needs pre and post sub-models");
            }
            c.detector.pre = basic_spec_from_json(d.at("pre"));
            c.detector.post = basic_spec_from_json(d.at("post"));
            c.detector.switch_time = require<double>(d, "switch_time");
        } else {
            c.detector.self = basic_spec_from_json(d);
            c.detector.kind = c.detector.self.is_wavelength ? DetectorKind::Wavelength
                                                            : DetectorKind::Position;
        }
    }

    if (j.contains("optimizer")) {
        const json& o = j.at("optimizer");
        c.optimizer.max_iters = o.value("max_iters", c.optimizer.max_iters);
        c.optimizer.step_size = o.value("step_size", c.optimizer.step_size);
        c.optimizer.tolerance = o.value("tolerance", c.optimizer.tolerance);
        c.optimizer.collapse_threshold =
            o.value("collapse_threshold", c.optimizer.collapse_threshold);
        c.optimizer.penalty_weight = o.value("penalty_weight", c.optimizer.penalty_weight);
        c.optimizer.penalty_stages = o.value("penalty_stages", c.optimizer.penalty_stages);
        const std::string mode = o.value("mode", "joint_descent");
        if (mode == "joint_descent") {
            c.optimizer.mode = DescentMode::JointDescent;
        } else if (mode == "born_conditioned") {
            c.optimizer.mode = DescentMode::BornConditioned;
        } else {
            throw ConfigError("optimizer.mode must be joint_descent or born_conditioned");
        }
        c.optimizer.validate();
    }

    c.time_steps = j.value("time_steps", std::size_t(256));
    if (j.contains("ensemble")) {
        const json& e = j.at("ensemble");
        c.ensemble_size = e.value("size", std::size_t(100));
        c.base_seed = e.value("base_seed", std::uint64_t(1));
        c.phase_correlation_window =
            e.value("phase_correlation_window", std::size_t(1));
        if (c.phase_correlation_window < 1) {
            throw ConfigError("ensemble.phase_correlation_window must be >= 1");
        }
        c.workers = e.value("workers", std::size_t(0));
        c.born_p_threshold = e.value("born_p_threshold", 0.001);
    }
    if (j.contains("output")) {
        const json& o = j.at("output");
        c.output_dir = o.value("dir", std::string("out"));
        c.emit_trajectories = o.value("emit_trajectories", false);
    }
    if (c.ensemble_size < 1) throw ConfigError("ensemble size must be at least 1");

    // Fail fast on inconsistent physics inputs.
    c.make_geometry();
    c.make_slits();
    c.make_detector();
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

std::string RunConfig::to_json_text() const {
    json positions = json::array();
    for (const auto& a : atoms) positions.push_back({a[1], a[2]});
    json d;
    if (detector.kind == DetectorKind::DelayedChoice) {
        d = json{{"kind", "delayed_choice"},
                 {"switch_time", detector.switch_time},
                 {"pre", detector_spec_to_json(detector.pre)},
                 {"post", detector_spec_to_json(detector.post)}};
    } else {
        d = detector_spec_to_json(detector.self);
    }
    json j{
        {"schema_version", kConfigSchemaVersion},
        {"geometry",
         {{"screen_distance", screen_distance},
          {"epochs", {{"t_i", t_i}, {"t_a", t_a}, {"t_b", t_b}, {"t_f", t_f}}},
          {"atoms", {{"positions", positions}}}}},
        {"slits",
         {{"wavelength", lambda}, {"separation", slit_separation}, {"width", slit_width}}},
        {"params",
         {{"epsilon", params.epsilon},
          {"electron_mass", params.electron_mass},
          {"dx2_phi", params.dx2_phi},
          {"dE2_phi", params.dE2_phi},
          {"energy_gap", params.energy_gap},
          {"dp2_xi", params.dp2_xi},
          {"o1_floor", params.o1_floor}}},
        {"detector", d},
        {"optimizer",
         {{"max_iters", optimizer.max_iters},
          {"step_size", optimizer.step_size},
          {"tolerance", optimizer.tolerance},
          {"collapse_threshold", optimizer.collapse_threshold},
          {"penalty_weight", optimizer.penalty_weight},
          {"penalty_stages", optimizer.penalty_stages},
          {"mode", optimizer.mode == DescentMode::BornConditioned ? "born_conditioned"
                                                                  : "joint_descent"}}},
        {"time_steps", time_steps},
        {"ensemble",
         {{"size", ensemble_size},
          {"base_seed", base_seed},
          {"workers", workers},
          {"phase_correlation_window", phase_correlation_window},
          {"born_p_threshold", born_p_threshold}}},
        {"output", {{"dir", output_dir}, {"emit_trajectories", emit_trajectories}}},
    };
    return j.dump(2);
}

EnsembleResult run_ensemble(const RunConfig& config) {
    const ExperimentGeometry geometry = config.make_geometry();
    const DetectorModel detector = config.make_detector();
    const SlitSpec slits = config.make_slits();
    const std::vector<Complex> base = initial_amplitudes(slits, detector);
    const std::size_t n_modes = base.size();
    const std::size_t steps = snapped_step_count(geometry, config.time_steps);

    EnsembleResult result;
    result.expected.resize(n_modes);
    for (std::size_t n = 0; n < n_modes; ++n) result.expected[n] = std::norm(base[n]);
    result.mode_coordinates.resize(n_modes);
    for (std::size_t n = 0; n < n_modes; ++n) {
        result.mode_coordinates[n] = detector.mode_coordinate(n);
    }
    result.runs.resize(config.ensemble_size);
    {
        CoefficientTrajectory probe(n_modes, geometry.t_i(), geometry.t_f(), steps);
        for (std::size_t m = 0; m <= steps; ++m) {
            result.time_samples.push_back(probe.time_at(m));
        }
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= config.ensemble_size) break;
            RunRecord& rec = result.runs[k];
            rec.run_index = k;
            rec.seed = config.base_seed + k;
            try {
                const std::vector<Complex> boundary =
                    sample_phases(base, rec.seed, config.phase_correlation_window);

                OptimizationReport report = [&]() {
                    if (config.optimizer.mode == DescentMode::BornConditioned) {
                        const std::size_t winner = draw_winner(result.expected, rec.seed);
                        auto initial = conditioned_initial(boundary, winner, geometry, steps);
                        return relax_conditioned(initial, winner, config.optimizer,
                                                 config.params, geometry, detector);
                    }
                    auto initial = CoefficientTrajectory::constant(boundary, geometry.t_i(),
                                                                   geometry.t_f(), steps);
                    return relax(initial, config.optimizer, config.params, geometry,
                                 detector);
                }();

                rec.winner = report.winner;
                rec.collapsed = report.collapsed;
                rec.converged = report.converged;
                rec.final_max_weight = report.final_max_weight;
                rec.objective_final = report.objective_final;
                rec.iterations = report.iterations;
                if (config.emit_trajectories) {
                    rec.weight_trajectory = mode_weights(report.final_trajectory);
                }
            } catch (const std::exception& e) {
                // A failed run counts against the collapse rate but never
                // aborts the ensemble.
                std::lock_guard<std::mutex> lock(error_mutex);
                ++result.failed_runs;
                if (result.first_error.empty()) result.first_error = e.what();
            }
        }
    };

    const std::size_t n_workers =
        std::min(effective_workers(config.workers), config.ensemble_size);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t + 1 < n_workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    result.histogram.assign(n_modes, 0);
    for (const auto& rec : result.runs) {
        if (rec.collapsed && rec.winner) {
            ++result.histogram[*rec.winner];
            ++result.collapsed_count;
        }
    }
    result.collapse_rate = static_cast<double>(result.collapsed_count) /
                           static_cast<double>(config.ensemble_size);
    result.born_test = chi_square_goodness(result.histogram, result.expected);
    return result;
}

DelayedComparison compare_delayed_choice(const RunConfig& original, const RunConfig& delayed,
                                         double significance) {
    auto geometry_equal = [](const RunConfig& a, const RunConfig& b) {
        return a.atoms == b.atoms && a.screen_distance == b.screen_distance &&
               a.t_i == b.t_i && a.t_a == b.t_a && a.t_b == b.t_b && a.t_f == b.t_f &&
               a.lambda == b.lambda && a.slit_separation == b.slit_separation &&
               a.slit_width == b.slit_width;
    };
    if (!geometry_equal(original, delayed)) {
        throw ConfigMismatch("delayed-choice comparison requires identical geometry and slits");
    }
    const DetectorModel da = original.make_detector();
    const DetectorModel db = delayed.make_detector();
    if (da.labels() != db.labels()) {
        throw ConfigMismatch("outcome label spaces differ; winner histograms are incomparable");
    }

    DelayedComparison cmp;
    cmp.significance = significance;
    cmp.original = run_ensemble(original);
    cmp.delayed = run_ensemble(delayed);
    cmp.two_sample = chi_square_two_sample(cmp.original.histogram, cmp.delayed.histogram);
    cmp.pass = cmp.two_sample.p_value > significance;
    return cmp;
}

void write_results(const EnsembleResult& result, const RunConfig& config,
                   const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IOError("cannot create output directory: " + dir);

    auto write_file = [&](const std::string& name, const std::string& content) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary);
        if (!out) throw IOError("cannot write " + name + " in " + dir);
        out << content;
        if (!out.good()) throw IOError("short write on " + name);
    };

    std::string hist = "mode_index,y_position_or_kappa,count,expected_probability\n";
    for (std::size_t n = 0; n < result.histogram.size(); ++n) {
        hist += std::to_string(n);
        hist += ',';
        format_double(hist, result.mode_coordinates[n]);
        hist += ',';
        hist += std::to_string(result.histogram[n]);
        hist += ',';
        format_double(hist, result.expected[n]);
        hist += '\n';
    }
    write_file("histogram.csv", hist);

    std::string winners = "run_index,seed,winner,collapsed,final_max_weight,objective_final\n";
    for (const auto& rec : result.runs) {
        winners += std::to_string(rec.run_index);
        winners += ',';
        winners += std::to_string(rec.seed);
        winners += ',';
        winners += rec.winner ? std::to_string(*rec.winner) : std::string("-1");
        winners += ',';
        winners += rec.collapsed ? '1' : '0';
        winners += ',';
        format_double(winners, rec.final_max_weight);
        winners += ',';
        format_double(winners, rec.objective_final);
        winners += '\n';
    }
    write_file("winners.csv", winners);

    nlohmann::json summary{
        {"versions", {{"tool", kToolVersion}, {"schema", kConfigSchemaVersion}}},
        {"ensemble_size", result.runs.size()},
        {"collapsed_count", result.collapsed_count},
        {"collapse_rate", result.collapse_rate},
        {"born_chi_square", result.born_test.statistic},
        {"born_dof", result.born_test.dof},
        {"born_p_value", result.born_test.p_value},
        {"born_degenerate", result.born_test.degenerate},
        {"histogram", result.histogram},
        {"expected", result.expected},
        {"mode_coordinates", result.mode_coordinates},
        {"config", nlohmann::json::parse(config.to_json_text())},
    };
    write_file("summary.json", summary.dump(2));

    if (config.emit_trajectories) {
        fs::create_directories(fs::path(dir) / "trajectories", ec);
        if (ec) throw IOError("cannot create trajectories directory");
        for (const auto& rec : result.runs) {
            if (rec.weight_trajectory.empty()) continue;
            const std::size_t cols = result.time_samples.size();
            const std::size_t n_modes = rec.weight_trajectory.size() / cols;
            std::string csv = "t";
            for (std::size_t n = 0; n < n_modes; ++n) csv += ",w" + std::to_string(n);
            csv += '\n';
            for (std::size_t m = 0; m < cols; ++m) {
                format_double(csv, result.time_samples[m]);
                for (std::size_t n = 0; n < n_modes; ++n) {
                    csv += ',';
                    format_double(csv, rec.weight_trajectory[n * cols + m]);
                }
                csv += '\n';
            }
            char name[32];
            std::snprintf(name, sizeof(name), "%03zu.csv", rec.run_index);
            std::ofstream out(fs::path(dir) / "trajectories" / name, std::ios::binary);
            if (!out) throw IOError("cannot write trajectory file");
            out << csv;
        }
    }
}

}  // namespace vpc
