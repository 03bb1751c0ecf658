#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vpc/initializer.hpp"
#include "vpc/model.hpp"
#include "vpc/optimizer.hpp"
#include "vpc/stats.hpp"

// Ensemble orchestration: sample hidden-variable phases per run, relax,
// and aggregate outcome statistics. Runs are keyed by index with
// counter-based substreams, so results are deterministic for a fixed base
// seed regardless of worker count, and the winner of run k never changes
// when the ensemble grows.

namespace vpc {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kConfigSchemaVersion = 1;

struct BasicDetectorSpec {
    bool is_wavelength = false;
    std::size_t kappa_count = 16;
    double kappa_max = 0.0;  // 0 = auto: twice the screen-pattern wavenumber
    double scale = 0.0;      // 0 = auto: one fringe spacing
};

struct DetectorSpec {
    DetectorKind kind = DetectorKind::Position;
    BasicDetectorSpec self;
    BasicDetectorSpec pre;   // delayed choice only
    BasicDetectorSpec post;  // delayed choice only
    double switch_time = 0.0;
};

struct RunConfig {
    // geometry
    std::vector<Vec3> atoms;
    double screen_distance = 100.0;
    double slit_separation = 1.0;
    double slit_width = 0.2;
    double t_i = 0.0, t_a = 1.0, t_b = 2.0, t_f = 3.0;
    double lambda = 0.1;

    // epsilon = 4.0 is a bring-up calibration: joint descent on the
    // 64-atom screen collapses reliably for epsilon >= 2 at these scales.
    FunctionalParams params = FunctionalParams::with_defaults(4.0, 0.25, 1.0, 1.0, 1.0);
    DetectorSpec detector;
    OptimizerConfig optimizer;
    std::size_t time_steps = 256;

    std::size_t ensemble_size = 100;
    std::uint64_t base_seed = 1;
    std::size_t phase_correlation_window = 1;
    std::size_t workers = 0;  // 0 = hardware concurrency; env overrides
    double born_p_threshold = 0.001;

    std::string output_dir = "out";
    bool emit_trajectories = false;

    ExperimentGeometry make_geometry() const;
    DetectorModel make_detector() const;
    SlitSpec make_slits() const;

    static RunConfig from_json_text(const std::string& text);
    static RunConfig from_file(const std::string& path);
    std::string to_json_text() const;
};

/// Uniform line of atoms in the screen plane, centered on the axis.
std::vector<Vec3> line_of_atoms(std::size_t count, double spacing, double screen_distance);

struct RunRecord {
    std::size_t run_index = 0;
    std::uint64_t seed = 0;
    std::optional<std::size_t> winner;
    bool collapsed = false;
    bool converged = false;
    double final_max_weight = 0.0;
    double objective_final = 0.0;
    std::size_t iterations = 0;
    std::vector<double> weight_trajectory;  // mode-major; only when emitted
};

struct EnsembleResult {
    std::vector<RunRecord> runs;
    std::vector<std::size_t> histogram;  // collapsed runs per mode
    std::vector<double> expected;        // |C_n(t_i)|^2
    std::vector<double> mode_coordinates;
    std::vector<double> time_samples;  // grid for emitted trajectories
    ChiSquareResult born_test;
    std::size_t collapsed_count = 0;
    std::size_t failed_runs = 0;  // runs aborted by an internal error
    std::string first_error;
    double collapse_rate = 0.0;
};

EnsembleResult run_ensemble(const RunConfig& config);

struct DelayedComparison {
    EnsembleResult original;
    EnsembleResult delayed;
    ChiSquareResult two_sample;
    double significance = 0.01;
    bool pass = false;
};

/// Runs both ensembles and compares winner histograms with a two-sample
/// chi-square. The configs must share geometry and slits, and the delayed
/// config's outcome detector must match the original's label space;
/// otherwise ConfigMismatch.
DelayedComparison compare_delayed_choice(const RunConfig& original, const RunConfig& delayed,
                                         double significance = 0.01);

/// Writes histogram.csv, winners.csv and summary.json (plus
/// trajectories/NNN.csv when enabled at run time) into dir.
void write_results(const EnsembleResult& result, const RunConfig& config,
                   const std::string& dir);

}  // namespace vpc
