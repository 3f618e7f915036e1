#pragma once

#include "dynlr/config.hpp"
#include "dynlr/joint.hpp"
#include "dynlr/metrics.hpp"
#include "dynlr/phantoms.hpp"
#include "dynlr/radon.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dynlr {

GroundTruth make_phantom(const ExperimentConfig& cfg);
SamplingSchedule make_schedule(const ExperimentConfig& cfg);

/// Phantom, operators and noisy data for one configuration.
struct Scenario {
    GroundTruth truth;
    SamplingSchedule schedule;
    ImageGrid grid;
    Geometry geometry;
    OperatorSet ops;
    Matrix data;
};

Scenario make_scenario(const ExperimentConfig& cfg);

struct MethodOutput {
    Matrix X;
    std::optional<FactorPair> factors;  // ordered by descending spatial norm
    SolveTrace trace;
    std::optional<SolveTrace> decomposition_trace;  // gradtv_nmf only
    double seconds = 0.0;
};

/// Runs the configured method on `data`.
MethodOutput run_method(const ExperimentConfig& cfg, const Matrix& data, const OperatorSet& ops);

/// Feature extraction step of the two-stage pipelines on a given X.
MethodOutput decompose(const ExperimentConfig& cfg, const Matrix& x);

struct ExperimentResult {
    std::filesystem::path dir;
    QualityReport report;
    std::optional<ComponentMatch> match;
    MethodOutput output;
};

// Output files under the artifact directory. Everything except timing.csv is
// a deterministic function of the config.
//   config.ini            config echo
//   phantom_{X,B,C}.dlr   ground truth
//   schedule.csv          angles per time step
//   data_Y.dlr            noisy sinograms
//   X.dlr [B.dlr C.dlr]   reconstruction (and ordered factors)
//   trace.csv             solver trace (decomposition_trace.csv for gradtv_nmf)
//   report.csv            per-frame PSNR / SSIM
//   components.csv        true component -> feature matching
//   features/feature_NNNN.pgm, curves.csv   ordered features
//   timing.csv            wall times
void write_phantom_files(const std::filesystem::path& dir, const GroundTruth& gt);
void write_data_files(const std::filesystem::path& dir, const SamplingSchedule& schedule, const Matrix& data);
void write_method_files(const std::filesystem::path& dir, const MethodOutput& out, std::size_t side);
void write_features(const std::filesystem::path& dir, const FactorPair& f, std::size_t side);
void write_components_csv(std::ostream& os, const ComponentMatch& m);
std::string report_csv(const QualityReport& report);

/// Full pipeline for one configuration into cfg.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// One run_experiment per entry of cfg.sweep, in subdirectories `cNN`, plus
/// sweep.csv (angles_per_step,mean_psnr,mean_ssim) in cfg.output_dir.
std::vector<ExperimentResult> run_angle_sweep(const ExperimentConfig& cfg);

struct BenchmarkRow {
    std::string method;
    std::size_t iterations = 0;
    double seconds_total = 0.0;
    double seconds_per_iteration = 0.0;
};

/// Times bc and sbc for cfg.benchmark_iterations iterations on a stationary
/// schedule from a common initialisation.
std::vector<BenchmarkRow> run_benchmark(const ExperimentConfig& cfg);
void write_benchmark_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows, const ExperimentConfig& cfg);

}  // namespace dynlr
