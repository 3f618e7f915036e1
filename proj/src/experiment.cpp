#include "dynlr/experiment.hpp"

#include "dynlr/errors.hpp"
#include "dynlr/gradtv.hpp"
#include "dynlr/image_io.hpp"
#include "dynlr/matrix_io.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

namespace dynlr {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string trace_csv(const SolveTrace& t) {
    std::ostringstream os;
    write_trace_csv(os, t, false);
    return os.str();
}

FactorPair ordered(const FactorPair& f) { return apply_feature_order(f, order_features(f.B, f.C)); }

}  // namespace

GroundTruth make_phantom(const ExperimentConfig& cfg) {
    return cfg.phantom == PhantomKind::SheppLogan ? dynamic_shepp_logan(cfg.size, cfg.steps)
                                                  : vessel_phantom(cfg.size, cfg.steps);
}

SamplingSchedule make_schedule(const ExperimentConfig& cfg) {
    return golden_angle_schedule(cfg.steps, cfg.angles_per_step, cfg.phi, cfg.stationary);
}

Scenario make_scenario(const ExperimentConfig& cfg) {
    cfg.validate();
    GroundTruth gt = make_phantom(cfg);
    SamplingSchedule schedule = make_schedule(cfg);
    ImageGrid grid(cfg.size);
    Geometry geometry = Geometry::default_for(grid);
    OperatorSet ops(grid, geometry, schedule);
    Matrix data = add_gaussian_noise(simulate_measurements(gt, ops), cfg.noise_level, cfg.seed);
    return Scenario{std::move(gt), std::move(schedule), grid, geometry, std::move(ops), std::move(data)};
}

MethodOutput decompose(const ExperimentConfig& cfg, const Matrix& x) {
    MethodOutput out;
    out.X = x;
    const auto t0 = Clock::now();
    if (cfg.method == Method::GradTvPca) {
        out.factors = ordered(pca_decompose(x, cfg.rank));
    } else if (cfg.method == Method::GradTvNmf) {
        PosthocNmfResult r = posthoc_nmf(project_floor(x, 0.0), cfg.rank, cfg.posthoc_config());
        out.factors = ordered(r.factors);
        out.decomposition_trace = std::move(r.trace);
    } else {
        throw ConfigError("decompose: method must be gradtv_pca or gradtv_nmf");
    }
    out.seconds = seconds_since(t0);
    return out;
}

MethodOutput run_method(const ExperimentConfig& cfg, const Matrix& data, const OperatorSet& ops) {
    cfg.validate();
    MethodOutput out;
    const auto t0 = Clock::now();
    switch (cfg.method) {
        case Method::Bcx:
        case Method::Bc:
        case Method::Sbc: {
            const JointConfig jc = cfg.joint_config();
            JointProblem problem(data, ops);
            const Matrix x0 = backprojection_init(data, ops, jc.floor);
            const FactorPair init = init_factors(x0, cfg.rank, jc.floor);
            if (cfg.method == Method::Bcx) {
                BcxResult r = bcx_solve(problem, jc, x0, init);
                out.X = std::move(r.X);
                out.factors = ordered({std::move(r.B), std::move(r.C)});
                out.trace = std::move(r.trace);
            } else {
                FactorResult r = cfg.method == Method::Bc ? bc_solve(problem, jc, init) : sbc_solve(problem, jc, init);
                out.X = r.B * r.C;
                out.factors = ordered({std::move(r.B), std::move(r.C)});
                out.trace = std::move(r.trace);
            }
            break;
        }
        case Method::GradTv:
        case Method::GradTvPca:
        case Method::GradTvNmf: {
            GradTvResult r = gradtv_solve(data, ops, cfg.gradtv_config());
            out.trace = std::move(r.trace);
            if (cfg.method == Method::GradTv) {
                out.X = std::move(r.X);
            } else {
                MethodOutput d = decompose(cfg, r.X);
                out.X = std::move(d.X);
                out.factors = std::move(d.factors);
                out.decomposition_trace = std::move(d.decomposition_trace);
            }
            break;
        }
    }
    out.seconds = seconds_since(t0);
    return out;
}

void write_phantom_files(const fs::path& dir, const GroundTruth& gt) {
    fs::create_directories(dir);
    io::save_dlr1(dir / "phantom_X.dlr", gt.X);
    io::save_dlr1(dir / "phantom_B.dlr", gt.B);
    io::save_dlr1(dir / "phantom_C.dlr", gt.C);
}

void write_data_files(const fs::path& dir, const SamplingSchedule& schedule, const Matrix& data) {
    fs::create_directories(dir);
    std::ostringstream os;
    write_schedule_csv(os, schedule);
    io::write_file_atomic(dir / "schedule.csv", os.str());
    io::save_dlr1(dir / "data_Y.dlr", data);
}

void write_features(const fs::path& dir, const FactorPair& f, std::size_t side) {
    const fs::path fdir = dir / "features";
    fs::create_directories(fdir);
    const Eigen::Index k = f.B.cols();
    for (Eigen::Index j = 0; j < k; ++j) {
        // Per-feature min-max scaling; PCA features may be signed.
        const Vector col = f.B.col(j);
        const double lo = std::min(0.0, col.minCoeff());
        const double span = col.maxCoeff() - lo;
        io::save_pgm16(fdir / ("feature_" + io::frame_suffix(static_cast<std::size_t>(j) + 1, static_cast<std::size_t>(k)) + ".pgm"),
                       col.array() - lo, side, span > 0.0 ? span : 1.0);
    }
    std::ostringstream os;
    os << "t";
    for (Eigen::Index j = 0; j < k; ++j) {
        os << ",feature_" << (j + 1);
    }
    os << '\n';
    for (Eigen::Index t = 0; t < f.C.cols(); ++t) {
        os << (t + 1);
        for (Eigen::Index j = 0; j < k; ++j) {
            os << ',' << io::format_double(f.C(j, t));
        }
        os << '\n';
    }
    io::write_file_atomic(dir / "curves.csv", os.str());
}

void write_method_files(const fs::path& dir, const MethodOutput& out, std::size_t side) {
    fs::create_directories(dir);
    io::save_dlr1(dir / "X.dlr", out.X);
    io::write_file_atomic(dir / "trace.csv", trace_csv(out.trace));
    if (out.decomposition_trace) {
        io::write_file_atomic(dir / "decomposition_trace.csv", trace_csv(*out.decomposition_trace));
    }
    if (out.factors) {
        io::save_dlr1(dir / "B.dlr", out.factors->B);
        io::save_dlr1(dir / "C.dlr", out.factors->C);
        write_features(dir, *out.factors, side);
    }
}

void write_components_csv(std::ostream& os, const ComponentMatch& m) {
    os << "true_component,feature,correlation\n";
    for (std::size_t j = 0; j < m.permutation.size(); ++j) {
        os << (j + 1) << ',' << (m.permutation[j] + 1) << ',' << io::format_double(m.correlation[j]) << '\n';
    }
}

std::string report_csv(const QualityReport& report) {
    std::ostringstream os;
    write_report_csv(os, report);
    return os.str();
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const auto t0 = Clock::now();
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    io::write_file_atomic(dir / "config.ini", format_experiment_config(cfg));

    const Scenario sc = make_scenario(cfg);
    const double t_setup = seconds_since(t0);
    write_phantom_files(dir, sc.truth);
    write_data_files(dir, sc.schedule, sc.data);

    ExperimentResult res;
    res.dir = dir;
    res.output = run_method(cfg, sc.data, sc.ops);
    write_method_files(dir, res.output, cfg.size);

    res.report = evaluate_stack(res.output.X, sc.truth.X, cfg.size);
    res.report.runtime_seconds = res.output.seconds;
    io::write_file_atomic(dir / "report.csv", report_csv(res.report));

    if (res.output.factors && res.output.factors->C.rows() >= sc.truth.C.rows()) {
        res.match = match_components(res.output.factors->C, sc.truth.C);
        std::ostringstream os;
        write_components_csv(os, *res.match);
        io::write_file_atomic(dir / "components.csv", os.str());
    }

    std::ostringstream timing;
    timing << "stage,seconds\nsetup," << io::format_double(t_setup) << "\nmethod,"
           << io::format_double(res.output.seconds) << "\nper_iteration,"
           << io::format_double(res.output.trace.seconds_per_iteration()) << "\ntotal,"
           << io::format_double(seconds_since(t0)) << '\n';
    io::write_file_atomic(dir / "timing.csv", timing.str());
    return res;
}

std::vector<ExperimentResult> run_angle_sweep(const ExperimentConfig& cfg) {
    if (cfg.sweep.empty()) {
        throw ConfigError("run_angle_sweep: schedule.sweep is empty");
    }
    std::vector<ExperimentResult> results;
    std::ostringstream summary;
    summary << "angles_per_step,mean_psnr,mean_ssim\n";
    for (std::size_t c : cfg.sweep) {
        ExperimentConfig sub = cfg;
        sub.sweep.clear();
        sub.angles_per_step = c;
        char name[16];
        std::snprintf(name, sizeof name, "c%02zu", c);
        sub.output_dir = cfg.output_dir / name;
        results.push_back(run_experiment(sub));
        summary << c << ',' << io::format_double(results.back().report.mean_psnr) << ','
                << io::format_double(results.back().report.mean_ssim) << '\n';
    }
    fs::create_directories(cfg.output_dir);
    io::write_file_atomic(cfg.output_dir / "sweep.csv", summary.str());
    return results;
}

std::vector<BenchmarkRow> run_benchmark(const ExperimentConfig& cfg) {
    ExperimentConfig bc = cfg;
    bc.stationary = true;
    bc.method = Method::Bc;
    const Scenario sc = make_scenario(bc);

    JointConfig jc = bc.joint_config();
    jc.max_iter = cfg.benchmark_iterations;
    jc.rel_tol = std::numeric_limits<double>::min();
    jc.cost_every = 0;
    JointProblem problem(sc.data, sc.ops);
    const FactorPair init = init_factors(backprojection_init(sc.data, sc.ops, jc.floor), cfg.rank, jc.floor);

    std::vector<BenchmarkRow> rows;
    for (const Method m : {Method::Bc, Method::Sbc}) {
        const auto t0 = Clock::now();
        const FactorResult r = m == Method::Bc ? bc_solve(problem, jc, init) : sbc_solve(problem, jc, init);
        const double total = seconds_since(t0);
        rows.push_back({to_string(m), r.trace.iterations_run, total,
                        total / static_cast<double>(std::max<std::size_t>(r.trace.iterations_run, 1))});
    }
    return rows;
}

void write_benchmark_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows, const ExperimentConfig& cfg) {
    os << "method,iterations,seconds_total,seconds_per_iteration,size,steps,rank,angles_per_step\n";
    for (const auto& r : rows) {
        os << r.method << ',' << r.iterations << ',' << io::format_double(r.seconds_total) << ','
           << io::format_double(r.seconds_per_iteration) << ',' << cfg.size << ',' << cfg.steps << ',' << cfg.rank
           << ',' << cfg.angles_per_step << '\n';
    }
}

}  // namespace dynlr
