// dynlr command line: phantoms, simulation, reconstruction, evaluation and
// timing for dynamic sparse-angle CT with low-rank factor models.

#include "dynlr/config.hpp"
#include "dynlr/errors.hpp"
#include "dynlr/experiment.hpp"
#include "dynlr/matrix_io.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace dynlr;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
    std::string config;
    std::string preset;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config, "Experiment config file");
    cmd->add_option("--preset", o.preset, "Named preset (see `dynlr presets`)");
    cmd->add_option("--out", o.out, "Output directory (overrides output.dir)");
    cmd->add_option("--seed", o.seed, "Noise seed (overrides noise.seed)");
    cmd->add_option("--threads", o.threads, "Worker threads (fallback: DYNLR_THREADS)")->check(CLI::PositiveNumber);
}

void apply_threads(const CommonOptions& o) {
    int n = 0;
    if (o.threads) {
        n = *o.threads;
    } else if (const char* env = std::getenv("DYNLR_THREADS"); env != nullptr && *env != '\0') {
        try {
            n = std::stoi(env);
        } catch (const std::exception&) {
            throw ConfigError("DYNLR_THREADS must be a positive integer");
        }
        if (n <= 0) {
            throw ConfigError("DYNLR_THREADS must be a positive integer");
        }
    }
    if (n > 0) {
        omp_set_num_threads(n);
    }
}

ExperimentConfig resolve(const CommonOptions& o) {
    if (!o.config.empty() && !o.preset.empty()) {
        throw ConfigError("give either --config or --preset, not both");
    }
    ExperimentConfig cfg;
    if (!o.config.empty()) {
        cfg = load_experiment_config(o.config);
    } else if (!o.preset.empty()) {
        cfg = preset(o.preset);
    } else {
        throw ConfigError("one of --config or --preset is required");
    }
    if (!o.out.empty()) {
        cfg.output_dir = o.out;
    }
    if (o.seed) {
        cfg.seed = *o.seed;
    }
    cfg.validate();
    apply_threads(o);
    return cfg;
}

void echo_config(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    io::write_file_atomic(cfg.output_dir / "config.ini", format_experiment_config(cfg));
}

Matrix load_matrix(const fs::path& p) {
    if (!fs::exists(p)) {
        throw InvalidInput("missing file " + p.string());
    }
    return io::load_dlr1(p);
}

int cmd_generate(const ExperimentConfig& cfg) {
    echo_config(cfg);
    write_phantom_files(cfg.output_dir, make_phantom(cfg));
    std::cout << "phantom written to " << cfg.output_dir << '\n';
    return 0;
}

int cmd_simulate(const ExperimentConfig& cfg) {
    echo_config(cfg);
    const Scenario sc = make_scenario(cfg);
    write_phantom_files(cfg.output_dir, sc.truth);
    write_data_files(cfg.output_dir, sc.schedule, sc.data);
    std::cout << "data written to " << cfg.output_dir << '\n';
    return 0;
}

int cmd_reconstruct(const ExperimentConfig& cfg) {
    echo_config(cfg);
    const fs::path dir = cfg.output_dir;
    Matrix data;
    SamplingSchedule schedule;
    if (fs::exists(dir / "data_Y.dlr") && fs::exists(dir / "schedule.csv")) {
        data = io::load_dlr1(dir / "data_Y.dlr");
        std::ifstream in(dir / "schedule.csv");
        schedule = read_schedule_csv(in);
    } else {
        Scenario sc = make_scenario(cfg);
        write_phantom_files(dir, sc.truth);
        write_data_files(dir, sc.schedule, sc.data);
        data = std::move(sc.data);
        schedule = std::move(sc.schedule);
    }
    const ImageGrid grid(cfg.size);
    const OperatorSet ops(grid, Geometry::default_for(grid), schedule);
    const MethodOutput out = run_method(cfg, data, ops);
    write_method_files(dir, out, cfg.size);
    std::ostringstream timing;
    timing << "stage,seconds\nmethod," << io::format_double(out.seconds) << "\nper_iteration,"
           << io::format_double(out.trace.seconds_per_iteration()) << '\n';
    io::write_file_atomic(dir / "timing.csv", timing.str());
    std::cout << to_string(cfg.method) << ": " << out.trace.iterations_run << " iterations ("
              << to_string(out.trace.stop_reason) << "), " << out.seconds << " s\n";
    return 0;
}

int cmd_decompose(ExperimentConfig cfg, const std::string& input, const std::string& kind) {
    if (kind == "pca") {
        cfg.method = Method::GradTvPca;
    } else if (kind == "nmf") {
        cfg.method = Method::GradTvNmf;
    } else if (!kind.empty()) {
        throw ConfigError("--kind must be pca or nmf");
    } else if (cfg.method != Method::GradTvPca) {
        cfg.method = Method::GradTvNmf;
    }
    const fs::path in = input.empty() ? cfg.output_dir / "X.dlr" : fs::path(input);
    const MethodOutput out = decompose(cfg, load_matrix(in));
    fs::create_directories(cfg.output_dir);
    io::save_dlr1(cfg.output_dir / "B.dlr", out.factors->B);
    io::save_dlr1(cfg.output_dir / "C.dlr", out.factors->C);
    write_features(cfg.output_dir, *out.factors, cfg.size);
    if (out.decomposition_trace) {
        std::ostringstream os;
        write_trace_csv(os, *out.decomposition_trace, false);
        io::write_file_atomic(cfg.output_dir / "decomposition_trace.csv", os.str());
    }
    std::cout << "decomposed into " << cfg.rank << " features (" << to_string(cfg.method) << ")\n";
    return 0;
}

int cmd_evaluate(const ExperimentConfig& cfg, const std::string& input, const std::string& truth) {
    const fs::path dir = cfg.output_dir;
    const Matrix x = load_matrix(input.empty() ? dir / "X.dlr" : fs::path(input));
    GroundTruth gt;
    const fs::path truth_path = truth.empty() ? dir / "phantom_X.dlr" : fs::path(truth);
    if (fs::exists(truth_path)) {
        gt.X = io::load_dlr1(truth_path);
        if (fs::exists(truth_path.parent_path() / "phantom_C.dlr")) {
            gt.C = io::load_dlr1(truth_path.parent_path() / "phantom_C.dlr");
        }
    } else if (truth.empty()) {
        gt = make_phantom(cfg);
    } else {
        throw InvalidInput("missing file " + truth_path.string());
    }
    const QualityReport rep = evaluate_stack(x, gt.X, cfg.size);
    fs::create_directories(dir);
    io::write_file_atomic(dir / "report.csv", report_csv(rep));
    if (input.empty() && fs::exists(dir / "C.dlr") && gt.C.size() > 0) {
        const Matrix c = io::load_dlr1(dir / "C.dlr");
        if (c.rows() >= gt.C.rows() && c.cols() == gt.C.cols()) {
            std::ostringstream os;
            write_components_csv(os, match_components(c, gt.C));
            io::write_file_atomic(dir / "components.csv", os.str());
        }
    }
    std::cout << "mean PSNR " << rep.mean_psnr << " dB, mean SSIM " << rep.mean_ssim << '\n';
    return 0;
}

int cmd_benchmark(const ExperimentConfig& cfg) {
    echo_config(cfg);
    const auto rows = run_benchmark(cfg);
    std::ostringstream os;
    write_benchmark_csv(os, rows, cfg);
    io::write_file_atomic(cfg.output_dir / "benchmark.csv", os.str());
    std::cout << os.str();
    return 0;
}

int cmd_run(const ExperimentConfig& cfg) {
    if (!cfg.sweep.empty()) {
        for (const auto& r : run_angle_sweep(cfg)) {
            std::cout << r.dir << ": mean PSNR " << r.report.mean_psnr << " dB, mean SSIM " << r.report.mean_ssim
                      << '\n';
        }
        return 0;
    }
    const ExperimentResult r = run_experiment(cfg);
    std::cout << r.dir << ": mean PSNR " << r.report.mean_psnr << " dB, mean SSIM " << r.report.mean_ssim << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynlr - joint reconstruction and low-rank feature extraction for dynamic CT"};
    app.require_subcommand(1);

    CommonOptions opt;
    std::string input;
    std::string truth;
    std::string kind;

    auto* gen = app.add_subcommand("generate-phantom", "Write the ground-truth phantom");
    auto* sim = app.add_subcommand("simulate", "Write phantom, angle schedule and noisy sinograms");
    auto* rec = app.add_subcommand("reconstruct", "Reconstruct from the data in --out (simulated if absent)");
    auto* dec = app.add_subcommand("decompose", "Extract features from a reconstruction (PCA or NMF)");
    auto* ev = app.add_subcommand("evaluate", "Per-frame PSNR / SSIM against the phantom");
    auto* bench = app.add_subcommand("benchmark", "Per-iteration wall time of bc vs sbc");
    auto* run = app.add_subcommand("run", "Full pipeline (or angle sweep) into --out");
    auto* presets = app.add_subcommand("presets", "List preset names");
    for (auto* c : {gen, sim, rec, dec, ev, bench, run}) {
        add_common(c, opt);
    }
    dec->add_option("--input", input, "Reconstruction X (.dlr); default <out>/X.dlr");
    dec->add_option("--kind", kind, "pca or nmf");
    ev->add_option("--input", input, "Reconstruction X (.dlr); default <out>/X.dlr");
    ev->add_option("--truth", truth, "Ground truth X (.dlr); default <out>/phantom_X.dlr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (presets->parsed()) {
            for (const auto& n : preset_names()) {
                const ExperimentConfig c = preset(n);
                std::cout << n << (c.long_running ? "  (long-running)" : "") << '\n';
            }
            return 0;
        }
        const ExperimentConfig cfg = resolve(opt);
        if (gen->parsed()) return cmd_generate(cfg);
        if (sim->parsed()) return cmd_simulate(cfg);
        if (rec->parsed()) return cmd_reconstruct(cfg);
        if (dec->parsed()) return cmd_decompose(cfg, input, kind);
        if (ev->parsed()) return cmd_evaluate(cfg, input, truth);
        if (bench->parsed()) return cmd_benchmark(cfg);
        if (run->parsed()) return cmd_run(cfg);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
