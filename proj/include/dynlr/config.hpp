#pragma once

#include "dynlr/gradtv.hpp"
#include "dynlr/joint.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dynlr {

// Config grammar (one statement per line):
//   [section]          starts a section; keys below are read as `section.key`
//   key = value        whitespace around key and value is trimmed
//   # ... or ; ...     comment lines; blank lines are ignored
// Keys may not repeat. Values are plain text; lists are comma separated.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& is);

enum class PhantomKind { SheppLogan, Vessel };
enum class Method { Bcx, Bc, Sbc, GradTv, GradTvPca, GradTvNmf };

std::string to_string(PhantomKind k);
std::string to_string(Method m);
PhantomKind parse_phantom_kind(const std::string& s);
Method parse_method(const std::string& s);

struct ExperimentConfig {
    std::string name = "custom";
    bool long_running = false;

    PhantomKind phantom = PhantomKind::SheppLogan;
    std::size_t size = 64;
    std::size_t steps = 50;

    double noise_level = 0.01;
    std::uint64_t seed = 1;

    std::size_t angles_per_step = 6;
    double phi = kTinyGoldenAngle;
    bool stationary = false;
    std::vector<std::size_t> sweep;  // optional list of angles_per_step values

    Method method = Method::Bcx;
    std::size_t rank = 3;
    std::size_t max_iter = 1200;
    double rel_tol = 5e-5;
    std::size_t cost_every = 25;
    // Iteration controls inside these three are overridden by the fields above.
    JointConfig joint;
    GradTvConfig gradtv;
    PosthocNmfConfig posthoc;

    std::size_t benchmark_iterations = 20;

    std::filesystem::path output_dir = "out";

    void validate() const;
    JointConfig joint_config() const;
    GradTvConfig gradtv_config() const;
    PosthocNmfConfig posthoc_config() const;
};

ExperimentConfig parse_experiment_config(std::istream& is);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Full config in the grammar above; parsing it yields an equal config.
std::string format_experiment_config(const ExperimentConfig& cfg);

std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

}  // namespace dynlr
