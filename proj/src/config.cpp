#include "dynlr/config.hpp"

#include "dynlr/errors.hpp"
#include "dynlr/matrix_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

namespace dynlr {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    }
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("config: '" + key + "' expects a nonnegative integer, got '" + v + "'");
    }
    return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
    return static_cast<std::size_t>(to_u64(key, v));
}

bool to_bool(const std::string& key, const std::string& v) {
    std::string l = v;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    if (l == "true" || l == "yes" || l == "1") {
        return true;
    }
    if (l == "false" || l == "no" || l == "0") {
        return false;
    }
    throw ConfigError("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<std::size_t> to_size_list(const std::string& key, const std::string& v) {
    std::vector<std::size_t> out;
    if (trim(v).empty()) {
        return out;
    }
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(to_size(key, trim(item)));
    }
    return out;
}

std::string fmt(double v) { return io::format_double(v); }

}  // namespace

KeyValues parse_key_values(std::istream& is) {
    KeyValues kv;
    std::string section;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') {
            continue;
        }
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3) {
                throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
            }
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        }
        const std::string full = section.empty() ? key : section + "." + key;
        if (!kv.emplace(full, trim(t.substr(eq + 1))).second) {
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + full + "'");
        }
    }
    return kv;
}

std::string to_string(PhantomKind k) { return k == PhantomKind::SheppLogan ? "shepp-logan" : "vessel"; }

std::string to_string(Method m) {
    switch (m) {
        case Method::Bcx: return "bcx";
        case Method::Bc: return "bc";
        case Method::Sbc: return "sbc";
        case Method::GradTv: return "gradtv";
        case Method::GradTvPca: return "gradtv_pca";
        case Method::GradTvNmf: return "gradtv_nmf";
    }
    return "?";
}

PhantomKind parse_phantom_kind(const std::string& s) {
    if (s == "shepp-logan" || s == "shepp") {
        return PhantomKind::SheppLogan;
    }
    if (s == "vessel") {
        return PhantomKind::Vessel;
    }
    throw ConfigError("unknown phantom kind '" + s + "'");
}

Method parse_method(const std::string& s) {
    for (Method m : {Method::Bcx, Method::Bc, Method::Sbc, Method::GradTv, Method::GradTvPca, Method::GradTvNmf}) {
        if (to_string(m) == s) {
            return m;
        }
    }
    throw ConfigError("unknown method '" + s + "'");
}

JointConfig ExperimentConfig::joint_config() const {
    JointConfig j = joint;
    j.rank = rank;
    j.max_iter = max_iter;
    j.rel_tol = rel_tol;
    j.cost_every = cost_every;
    return j;
}

GradTvConfig ExperimentConfig::gradtv_config() const {
    GradTvConfig g = gradtv;
    g.max_iter = max_iter;
    g.rel_tol = rel_tol;
    g.cost_every = cost_every;
    return g;
}

PosthocNmfConfig ExperimentConfig::posthoc_config() const {
    PosthocNmfConfig p = posthoc;
    p.mu_c_tilde = gradtv.mu_c_tilde;
    p.max_iter = max_iter;
    p.rel_tol = rel_tol;
    p.cost_every = cost_every;
    return p;
}

void ExperimentConfig::validate() const {
    if (size < 32) {
        throw ConfigError("phantom.size must be at least 32");
    }
    if (steps < 2) {
        throw ConfigError("phantom.steps must be at least 2");
    }
    if (!(noise_level >= 0.0)) {
        throw ConfigError("noise.level must be nonnegative");
    }
    if (angles_per_step == 0) {
        throw ConfigError("schedule.angles_per_step must be positive");
    }
    if (std::find(sweep.begin(), sweep.end(), std::size_t{0}) != sweep.end()) {
        throw ConfigError("schedule.sweep entries must be positive");
    }
    if (!(phi > 0.0 && phi < 180.0)) {
        throw ConfigError("schedule.phi must lie in (0, 180)");
    }
    if (method == Method::Sbc && !stationary) {
        throw ConfigError("method sbc requires schedule.stationary = true");
    }
    if (rank == 0) {
        throw ConfigError("method.rank must be positive");
    }
    if (!(rel_tol >= 0.0)) {
        throw ConfigError("method.rel_tol must be nonnegative");
    }
    if (benchmark_iterations == 0) {
        throw ConfigError("benchmark.iterations must be positive");
    }
    try {
        if (method == Method::Bcx || method == Method::Bc || method == Method::Sbc) {
            joint_config().validate();
        } else {
            gradtv_config().validate();
        }
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what());
    }
}

ExperimentConfig parse_experiment_config(std::istream& is) {
    const KeyValues kv = parse_key_values(is);
    ExperimentConfig c;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"experiment.name", [&](auto&, auto& v) { c.name = v; }},
        {"experiment.long_running", [&](auto& k, auto& v) { c.long_running = to_bool(k, v); }},
        {"phantom.kind", [&](auto&, auto& v) { c.phantom = parse_phantom_kind(v); }},
        {"phantom.size", [&](auto& k, auto& v) { c.size = to_size(k, v); }},
        {"phantom.steps", [&](auto& k, auto& v) { c.steps = to_size(k, v); }},
        {"noise.level", [&](auto& k, auto& v) { c.noise_level = to_double(k, v); }},
        {"noise.seed", [&](auto& k, auto& v) { c.seed = to_u64(k, v); }},
        {"schedule.angles_per_step", [&](auto& k, auto& v) { c.angles_per_step = to_size(k, v); }},
        {"schedule.phi", [&](auto& k, auto& v) { c.phi = to_double(k, v); }},
        {"schedule.stationary", [&](auto& k, auto& v) { c.stationary = to_bool(k, v); }},
        {"schedule.sweep", [&](auto& k, auto& v) { c.sweep = to_size_list(k, v); }},
        {"method.name", [&](auto&, auto& v) { c.method = parse_method(v); }},
        {"method.rank", [&](auto& k, auto& v) { c.rank = to_size(k, v); }},
        {"method.max_iter", [&](auto& k, auto& v) { c.max_iter = to_size(k, v); }},
        {"method.rel_tol", [&](auto& k, auto& v) { c.rel_tol = to_double(k, v); }},
        {"method.cost_every", [&](auto& k, auto& v) { c.cost_every = to_size(k, v); }},
        {"joint.alpha", [&](auto& k, auto& v) { c.joint.alpha = to_double(k, v); }},
        {"joint.tau", [&](auto& k, auto& v) { c.joint.tau = to_double(k, v); }},
        {"joint.eps_tv", [&](auto& k, auto& v) { c.joint.eps_tv = to_double(k, v); }},
        {"joint.lambda_b", [&](auto& k, auto& v) { c.joint.lambda_b = to_double(k, v); }},
        {"joint.mu_b", [&](auto& k, auto& v) { c.joint.mu_b = to_double(k, v); }},
        {"joint.lambda_c", [&](auto& k, auto& v) { c.joint.lambda_c = to_double(k, v); }},
        {"joint.mu_c", [&](auto& k, auto& v) { c.joint.mu_c = to_double(k, v); }},
        {"joint.lambda_x", [&](auto& k, auto& v) { c.joint.lambda_x = to_double(k, v); }},
        {"joint.mu_x", [&](auto& k, auto& v) { c.joint.mu_x = to_double(k, v); }},
        {"gradtv.rho_grad", [&](auto& k, auto& v) { c.gradtv.rho_grad = to_double(k, v); }},
        {"gradtv.rho_thr", [&](auto& k, auto& v) { c.gradtv.rho_thr = to_double(k, v); }},
        {"gradtv.rho_tv", [&](auto& k, auto& v) { c.gradtv.rho_tv = to_double(k, v); }},
        {"gradtv.mu_c_tilde", [&](auto& k, auto& v) { c.gradtv.mu_c_tilde = to_double(k, v); }},
        {"gradtv.tv_inner_iterations", [&](auto& k, auto& v) { c.gradtv.tv_inner_iterations = to_size(k, v); }},
        {"gradtv.divergence_factor", [&](auto& k, auto& v) { c.gradtv.divergence_factor = to_double(k, v); }},
        {"benchmark.iterations", [&](auto& k, auto& v) { c.benchmark_iterations = to_size(k, v); }},
        {"output.dir", [&](auto&, auto& v) { c.output_dir = v; }},
    };
    for (const auto& [key, value] : kv) {
        const auto it = setters.find(key);
        if (it == setters.end()) {
            throw ConfigError("config: unknown key '" + key + "'");
        }
        it->second(key, value);
    }
    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    return parse_experiment_config(in);
}

std::string format_experiment_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "[experiment]\nname = " << c.name << "\nlong_running = " << (c.long_running ? "true" : "false") << "\n\n";
    os << "[phantom]\nkind = " << to_string(c.phantom) << "\nsize = " << c.size << "\nsteps = " << c.steps << "\n\n";
    os << "[noise]\nlevel = " << fmt(c.noise_level) << "\nseed = " << c.seed << "\n\n";
    os << "[schedule]\nangles_per_step = " << c.angles_per_step << "\nphi = " << fmt(c.phi)
       << "\nstationary = " << (c.stationary ? "true" : "false") << "\nsweep = ";
    for (std::size_t i = 0; i < c.sweep.size(); ++i) {
        os << (i ? "," : "") << c.sweep[i];
    }
    os << "\n\n";
    os << "[method]\nname = " << to_string(c.method) << "\nrank = " << c.rank << "\nmax_iter = " << c.max_iter
       << "\nrel_tol = " << fmt(c.rel_tol) << "\ncost_every = " << c.cost_every << "\n\n";
    os << "[joint]\nalpha = " << fmt(c.joint.alpha) << "\ntau = " << fmt(c.joint.tau) << "\neps_tv = "
       << fmt(c.joint.eps_tv) << "\nlambda_b = " << fmt(c.joint.lambda_b) << "\nmu_b = " << fmt(c.joint.mu_b)
       << "\nlambda_c = " << fmt(c.joint.lambda_c) << "\nmu_c = " << fmt(c.joint.mu_c)
       << "\nlambda_x = " << fmt(c.joint.lambda_x) << "\nmu_x = " << fmt(c.joint.mu_x) << "\n\n";
    os << "[gradtv]\nrho_grad = " << fmt(c.gradtv.rho_grad) << "\nrho_thr = " << fmt(c.gradtv.rho_thr)
       << "\nrho_tv = " << fmt(c.gradtv.rho_tv) << "\nmu_c_tilde = " << fmt(c.gradtv.mu_c_tilde)
       << "\ntv_inner_iterations = " << c.gradtv.tv_inner_iterations
       << "\ndivergence_factor = " << fmt(c.gradtv.divergence_factor) << "\n\n";
    os << "[benchmark]\niterations = " << c.benchmark_iterations << "\n\n";
    os << "[output]\ndir = " << c.output_dir.string() << "\n";
    return os.str();
}

namespace {

struct PaperParams {
    double bcx_alpha, bcx_mu_c, bcx_tau;
    double bc_mu_c, bc_tau;
    double rho_grad, rho_thr, rho_tv, mu_c_tilde;
};

// Parameter tables of the reference experiments, per phantom and noise level.
const std::map<std::string, PaperParams>& paper_params() {
    static const std::map<std::string, PaperParams> table = {
        {"shepp-1pct", {70, 0.1, 6, 0.1, 10, 1e-3, 7e-4, 1e-2, 0.1}},
        {"shepp-3pct", {70, 0.1, 20, 0.1, 50, 8e-4, 1e-3, 2.5e-2, 0.1}},
        {"vessel-1pct", {300, 1, 90, 1, 130, 2e-4, 2e-4, 2e-2, 0.1}},
        {"vessel-3pct", {300, 1, 300, 1, 430, 8e-5, 2.5e-4, 4e-2, 0.1}},
    };
    return table;
}

const std::vector<std::pair<std::string, Method>>& method_suffixes() {
    static const std::vector<std::pair<std::string, Method>> s = {
        {"bcx", Method::Bcx},           {"bc", Method::Bc},
        {"sbc", Method::Sbc},           {"gradtv", Method::GradTv},
        {"gradtv-pca", Method::GradTvPca}, {"gradtv-nmf", Method::GradTvNmf},
    };
    return s;
}

void apply_params(ExperimentConfig& c, const PaperParams& p) {
    c.joint = JointConfig{};
    if (c.method == Method::Bcx) {
        c.joint.alpha = p.bcx_alpha;
        c.joint.mu_c = p.bcx_mu_c;
        c.joint.tau = p.bcx_tau;
    } else {
        c.joint.mu_c = p.bc_mu_c;
        c.joint.tau = p.bc_tau;
    }
    c.gradtv.rho_grad = p.rho_grad;
    c.gradtv.rho_thr = p.rho_thr;
    c.gradtv.rho_tv = p.rho_tv;
    c.gradtv.mu_c_tilde = p.mu_c_tilde;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [base, _] : paper_params()) {
        for (const auto& [suffix, __] : method_suffixes()) {
            names.push_back(base + "-" + suffix);
        }
    }
    for (const auto& [suffix, _] : method_suffixes()) {
        names.push_back(suffix == "bcx" ? "desk" : "desk-" + suffix);
    }
    names.push_back("desk-sweep");
    names.push_back("benchmark");
    return names;
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    c.name = name;

    if (name == "benchmark") {
        c.size = 64;
        c.steps = 100;
        c.rank = 5;
        c.angles_per_step = 6;
        c.stationary = true;
        c.method = Method::Sbc;
        apply_params(c, paper_params().at("shepp-1pct"));
        c.benchmark_iterations = 10;
        c.validate();
        return c;
    }

    const bool desk = name == "desk" || name.rfind("desk-", 0) == 0;
    if (desk) {
        std::string suffix = name == "desk" ? "bcx" : name.substr(5);
        if (suffix == "sweep") {
            suffix = "bcx";
            c.sweep = {2, 6, 12};
        }
        const auto it = std::find_if(method_suffixes().begin(), method_suffixes().end(),
                                     [&](const auto& p) { return p.first == suffix; });
        if (it == method_suffixes().end()) {
            throw ConfigError("unknown preset '" + name + "'");
        }
        c.method = it->second;
        c.size = 64;
        c.steps = 50;
        c.rank = 3;
        c.angles_per_step = 6;
        c.stationary = c.method == Method::Sbc;
        apply_params(c, paper_params().at("shepp-1pct"));
        c.validate();
        return c;
    }

    for (const auto& [base, params] : paper_params()) {
        if (name.rfind(base + "-", 0) != 0) {
            continue;
        }
        const std::string suffix = name.substr(base.size() + 1);
        const auto it = std::find_if(method_suffixes().begin(), method_suffixes().end(),
                                     [&](const auto& p) { return p.first == suffix; });
        if (it == method_suffixes().end()) {
            break;
        }
        c.method = it->second;
        c.long_running = true;
        c.steps = 100;
        c.noise_level = base.find("3pct") != std::string::npos ? 0.03 : 0.01;
        if (base.rfind("vessel", 0) == 0) {
            c.phantom = PhantomKind::Vessel;
            c.size = 264;
            c.rank = 4;
            c.angles_per_step = 12;
            c.max_iter = 1400;
        } else {
            c.size = 128;
            c.rank = 5;
            c.angles_per_step = 6;
        }
        c.stationary = c.method == Method::Sbc;
        apply_params(c, params);
        c.validate();
        return c;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace dynlr
