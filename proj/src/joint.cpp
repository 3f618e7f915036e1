#include "dynlr/joint.hpp"

#include "dynlr/errors.hpp"
#include "dynlr/matrix_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace dynlr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// M <- max(M o num / den, floor)
Matrix multiplicative_step(const Matrix& m, const Matrix& num, const Matrix& den, double floor, const char* what) {
    if (!((den.array() > 0.0).all())) {
        throw NumericalError(std::string(what) + ": zero or negative denominator in multiplicative update");
    }
    Matrix out = (m.array() * num.array() / den.array()).matrix();
    if (!out.allFinite()) {
        throw NumericalError(std::string(what) + ": non-finite iterate");
    }
    project_floor_inplace(out, floor);
    return out;
}

double l1(const Matrix& m) { return m.cwiseAbs().sum(); }

double penalty_bc(const Matrix& b, const Matrix& c, const NeighborhoodSystem& nbhd, const JointConfig& cfg) {
    double value = cfg.lambda_b * l1(b) + 0.5 * cfg.mu_b * b.squaredNorm() + cfg.lambda_c * l1(c) +
                   0.5 * cfg.mu_c * c.squaredNorm();
    if (cfg.tau != 0.0) {
        value += 0.5 * cfg.tau * tv_value(b, nbhd, TvParams{cfg.eps_tv});
    }
    return value;
}

void check_factors(const Matrix& b, const Matrix& c, std::size_t pixels, std::size_t steps) {
    if (static_cast<std::size_t>(b.rows()) != pixels || static_cast<std::size_t>(c.cols()) != steps ||
        b.cols() != c.rows()) {
        throw InvalidInput("joint solver: factor shapes do not match the problem");
    }
}

void check_reconstruction(const Matrix& x, std::size_t pixels, std::size_t steps) {
    if (static_cast<std::size_t>(x.rows()) != pixels || static_cast<std::size_t>(x.cols()) != steps) {
        throw InvalidInput("joint solver: X must be N x T");
    }
}

// numerator / denominator contributions of the TV majorant on B
void add_tv_terms(const Matrix& b, const NeighborhoodSystem& nbhd, const JointConfig& cfg, Matrix& num,
                  Matrix& den) {
    if (cfg.tau == 0.0) {
        return;
    }
    const auto [p, z] = tv_surrogate_matrices(b, nbhd, TvParams{cfg.eps_tv});
    num.array() += cfg.tau * p.array() * z.array();
    den.array() += cfg.tau * b.array() * p.array();
}

bool due(std::size_t iteration, std::size_t every, bool last) {
    return every > 0 && (last || iteration % every == 0);
}

}  // namespace

void JointConfig::validate() const {
    const double weights[] = {alpha, lambda_b, mu_b, lambda_c, mu_c, lambda_x, mu_x, tau};
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw InvalidParameter("JointConfig: regularisation weights must be finite and >= 0");
        }
    }
    if (rank < 1) {
        throw InvalidParameter("JointConfig: rank must be >= 1");
    }
    if (!(rel_tol > 0.0)) {
        throw InvalidParameter("JointConfig: rel_tol must be > 0");
    }
    if (!(floor > 0.0)) {
        throw InvalidParameter("JointConfig: floor must be > 0");
    }
    if (!(eps_tv > 0.0)) {
        throw InvalidParameter("JointConfig: eps_tv must be > 0");
    }
}

std::string to_string(StopReason r) {
    return r == StopReason::MaxIterations ? "max-iter" : "rel-change";
}

std::vector<double> SolveTrace::costs() const {
    std::vector<double> out;
    for (const auto& e : entries) {
        if (!std::isnan(e.cost)) {
            out.push_back(e.cost);
        }
    }
    return out;
}

double SolveTrace::seconds_per_iteration() const {
    return iterations_run == 0 ? 0.0 : (seconds_update_x + seconds_update_b + seconds_update_c) /
                                           static_cast<double>(iterations_run);
}

void write_trace_csv(std::ostream& os, const SolveTrace& trace, bool with_seconds) {
    os << "iteration,cost,rel_change_x,rel_change_b,rel_change_c" << (with_seconds ? ",seconds\n" : "\n");
    for (const auto& e : trace.entries) {
        os << e.iteration << ',' << (std::isnan(e.cost) ? std::string{} : io::format_double(e.cost)) << ','
           << io::format_double(e.rel_change_x) << ',' << io::format_double(e.rel_change_b) << ','
           << io::format_double(e.rel_change_c);
        if (with_seconds) {
            os << ',' << io::format_double(e.seconds);
        }
        os << '\n';
    }
}

JointProblem::JointProblem(Matrix data, const OperatorSet& ops)
    : JointProblem(std::move(data), ops, NeighborhoodSystem::square(ops.at(0).grid().side)) {}

JointProblem::JointProblem(Matrix data, const OperatorSet& ops, NeighborhoodSystem nbhd)
    : data_(std::move(data)), ops_(&ops), nbhd_(std::move(nbhd)) {
    if (static_cast<std::size_t>(data_.cols()) != ops.steps() ||
        static_cast<std::size_t>(data_.rows()) != ops.measurement_rows()) {
        throw InvalidInput("JointProblem: data must be M x T for the given operators");
    }
    if (nbhd_.pixels() != ops.pixels()) {
        throw InvalidInput("JointProblem: neighbourhood does not match the operator width");
    }
    require_finite(data_, "JointProblem");
    if ((data_.array() < 0.0).any()) {
        throw InvalidInput("JointProblem: measurements must be nonnegative");
    }
    backprojected_ = ops.adjoint(data_);
}

Matrix JointProblem::normal(const Matrix& x) const { return ops_->adjoint(ops_->forward(x)); }

FactorPair init_factors(const Matrix& x0, std::size_t rank, double floor) {
    const auto limit = static_cast<std::size_t>(std::min(x0.rows(), x0.cols()));
    if (rank < 1 || rank > limit) {
        throw InvalidParameter("init_factors: K must lie in [1, min(N, T)]");
    }
    const SvdResult s = svd(x0);
    const auto k = static_cast<Eigen::Index>(rank);
    FactorPair f{Matrix::Zero(x0.rows(), k), Matrix::Zero(k, x0.cols())};

    const double lead = std::sqrt(s.singular[0]);
    f.B.col(0) = lead * s.U.col(0).cwiseAbs();
    f.C.row(0) = lead * s.V.col(0).cwiseAbs().transpose();
    for (Eigen::Index j = 1; j < k; ++j) {
        const Vector x = s.U.col(j);
        const Vector y = s.V.col(j);
        const Vector xp = x.cwiseMax(0.0);
        const Vector xn = (-x).cwiseMax(0.0);
        const Vector yp = y.cwiseMax(0.0);
        const Vector yn = (-y).cwiseMax(0.0);
        const double mp = xp.norm() * yp.norm();
        const double mn = xn.norm() * yn.norm();
        if (mp == 0.0 && mn == 0.0) {
            continue;
        }
        const bool positive = mp >= mn;
        const Vector& u = positive ? xp : xn;
        const Vector& v = positive ? yp : yn;
        const double scale = std::sqrt(s.singular[j] * (positive ? mp : mn));
        f.B.col(j) = scale * u / u.norm();
        f.C.row(j) = scale * (v / v.norm()).transpose();
    }
    const double fill = 1e-2 * x0.mean();
    f.B = (f.B.array() == 0.0).select(fill, f.B);
    f.C = (f.C.array() == 0.0).select(fill, f.C);
    project_floor_inplace(f.B, floor);
    project_floor_inplace(f.C, floor);
    return f;
}

double cost_bcx(const JointProblem& problem, const Matrix& x, const Matrix& b, const Matrix& c,
                const JointConfig& cfg) {
    check_reconstruction(x, problem.pixels(), problem.steps());
    check_factors(b, c, problem.pixels(), problem.steps());
    const double data = 0.5 * (problem.ops().forward(x) - problem.data()).squaredNorm();
    const double coupling = 0.5 * cfg.alpha * (b * c - x).squaredNorm();
    const double xreg = cfg.lambda_x * l1(x) + 0.5 * cfg.mu_x * x.squaredNorm();
    return data + coupling + xreg + penalty_bc(b, c, problem.neighborhood(), cfg);
}

double cost_bc(const JointProblem& problem, const Matrix& b, const Matrix& c, const JointConfig& cfg) {
    check_factors(b, c, problem.pixels(), problem.steps());
    const double data = 0.5 * (problem.ops().forward(b * c) - problem.data()).squaredNorm();
    return data + penalty_bc(b, c, problem.neighborhood(), cfg);
}

Matrix bcx_update_X(const JointProblem& problem, const Matrix& x, const Matrix& b, const Matrix& c,
                    const JointConfig& cfg) {
    check_reconstruction(x, problem.pixels(), problem.steps());
    check_factors(b, c, problem.pixels(), problem.steps());
    Matrix num = problem.backprojected();
    num.noalias() += cfg.alpha * (b * c);
    Matrix den = problem.normal(x);
    den.array() += (cfg.mu_x + cfg.alpha) * x.array() + cfg.lambda_x;
    return multiplicative_step(x, num, den, cfg.floor, "bcx_update_X");
}

Matrix bcx_update_B(const Matrix& b, const Matrix& c, const Matrix& x, const NeighborhoodSystem& nbhd,
                    const JointConfig& cfg) {
    if (b.rows() != x.rows() || c.cols() != x.cols() || b.cols() != c.rows()) {
        throw InvalidInput("bcx_update_B: shape mismatch");
    }
    Matrix num = cfg.alpha * (x * c.transpose());
    const Matrix cct = c * c.transpose();
    Matrix den = cfg.alpha * (b * cct);
    den.array() += cfg.mu_b * b.array() + cfg.lambda_b;
    add_tv_terms(b, nbhd, cfg, num, den);
    return multiplicative_step(b, num, den, cfg.floor, "bcx_update_B");
}

Matrix bcx_update_C(const Matrix& b, const Matrix& c, const Matrix& x, const JointConfig& cfg) {
    if (b.rows() != x.rows() || c.cols() != x.cols() || b.cols() != c.rows()) {
        throw InvalidInput("bcx_update_C: shape mismatch");
    }
    const Matrix num = cfg.alpha * (b.transpose() * x);
    const Matrix btb = b.transpose() * b;
    Matrix den = cfg.alpha * (btb * c);
    den.array() += cfg.mu_c * c.array() + cfg.lambda_c;
    return multiplicative_step(c, num, den, cfg.floor, "bcx_update_C");
}

Matrix bc_update_B(const JointProblem& problem, const Matrix& b, const Matrix& c, const JointConfig& cfg) {
    check_factors(b, c, problem.pixels(), problem.steps());
    const Matrix ct = c.transpose();
    Matrix num = problem.backprojected() * ct;
    Matrix den = problem.normal(b * c) * ct;
    den.array() += cfg.mu_b * b.array() + cfg.lambda_b;
    add_tv_terms(b, problem.neighborhood(), cfg, num, den);
    return multiplicative_step(b, num, den, cfg.floor, "bc_update_B");
}

Matrix bc_update_C(const JointProblem& problem, const Matrix& b, const Matrix& c, const JointConfig& cfg) {
    check_factors(b, c, problem.pixels(), problem.steps());
    const Matrix bt = b.transpose();
    const Matrix num = bt * problem.backprojected();
    Matrix den = bt * problem.normal(b * c);
    den.array() += cfg.mu_c * c.array() + cfg.lambda_c;
    return multiplicative_step(c, num, den, cfg.floor, "bc_update_C");
}

namespace {

const RadonOperator& stationary_operator(const JointProblem& problem) {
    if (!problem.ops().stationary()) {
        throw InvalidInput("sBC update requires a stationary operator");
    }
    return problem.ops().at(0);
}

}  // namespace

Matrix sbc_update_B(const JointProblem& problem, const Matrix& b, const Matrix& c, const JointConfig& cfg) {
    check_factors(b, c, problem.pixels(), problem.steps());
    const RadonOperator& op = stationary_operator(problem);
    const Matrix ct = c.transpose();
    Matrix num = problem.backprojected() * ct;
    const Matrix atab = op.transposed() * (op.weights() * b);
    Matrix den = atab * (c * ct);
    den.array() += cfg.mu_b * b.array() + cfg.lambda_b;
    add_tv_terms(b, problem.neighborhood(), cfg, num, den);
    return multiplicative_step(b, num, den, cfg.floor, "sbc_update_B");
}

Matrix sbc_update_C(const JointProblem& problem, const Matrix& b, const Matrix& c, const JointConfig& cfg) {
    check_factors(b, c, problem.pixels(), problem.steps());
    const RadonOperator& op = stationary_operator(problem);
    const Matrix bt = b.transpose();
    const Matrix num = bt * problem.backprojected();
    const Matrix ab = op.weights() * b;
    const Matrix gram = ab.transpose() * ab;
    Matrix den = gram * c;
    den.array() += cfg.mu_c * c.array() + cfg.lambda_c;
    return multiplicative_step(c, num, den, cfg.floor, "sbc_update_C");
}

BcxResult bcx_solve(const JointProblem& problem, const JointConfig& cfg, const Matrix& x_init,
                    const FactorPair& init) {
    cfg.validate();
    check_reconstruction(x_init, problem.pixels(), problem.steps());
    check_factors(init.B, init.C, problem.pixels(), problem.steps());
    BcxResult r{x_init, init.B, init.C, {}};
    const auto start = Clock::now();
    if (cfg.max_iter == 0) {
        return r;
    }
    if (cfg.cost_every > 0) {
        r.trace.entries.push_back({0, cost_bcx(problem, r.X, r.B, r.C, cfg), 0.0, 0.0, 0.0, 0.0});
    }
    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        auto t0 = Clock::now();
        Matrix x = bcx_update_X(problem, r.X, r.B, r.C, cfg);
        r.trace.seconds_update_x += seconds_since(t0);
        t0 = Clock::now();
        Matrix b = bcx_update_B(r.B, r.C, x, problem.neighborhood(), cfg);
        r.trace.seconds_update_b += seconds_since(t0);
        t0 = Clock::now();
        Matrix c = bcx_update_C(b, r.C, x, cfg);
        r.trace.seconds_update_c += seconds_since(t0);

        TraceEntry e;
        e.iteration = it;
        e.rel_change_x = relative_change(x, r.X, cfg.floor);
        e.rel_change_b = relative_change(b, r.B, cfg.floor);
        e.rel_change_c = relative_change(c, r.C, cfg.floor);
        r.X = std::move(x);
        r.B = std::move(b);
        r.C = std::move(c);
        r.trace.iterations_run = it;

        const bool converged = e.rel_change_x < cfg.rel_tol && e.rel_change_b < cfg.rel_tol &&
                               e.rel_change_c < cfg.rel_tol;
        const bool last = converged || it == cfg.max_iter;
        e.cost = std::numeric_limits<double>::quiet_NaN();
        if (due(it, cfg.cost_every, last)) {
            t0 = Clock::now();
            e.cost = cost_bcx(problem, r.X, r.B, r.C, cfg);
            r.trace.seconds_cost += seconds_since(t0);
        }
        e.seconds = seconds_since(start);
        r.trace.entries.push_back(e);
        if (converged) {
            r.trace.stop_reason = StopReason::RelativeChange;
            break;
        }
    }
    r.trace.seconds_total = seconds_since(start);
    return r;
}

namespace {

template <typename UpdateB, typename UpdateC>
FactorResult factor_loop(const JointProblem& problem, const JointConfig& cfg, const FactorPair& init,
                         UpdateB&& update_b, UpdateC&& update_c) {
    cfg.validate();
    check_factors(init.B, init.C, problem.pixels(), problem.steps());
    FactorResult r{init.B, init.C, {}};
    const auto start = Clock::now();
    if (cfg.max_iter == 0) {
        return r;
    }
    if (cfg.cost_every > 0) {
        r.trace.entries.push_back({0, cost_bc(problem, r.B, r.C, cfg), 0.0, 0.0, 0.0, 0.0});
    }
    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        auto t0 = Clock::now();
        Matrix b = update_b(problem, r.B, r.C, cfg);
        r.trace.seconds_update_b += seconds_since(t0);
        t0 = Clock::now();
        Matrix c = update_c(problem, b, r.C, cfg);
        r.trace.seconds_update_c += seconds_since(t0);

        TraceEntry e;
        e.iteration = it;
        e.rel_change_b = relative_change(b, r.B, cfg.floor);
        e.rel_change_c = relative_change(c, r.C, cfg.floor);
        // X = B C is implicit; its relative change is only needed for the stop rule
        const bool check_x = e.rel_change_b < cfg.rel_tol && e.rel_change_c < cfg.rel_tol;
        if (check_x) {
            const Matrix x_old = r.B * r.C;
            e.rel_change_x = relative_change(b * c, x_old, cfg.floor);
        } else {
            e.rel_change_x = std::numeric_limits<double>::quiet_NaN();
        }
        r.B = std::move(b);
        r.C = std::move(c);
        r.trace.iterations_run = it;

        const bool converged = check_x && e.rel_change_x < cfg.rel_tol;
        const bool last = converged || it == cfg.max_iter;
        e.cost = std::numeric_limits<double>::quiet_NaN();
        if (due(it, cfg.cost_every, last)) {
            t0 = Clock::now();
            e.cost = cost_bc(problem, r.B, r.C, cfg);
            r.trace.seconds_cost += seconds_since(t0);
        }
        e.seconds = seconds_since(start);
        r.trace.entries.push_back(e);
        if (converged) {
            r.trace.stop_reason = StopReason::RelativeChange;
            break;
        }
    }
    r.trace.seconds_total = seconds_since(start);
    return r;
}

}  // namespace

FactorResult bc_solve(const JointProblem& problem, const JointConfig& cfg, const FactorPair& init) {
    return factor_loop(problem, cfg, init, bc_update_B, bc_update_C);
}

FactorResult sbc_solve(const JointProblem& problem, const JointConfig& cfg, const FactorPair& init) {
    stationary_operator(problem);
    return factor_loop(problem, cfg, init, sbc_update_B, sbc_update_C);
}

std::vector<std::size_t> order_features(const Matrix& b, const Matrix& c) {
    if (b.cols() != c.rows()) {
        throw InvalidInput("order_features: B columns and C rows differ");
    }
    std::vector<std::size_t> perm(static_cast<std::size_t>(b.cols()));
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<double> norms(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) {
        norms[k] = b.col(static_cast<Eigen::Index>(k)).norm();
    }
    std::stable_sort(perm.begin(), perm.end(), [&](std::size_t i, std::size_t j) { return norms[i] > norms[j]; });
    return perm;
}

FactorPair apply_feature_order(const FactorPair& f, const std::vector<std::size_t>& perm) {
    if (perm.size() != static_cast<std::size_t>(f.B.cols()) || f.B.cols() != f.C.rows()) {
        throw InvalidInput("apply_feature_order: permutation size mismatch");
    }
    FactorPair out{Matrix(f.B.rows(), f.B.cols()), Matrix(f.C.rows(), f.C.cols())};
    for (std::size_t k = 0; k < perm.size(); ++k) {
        const auto dst = static_cast<Eigen::Index>(k);
        const auto src = static_cast<Eigen::Index>(perm[k]);
        out.B.col(dst) = f.B.col(src);
        out.C.row(dst) = f.C.row(src);
    }
    return out;
}

}  // namespace dynlr
