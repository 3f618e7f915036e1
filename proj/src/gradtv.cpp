#include "dynlr/gradtv.hpp"

#include "dynlr/errors.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace dynlr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

void GradTvConfig::validate() const {
    if (!(rho_grad > 0.0) || !(rho_thr > 0.0) || !(rho_tv > 0.0) || !(mu_c_tilde > 0.0) || !(rel_tol > 0.0)) {
        throw InvalidParameter("GradTvConfig: step sizes, thresholds and tolerances must be positive");
    }
    if (!(divergence_factor > 1.0)) {
        throw InvalidParameter("GradTvConfig: divergence factor must exceed 1");
    }
}

Matrix singular_value_threshold(const Matrix& x, double rho, std::size_t* rank) {
    SvdResult s = svd(x);
    s.singular = soft_threshold_singular_values(s.singular, rho);
    if (rank != nullptr) {
        *rank = static_cast<std::size_t>((s.singular.array() > 0.0).count());
    }
    return recompose(s);
}

Matrix gradtv_iteration(const Matrix& x, const OperatorSet& ops, const Matrix& backprojected,
                        const GradTvConfig& cfg) {
    Matrix step = x - cfg.rho_grad * (ops.adjoint(ops.forward(x)) - backprojected);
    return singular_value_threshold(step, cfg.rho_thr).cwiseMax(0.0);
}

GradTvResult gradtv_solve(const Matrix& data, const OperatorSet& ops, const GradTvConfig& cfg) {
    return gradtv_solve(data, ops, cfg, backprojection_init(data, ops, 0.0));
}

GradTvResult gradtv_solve(const Matrix& data, const OperatorSet& ops, const GradTvConfig& cfg,
                          const Matrix& x_init) {
    cfg.validate();
    if (static_cast<std::size_t>(data.cols()) != ops.steps() ||
        static_cast<std::size_t>(data.rows()) != ops.measurement_rows()) {
        throw InvalidInput("gradtv_solve: data must be M x T for the given operators");
    }
    if ((data.array() < 0.0).any()) {
        throw InvalidInput("gradtv_solve: measurements must be nonnegative");
    }
    if (static_cast<std::size_t>(x_init.rows()) != ops.pixels() || x_init.cols() != data.cols()) {
        throw InvalidInput("gradtv_solve: X must be N x T");
    }
    const Matrix backprojected = ops.adjoint(data);
    const double lambda = cfg.rho_thr / cfg.rho_grad;
    GradTvResult r{x_init, {}};
    const auto start = Clock::now();

    const auto objective = [&](const Matrix& x, double residual) {
        return 0.5 * residual * residual + lambda * svd(x).singular.sum();
    };

    double residual = (ops.forward(r.X) - data).norm();
    const double initial_residual = std::max(residual, std::numeric_limits<double>::min());
    if (cfg.cost_every > 0) {
        r.trace.entries.push_back({0, objective(r.X, residual), 0.0, 0.0, 0.0, 0.0});
    }
    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        auto t0 = Clock::now();
        Matrix x = gradtv_iteration(r.X, ops, backprojected, cfg);
        r.trace.seconds_update_x += seconds_since(t0);

        TraceEntry e;
        e.iteration = it;
        e.rel_change_x = relative_change(x, r.X);
        e.rel_change_b = std::numeric_limits<double>::quiet_NaN();
        e.rel_change_c = std::numeric_limits<double>::quiet_NaN();
        r.X = std::move(x);
        r.trace.iterations_run = it;

        residual = (ops.forward(r.X) - data).norm();
        if (!std::isfinite(residual) || residual > cfg.divergence_factor * initial_residual) {
            throw StepsizeTooLarge("gradtv_solve: data residual grew beyond " +
                                   std::to_string(cfg.divergence_factor) + "x its initial value");
        }
        const bool converged = e.rel_change_x < cfg.rel_tol;
        const bool last = converged || it == cfg.max_iter;
        e.cost = std::numeric_limits<double>::quiet_NaN();
        if (cfg.cost_every > 0 && (last || it % cfg.cost_every == 0)) {
            t0 = Clock::now();
            e.cost = objective(r.X, residual);
            r.trace.seconds_cost += seconds_since(t0);
        }
        e.seconds = seconds_since(start);
        r.trace.entries.push_back(e);
        if (converged) {
            r.trace.stop_reason = StopReason::RelativeChange;
            break;
        }
    }
    const std::size_t side = ops.at(0).grid().side;
    r.X = tv_denoise(r.X, side, cfg.rho_tv, cfg.tv_inner_iterations);
    r.trace.seconds_total = seconds_since(start);
    return r;
}

Vector tv_denoise_frame(const Vector& frame, std::size_t side, double rho_tv, std::size_t inner_iterations) {
    if (static_cast<std::size_t>(frame.size()) != side * side) {
        throw InvalidInput("tv_denoise: frame length is not side^2");
    }
    if (!(rho_tv >= 0.0)) {
        throw InvalidParameter("tv_denoise: rho_tv must be >= 0");
    }
    if (rho_tv == 0.0) {
        return frame;
    }
    const auto n = static_cast<Eigen::Index>(side);
    const double lambda = 2.0 * rho_tv;
    const double shrink = rho_tv / lambda;
    auto at = [n](Eigen::Index r, Eigen::Index c) { return r * n + c; };

    Vector u = frame;
    Vector dx = Vector::Zero(frame.size());
    Vector dy = Vector::Zero(frame.size());
    Vector bx = Vector::Zero(frame.size());
    Vector by = Vector::Zero(frame.size());

    for (std::size_t iter = 0; iter < inner_iterations; ++iter) {
        // one Gauss-Seidel sweep on (I + lambda grad^T grad) u = f + lambda grad^T (d - b)
        for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index c = 0; c < n; ++c) {
                const Eigen::Index p = at(r, c);
                double rhs = frame[p];
                double neighbors = 0.0;
                double degree = 0.0;
                if (c + 1 < n) {
                    rhs -= lambda * (dx[p] - bx[p]);
                    neighbors += u[p + 1];
                    degree += 1.0;
                }
                if (c > 0) {
                    rhs += lambda * (dx[p - 1] - bx[p - 1]);
                    neighbors += u[p - 1];
                    degree += 1.0;
                }
                if (r + 1 < n) {
                    rhs -= lambda * (dy[p] - by[p]);
                    neighbors += u[p + n];
                    degree += 1.0;
                }
                if (r > 0) {
                    rhs += lambda * (dy[p - n] - by[p - n]);
                    neighbors += u[p - n];
                    degree += 1.0;
                }
                u[p] = (rhs + lambda * neighbors) / (1.0 + lambda * degree);
            }
        }
        // isotropic shrinkage and Bregman update
        for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index c = 0; c < n; ++c) {
                const Eigen::Index p = at(r, c);
                const double gx = c + 1 < n ? u[p + 1] - u[p] : 0.0;
                const double gy = r + 1 < n ? u[p + n] - u[p] : 0.0;
                const double sx = gx + bx[p];
                const double sy = gy + by[p];
                const double mag = std::sqrt(sx * sx + sy * sy);
                const double scale = mag > shrink ? (mag - shrink) / mag : 0.0;
                dx[p] = scale * sx;
                dy[p] = scale * sy;
                bx[p] = sx - dx[p];
                by[p] = sy - dy[p];
            }
        }
    }
    return u;
}

Matrix tv_denoise(const Matrix& x, std::size_t side, double rho_tv, std::size_t inner_iterations) {
    if (static_cast<std::size_t>(x.rows()) != side * side) {
        throw InvalidInput("tv_denoise: rows must equal side^2");
    }
    Matrix out(x.rows(), x.cols());
#pragma omp parallel for schedule(static)
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
        out.col(t) = tv_denoise_frame(x.col(t), side, rho_tv, inner_iterations);
    }
    return out;
}

FactorPair pca_decompose(const Matrix& x, std::size_t rank) {
    const auto limit = static_cast<std::size_t>(std::min(x.rows(), x.cols()));
    if (rank < 1 || rank > limit) {
        throw InvalidParameter("pca_decompose: K must lie in [1, min(N, T)]");
    }
    const SvdResult s = svd(x);
    const auto k = static_cast<Eigen::Index>(rank);
    return FactorPair{s.U.leftCols(k) * s.singular.head(k).asDiagonal(), s.V.leftCols(k).transpose()};
}

double posthoc_nmf_objective(const Matrix& x, const Matrix& b, const Matrix& c, double mu_c_tilde) {
    return (x - b * c).squaredNorm() + 0.5 * mu_c_tilde * c.squaredNorm();
}

PosthocNmfResult posthoc_nmf(const Matrix& x, std::size_t rank, const PosthocNmfConfig& cfg) {
    const Matrix start = project_floor(x, cfg.floor);
    return posthoc_nmf(x, init_factors(start, rank, cfg.floor), cfg);
}

PosthocNmfResult posthoc_nmf(const Matrix& x, const FactorPair& init, const PosthocNmfConfig& cfg) {
    if ((x.array() < 0.0).any()) {
        throw InvalidInput("posthoc_nmf: X must be nonnegative");
    }
    if (!(cfg.mu_c_tilde >= 0.0) || !(cfg.rel_tol > 0.0) || !(cfg.floor > 0.0)) {
        throw InvalidParameter("posthoc_nmf: invalid configuration");
    }
    // ||X - BC||^2 + mu~/2 ||C||^2 equals twice the BC-X coupling term with
    // alpha = 2 and mu_C = mu~, so the BC-X factor updates apply unchanged.
    JointConfig jc;
    jc.rank = static_cast<std::size_t>(init.B.cols());
    jc.alpha = 2.0;
    jc.mu_c = cfg.mu_c_tilde;
    jc.floor = cfg.floor;
    const NeighborhoodSystem unused(static_cast<std::size_t>(x.rows()), 1);

    PosthocNmfResult r{init, {}};
    const auto start = Clock::now();
    if (cfg.cost_every > 0) {
        r.trace.entries.push_back({0, posthoc_nmf_objective(x, r.factors.B, r.factors.C, cfg.mu_c_tilde), 0.0, 0.0,
                                   0.0, 0.0});
    }
    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        auto t0 = Clock::now();
        Matrix b = bcx_update_B(r.factors.B, r.factors.C, x, unused, jc);
        r.trace.seconds_update_b += seconds_since(t0);
        t0 = Clock::now();
        Matrix c = bcx_update_C(b, r.factors.C, x, jc);
        r.trace.seconds_update_c += seconds_since(t0);

        TraceEntry e;
        e.iteration = it;
        e.rel_change_x = std::numeric_limits<double>::quiet_NaN();
        e.rel_change_b = relative_change(b, r.factors.B, cfg.floor);
        e.rel_change_c = relative_change(c, r.factors.C, cfg.floor);
        r.factors.B = std::move(b);
        r.factors.C = std::move(c);
        r.trace.iterations_run = it;

        const bool converged = e.rel_change_b < cfg.rel_tol && e.rel_change_c < cfg.rel_tol;
        const bool last = converged || it == cfg.max_iter;
        e.cost = std::numeric_limits<double>::quiet_NaN();
        if (cfg.cost_every > 0 && (last || it % cfg.cost_every == 0)) {
            e.cost = posthoc_nmf_objective(x, r.factors.B, r.factors.C, cfg.mu_c_tilde);
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

}  // namespace dynlr
