// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include "dynlr/config.hpp"
#include "dynlr/experiment.hpp"
#include "dynlr/gradtv.hpp"
#include "dynlr/joint.hpp"
#include "dynlr/metrics.hpp"
#include "dynlr/phantoms.hpp"
#include "dynlr/radon.hpp"
#include "dynlr/tv.hpp"
#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace dynlr;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s <= budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("CRITERION %d %s: %s -- %s [%.1f s of %.0f s budget%s]\n", id, pass ? "PASS" : "FAIL", title,
                o.detail.c_str(), s, budget_s, in_time ? "" : ", OVER BUDGET");
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double worst_increase(const std::vector<double>& c) {
    // Largest (c[i] - c[i-1]) / (1 + |c[i-1]|); <= 1e-10 means nonincreasing within slack.
    double worst = -1e300;
    for (std::size_t i = 1; i < c.size(); ++i) worst = std::max(worst, (c[i] - c[i - 1]) / (1.0 + std::abs(c[i - 1])));
    return worst;
}

// Criterion 1
Outcome monotone_descent() {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = -1e300;
    int runs = 0;
    for (int inst = 0; inst < 20; ++inst) {
        const ImageGrid grid(16);
        const Geometry geo = Geometry::default_for(grid);
        const std::size_t steps = 10, c = 4, k = 3;
        const OperatorSet moving(grid, geo, golden_angle_schedule(steps, c));
        const OperatorSet fixed(grid, geo, golden_angle_schedule(steps, c, kTinyGoldenAngle, true));
        const Matrix truth = oracle::random_matrix(256, 3, rng) * oracle::random_matrix(3, 10, rng);

        JointConfig cfg;
        cfg.rank = k;
        auto mixed = [&](double scale) { return u(rng) < 0.5 ? 0.0 : scale * u(rng); };
        cfg.alpha = 0.5 + 2.0 * u(rng);
        cfg.lambda_b = mixed(0.5);
        cfg.mu_b = mixed(0.5);
        cfg.lambda_c = mixed(0.5);
        cfg.mu_c = mixed(1.0);
        cfg.lambda_x = mixed(0.5);
        cfg.mu_x = mixed(0.5);
        cfg.tau = mixed(2.0);
        cfg.max_iter = 200;
        cfg.rel_tol = 1e-300;
        cfg.cost_every = 1;

        for (const OperatorSet* ops : {&moving, &fixed}) {
            const Matrix y = add_gaussian_noise(ops->forward(truth), 0.02, static_cast<std::uint64_t>(inst));
            const JointProblem p(y, *ops);
            const Matrix x0 = backprojection_init(y, *ops);
            const FactorPair init = init_factors(x0, k);
            if (ops == &moving) {
                const BcxResult a = bcx_solve(p, cfg, x0, init);
                const FactorResult b = bc_solve(p, cfg, init);
                if (a.trace.costs().size() != 201 || b.trace.costs().size() != 201) return {false, "trace length"};
                worst = std::max({worst, worst_increase(a.trace.costs()), worst_increase(b.trace.costs())});
                runs += 2;
            } else {
                const FactorResult s = sbc_solve(p, cfg, init);
                if (s.trace.costs().size() != 201) return {false, "trace length"};
                worst = std::max(worst, worst_increase(s.trace.costs()));
                runs += 1;
            }
        }
    }
    return {worst <= 1e-10, std::to_string(runs) + " solver runs x 200 iterations, max relative increase " +
                                fmt("%.3e", worst) + " (slack 1e-10)"};
}

// Criterion 2
Outcome sbc_equivalence_and_speed() {
    const ExperimentConfig base = preset("benchmark");  // n=64, T=100, K=5, c=6, stationary
    {
        ExperimentConfig small = base;
        small.size = 32;
        small.steps = 20;
        small.rank = 3;
        const Scenario sc = make_scenario(small);
        const JointProblem p(sc.data, sc.ops);
        JointConfig cfg = small.joint_config();
        cfg.max_iter = 50;
        cfg.rel_tol = 1e-300;
        cfg.cost_every = 0;
        const FactorPair init = init_factors(backprojection_init(sc.data, sc.ops), small.rank);
        const FactorResult a = bc_solve(p, cfg, init);
        const FactorResult b = sbc_solve(p, cfg, init);
        const double db = (a.B - b.B).cwiseAbs().maxCoeff();
        const double dc = (a.C - b.C).cwiseAbs().maxCoeff();
        if (!(db <= 1e-10 && dc <= 1e-10)) {
            return {false, "iterates differ: max |dB| " + fmt("%.2e", db) + ", max |dC| " + fmt("%.2e", dc)};
        }
    }
    const auto rows = run_benchmark(base);
    const double ratio = rows[0].seconds_per_iteration / rows[1].seconds_per_iteration;
    return {ratio >= 3.0, "50-iteration iterates agree within 1e-10; per-iteration bc " +
                              fmt("%.4f s", rows[0].seconds_per_iteration) + ", sbc " +
                              fmt("%.4f s", rows[1].seconds_per_iteration) + ", speed-up " + fmt("%.1fx", ratio) +
                              " (gate 3x)"};
}

// Criterion 3
Outcome radon_adjointness() {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> ang(0.0, 180.0);
    const ImageGrid grid(32);
    const Geometry geo = Geometry::default_for(grid);
    double worst = 0.0;
    double min_weight = 1e300;
    for (int trial = 0; trial < 100; ++trial) {
        AngleList angles(1 + static_cast<std::size_t>(trial % 6));
        for (auto& a : angles) a = ang(rng);
        if (trial == 0) angles = {0.0, 45.0, 90.0};
        const RadonOperator op = build_operator(grid, geo, angles);
        const Vector x = oracle::random_matrix(static_cast<Eigen::Index>(op.cols()), 1, rng, -1.0, 1.0).col(0);
        const Vector y = oracle::random_matrix(static_cast<Eigen::Index>(op.rows()), 1, rng, -1.0, 1.0).col(0);
        const double lhs = op.apply(x).dot(y);
        const double rhs = x.dot(op.apply_adjoint(y));
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
        if (op.weights().nonZeros() > 0) min_weight = std::min(min_weight, op.weights().coeffs().minCoeff());
    }
    return {worst <= 1e-10 && min_weight >= 0.0, "100 trials on 32x32, max relative adjoint gap " +
                                                     fmt("%.2e", worst) + ", min stored weight " +
                                                     fmt("%.3g", min_weight)};
}

// Criterion 4
Outcome tv_oracles() {
    std::mt19937_64 rng(44);
    const NeighborhoodSystem nb(4, 4);
    const oracle::Grid2 g{4, 4};
    const TvParams p{1e-5};
    double dv = 0, dp = 0, dp_scaled = 0, p_max = 0, dz = 0, dg = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix b = oracle::random_matrix(16, 2, rng, 0.01, 1.0);
        dv = std::max(dv, std::abs(tv_value(b, nb, p) - oracle::tv_value(b, g, p.eps)));
        const Matrix po = oracle::tv_P(b, g, p.eps);
        const Matrix diff = (matrix_P(b, nb, p) - po).cwiseAbs();
        dp = std::max(dp, diff.maxCoeff());
        // P grows like 1/|grad B|, so compare in units of max(1, |P|).
        dp_scaled = std::max(dp_scaled, (diff.array() / po.cwiseAbs().array().max(1.0)).maxCoeff());
        p_max = std::max(p_max, po.cwiseAbs().maxCoeff());
        dz = std::max(dz, (matrix_Z(b, nb, p) - oracle::tv_Z(b, g, p.eps)).cwiseAbs().maxCoeff());
        const Matrix grad = tv_gradient(b, nb, p);
        Matrix fd(16, 2);
        const double h = 1e-6;
        for (Eigen::Index i = 0; i < b.size(); ++i) {
            Matrix bp = b, bm = b;
            bp.data()[i] += h;
            bm.data()[i] -= h;
            fd.data()[i] = (tv_value(bp, nb, p) - tv_value(bm, nb, p)) / (2 * h);
        }
        dg = std::max(dg, (grad - fd).norm() / grad.norm());
    }
    const bool ok = dv <= 1e-12 && dp_scaled <= 1e-12 && dz <= 1e-12 && dg <= 1e-5;
    return {ok, "50 instances: |TV| " + fmt("%.1e", dv) + ", |P| " + fmt("%.1e", dp) + " on entries up to " +
                    fmt("%.1e", p_max) + " (scaled " + fmt("%.1e", dp_scaled) + "), |Z| " + fmt("%.1e", dz) +
                    " (gate 1e-12); gradient vs FD rel " + fmt("%.1e", dg) + " (gate 1e-5)"};
}

// Criterion 5
Outcome surrogate_properties() {
    std::mt19937_64 rng(55);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const NeighborhoodSystem nb(4, 4);
    const TvParams p{1e-5};
    double min_gap = 1e300, max_anchor = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Matrix bt = (i % 4 == 0) ? Matrix::Constant(16, 2, 0.1 + u(rng))
                                       : oracle::random_matrix(16, 2, rng, 1e-3, 1.0);
        Matrix b;
        if (i % 2 == 0) {
            b = bt;
            const double scale = std::pow(10.0, -4.0 + 4.0 * u(rng));
            for (Eigen::Index k = 0; k < b.size(); ++k) b.data()[k] = std::max(1e-9, b.data()[k] + scale * n01(rng));
        } else {
            b = oracle::random_matrix(16, 2, rng, 1e-3, 3.0);
        }
        min_gap = std::min(min_gap, tv_surrogate_gap(b, bt, nb, p));
        max_anchor = std::max(max_anchor, std::abs(tv_surrogate_gap(bt, bt, nb, p)));
    }
    double min_eig = 1e300;
    for (int i = 0; i < 100; ++i) {
        const auto dim = static_cast<Eigen::Index>(2 + i % 5);
        const Matrix a = oracle::random_matrix(dim, dim, rng);
        const Matrix h = 0.5 * (a + a.transpose());
        const Vector xt = oracle::random_matrix(dim, 1, rng, 0.05, 2.0).col(0);
        const Vector kap = (i % 2 == 0) ? Vector::Zero(dim) : Vector(oracle::random_matrix(dim, 1, rng).col(0));
        const Vector lam = qubp_lambda(h, xt, kap);
        Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(lam.asDiagonal()) - h);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    }
    const bool ok = min_gap >= -1e-12 && max_anchor <= 1e-12 && min_eig >= -1e-10;
    return {ok, "1000 pairs: min gap " + fmt("%.2e", min_gap) + ", max |gap at anchor| " + fmt("%.1e", max_anchor) +
                    "; 100 Hessians: min eig(Lambda - H) " + fmt("%.2e", min_eig)};
}

// Criterion 6
Outcome feature_recovery() {
    const ExperimentConfig cfg = preset("desk");  // n=64, T=50, c=6, 1% noise, K=3, BC-X
    const Scenario sc = make_scenario(cfg);
    const MethodOutput out = run_method(cfg, sc.data, sc.ops);
    const ComponentMatch m = match_components(out.factors->C, sc.truth.C);
    double worst = 1.0;
    std::string corr;
    for (double r : m.correlation) {
        worst = std::min(worst, r);
        corr += fmt(" %.4f", r);
    }
    return {worst >= 0.9, "BC-X alpha=" + fmt("%g", cfg.joint.alpha) + " mu_C=" + fmt("%g", cfg.joint.mu_c) +
                              " tau=" + fmt("%g", cfg.joint.tau) + ", " + std::to_string(out.trace.iterations_run) +
                              " iterations; matched correlations" + corr + " (gate 0.9)"};
}

// Criterion 7
Outcome angle_sweep_trend() {
    ExperimentConfig cfg = preset("desk");
    double sum2 = 0, sum12 = 0;
    std::string per;
    for (std::uint64_t seed : {1, 2, 3}) {
        cfg.seed = seed;
        double p2 = 0, p12 = 0;
        for (std::size_t c : {2, 6, 12}) {
            cfg.angles_per_step = c;
            const Scenario sc = make_scenario(cfg);
            const MethodOutput out = run_method(cfg, sc.data, sc.ops);
            const double p = evaluate_stack(out.X, sc.truth.X, cfg.size).mean_psnr;
            per += " s" + std::to_string(seed) + "/c" + std::to_string(c) + "=" + fmt("%.2f", p);
            if (c == 2) p2 = p;
            if (c == 12) p12 = p;
        }
        sum2 += p2;
        sum12 += p12;
    }
    const double gain = (sum12 - sum2) / 3.0;
    return {gain >= 2.0, "mean PSNR gain c=12 over c=2: " + fmt("%.2f dB", gain) + " (gate 2 dB);" + per};
}

// Criterion 8
Outcome baseline_pipeline() {
    std::mt19937_64 rng(88);
    const Matrix m = oracle::random_matrix(40, 15, rng);
    const FactorPair pc = pca_decompose(m, 4);
    Eigen::JacobiSVD<Matrix> ref(m);
    const double pca_gap = std::abs((m - pc.B * pc.C).norm() - ref.singularValues().tail(11).norm());

    const std::size_t n = 8, steps = 5;
    const ImageGrid grid(n);
    const Geometry geo = Geometry::default_for(grid);
    const SamplingSchedule schedule = golden_angle_schedule(steps, 4);
    const OperatorSet ops(grid, geo, schedule);
    Vector u(64);
    for (Eigen::Index i = 0; i < 64; ++i) {
        const double r = static_cast<double>(i / 8) - 3.5, c = static_cast<double>(i % 8) - 3.5;
        u[i] = (r * r + c * c < 7.0) ? 1.0 : 0.2;
    }
    Vector v(5);
    v << 0.4, 0.9, 1.0, 0.7, 0.5;
    const Matrix x_true = u * v.transpose();
    double lipschitz = 0.0;
    for (const AngleList& a : schedule.angles_per_step) {
        const Eigen::JacobiSVD<Matrix> s(oracle::radon_dense(n, geo, a));
        lipschitz = std::max(lipschitz, s.singularValues()[0] * s.singularValues()[0]);
    }
    GradTvConfig gc;
    gc.rho_grad = 1.9 / lipschitz;
    gc.rho_thr = 0.02 * gc.rho_grad;
    gc.rho_tv = 1e-6;
    gc.max_iter = 5000;
    gc.rel_tol = 1e-10;
    const GradTvResult gr = gradtv_solve(ops.forward(x_true), ops, gc);
    const double grad_err = (gr.X - x_true).norm() / x_true.norm();

    const Matrix x = oracle::random_matrix(30, 3, rng, 0.1, 1.0) * oracle::random_matrix(3, 12, rng, 0.1, 1.0);
    PosthocNmfConfig nc;
    nc.mu_c_tilde = 0.0;
    nc.max_iter = 2000;
    nc.rel_tol = 1e-300;
    nc.cost_every = 1;
    const PosthocNmfResult nr = posthoc_nmf(x, 3, nc);
    const double inc = worst_increase(nr.trace.costs());
    const double resid = (x - nr.factors.B * nr.factors.C).norm();

    const bool ok = pca_gap <= 1e-8 && grad_err < 0.05 && inc <= 1e-10 && resid < 1e-6;
    return {ok, "PCA vs Eckart-Young " + fmt("%.1e", pca_gap) + " (gate 1e-8); gradTV rank-1 rel error " +
                    fmt("%.2e", grad_err) + " (gate 5%); post-hoc NMF max rel increase " + fmt("%.1e", inc) +
                    ", residual ||X-BC||_F " + fmt("%.2e", resid) + " (gate 1e-6)"};
}

// Criterion 9
Outcome fixed_points() {
    std::mt19937_64 rng(99);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        for (bool stationary : {false, true}) {
            const ImageGrid grid(6);
            const OperatorSet ops(grid, Geometry::default_for(grid),
                                  golden_angle_schedule(5, 3, kTinyGoldenAngle, stationary));
            const Matrix b = oracle::random_matrix(36, 2, rng, 0.1, 1.0);
            const Matrix c = oracle::random_matrix(2, 5, rng, 0.1, 1.0);
            const Matrix x = b * c;
            const JointProblem p(ops.forward(x), ops);
            JointConfig cfg;
            cfg.rank = 2;
            cfg.alpha = 0.3 + static_cast<double>(trial);
            auto dev = [](const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); };
            worst = std::max({worst, dev(bcx_update_X(p, x, b, c, cfg), x), dev(bcx_update_B(b, c, x, p.neighborhood(), cfg), b),
                              dev(bcx_update_C(b, c, x, cfg), c), dev(bc_update_B(p, b, c, cfg), b),
                              dev(bc_update_C(p, b, c, cfg), c)});
            if (stationary) {
                worst = std::max({worst, dev(sbc_update_B(p, b, c, cfg), b), dev(sbc_update_C(p, b, c, cfg), c)});
            }
            PosthocNmfConfig nc;
            nc.mu_c_tilde = 0.0;
            nc.max_iter = 1;
            const PosthocNmfResult nr = posthoc_nmf(x, FactorPair{b, c}, nc);
            worst = std::max({worst, dev(nr.factors.B, b), dev(nr.factors.C, c)});
        }
    }
    return {worst <= 1e-12, "20 exact-fit instances, every update: max entrywise change " + fmt("%.2e", worst) +
                                " (gate 1e-12)"};
}

}  // namespace

int main() {
    criterion(1, "monotone descent of BC-X, BC, sBC", 120, monotone_descent);
    criterion(2, "sBC/BC equivalence and speed-up", 300, sbc_equivalence_and_speed);
    criterion(3, "Radon adjointness and nonnegativity", 30, radon_adjointness);
    criterion(4, "TV value, P, Z, gradient vs oracles", 30, tv_oracles);
    criterion(5, "surrogate majorization and QUBP curvature", 60, surrogate_properties);
    criterion(6, "desk-scale feature recovery (BC-X)", 600, feature_recovery);
    criterion(7, "angle-sweep PSNR trend", 1200, angle_sweep_trend);
    criterion(8, "baseline pipeline (PCA, gradTV, post-hoc NMF)", 120, baseline_pipeline);
    criterion(9, "fixed points of every multiplicative update", 10, fixed_points);
    std::printf("ACCEPTANCE SUMMARY: %d of 9 criteria failed\n", failures);
    return failures;
}
