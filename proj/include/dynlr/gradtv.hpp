#pragma once

#include "dynlr/joint.hpp"
#include "dynlr/linalg.hpp"
#include "dynlr/radon.hpp"

#include <cstddef>

namespace dynlr {

struct GradTvConfig {
    double rho_grad = 1e-3;
    double rho_thr = 7e-4;
    double rho_tv = 1e-2;
    double mu_c_tilde = 0.1;
    std::size_t max_iter = 1200;
    double rel_tol = 5e-5;
    std::size_t tv_inner_iterations = 30;
    std::size_t cost_every = 25;
    /// Abort when the data residual exceeds this multiple of its initial value.
    double divergence_factor = 10.0;

    void validate() const;
};

struct GradTvResult {
    Matrix X;
    SolveTrace trace;
};

/// Singular value thresholding: U max(S - rho, 0) V^T. `rank` receives the
/// number of singular values above rho.
Matrix singular_value_threshold(const Matrix& x, double rho, std::size_t* rank = nullptr);

/// One proximal gradient iteration: per-column gradient step, singular value
/// thresholding, clipping at zero.
Matrix gradtv_iteration(const Matrix& x, const OperatorSet& ops, const Matrix& backprojected,
                        const GradTvConfig& cfg);

/// Low-rank proximal gradient reconstruction followed by one per-frame TV
/// denoising pass. X is initialised by unfiltered backprojection unless given.
GradTvResult gradtv_solve(const Matrix& data, const OperatorSet& ops, const GradTvConfig& cfg);
GradTvResult gradtv_solve(const Matrix& data, const OperatorSet& ops, const GradTvConfig& cfg,
                          const Matrix& x_init);

/// Isotropic ROF denoising of every column (reshaped to side x side) by split
/// Bregman with Bregman penalty 2 * rho_tv.
Matrix tv_denoise(const Matrix& x, std::size_t side, double rho_tv, std::size_t inner_iterations = 30);
Vector tv_denoise_frame(const Vector& frame, std::size_t side, double rho_tv, std::size_t inner_iterations = 30);

/// B = U_K S_K, C = V_K^T.
FactorPair pca_decompose(const Matrix& x, std::size_t rank);

struct PosthocNmfConfig {
    double mu_c_tilde = 0.1;
    std::size_t max_iter = 1200;
    double rel_tol = 5e-5;
    double floor = kDefaultFloor;
    std::size_t cost_every = 25;
};

struct PosthocNmfResult {
    FactorPair factors;
    SolveTrace trace;
};

/// ||X - B C||_F^2 + (mu~/2) ||C||_F^2.
double posthoc_nmf_objective(const Matrix& x, const Matrix& b, const Matrix& c, double mu_c_tilde);

/// Multiplicative NMF of a reconstruction, started from NNDSVD.
PosthocNmfResult posthoc_nmf(const Matrix& x, std::size_t rank, const PosthocNmfConfig& cfg);
PosthocNmfResult posthoc_nmf(const Matrix& x, const FactorPair& init, const PosthocNmfConfig& cfg);

}  // namespace dynlr
