#pragma once

#include "dynlr/linalg.hpp"

#include <cstddef>
#include <vector>

namespace dynlr {

/// Forward neighbours (right, down) and adjoint neighbours (left, up) of every
/// pixel of a row-major height x width grid. Boundaries truncate.
class NeighborhoodSystem {
public:
    NeighborhoodSystem(std::size_t height, std::size_t width);
    static NeighborhoodSystem square(std::size_t side) { return {side, side}; }

    std::size_t pixels() const { return forward_.size(); }
    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    const std::vector<Eigen::Index>& forward(Eigen::Index n) const { return forward_[static_cast<std::size_t>(n)]; }
    const std::vector<Eigen::Index>& adjoint(Eigen::Index n) const { return adjoint_[static_cast<std::size_t>(n)]; }

private:
    std::size_t height_;
    std::size_t width_;
    std::vector<std::vector<Eigen::Index>> forward_;
    std::vector<std::vector<Eigen::Index>> adjoint_;
};

struct TvParams {
    double eps = 1e-5;
};

/// |grad_{nk} B| = sqrt(eps^2 + sum_{l in N_n} (B_nk - B_lk)^2), per entry.
Matrix tv_gradient_magnitude(const Matrix& b, const NeighborhoodSystem& nbhd, const TvParams& params);

/// Smoothed isotropic TV summed over all columns of B.
double tv_value(const Matrix& b, const NeighborhoodSystem& nbhd, const TvParams& params);

/// d TV / d B, same shape as B.
Matrix tv_gradient(const Matrix& b, const NeighborhoodSystem& nbhd, const TvParams& params);

struct TvSurrogateMatrices {
    Matrix P;
    Matrix Z;
};

/// P(B) and Z(B) defining the separable quadratic majorant of the TV term.
TvSurrogateMatrices tv_surrogate_matrices(const Matrix& b, const NeighborhoodSystem& nbhd, const TvParams& params);
Matrix matrix_P(const Matrix& b, const NeighborhoodSystem& nbhd, const TvParams& params);
Matrix matrix_Z(const Matrix& b, const NeighborhoodSystem& nbhd, const TvParams& params);

/// Q(B, B~) - TV(B)/2 with Q(B, B~) = 1/2 sum P(B~) (B - Z(B~))^2 + G(B~) and
/// G chosen so that Q(B~, B~) = TV(B~)/2. Nonnegative for a valid majorant.
double tv_surrogate_gap(const Matrix& b, const Matrix& b_tilde, const NeighborhoodSystem& nbhd,
                        const TvParams& params);

/// Diagonal of the quadratic-upper-bound matrix
/// Lambda_ii = ((H x~)_i + kappa_i) / x~_i.
Vector qubp_lambda(const Matrix& hessian, const Vector& x_tilde, const Vector& kappa);

/// x~ - Lambda^{-1} grad for diagonal Lambda.
Vector qubp_step(const Vector& x_tilde, const Vector& grad, const Vector& lambda_diagonal);

}  // namespace dynlr
