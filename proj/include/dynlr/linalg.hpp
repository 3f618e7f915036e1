#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace dynlr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Floor applied to multiplicative iterates so they stay strictly positive.
inline constexpr double kDefaultFloor = 1e-12;

struct SvdResult {
    Matrix U;        // rows x r, orthonormal columns
    Vector singular; // length r, nonincreasing
    Matrix V;        // cols x r, orthonormal columns
};

/// Thin SVD with the sign convention that the first nonzero entry of every
/// column of U is nonnegative. Throws InvalidInput on non-finite entries.
SvdResult svd(const Matrix& m);

Matrix recompose(const SvdResult& s);

/// max(s_i - rho, 0) per entry.
Vector soft_threshold_singular_values(const Vector& s, double rho);

/// Sum of the leading K rank-one SVD terms.
Matrix best_rank_k(const Matrix& m, std::size_t k);

Matrix project_floor(const Matrix& m, double floor);
void project_floor_inplace(Matrix& m, double floor);

/// ||new - old||_F / max(||old||_F, floor)
double relative_change(const Matrix& updated, const Matrix& previous, double floor = kDefaultFloor);

bool all_finite(const Matrix& m);

void require_finite(const Matrix& m, const char* what);

}  // namespace dynlr
