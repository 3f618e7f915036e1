#pragma once

#include "dynlr/linalg.hpp"

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <vector>

namespace dynlr {

/// PSNR of identical frames.
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

/// 10 log10(range^2 / MSE); kInfinitePsnr when MSE = 0.
double psnr(const Vector& frame, const Vector& reference, double data_range);

/// Mean local SSIM over all fully contained 11 x 11 Gaussian windows
/// (sigma 1.5), constants (0.01 range)^2 and (0.03 range)^2. Frames smaller
/// than the window use the largest odd window that fits.
double ssim(const Vector& frame, const Vector& reference, std::size_t side, double data_range);

struct QualityReport {
    std::vector<double> psnr;
    std::vector<double> ssim;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    double runtime_seconds = 0.0;  // not part of the CSV, which stays reproducible
};

/// Per-column metrics with data_range = max(X_true). An infinite per-frame
/// PSNR makes the mean infinite.
QualityReport evaluate_stack(const Matrix& x, const Matrix& x_true, std::size_t side);

/// Header `frame,psnr,ssim`, one row per frame, then `mean,<psnr>,<ssim>`.
/// Infinite PSNR is written as `inf`.
void write_report_csv(std::ostream& os, const QualityReport& report);

struct ComponentMatch {
    /// permutation[j] = row of C_est assigned to true row j
    std::vector<std::size_t> permutation;
    /// correlation of that pairing, in [-1, 1]
    std::vector<double> correlation;
};

/// A row counts as constant when std / |mean| <= tol (or all-zero).
inline constexpr double kConstantRowTolerance = 0.05;

/// Pearson correlation with the convention: a constant row scores 1 against a
/// constant row and 0 against a non-constant one.
double row_correlation(const Vector& a, const Vector& b, double constant_tol = kConstantRowTolerance);

/// Greedy assignment by largest remaining correlation. Requires K_est >= K_true.
ComponentMatch match_components(const Matrix& c_est, const Matrix& c_true,
                                double constant_tol = kConstantRowTolerance);

}  // namespace dynlr
