#pragma once

#include "dynlr/linalg.hpp"
#include "dynlr/radon.hpp"

#include <cstddef>
#include <cstdint>
#include <string>

namespace dynlr {

/// Separable space-time phantom: X_true = B_true * C_true exactly.
struct GroundTruth {
    Matrix X;  // N x T
    Matrix B;  // N x K0
    Matrix C;  // K0 x T
    std::size_t side = 0;

    std::size_t components() const { return static_cast<std::size_t>(B.cols()); }
    std::size_t steps() const { return static_cast<std::size_t>(C.cols()); }
};

/// Modified Shepp-Logan background plus two inner ellipses whose intensities
/// follow 0.5 * (1 + sin(2 pi f (t-1) / T)) with f = 2 and f = 3.
GroundTruth dynamic_shepp_logan(std::size_t n, std::size_t steps);

/// Chest-like static background and a branching vessel whose intensity is 0
/// before t0 = ceil(T/5), jumps to 1 and then decays as exp(-4 (t - t0) / T).
GroundTruth vessel_phantom(std::size_t n, std::size_t steps);

/// Temporal curves used by the phantoms (t is 1-based).
double sinusoid_curve(std::size_t t, std::size_t steps, double frequency);
double vessel_curve(std::size_t t, std::size_t steps);
std::size_t vessel_onset(std::size_t steps);

/// Column t = A_t X_true[:, t].
Matrix simulate_measurements(const GroundTruth& gt, const OperatorSet& ops);
Matrix simulate_measurements(const GroundTruth& gt, const SamplingSchedule& schedule, const ImageGrid& grid,
                             const Geometry& geometry);

/// i.i.d. N(0, sigma^2) samples drawn from std::mt19937_64(seed) in
/// column-major order.
Matrix gaussian_noise(Eigen::Index rows, Eigen::Index cols, double sigma, std::uint64_t seed);

/// Y + noise with sigma = level * max(Y), clipped at zero.
Matrix add_gaussian_noise(const Matrix& data, double level, std::uint64_t seed);

}  // namespace dynlr
