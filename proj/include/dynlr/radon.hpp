#pragma once

#include "dynlr/linalg.hpp"

#include <Eigen/SparseCore>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace dynlr {

/// Square n x n image grid with unit pixels; frames are vectorised row-major
/// (index = row * n + col, row 0 at the top).
struct ImageGrid {
    std::size_t side = 0;

    explicit ImageGrid(std::size_t n);
    std::size_t pixels() const { return side * side; }
};

/// Parallel-beam detector line centred on the grid centre.
struct Geometry {
    std::size_t detector_count = 0;
    double detector_spacing = 1.0;

    /// Smallest count >= sqrt(2) * n with the same parity as n, so that the
    /// axis-aligned rays pass through pixel centres.
    static Geometry default_for(const ImageGrid& grid);
    double offset(std::size_t d) const;
};

/// Tiny golden angle 180 / (golden ratio + 4) = 32.039... degrees.
inline const double kTinyGoldenAngle = 180.0 / ((1.0 + 2.2360679774997896964) / 2.0 + 4.0);

using AngleList = std::vector<double>;

struct SamplingSchedule {
    std::vector<AngleList> angles_per_step;
    bool stationary = false;

    std::size_t steps() const { return angles_per_step.size(); }
    std::size_t angles_per_time_step() const {
        return angles_per_step.empty() ? 0 : angles_per_step.front().size();
    }
};

/// Step t receives global sequence entries a_{t c} .. a_{t c + c - 1} with
/// a_j = (j * phi) mod 180; stationary schedules repeat a_0 .. a_{c-1}.
SamplingSchedule golden_angle_schedule(std::size_t steps, std::size_t per_step,
                                       double phi = kTinyGoldenAngle, bool stationary = false);

void write_schedule_csv(std::ostream& os, const SamplingSchedule& s);
SamplingSchedule read_schedule_csv(std::istream& is);

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Ray-driven discrete Radon transform for one angle set. Row a * n_S + d holds
/// the exact intersection lengths of ray (angle a, detector d) with every pixel.
class RadonOperator {
public:
    RadonOperator(const ImageGrid& grid, const Geometry& geometry, AngleList angles);
    /// Wraps an explicit nonnegative weight matrix (no grid attached).
    explicit RadonOperator(SparseRowMatrix weights);

    Vector apply(const Vector& x) const;
    Vector apply_adjoint(const Vector& y) const;
    /// Column-wise application to every column of x.
    Matrix apply(const Matrix& x) const;
    Matrix apply_adjoint(const Matrix& y) const;

    std::size_t rows() const { return static_cast<std::size_t>(weights_.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(weights_.cols()); }
    const SparseRowMatrix& weights() const { return weights_; }
    /// A^T stored row-major, used for the adjoint.
    const SparseRowMatrix& transposed() const { return transposed_; }
    const AngleList& angles() const { return angles_; }
    bool has_grid() const { return grid_.has_value(); }
    const ImageGrid& grid() const;
    const Geometry& geometry() const;
    Matrix dense() const { return Matrix(weights_); }

private:
    std::optional<ImageGrid> grid_;
    std::optional<Geometry> geometry_;
    AngleList angles_;
    SparseRowMatrix weights_;
    SparseRowMatrix transposed_;
};

RadonOperator build_operator(const ImageGrid& grid, const Geometry& geometry, const AngleList& angles);

/// Operators for every time step of a schedule. Identical angle sets share one
/// operator, so a stationary schedule builds exactly one.
class OperatorSet {
public:
    OperatorSet(const ImageGrid& grid, const Geometry& geometry, const SamplingSchedule& schedule);
    /// Wrap a single operator used for all `steps` time steps.
    OperatorSet(std::shared_ptr<const RadonOperator> op, std::size_t steps);
    explicit OperatorSet(std::vector<std::shared_ptr<const RadonOperator>> per_step);

    std::size_t steps() const { return per_step_.size(); }
    const RadonOperator& at(std::size_t t) const { return *per_step_.at(t); }
    std::size_t distinct_count() const { return distinct_; }
    bool stationary() const { return distinct_ == 1; }
    std::size_t measurement_rows() const { return per_step_.front()->rows(); }
    std::size_t pixels() const { return per_step_.front()->cols(); }

    /// Column t of the result is A_t x_t.
    Matrix forward(const Matrix& x) const;
    /// Column t of the result is A_t^T y_t.
    Matrix adjoint(const Matrix& y) const;

private:
    void validate();

    std::vector<std::shared_ptr<const RadonOperator>> per_step_;
    std::size_t distinct_ = 0;
};

/// Unfiltered backprojection A_t^T Y_t per column, floored.
Matrix backprojection_init(const Matrix& data, const OperatorSet& ops, double floor = kDefaultFloor);
Matrix backprojection_init(const Matrix& data, const SamplingSchedule& schedule, const ImageGrid& grid,
                           const Geometry& geometry, double floor = kDefaultFloor);

}  // namespace dynlr
