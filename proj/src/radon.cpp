#include "dynlr/radon.hpp"

#include "dynlr/errors.hpp"
#include "dynlr/matrix_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

namespace dynlr {

ImageGrid::ImageGrid(std::size_t n) : side(n) {
    if (n < 2) {
        throw InvalidParameter("ImageGrid: side must be >= 2");
    }
}

Geometry Geometry::default_for(const ImageGrid& grid) {
    auto count = static_cast<std::size_t>(std::ceil(std::numbers::sqrt2 * static_cast<double>(grid.side) - 1e-9));
    if ((count % 2) != (grid.side % 2)) {
        ++count;
    }
    return Geometry{count, 1.0};
}

double Geometry::offset(std::size_t d) const {
    return (static_cast<double>(d) - 0.5 * static_cast<double>(detector_count - 1)) * detector_spacing;
}

SamplingSchedule golden_angle_schedule(std::size_t steps, std::size_t per_step, double phi, bool stationary) {
    if (steps < 1 || per_step < 1) {
        throw InvalidParameter("golden_angle_schedule: T and c must be >= 1");
    }
    auto angle = [phi](std::size_t j) {
        double a = std::fmod(static_cast<double>(j) * phi, 180.0);
        if (a < 0.0) {
            a += 180.0;
        }
        return a;
    };
    SamplingSchedule s;
    s.stationary = stationary;
    s.angles_per_step.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        AngleList list(per_step);
        const std::size_t base = stationary ? 0 : t * per_step;
        for (std::size_t i = 0; i < per_step; ++i) {
            list[i] = angle(base + i);
        }
        s.angles_per_step.push_back(std::move(list));
    }
    return s;
}

void write_schedule_csv(std::ostream& os, const SamplingSchedule& s) {
    for (const auto& step : s.angles_per_step) {
        for (std::size_t i = 0; i < step.size(); ++i) {
            if (i > 0) {
                os << ',';
            }
            os << io::format_double(step[i]);
        }
        os << '\n';
    }
}

SamplingSchedule read_schedule_csv(std::istream& is) {
    const Matrix m = io::read_csv(is);
    SamplingSchedule s;
    for (Eigen::Index t = 0; t < m.rows(); ++t) {
        AngleList list(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.cols(); ++i) {
            list[static_cast<std::size_t>(i)] = m(t, i);
        }
        s.angles_per_step.push_back(std::move(list));
    }
    s.stationary = !s.angles_per_step.empty() &&
                   std::all_of(s.angles_per_step.begin(), s.angles_per_step.end(),
                               [&](const AngleList& a) { return a == s.angles_per_step.front(); });
    return s;
}

namespace {

// Exact intersection of the line {p : p . (cos, sin) = sigma} with the pixel
// grid [-n/2, n/2]^2, appended as (pixel, length) triplets for `row`.
void trace_ray(std::size_t n, double theta_deg, double sigma, int row,
               std::vector<Eigen::Triplet<double>>& out, std::vector<double>& crossings) {
    const double theta = theta_deg * std::numbers::pi / 180.0;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double px = sigma * c;
    const double py = sigma * s;
    const double ux = -s;
    const double uy = c;
    const double half = 0.5 * static_cast<double>(n);
    constexpr double tiny = 1e-14;

    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    auto clip = [&](double p, double u) {
        if (std::abs(u) < tiny) {
            return p >= -half && p <= half;
        }
        double a = (-half - p) / u;
        double b = (half - p) / u;
        if (a > b) {
            std::swap(a, b);
        }
        lo = std::max(lo, a);
        hi = std::min(hi, b);
        return true;
    };
    if (!clip(px, ux) || !clip(py, uy) || !(hi > lo)) {
        return;
    }

    crossings.clear();
    crossings.push_back(lo);
    crossings.push_back(hi);
    for (std::size_t k = 0; k <= n; ++k) {
        const double boundary = -half + static_cast<double>(k);
        if (std::abs(ux) >= tiny) {
            const double t = (boundary - px) / ux;
            if (t > lo && t < hi) {
                crossings.push_back(t);
            }
        }
        if (std::abs(uy) >= tiny) {
            const double t = (boundary - py) / uy;
            if (t > lo && t < hi) {
                crossings.push_back(t);
            }
        }
    }
    std::sort(crossings.begin(), crossings.end());

    const auto last = static_cast<std::ptrdiff_t>(n) - 1;
    for (std::size_t i = 0; i + 1 < crossings.size(); ++i) {
        const double len = crossings[i + 1] - crossings[i];
        if (len <= 1e-12) {
            continue;
        }
        const double mid = 0.5 * (crossings[i] + crossings[i + 1]);
        const double x = px + mid * ux;
        const double y = py + mid * uy;
        const auto col = std::clamp(static_cast<std::ptrdiff_t>(std::floor(x + half)), std::ptrdiff_t{0}, last);
        const auto r = std::clamp(static_cast<std::ptrdiff_t>(std::floor(half - y)), std::ptrdiff_t{0}, last);
        out.emplace_back(row, static_cast<int>(r * static_cast<std::ptrdiff_t>(n) + col), len);
    }
}

}  // namespace

RadonOperator::RadonOperator(const ImageGrid& grid, const Geometry& geometry, AngleList angles)
    : grid_(grid), geometry_(geometry), angles_(std::move(angles)) {
    if (angles_.empty()) {
        throw InvalidParameter("build_operator: empty angle list");
    }
    if (geometry.detector_count == 0 || !(geometry.detector_spacing > 0.0)) {
        throw InvalidParameter("build_operator: invalid detector geometry");
    }
    for (double a : angles_) {
        if (!(a >= 0.0 && a < 180.0)) {
            throw InvalidParameter("build_operator: angles must lie in [0, 180)");
        }
    }
    const std::size_t n = grid.side;
    const std::size_t ns = geometry.detector_count;
    const auto m = static_cast<Eigen::Index>(angles_.size() * ns);
    const auto npix = static_cast<Eigen::Index>(grid.pixels());

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(angles_.size() * ns * 2 * n);
    std::vector<double> crossings;
    crossings.reserve(2 * n + 4);
    for (std::size_t a = 0; a < angles_.size(); ++a) {
        for (std::size_t d = 0; d < ns; ++d) {
            trace_ray(n, angles_[a], geometry.offset(d), static_cast<int>(a * ns + d), triplets, crossings);
        }
    }
    weights_.resize(m, npix);
    weights_.setFromTriplets(triplets.begin(), triplets.end());
    weights_.makeCompressed();
    transposed_ = weights_.transpose();
    transposed_.makeCompressed();
}

RadonOperator::RadonOperator(SparseRowMatrix weights) : weights_(std::move(weights)) {
    weights_.makeCompressed();
    for (Eigen::Index i = 0; i < weights_.nonZeros(); ++i) {
        if (!(weights_.valuePtr()[i] >= 0.0) || !std::isfinite(weights_.valuePtr()[i])) {
            throw InvalidInput("RadonOperator: weights must be finite and nonnegative");
        }
    }
    transposed_ = weights_.transpose();
    transposed_.makeCompressed();
}

const ImageGrid& RadonOperator::grid() const {
    if (!grid_) {
        throw InvalidInput("RadonOperator: no image grid attached");
    }
    return *grid_;
}

const Geometry& RadonOperator::geometry() const {
    if (!geometry_) {
        throw InvalidInput("RadonOperator: no detector geometry attached");
    }
    return *geometry_;
}

Vector RadonOperator::apply(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != cols()) {
        throw InvalidInput("RadonOperator::apply: image length mismatch");
    }
    return weights_ * x;
}

Vector RadonOperator::apply_adjoint(const Vector& y) const {
    if (static_cast<std::size_t>(y.size()) != rows()) {
        throw InvalidInput("RadonOperator::apply_adjoint: sinogram length mismatch");
    }
    return transposed_ * y;
}

Matrix RadonOperator::apply(const Matrix& x) const {
    if (static_cast<std::size_t>(x.rows()) != cols()) {
        throw InvalidInput("RadonOperator::apply: image length mismatch");
    }
    return weights_ * x;
}

Matrix RadonOperator::apply_adjoint(const Matrix& y) const {
    if (static_cast<std::size_t>(y.rows()) != rows()) {
        throw InvalidInput("RadonOperator::apply_adjoint: sinogram length mismatch");
    }
    return transposed_ * y;
}

RadonOperator build_operator(const ImageGrid& grid, const Geometry& geometry, const AngleList& angles) {
    return RadonOperator(grid, geometry, angles);
}

OperatorSet::OperatorSet(const ImageGrid& grid, const Geometry& geometry, const SamplingSchedule& schedule) {
    if (schedule.steps() == 0) {
        throw InvalidParameter("OperatorSet: empty schedule");
    }
    std::map<AngleList, std::shared_ptr<const RadonOperator>> cache;
    per_step_.reserve(schedule.steps());
    for (const auto& angles : schedule.angles_per_step) {
        auto it = cache.find(angles);
        if (it == cache.end()) {
            it = cache.emplace(angles, std::make_shared<const RadonOperator>(grid, geometry, angles)).first;
        }
        per_step_.push_back(it->second);
    }
    validate();
}

OperatorSet::OperatorSet(std::shared_ptr<const RadonOperator> op, std::size_t steps)
    : per_step_(steps, std::move(op)) {
    validate();
}

OperatorSet::OperatorSet(std::vector<std::shared_ptr<const RadonOperator>> per_step)
    : per_step_(std::move(per_step)) {
    validate();
}

void OperatorSet::validate() {
    if (per_step_.empty() || !per_step_.front()) {
        throw InvalidParameter("OperatorSet: no operators");
    }
    std::vector<const RadonOperator*> seen;
    for (const auto& op : per_step_) {
        if (!op || op->rows() != per_step_.front()->rows() || op->cols() != per_step_.front()->cols()) {
            throw InvalidInput("OperatorSet: operators must share one shape");
        }
        if (std::find(seen.begin(), seen.end(), op.get()) == seen.end()) {
            seen.push_back(op.get());
        }
    }
    distinct_ = seen.size();
}

Matrix OperatorSet::forward(const Matrix& x) const {
    if (static_cast<std::size_t>(x.cols()) != steps() || static_cast<std::size_t>(x.rows()) != pixels()) {
        throw InvalidInput("OperatorSet::forward: expected N x T input");
    }
    Matrix out(static_cast<Eigen::Index>(measurement_rows()), x.cols());
    if (stationary()) {
        out.noalias() = per_step_.front()->weights() * x;
        return out;
    }
#pragma omp parallel for schedule(static)
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
        out.col(t).noalias() = per_step_[static_cast<std::size_t>(t)]->weights() * x.col(t);
    }
    return out;
}

Matrix OperatorSet::adjoint(const Matrix& y) const {
    if (static_cast<std::size_t>(y.cols()) != steps() || static_cast<std::size_t>(y.rows()) != measurement_rows()) {
        throw InvalidInput("OperatorSet::adjoint: expected M x T input");
    }
    Matrix out(static_cast<Eigen::Index>(pixels()), y.cols());
    if (stationary()) {
        out.noalias() = per_step_.front()->transposed() * y;
        return out;
    }
#pragma omp parallel for schedule(static)
    for (Eigen::Index t = 0; t < y.cols(); ++t) {
        out.col(t).noalias() = per_step_[static_cast<std::size_t>(t)]->transposed() * y.col(t);
    }
    return out;
}

Matrix backprojection_init(const Matrix& data, const OperatorSet& ops, double floor) {
    if (static_cast<std::size_t>(data.cols()) != ops.steps()) {
        throw InvalidInput("backprojection_init: data columns do not match the schedule length");
    }
    if (static_cast<std::size_t>(data.rows()) != ops.measurement_rows()) {
        throw InvalidInput("backprojection_init: data rows do not match the operator");
    }
    return project_floor(ops.adjoint(data), floor);
}

Matrix backprojection_init(const Matrix& data, const SamplingSchedule& schedule, const ImageGrid& grid,
                           const Geometry& geometry, double floor) {
    if (static_cast<std::size_t>(data.cols()) != schedule.steps()) {
        throw InvalidInput("backprojection_init: data columns do not match the schedule length");
    }
    return backprojection_init(data, OperatorSet(grid, geometry, schedule), floor);
}

}  // namespace dynlr
