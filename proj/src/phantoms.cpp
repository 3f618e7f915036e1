#include "dynlr/phantoms.hpp"

#include "dynlr/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace dynlr {

namespace {

struct Ellipse {
    double value;
    double a;
    double b;
    double x0;
    double y0;
    double phi_deg;

    bool contains(double x, double y) const {
        const double phi = phi_deg * std::numbers::pi / 180.0;
        const double dx = x - x0;
        const double dy = y - y0;
        const double xr = dx * std::cos(phi) + dy * std::sin(phi);
        const double yr = -dx * std::sin(phi) + dy * std::cos(phi);
        return (xr * xr) / (a * a) + (yr * yr) / (b * b) <= 1.0;
    }
};

// Modified Shepp-Logan (Toft) in [-1, 1]^2.
constexpr std::array<Ellipse, 10> kSheppLogan{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
    {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
    {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
    {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
    {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
    {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
    {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
    {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
    {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
}};

constexpr double kDynamicAmplitude = 0.5;
constexpr double kVesselAmplitude = 0.6;

// Pixel centre in normalised coordinates; y grows upwards.
std::pair<double, double> pixel_center(std::size_t row, std::size_t col, std::size_t n) {
    const double h = 2.0 / static_cast<double>(n);
    return {-1.0 + (static_cast<double>(col) + 0.5) * h, 1.0 - (static_cast<double>(row) + 0.5) * h};
}

template <typename F>
void for_each_pixel(std::size_t n, F&& f) {
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const auto [x, y] = pixel_center(r, c, n);
            f(static_cast<Eigen::Index>(r * n + c), x, y);
        }
    }
}

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
    const double vx = bx - ax;
    const double vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (ax + t * vx);
    const double dy = py - (ay + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

void check_size(std::size_t n, std::size_t steps) {
    if (n < 32) {
        throw InvalidParameter("phantom: side must be >= 32");
    }
    if (steps < 2) {
        throw InvalidParameter("phantom: T must be >= 2");
    }
}

}  // namespace

double sinusoid_curve(std::size_t t, std::size_t steps, double frequency) {
    return 0.5 * (1.0 + std::sin(2.0 * std::numbers::pi * frequency * static_cast<double>(t - 1) /
                                 static_cast<double>(steps)));
}

std::size_t vessel_onset(std::size_t steps) { return (steps + 4) / 5; }

double vessel_curve(std::size_t t, std::size_t steps) {
    const std::size_t t0 = vessel_onset(steps);
    if (t < t0) {
        return 0.0;
    }
    return std::exp(-4.0 * static_cast<double>(t - t0) / static_cast<double>(steps));
}

GroundTruth dynamic_shepp_logan(std::size_t n, std::size_t steps) {
    check_size(n, steps);
    const auto npix = static_cast<Eigen::Index>(n * n);
    GroundTruth gt;
    gt.side = n;
    gt.B = Matrix::Zero(npix, 3);
    const Ellipse& upper = kSheppLogan[4];
    const Ellipse& ventricle = kSheppLogan[2];
    for_each_pixel(n, [&](Eigen::Index idx, double x, double y) {
        double v = 0.0;
        for (const auto& e : kSheppLogan) {
            if (e.contains(x, y)) {
                v += e.value;
            }
        }
        gt.B(idx, 0) = std::clamp(v, 0.0, 1.0);
        if (upper.contains(x, y)) {
            gt.B(idx, 1) = kDynamicAmplitude;
        } else if (ventricle.contains(x, y)) {
            gt.B(idx, 2) = kDynamicAmplitude;
        }
    });

    const auto t_count = static_cast<Eigen::Index>(steps);
    gt.C.resize(3, t_count);
    for (Eigen::Index t = 0; t < t_count; ++t) {
        const auto step = static_cast<std::size_t>(t) + 1;
        gt.C(0, t) = 1.0;
        gt.C(1, t) = sinusoid_curve(step, steps, 2.0);
        gt.C(2, t) = sinusoid_curve(step, steps, 3.0);
    }
    gt.X = gt.B * gt.C;
    return gt;
}

GroundTruth vessel_phantom(std::size_t n, std::size_t steps) {
    check_size(n, steps);
    const auto npix = static_cast<Eigen::Index>(n * n);
    const Ellipse body{0.3, 0.9, 0.7, 0.0, 0.0, 0.0};
    const std::array<Ellipse, 2> lungs{{{0.05, 0.32, 0.5, -0.42, 0.02, 8.0}, {0.05, 0.32, 0.5, 0.42, 0.02, -8.0}}};
    const Ellipse spine{0.85, 0.1, 0.1, 0.0, -0.52, 0.0};
    const Ellipse heart{0.45, 0.14, 0.2, -0.02, 0.12, 0.0};
    // small static structures inside the lungs
    const std::array<Ellipse, 4> nodules{{{0.25, 0.03, 0.03, -0.45, 0.25, 0.0},
                                          {0.25, 0.025, 0.04, -0.35, -0.2, 30.0},
                                          {0.25, 0.03, 0.02, 0.5, -0.3, 0.0},
                                          {0.25, 0.02, 0.02, -0.55, -0.05, 0.0}}};
    // three-branch vessel tree in the right lung
    struct Segment {
        double ax, ay, bx, by;
    };
    const std::array<Segment, 3> tree{{{0.40, -0.30, 0.40, 0.10}, {0.40, 0.10, 0.28, 0.38}, {0.40, 0.10, 0.56, 0.34}}};
    const double radius = std::max(0.035, 2.5 / static_cast<double>(n));

    GroundTruth gt;
    gt.side = n;
    gt.B = Matrix::Zero(npix, 2);
    for_each_pixel(n, [&](Eigen::Index idx, double x, double y) {
        double v = 0.0;
        if (body.contains(x, y)) {
            v = body.value;
        }
        for (const auto& lung : lungs) {
            if (lung.contains(x, y)) {
                v = lung.value;
            }
        }
        for (const auto& e : nodules) {
            if (e.contains(x, y)) {
                v = e.value;
            }
        }
        if (heart.contains(x, y)) {
            v = heart.value;
        }
        if (spine.contains(x, y)) {
            v = spine.value;
        }
        bool in_vessel = false;
        for (const auto& s : tree) {
            in_vessel = in_vessel || segment_distance(x, y, s.ax, s.ay, s.bx, s.by) <= radius;
        }
        gt.B(idx, 0) = v;
        gt.B(idx, 1) = in_vessel ? kVesselAmplitude : 0.0;
    });

    const auto t_count = static_cast<Eigen::Index>(steps);
    gt.C.resize(2, t_count);
    for (Eigen::Index t = 0; t < t_count; ++t) {
        gt.C(0, t) = 1.0;
        gt.C(1, t) = vessel_curve(static_cast<std::size_t>(t) + 1, steps);
    }
    gt.X = gt.B * gt.C;
    return gt;
}

Matrix simulate_measurements(const GroundTruth& gt, const OperatorSet& ops) {
    if (static_cast<std::size_t>(gt.X.cols()) != ops.steps() ||
        static_cast<std::size_t>(gt.X.rows()) != ops.pixels()) {
        throw InvalidInput("simulate_measurements: phantom does not match the operators");
    }
    return ops.forward(gt.X);
}

Matrix simulate_measurements(const GroundTruth& gt, const SamplingSchedule& schedule, const ImageGrid& grid,
                             const Geometry& geometry) {
    if (static_cast<std::size_t>(gt.X.cols()) != schedule.steps() ||
        static_cast<std::size_t>(gt.X.rows()) != grid.pixels()) {
        throw InvalidInput("simulate_measurements: phantom does not match schedule or grid");
    }
    return simulate_measurements(gt, OperatorSet(grid, geometry, schedule));
}

Matrix gaussian_noise(Eigen::Index rows, Eigen::Index cols, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out.data()[i] = sigma * normal(rng);
    }
    return out;
}

Matrix add_gaussian_noise(const Matrix& data, double level, std::uint64_t seed) {
    if (!(level >= 0.0)) {
        throw InvalidParameter("add_gaussian_noise: level must be >= 0");
    }
    if (level == 0.0 || data.size() == 0) {
        return data;
    }
    const double sigma = level * data.maxCoeff();
    return (data + gaussian_noise(data.rows(), data.cols(), sigma, seed)).cwiseMax(0.0);
}

}  // namespace dynlr
