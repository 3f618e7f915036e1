#pragma once

// Brute-force reference implementations used by the tests. They are written
// straight from the defining formulas, with 2-D indexing and dense matrices,
// and deliberately share no code with the library.

#include "dynlr/linalg.hpp"
#include "dynlr/radon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using dynlr::Matrix;
using dynlr::Vector;

struct Grid2 {
    std::size_t h;
    std::size_t w;
    std::size_t idx(std::size_t r, std::size_t c) const { return r * w + c; }
};

inline std::vector<std::size_t> forward_nbrs(const Grid2& g, std::size_t r, std::size_t c) {
    std::vector<std::size_t> out;
    if (c + 1 < g.w) out.push_back(g.idx(r, c + 1));
    if (r + 1 < g.h) out.push_back(g.idx(r + 1, c));
    return out;
}

inline std::vector<std::size_t> adjoint_nbrs(const Grid2& g, std::size_t r, std::size_t c) {
    std::vector<std::size_t> out;
    if (c > 0) out.push_back(g.idx(r, c - 1));
    if (r > 0) out.push_back(g.idx(r - 1, c));
    return out;
}

inline double grad_mag(const Matrix& b, const Grid2& g, std::size_t r, std::size_t c, Eigen::Index k, double eps) {
    double s = eps * eps;
    for (auto l : forward_nbrs(g, r, c)) {
        const double d = b(static_cast<Eigen::Index>(g.idx(r, c)), k) - b(static_cast<Eigen::Index>(l), k);
        s += d * d;
    }
    return std::sqrt(s);
}

inline double tv_value(const Matrix& b, const Grid2& g, double eps) {
    double total = 0.0;
    for (Eigen::Index k = 0; k < b.cols(); ++k)
        for (std::size_t r = 0; r < g.h; ++r)
            for (std::size_t c = 0; c < g.w; ++c) total += grad_mag(b, g, r, c, k, eps);
    return total;
}

// Grad magnitude at a flat index.
inline double grad_mag_at(const Matrix& b, const Grid2& g, std::size_t n, Eigen::Index k, double eps) {
    return grad_mag(b, g, n / g.w, n % g.w, k, eps);
}

inline Matrix tv_P(const Matrix& b, const Grid2& g, double eps) {
    Matrix p(b.rows(), b.cols());
    for (Eigen::Index k = 0; k < b.cols(); ++k)
        for (std::size_t r = 0; r < g.h; ++r)
            for (std::size_t c = 0; c < g.w; ++c) {
                const std::size_t n = g.idx(r, c);
                double v = static_cast<double>(forward_nbrs(g, r, c).size()) / grad_mag(b, g, r, c, k, eps);
                for (auto l : adjoint_nbrs(g, r, c)) v += 1.0 / grad_mag_at(b, g, l, k, eps);
                p(static_cast<Eigen::Index>(n), k) = v;
            }
    return p;
}

inline Matrix tv_Z(const Matrix& b, const Grid2& g, double eps) {
    const Matrix p = tv_P(b, g, eps);
    Matrix z(b.rows(), b.cols());
    for (Eigen::Index k = 0; k < b.cols(); ++k)
        for (std::size_t r = 0; r < g.h; ++r)
            for (std::size_t c = 0; c < g.w; ++c) {
                const auto n = static_cast<Eigen::Index>(g.idx(r, c));
                double fwd = 0.0;
                for (auto l : forward_nbrs(g, r, c)) fwd += 0.5 * (b(n, k) + b(static_cast<Eigen::Index>(l), k));
                double v = fwd / grad_mag(b, g, r, c, k, eps);
                for (auto l : adjoint_nbrs(g, r, c))
                    v += (b(n, k) + b(static_cast<Eigen::Index>(l), k)) / (2.0 * grad_mag_at(b, g, l, k, eps));
                z(n, k) = v / p(n, k);
            }
    return z;
}

// Chord length of the line {p : p.(cos t, sin t) = sigma} through the square
// [x0, x0+1] x [y0, y0+1], by parametric slab clipping.
inline double chord(double theta_deg, double sigma, double x0, double y0) {
    const double th = theta_deg * std::numbers::pi / 180.0;
    const double px = sigma * std::cos(th), py = sigma * std::sin(th);
    const double ux = -std::sin(th), uy = std::cos(th);
    double lo = -1e300, hi = 1e300;
    auto slab = [&](double p, double u, double a, double b) {
        if (std::abs(u) < 1e-14) return p >= a && p <= b;
        double t0 = (a - p) / u, t1 = (b - p) / u;
        if (t0 > t1) std::swap(t0, t1);
        lo = std::max(lo, t0);
        hi = std::min(hi, t1);
        return true;
    };
    if (!slab(px, ux, x0, x0 + 1.0) || !slab(py, uy, y0, y0 + 1.0)) return 0.0;
    return hi > lo ? hi - lo : 0.0;
}

// Dense projector: pixel (r, c) occupies x in [c - n/2, c + 1 - n/2],
// y in [n/2 - r - 1, n/2 - r]; row a * nS + d is angle a, detector d.
inline Matrix radon_dense(std::size_t n, const dynlr::Geometry& geo, const std::vector<double>& angles) {
    const std::size_t ns = geo.detector_count;
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(angles.size() * ns), static_cast<Eigen::Index>(n * n));
    const double half = 0.5 * static_cast<double>(n);
    for (std::size_t ai = 0; ai < angles.size(); ++ai)
        for (std::size_t d = 0; d < ns; ++d) {
            const double sigma = (static_cast<double>(d) - 0.5 * static_cast<double>(ns - 1)) * geo.detector_spacing;
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c) {
                    const double len = chord(angles[ai], sigma, static_cast<double>(c) - half,
                                             half - static_cast<double>(r) - 1.0);
                    a(static_cast<Eigen::Index>(ai * ns + d), static_cast<Eigen::Index>(r * n + c)) = len;
                }
        }
    return a;
}

inline double psnr(const Vector& x, const Vector& ref, double range) {
    double mse = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) mse += (x[i] - ref[i]) * (x[i] - ref[i]);
    mse /= static_cast<double>(x.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(range * range / mse);
}

// Explicit 2-D window loops with a normalised 2-D Gaussian kernel.
inline double ssim(const Vector& x, const Vector& y, std::size_t n, double range, std::size_t win = 11,
                   double sigma = 1.5) {
    std::vector<double> w(win * win);
    double wsum = 0.0;
    const double ctr = 0.5 * static_cast<double>(win - 1);
    for (std::size_t i = 0; i < win; ++i)
        for (std::size_t j = 0; j < win; ++j) {
            const double di = static_cast<double>(i) - ctr, dj = static_cast<double>(j) - ctr;
            w[i * win + j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
            wsum += w[i * win + j];
        }
    for (auto& v : w) v /= wsum;
    const double c1 = std::pow(0.01 * range, 2), c2 = std::pow(0.03 * range, 2);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t r0 = 0; r0 + win <= n; ++r0)
        for (std::size_t c0 = 0; c0 + win <= n; ++c0) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (std::size_t i = 0; i < win; ++i)
                for (std::size_t j = 0; j < win; ++j) {
                    const double ww = w[i * win + j];
                    const auto p = static_cast<Eigen::Index>((r0 + i) * n + c0 + j);
                    mx += ww * x[p];
                    my += ww * y[p];
                }
            for (std::size_t i = 0; i < win; ++i)
                for (std::size_t j = 0; j < win; ++j) {
                    const double ww = w[i * win + j];
                    const auto p = static_cast<Eigen::Index>((r0 + i) * n + c0 + j);
                    sxx += ww * (x[p] - mx) * (x[p] - mx);
                    syy += ww * (y[p] - my) * (y[p] - my);
                    sxy += ww * (x[p] - mx) * (y[p] - my);
                }
            total += ((2 * mx * my + c1) * (2 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
            ++count;
        }
    return total / static_cast<double>(count);
}

struct Weights {
    double alpha = 0, lambda_b = 0, mu_b = 0, lambda_c = 0, mu_c = 0, lambda_x = 0, mu_x = 0, tau = 0, eps = 1e-5;
};

// Term-by-term model values with dense per-step operators.
inline double cost_bcx(const std::vector<Matrix>& a, const Matrix& y, const Matrix& x, const Matrix& b,
                       const Matrix& c, const Grid2& g, const Weights& w) {
    double f = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const auto tt = static_cast<Eigen::Index>(t);
        for (Eigen::Index m = 0; m < a[t].rows(); ++m) {
            double s = -y(m, tt);
            for (Eigen::Index n = 0; n < a[t].cols(); ++n) s += a[t](m, n) * x(n, tt);
            f += 0.5 * s * s;
        }
    }
    double coupling = 0, l1b = 0, l2b = 0, l1c = 0, l2c = 0, l1x = 0, l2x = 0;
    for (Eigen::Index n = 0; n < x.rows(); ++n)
        for (Eigen::Index t = 0; t < x.cols(); ++t) {
            double bc = 0.0;
            for (Eigen::Index k = 0; k < b.cols(); ++k) bc += b(n, k) * c(k, t);
            coupling += (bc - x(n, t)) * (bc - x(n, t));
            l1x += std::abs(x(n, t));
            l2x += x(n, t) * x(n, t);
        }
    for (Eigen::Index i = 0; i < b.size(); ++i) {
        l1b += std::abs(b.data()[i]);
        l2b += b.data()[i] * b.data()[i];
    }
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        l1c += std::abs(c.data()[i]);
        l2c += c.data()[i] * c.data()[i];
    }
    return f + 0.5 * w.alpha * coupling + w.lambda_c * l1c + 0.5 * w.mu_c * l2c + w.lambda_b * l1b +
           0.5 * w.mu_b * l2b + w.lambda_x * l1x + 0.5 * w.mu_x * l2x + 0.5 * w.tau * tv_value(b, g, w.eps);
}

inline double cost_bc(const std::vector<Matrix>& a, const Matrix& y, const Matrix& b, const Matrix& c,
                      const Grid2& g, const Weights& w) {
    const Matrix bc = b * c;
    Weights v = w;
    v.alpha = 0;
    v.lambda_x = 0;
    v.mu_x = 0;
    return cost_bcx(a, y, bc, b, c, g, v);
}

inline Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

}  // namespace oracle
