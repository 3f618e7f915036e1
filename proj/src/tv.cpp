#include "dynlr/tv.hpp"

#include "dynlr/errors.hpp"

#include <cmath>

namespace dynlr {

NeighborhoodSystem::NeighborhoodSystem(std::size_t height, std::size_t width)
    : height_(height), width_(width), forward_(height * width), adjoint_(height * width) {
    if (height == 0 || width == 0) {
        throw InvalidParameter("NeighborhoodSystem: empty grid");
    }
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            const auto n = static_cast<Eigen::Index>(r * width + c);
            if (c + 1 < width) {
                forward_[n].push_back(n + 1);
                adjoint_[n + 1].push_back(n);
            }
            if (r + 1 < height) {
                const auto down = n + static_cast<Eigen::Index>(width);
                forward_[n].push_back(down);
                adjoint_[down].push_back(n);
            }
        }
    }
}

namespace {

void check_shape(const Matrix& b, const NeighborhoodSystem& nbhd) {
    if (static_cast<std::size_t>(b.rows()) != nbhd.pixels()) {
        throw InvalidInput("TV: matrix rows do not match the neighbourhood grid");
    }
}

void check_params(const TvParams& params) {
    if (!(params.eps > 0.0)) {
        throw InvalidParameter("TV: eps must be positive");
    }
}

}  // namespace

Matrix tv_gradient_magnitude(const Matrix& b, const NeighborhoodSystem& nbhd, const TvParams& params) {
    check_shape(b, nbhd);
    check_params(params);
    const double eps2 = params.eps * params.eps;
    Matrix g(b.rows(), b.cols());
    for (Eigen::Index k = 0; k < b.cols(); ++k) {
        for (Eigen::Index n = 0; n < b.rows(); ++n) {
            double acc = eps2;
            for (Eigen::Index l : nbhd.forward(n)) {
                const double d = b(n, k) - b(l, k);
                acc += d * d;
            }
            g(n, k) = std::sqrt(acc);
        }
    }
    return g;
}

double tv_value(const Matrix& b, const NeighborhoodSystem& nbhd, const TvParams& params) {
    return tv_gradient_magnitude(b, nbhd, params).sum();
}

Matrix tv_gradient(const Matrix& b, const NeighborhoodSystem& nbhd, const TvParams& params) {
    const Matrix g = tv_gradient_magnitude(b, nbhd, params);
    Matrix grad(b.rows(), b.cols());
    for (Eigen::Index k = 0; k < b.cols(); ++k) {
        for (Eigen::Index n = 0; n < b.rows(); ++n) {
            double acc = 0.0;
            for (Eigen::Index l : nbhd.forward(n)) {
                acc += (b(n, k) - b(l, k)) / g(n, k);
            }
            for (Eigen::Index l : nbhd.adjoint(n)) {
                acc += (b(n, k) - b(l, k)) / g(l, k);
            }
            grad(n, k) = acc;
        }
    }
    return grad;
}

TvSurrogateMatrices tv_surrogate_matrices(const Matrix& b, const NeighborhoodSystem& nbhd, const TvParams& params) {
    const Matrix g = tv_gradient_magnitude(b, nbhd, params);
    TvSurrogateMatrices out{Matrix(b.rows(), b.cols()), Matrix(b.rows(), b.cols())};
#pragma omp parallel for schedule(static)
    for (Eigen::Index k = 0; k < b.cols(); ++k) {
        for (Eigen::Index n = 0; n < b.rows(); ++n) {
            const double inv_own = 1.0 / g(n, k);
            double p = 0.0;
            double z = 0.0;
            for (Eigen::Index l : nbhd.forward(n)) {
                p += inv_own;
                z += inv_own * 0.5 * (b(n, k) + b(l, k));
            }
            for (Eigen::Index l : nbhd.adjoint(n)) {
                const double inv = 1.0 / g(l, k);
                p += inv;
                z += inv * 0.5 * (b(n, k) + b(l, k));
            }
            out.P(n, k) = p;
            out.Z(n, k) = p > 0.0 ? z / p : b(n, k);
        }
    }
    return out;
}

Matrix matrix_P(const Matrix& b, const NeighborhoodSystem& nbhd, const TvParams& params) {
    return tv_surrogate_matrices(b, nbhd, params).P;
}

Matrix matrix_Z(const Matrix& b, const NeighborhoodSystem& nbhd, const TvParams& params) {
    return tv_surrogate_matrices(b, nbhd, params).Z;
}

double tv_surrogate_gap(const Matrix& b, const Matrix& b_tilde, const NeighborhoodSystem& nbhd,
                        const TvParams& params) {
    if (b.rows() != b_tilde.rows() || b.cols() != b_tilde.cols()) {
        throw InvalidInput("tv_surrogate_gap: shape mismatch");
    }
    const auto [p, z] = tv_surrogate_matrices(b_tilde, nbhd, params);
    // Q(B, B~) - Q(B~, B~) + TV(B~)/2 - TV(B)/2, summed per entry to avoid
    // forming the large constant G explicitly.
    double quad = 0.0;
    for (Eigen::Index i = 0; i < b.size(); ++i) {
        const double d_new = b.data()[i] - z.data()[i];
        const double d_old = b_tilde.data()[i] - z.data()[i];
        quad += p.data()[i] * (d_new - d_old) * (d_new + d_old);
    }
    return 0.5 * quad + 0.5 * (tv_value(b_tilde, nbhd, params) - tv_value(b, nbhd, params));
}

Vector qubp_lambda(const Matrix& hessian, const Vector& x_tilde, const Vector& kappa) {
    if (hessian.rows() != hessian.cols() || hessian.rows() != x_tilde.size() || kappa.size() != x_tilde.size()) {
        throw InvalidInput("qubp_lambda: dimension mismatch");
    }
    if ((x_tilde.array() <= 0.0).any()) {
        throw InvalidInput("qubp_lambda: expansion point must be strictly positive");
    }
    if ((hessian.array() < 0.0).any() || (kappa.array() < 0.0).any()) {
        throw InvalidInput("qubp_lambda: Hessian and kappa must be entrywise nonnegative");
    }
    return ((hessian * x_tilde + kappa).array() / x_tilde.array()).matrix();
}

Vector qubp_step(const Vector& x_tilde, const Vector& grad, const Vector& lambda_diagonal) {
    if (x_tilde.size() != grad.size() || x_tilde.size() != lambda_diagonal.size()) {
        throw InvalidInput("qubp_step: dimension mismatch");
    }
    if ((lambda_diagonal.array() <= 0.0).any()) {
        throw InvalidInput("qubp_step: Lambda must be positive");
    }
    return (x_tilde.array() - grad.array() / lambda_diagonal.array()).matrix();
}

}  // namespace dynlr
