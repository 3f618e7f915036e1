#include "dynlr/linalg.hpp"

#include "dynlr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dynlr {

bool all_finite(const Matrix& m) { return m.allFinite(); }

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw InvalidInput(std::string(what) + ": matrix contains non-finite entries");
    }
}

SvdResult svd(const Matrix& m) {
    require_finite(m, "svd");
    SvdResult out;
    if (m.size() == 0) {
        out.U = Matrix(m.rows(), 0);
        out.V = Matrix(m.cols(), 0);
        out.singular = Vector(0);
        return out;
    }
    Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.U = dec.matrixU();
    out.V = dec.matrixV();
    out.singular = dec.singularValues();

    for (Eigen::Index j = 0; j < out.U.cols(); ++j) {
        for (Eigen::Index i = 0; i < out.U.rows(); ++i) {
            const double v = out.U(i, j);
            if (v != 0.0) {
                if (v < 0.0) {
                    out.U.col(j) *= -1.0;
                    out.V.col(j) *= -1.0;
                }
                break;
            }
        }
    }
    return out;
}

Matrix recompose(const SvdResult& s) {
    return s.U * s.singular.asDiagonal() * s.V.transpose();
}

Vector soft_threshold_singular_values(const Vector& s, double rho) {
    if (!(rho >= 0.0)) {
        throw InvalidParameter("soft_threshold_singular_values: threshold must be >= 0");
    }
    return (s.array() - rho).max(0.0).matrix();
}

Matrix best_rank_k(const Matrix& m, std::size_t k) {
    const auto limit = static_cast<std::size_t>(std::min(m.rows(), m.cols()));
    if (k < 1 || k > limit) {
        throw InvalidParameter("best_rank_k: K must lie in [1, min(rows, cols)]");
    }
    const SvdResult s = svd(m);
    const auto kk = static_cast<Eigen::Index>(k);
    return s.U.leftCols(kk) * s.singular.head(kk).asDiagonal() * s.V.leftCols(kk).transpose();
}

Matrix project_floor(const Matrix& m, double floor) {
    return m.cwiseMax(floor);
}

void project_floor_inplace(Matrix& m, double floor) {
    m = m.cwiseMax(floor);
}

double relative_change(const Matrix& updated, const Matrix& previous, double floor) {
    return (updated - previous).norm() / std::max(previous.norm(), floor);
}

}  // namespace dynlr
