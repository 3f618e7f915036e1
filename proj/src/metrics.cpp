#include "dynlr/metrics.hpp"

#include "dynlr/errors.hpp"
#include "dynlr/matrix_io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace dynlr {

double psnr(const Vector& frame, const Vector& reference, double data_range) {
    if (frame.size() != reference.size() || frame.size() == 0) {
        throw InvalidInput("psnr: frames must have the same nonzero size");
    }
    if (!(data_range > 0.0)) {
        throw InvalidParameter("psnr: data_range must be positive");
    }
    const double mse = (frame - reference).squaredNorm() / static_cast<double>(frame.size());
    if (mse == 0.0) {
        return kInfinitePsnr;
    }
    return 10.0 * std::log10(data_range * data_range / mse);
}

namespace {

Vector gaussian_window(std::size_t size, double sigma) {
    Vector w(static_cast<Eigen::Index>(size));
    const double centre = 0.5 * static_cast<double>(size - 1);
    for (std::size_t i = 0; i < size; ++i) {
        const double d = static_cast<double>(i) - centre;
        w[static_cast<Eigen::Index>(i)] = std::exp(-0.5 * d * d / (sigma * sigma));
    }
    return w / w.sum();
}

// Separable "valid" filtering of a row-major side x side image.
Matrix filter_valid(const Matrix& img, const Vector& w) {
    const Eigen::Index n = img.rows();
    const Eigen::Index k = w.size();
    const Eigen::Index out_n = n - k + 1;
    Matrix rows(n, out_n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < out_n; ++c) {
            rows(r, c) = img.row(r).segment(c, k).dot(w.transpose());
        }
    }
    Matrix out(out_n, out_n);
    for (Eigen::Index c = 0; c < out_n; ++c) {
        for (Eigen::Index r = 0; r < out_n; ++r) {
            out(r, c) = rows.col(c).segment(r, k).dot(w);
        }
    }
    return out;
}

Matrix as_image(const Vector& v, std::size_t side) {
    const auto n = static_cast<Eigen::Index>(side);
    Matrix img(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            img(r, c) = v[r * n + c];
        }
    }
    return img;
}

}  // namespace

double ssim(const Vector& frame, const Vector& reference, std::size_t side, double data_range) {
    if (frame.size() != reference.size() || static_cast<std::size_t>(frame.size()) != side * side || side == 0) {
        throw InvalidInput("ssim: frames must both be side x side");
    }
    if (!(data_range > 0.0)) {
        throw InvalidParameter("ssim: data_range must be positive");
    }
    std::size_t window = std::min<std::size_t>(11, side);
    if (window % 2 == 0) {
        --window;
    }
    const Vector w = gaussian_window(window, 1.5);
    const Matrix x = as_image(frame, side);
    const Matrix y = as_image(reference, side);
    const double c1 = (0.01 * data_range) * (0.01 * data_range);
    const double c2 = (0.03 * data_range) * (0.03 * data_range);

    const Matrix mx = filter_valid(x, w);
    const Matrix my = filter_valid(y, w);
    const Matrix sxx = filter_valid(x.cwiseProduct(x), w) - mx.cwiseProduct(mx);
    const Matrix syy = filter_valid(y.cwiseProduct(y), w) - my.cwiseProduct(my);
    const Matrix sxy = filter_valid(x.cwiseProduct(y), w) - mx.cwiseProduct(my);

    const auto num = (2.0 * mx.array() * my.array() + c1) * (2.0 * sxy.array() + c2);
    const auto den = (mx.array().square() + my.array().square() + c1) * (sxx.array() + syy.array() + c2);
    return (num / den).mean();
}

QualityReport evaluate_stack(const Matrix& x, const Matrix& x_true, std::size_t side) {
    if (x.rows() != x_true.rows() || x.cols() != x_true.cols()) {
        throw InvalidInput("evaluate_stack: shape mismatch");
    }
    if (x.cols() == 0) {
        throw InvalidInput("evaluate_stack: no time steps");
    }
    const double range = x_true.maxCoeff();
    QualityReport rep;
    rep.psnr.resize(static_cast<std::size_t>(x.cols()));
    rep.ssim.resize(static_cast<std::size_t>(x.cols()));
#pragma omp parallel for schedule(static)
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
        rep.psnr[static_cast<std::size_t>(t)] = psnr(x.col(t), x_true.col(t), range);
        rep.ssim[static_cast<std::size_t>(t)] = ssim(x.col(t), x_true.col(t), side, range);
    }
    double ps = 0.0;
    double ss = 0.0;
    for (std::size_t t = 0; t < rep.psnr.size(); ++t) {
        ps += rep.psnr[t];
        ss += rep.ssim[t];
    }
    rep.mean_psnr = ps / static_cast<double>(rep.psnr.size());
    rep.mean_ssim = ss / static_cast<double>(rep.ssim.size());
    return rep;
}

void write_report_csv(std::ostream& os, const QualityReport& report) {
    auto fmt = [](double v) { return std::isinf(v) ? std::string(v > 0 ? "inf" : "-inf") : io::format_double(v); };
    os << "frame,psnr,ssim\n";
    for (std::size_t t = 0; t < report.psnr.size(); ++t) {
        os << (t + 1) << ',' << fmt(report.psnr[t]) << ',' << fmt(report.ssim[t]) << '\n';
    }
    os << "mean," << fmt(report.mean_psnr) << ',' << fmt(report.mean_ssim) << '\n';
}

namespace {

bool is_constant(const Vector& v, double tol) {
    const double mean = v.mean();
    const double sd = std::sqrt((v.array() - mean).square().mean());
    if (sd == 0.0) {
        return true;
    }
    return mean != 0.0 && sd / std::abs(mean) <= tol;
}

}  // namespace

double row_correlation(const Vector& a, const Vector& b, double constant_tol) {
    if (a.size() != b.size() || a.size() == 0) {
        throw InvalidInput("row_correlation: length mismatch");
    }
    const bool ca = is_constant(a, constant_tol);
    const bool cb = is_constant(b, constant_tol);
    if (ca || cb) {
        return (ca && cb) ? 1.0 : 0.0;
    }
    const Vector da = a.array() - a.mean();
    const Vector db = b.array() - b.mean();
    return std::clamp(da.dot(db) / (da.norm() * db.norm()), -1.0, 1.0);
}

ComponentMatch match_components(const Matrix& c_est, const Matrix& c_true, double constant_tol) {
    if (c_est.cols() != c_true.cols()) {
        throw InvalidInput("match_components: temporal lengths differ");
    }
    if (c_est.rows() < c_true.rows()) {
        throw InvalidInput("match_components: need at least as many estimated rows as true rows");
    }
    const Eigen::Index ke = c_est.rows();
    const Eigen::Index kt = c_true.rows();
    Matrix corr(ke, kt);
    for (Eigen::Index i = 0; i < ke; ++i) {
        for (Eigen::Index j = 0; j < kt; ++j) {
            corr(i, j) = row_correlation(c_est.row(i).transpose(), c_true.row(j).transpose(), constant_tol);
        }
    }
    ComponentMatch m;
    m.permutation.assign(static_cast<std::size_t>(kt), 0);
    m.correlation.assign(static_cast<std::size_t>(kt), 0.0);
    std::vector<bool> used_est(static_cast<std::size_t>(ke), false);
    std::vector<bool> used_true(static_cast<std::size_t>(kt), false);
    for (Eigen::Index round = 0; round < kt; ++round) {
        double best = -2.0;
        Eigen::Index bi = -1;
        Eigen::Index bj = -1;
        for (Eigen::Index i = 0; i < ke; ++i) {
            if (used_est[static_cast<std::size_t>(i)]) {
                continue;
            }
            for (Eigen::Index j = 0; j < kt; ++j) {
                if (!used_true[static_cast<std::size_t>(j)] && corr(i, j) > best) {
                    best = corr(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        used_est[static_cast<std::size_t>(bi)] = true;
        used_true[static_cast<std::size_t>(bj)] = true;
        m.permutation[static_cast<std::size_t>(bj)] = static_cast<std::size_t>(bi);
        m.correlation[static_cast<std::size_t>(bj)] = best;
    }
    return m;
}

}  // namespace dynlr
