#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynlr/errors.hpp"
#include "dynlr/linalg.hpp"
#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <limits>
#include <random>

using namespace dynlr;

TEST_CASE("svd of identity and diagonal matrices") {
    const SvdResult id = svd(Matrix::Identity(3, 3));
    CHECK((id.singular - Vector::Ones(3)).norm() < 1e-14);

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 3;
    d(1, 1) = 2;
    const SvdResult s = svd(d);
    CHECK(s.singular[0] == doctest::Approx(3.0));
    CHECK(s.singular[1] == doctest::Approx(2.0));
    CHECK((s.U.cwiseAbs() - Matrix::Identity(2, 2)).norm() < 1e-14);
    CHECK((s.V.cwiseAbs() - Matrix::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("svd reconstructs random matrices and matches eigenvalues of M^T M") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix m = oracle::random_matrix(5, 4, rng, -1.0, 1.0);
        const SvdResult s = svd(m);
        CHECK((m - recompose(s)).norm() / m.norm() < 1e-10);
        CHECK((s.U.transpose() * s.U - Matrix::Identity(4, 4)).norm() < 1e-8);
        CHECK((s.V.transpose() * s.V - Matrix::Identity(4, 4)).norm() < 1e-8);
        for (Eigen::Index i = 1; i < s.singular.size(); ++i) {
            CHECK(s.singular[i] <= s.singular[i - 1]);
        }
        // Independent route: eigenvalues of the Gram matrix.
        Eigen::SelfAdjointEigenSolver<Matrix> es(m.transpose() * m);
        Vector ev = es.eigenvalues().reverse().cwiseMax(0.0).cwiseSqrt();
        CHECK((ev - s.singular).norm() < 1e-10);
        // Sign convention.
        for (Eigen::Index j = 0; j < s.U.cols(); ++j) {
            for (Eigen::Index i = 0; i < s.U.rows(); ++i) {
                if (s.U(i, j) != 0.0) {
                    CHECK(s.U(i, j) > 0.0);
                    break;
                }
            }
        }
    }
}

TEST_CASE("svd rejects non-finite input") {
    Matrix m = Matrix::Ones(2, 2);
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(svd(m), InvalidInput);
    m(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(svd(m), InvalidInput);
}

TEST_CASE("soft thresholding of singular values") {
    Vector s(3);
    s << 3, 1, 0.5;
    Vector expect(3);
    expect << 2, 0, 0;
    CHECK((soft_threshold_singular_values(s, 1.0) - expect).norm() == 0.0);
    CHECK((soft_threshold_singular_values(s, 0.0) - s).norm() == 0.0);
    CHECK(soft_threshold_singular_values(Vector::Constant(3, 5.0), 5.0).norm() == 0.0);
    CHECK_THROWS_AS(soft_threshold_singular_values(s, -0.1), InvalidParameter);
}

TEST_CASE("soft thresholding is monotone and 1-Lipschitz per entry") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        Vector a(1), b(1);
        a << u(rng);
        b << u(rng);
        const double rho = u(rng);
        const double fa = soft_threshold_singular_values(a, rho)[0];
        const double fb = soft_threshold_singular_values(b, rho)[0];
        CHECK(std::abs(fa - fb) <= std::abs(a[0] - b[0]) + 1e-15);
        if (a[0] <= b[0]) {
            CHECK(fa <= fb);
        }
    }
}

TEST_CASE("best rank-k approximation") {
    const Vector u = Vector::LinSpaced(4, 1.0, 4.0);
    const Vector v = Vector::LinSpaced(3, 0.5, 1.5);
    const Matrix r1 = u * v.transpose();
    CHECK((best_rank_k(r1, 1) - r1).norm() < 1e-10);

    Matrix d = Matrix::Zero(3, 3);
    d.diagonal() << 3, 2, 1;
    Matrix e = Matrix::Zero(3, 3);
    e.diagonal() << 3, 2, 0;
    CHECK((best_rank_k(d, 2) - e).norm() < 1e-12);

    CHECK_THROWS_AS(best_rank_k(d, 0), InvalidParameter);
    CHECK_THROWS_AS(best_rank_k(d, 4), InvalidParameter);
}

TEST_CASE("best rank-k meets the Eckart-Young tail and beats random competitors") {
    std::mt19937_64 rng(11);
    const Matrix m = oracle::random_matrix(6, 6, rng, -1.0, 1.0);
    const Matrix a = best_rank_k(m, 3);
    const double err = (m - a).norm();
    Eigen::JacobiSVD<Matrix> ref(m);
    const double tail = ref.singularValues().tail(3).norm();
    CHECK(std::abs(err - tail) < 1e-8);
    for (int i = 0; i < 100; ++i) {
        const Matrix p = oracle::random_matrix(6, 3, rng, -1.0, 1.0);
        const Matrix q = oracle::random_matrix(3, 6, rng, -1.0, 1.0);
        CHECK(err <= (m - p * q).norm());
    }
}

TEST_CASE("project_floor") {
    Matrix m(1, 3);
    m << 0.5, 0.0, -0.3;
    const Matrix f = project_floor(m, 1e-12);
    CHECK(f(0, 0) == 0.5);
    CHECK(f(0, 1) == 1e-12);
    CHECK(f(0, 2) == 1e-12);
    const Matrix ok = Matrix::Constant(2, 2, 3.0);
    CHECK((project_floor(ok, 1e-12) - ok).norm() == 0.0);
    Matrix inplace = m;
    project_floor_inplace(inplace, 0.1);
    CHECK(inplace.minCoeff() >= 0.1);
}

TEST_CASE("relative change uses the Frobenius norm with a floor") {
    Matrix a = Matrix::Ones(2, 2);
    Matrix b = Matrix::Ones(2, 2) * 2.0;
    CHECK(relative_change(b, a) == doctest::Approx(1.0));
    CHECK(relative_change(a, Matrix::Zero(2, 2), 1.0) == doctest::Approx(2.0));
}
