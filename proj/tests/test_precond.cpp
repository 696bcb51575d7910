#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace lspack;

namespace {

SpectrumSpec geometric(double kappa, int d) {
    std::vector<double> s(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
        s[static_cast<std::size_t>(j)] = std::pow(kappa, -static_cast<double>(j) / (d - 1));
    return SpectrumSpec(s);
}

Preconditioner default_preconditioner(const SparseMatrix & A, std::uint64_t seed, precond_route route = precond_route::svd,
                                      double zeta = default_rcond) {
    return build_preconditioner(A, default_gamma, default_delta, default_eps, zeta, seed, route);
}

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST(KappaBound, Values) {
    EXPECT_NEAR(kappa_bound(0.3, 100, 25, 0.0), 9.0, 1e-12);
    EXPECT_DOUBLE_EQ(kappa_bound(0.3, 100, 25, 0.0), xi_factor(0.3, 25, 100));
    EXPECT_NEAR(kappa_bound(0.3, 100, 25, 0.5), 27.0, 1e-11);
    double prev = 0.0;
    for (double a : {0.1, 0.3, 0.45, 0.49, 0.499, 0.49999}) {
        const double b = kappa_bound(a, 100, 25, 0.0);
        EXPECT_GT(b, prev);
        prev = b;
    }
    EXPECT_GT(prev, 1e4);
    EXPECT_THROW(kappa_bound(0.5, 100, 25, 0.0), usage_error);
    EXPECT_THROW(kappa_bound(0.0, 100, 25, 0.0), usage_error);
    EXPECT_THROW(kappa_bound(0.3, 100, 25, 1.0), usage_error);
}

TEST(Build, OrthonormalColumnsWithinBound) {
    const index_t n = 5000, d = 60;
    const auto    A = SparseMatrix::from_dense(orthonormal_factor(n, d, 1, stream_role::generator_left));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto         P     = default_preconditioner(A, seed);
        const double kappa = verify_preconditioner(A, P);
        ASSERT_TRUE(P.certificate().kappa_bound.has_value());
        EXPECT_LE(kappa, P.certificate().kappa_bound.value()) << "seed " << seed;
        EXPECT_EQ(P.certificate().kappa_measured, kappa);
    }
}

TEST(Build, IllConditionedWithinSameBound) {
    const index_t n = 5000, d = 60;
    const auto    A = SparseMatrix::from_dense(generate_fixed_spectrum(n, d, geometric(1e10, d), 2));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        // cutoff below 1/kappa(A) so the full rank is kept
        auto P = default_preconditioner(A, seed, precond_route::svd, 1e-12);
        EXPECT_EQ(P.rank(), d);
        EXPECT_LE(verify_preconditioner(A, P), P.certificate().kappa_bound.value());
    }
}

TEST(Build, ShapesAndCertificate) {
    const auto A = random_sparse(30000, 60, 4, 3);
    const auto P = default_preconditioner(A, 3);
    EXPECT_EQ(P.certificate().m, 120);
    EXPECT_EQ(P.N().rows(), 60);
    EXPECT_LE(P.N().cols(), 60);
    EXPECT_NEAR(P.certificate().alpha, std::sqrt(2 * std::log(100.0) / 120), 1e-15);
    EXPECT_EQ(P.certificate().eps, default_eps);

    // alpha outside its domain: no bound reported
    const auto Q = default_preconditioner(random_sparse(2000, 10, 3, 1), 1);
    EXPECT_FALSE(Q.certificate().kappa_bound.has_value());
}

TEST(Build, ZeroMatrixRejected) {
    const SparseMatrix Z(500, 4, std::vector<index_t>(501, 0), {}, {});
    EXPECT_THROW(default_preconditioner(Z, 1), numerical_error);
}

TEST(Build, RankDeficientReducesColumns) {
    const Eigen::MatrixXd base = random_sparse(3000, 6, 3, 2).to_dense();
    Eigen::MatrixXd       M(3000, 10);
    M << base, base.leftCols(4) * 2.0 - base.rightCols(4);
    const auto A = SparseMatrix::from_dense(M);
    for (auto route : {precond_route::svd, precond_route::qr}) {
        const auto P = default_preconditioner(A, 2, route);
        EXPECT_EQ(P.rank(), 6);
        EXPECT_EQ(P.N().cols(), 6);
    }
}

TEST(Apply, MatchesExplicitN) {
    for (double kappa : {1.0, 1e3}) {
        const auto A = SparseMatrix::from_dense(generate_fixed_spectrum(3000, 12, geometric(kappa, 12), 5));
        for (auto route : {precond_route::svd, precond_route::qr, precond_route::identity}) {
            const auto      P = default_preconditioner(A, 5, route);
            const Vector    y = gaussian_matrix(P.rank(), 1, 1, stream_role::jlt).col(0);
            const Vector    x = gaussian_matrix(12, 1, 2, stream_role::jlt).col(0);
            const Vector    Ny  = P.N() * y;
            const Vector    Ntx = P.N().transpose() * x;
            EXPECT_LE((P.apply(y) - Ny).norm(), 1e-12 * Ny.norm());
            EXPECT_LE((P.apply_transpose(x) - Ntx).norm(), 1e-12 * Ntx.norm());
            const Eigen::MatrixXd AN = oracle::dense(A) * Eigen::MatrixXd(P.N());
            EXPECT_LE((Eigen::MatrixXd(P.apply_to(A)) - AN).norm(), 1e-10 * AN.norm());
        }
    }
    const auto P = Preconditioner::identity(3);
    EXPECT_THROW(P.apply(Vector::Zero(4)), usage_error);
    EXPECT_THROW(P.apply_transpose(Vector::Zero(2)), usage_error);
}

TEST(Spectrum, MatchesPseudoinverseOfSketchedBasis) {
    const index_t   n = 4000, d = 20;
    const auto      M = generate_fixed_spectrum(n, d, geometric(1e6, d), 7);
    const auto      A = SparseMatrix::from_dense(M);
    const auto      U = SparseMatrix::from_dense(oracle::svd(M).U);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto P   = default_preconditioner(A, seed);
        const auto s   = singular_values(P.apply_to(A));
        const auto GSU = countgauss_sketch(U, default_gamma, default_delta, default_eps, seed);
        const auto t   = oracle::svd(GSU).s;
        for (index_t j = 0; j < d; ++j)
            EXPECT_LE(relative(s[j], 1.0 / t[d - 1 - j]), 1e-8) << "seed " << seed << " j " << j;
    }
}

TEST(Spectrum, BoundHoldsAcrossSeeds) {
    const index_t n = 5000, d = 60;
    const auto    A  = SparseMatrix::from_dense(generate_fixed_spectrum(n, d, geometric(1e8, d), 4));
    int           ok = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto P = default_preconditioner(A, seed);
        // (1 - 2 exp(-alpha^2 m / 2)) = 0.98 at the default alpha
        EXPECT_GE(1 - 2 * std::exp(-std::pow(P.certificate().alpha, 2) * static_cast<double>(P.certificate().m) / 2), 0.97);
        ok += verify_preconditioner(A, P) <= P.certificate().kappa_bound.value();
    }
    EXPECT_GE(ok, 19);
}

TEST(Routes, QrAndSvdAgree) {
    const index_t n = 5000, d = 60;
    for (double last : {1e-2, 1e-6, 1e-10}) {
        const auto A = SparseMatrix::from_dense(generate_fixed_spectrum(n, d, spectra::linspace(1.0, last, d), 11));
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            auto         Ps = default_preconditioner(A, seed, precond_route::svd);
            auto         Pq = default_preconditioner(A, seed, precond_route::qr);
            const double ks = verify_preconditioner(A, Ps);
            const double kq = verify_preconditioner(A, Pq);
            EXPECT_LE(relative(kq, ks), 1e-6) << last << " seed " << seed;
        }
    }
}

TEST(Lsqr, ConsistentSystem) {
    const index_t n = 5000, d = 40;
    const auto    A  = SparseMatrix::from_dense(generate_fixed_spectrum(n, d, geometric(1e4, d), 3));
    const Vector  xs = gaussian_matrix(d, 1, 9, stream_role::jlt).col(0);
    const Vector  b  = multiply(A, xs);
    const auto    P  = default_preconditioner(A, 3);
    const auto    r  = lsqr_preconditioned(A, P, b, 1e-14, 200);
    EXPECT_TRUE(r.converged);
    EXPECT_LE((r.x - xs).norm() / xs.norm(), 1e-8);
    for (std::size_t j = 1; j < r.residual_history.size(); ++j)
        EXPECT_LE(r.residual_history[j], r.residual_history[j - 1] * (1 + 1e-12));
}

TEST(Lsqr, OverdeterminedMatchesNormalEquations) {
    const index_t   n = 3000, d = 15;
    const auto      M = generate_fixed_spectrum(n, d, geometric(1e4, d), 6);
    const auto      A = SparseMatrix::from_dense(M);
    const Vector    b = gaussian_matrix(n, 1, 6, stream_role::jlt).col(0);
    const auto      r = lsqr_preconditioned(A, default_preconditioner(A, 6), b, 1e-14, 200);
    const auto      f = oracle::svd(M);
    const Vector    x = f.V * (f.U.transpose() * b).cwiseQuotient(f.s);
    EXPECT_LE((r.x - x).norm() / x.norm(), 1e-9);
}

TEST(Lsqr, PreconditioningCutsIterations) {
    const index_t n = 5000, d = 60;
    const auto    A  = SparseMatrix::from_dense(generate_fixed_spectrum(n, d, geometric(1e8, d), 8));
    const Vector  b  = gaussian_matrix(n, 1, 8, stream_role::jlt).col(0);
    const auto    pre  = lsqr_preconditioned(A, default_preconditioner(A, 8), b, 1e-10, 1000);
    const auto    none = lsqr_preconditioned(A, Preconditioner::identity(d), b, 1e-10, 1000);
    EXPECT_TRUE(pre.converged);
    EXPECT_LE(pre.iterations, 50);
    EXPECT_FALSE(none.converged);
    EXPECT_EQ(none.iterations, 1000);
    EXPECT_EQ(none.residual_history.size(), 1001U);
}

TEST(Lsqr, RightHandSideOrthogonalToRange) {
    const index_t         n = 2000, d = 8;
    const Eigen::MatrixXd Q = orthonormal_factor(n, d + 1, 4, stream_role::generator_left);
    const auto            A = SparseMatrix::from_dense(Eigen::MatrixXd(Q.leftCols(d)));
    const Vector          b = Q.col(d) * 3.0;
    const auto            r = lsqr_preconditioned(A, default_preconditioner(A, 4), b, 1e-10, 100);
    EXPECT_LE(r.x.norm(), 1e-10 * b.norm());
}

TEST(Lsqr, RankDeficientGivesMinimumNorm) {
    const Eigen::MatrixXd base = random_sparse(3000, 6, 3, 5).to_dense();
    Eigen::MatrixXd       M(3000, 9);
    M << base, base.leftCols(3) + base.rightCols(3);
    const auto   A = SparseMatrix::from_dense(M);
    const Vector b = gaussian_matrix(3000, 1, 5, stream_role::jlt).col(0);
    const auto   r = lsqr_preconditioned(A, default_preconditioner(A, 5), b, 1e-14, 200);
    const auto   f = oracle::svd(M);
    Vector       x = Vector::Zero(9);
    for (index_t j = 0; j < 6; ++j)
        x += f.V.col(j) * (f.U.col(j).dot(b) / f.s[j]);
    EXPECT_LE((r.x - x).norm() / x.norm(), 1e-8);
}

TEST(Lsqr, ZeroRightHandSideAndErrors) {
    const auto A = random_sparse(400, 5, 2, 1);
    const auto P = default_preconditioner(A, 1);
    const auto r = lsqr_preconditioned(A, P, Vector::Zero(400), 1e-10, 10);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.x, Vector::Zero(5));
    EXPECT_THROW(lsqr_preconditioned(A, P, Vector::Zero(399), 1e-10, 10), usage_error);
    EXPECT_THROW(lsqr_preconditioned(A, Preconditioner::identity(4), Vector::Zero(400), 1e-10, 10), usage_error);
}
