// Leverage scores and a preconditioned solve on a random sparse matrix.

#include <cstdio>

#include <lspack/lspack.hpp>

int main() {
    using namespace lspack;

    const SparseMatrix A = random_sparse(200'000, 24, 6, 7);
    std::printf("A: %lld x %lld, nnz %lld, nnz2 %lld\n", static_cast<long long>(A.rows()),
                static_cast<long long>(A.cols()), static_cast<long long>(A.nnz()), static_cast<long long>(nnz2(A)));

    const auto exact  = leverage_gram_svd(A);
    const auto approx = leverage_hrn_approx(A, default_rcond, 0.5, 42);
    double     worst  = 0.0;
    for (std::size_t i = 0; i < exact.scores.size(); ++i)
        if (exact.scores[i] > 0.0)
            worst = std::max(worst, std::abs(approx.scores[i] - exact.scores[i]) / exact.scores[i]);
    std::printf("rank %lld, coherence %.4f, sum %.6f\n", static_cast<long long>(exact.k), exact.coherence(), exact.sum());
    std::printf("hrn_approx: max relative error %.3f\n", worst);

    auto P = build_preconditioner(A, 2.0, 1.0 / 3.0, 0.5, default_rcond, 42);
    std::printf("kappa(AN) = %.3f (bound %.3f)\n", verify_preconditioner(A, P), P.certificate().kappa_bound.value_or(-1.0));

    const Vector xs  = Vector::LinSpaced(A.cols(), 1.0, 2.0);
    const auto   res = lsqr_preconditioned(A, P, multiply(A, xs), 1e-12, 200);
    std::printf("LSQR: %lld iterations, relative error %.2e\n", static_cast<long long>(res.iterations),
                (res.x - xs).norm() / xs.norm());
    return 0;
}
