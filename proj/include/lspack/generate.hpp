#pragma once
//
// Synthetic test matrices: prescribed singular spectra, random sparse
// patterns and dense Gaussian (incoherent) matrices. All draws come from
// counter streams, so a (size, seed) pair always yields the same matrix.
//

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/QR>

#include "matrix.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace lspack {

// Row-major n x k matrix of standard normals, entry (i, j) at counter i*k + j.
inline DenseMatrix gaussian_matrix(index_t n, index_t k, std::uint64_t seed, stream_role role) {
    const counter_stream rng(seed, role);
    DenseMatrix          G(n, k);
#pragma omp parallel for num_threads(num_workers()) schedule(static)
    for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < k; ++j)
            G(i, j) = rng.normal(static_cast<std::uint64_t>(i * k + j));
    return G;
}

// Thin orthonormal factor from the Householder QR of a seeded Gaussian n x k.
inline Eigen::MatrixXd orthonormal_factor(index_t n, index_t k, std::uint64_t seed, stream_role role) {
    Eigen::MatrixXd                      G = gaussian_matrix(n, k, seed, role);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    return qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
}

//
// A = U diag(spec) V^T with U (n x k) and V (d x k) orthonormal,
// k = spec.size() <= d <= n.
//
inline DenseMatrix generate_fixed_spectrum(index_t n, index_t d, const SpectrumSpec & spec, std::uint64_t seed) {
    const auto k = static_cast<index_t>(spec.size());
    if (k > d || d > n)
        throw usage_error("generate_fixed_spectrum requires len(spectrum) <= d <= n, got " + std::to_string(k) +
                          ", " + std::to_string(d) + ", " + std::to_string(n));
    const Eigen::MatrixXd U = orthonormal_factor(n, k, seed, stream_role::generator_left);
    const Eigen::MatrixXd V = orthonormal_factor(d, k, seed, stream_role::generator_right);
    const Eigen::Map<const Eigen::VectorXd> s(spec.values().data(), k);
    return DenseMatrix(U * s.asDiagonal() * V.transpose());
}

namespace spectra {

inline SpectrumSpec blocks(std::initializer_list<std::pair<int, double>> parts) {
    std::vector<double> v;
    for (const auto & [count, value] : parts)
        v.insert(v.end(), static_cast<std::size_t>(count), value);
    return SpectrumSpec(std::move(v));
}

// 15 x 1, 15 x 1e-6, 30 x 1e-7: kappa 1e7, numerical rank 30 at 10^-6.5.
inline SpectrumSpec fixed_svd_1e7() { return blocks({{15, 1.0}, {15, 1e-6}, {30, 1e-7}}); }

// 15 x 1, 15 x 1e-3, 30 x 4e-5: kappa 2.5e4.
inline SpectrumSpec fixed_svd_2_5e4() { return blocks({{15, 1.0}, {15, 1e-3}, {30, 4e-5}}); }

// linspace(first, last, count), first >= last > 0.
inline SpectrumSpec linspace(double first, double last, int count) {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        v[static_cast<std::size_t>(i)] = count == 1 ? first : first + (last - first) * i / (count - 1);
    if (count > 1)
        v.back() = last;
    return SpectrumSpec(std::move(v));
}

// Large-gap surrogate: `strong` values log-spaced on [1, 1e-3] followed by
// `weak` directions at 1e-14.
inline SpectrumSpec large_gap(int strong = 64, int weak = 7) {
    std::vector<double> v;
    for (int i = 0; i < strong; ++i)
        v.push_back(std::pow(10.0, strong == 1 ? 0.0 : -3.0 * i / (strong - 1)));
    v.insert(v.end(), static_cast<std::size_t>(weak), 1e-14);
    return SpectrumSpec(std::move(v));
}

inline SpectrumSpec by_name(const std::string & name, int d, double last) {
    if (name == "fixed_svd_1e7")
        return fixed_svd_1e7();
    if (name == "fixed_svd_2.5e4")
        return fixed_svd_2_5e4();
    if (name == "linspace")
        return linspace(1.0, last, d);
    if (name == "large_gap")
        return large_gap();
    throw usage_error("unknown spectrum preset '" + name + "'");
}

} // namespace spectra

//
// n x d sparse matrix with exactly min(per_row, d) nonzeros per row at
// uniformly chosen distinct columns; values standard normal.
//
inline SparseMatrix random_sparse(index_t n, index_t d, index_t per_row, std::uint64_t seed) {
    per_row = std::min(per_row, d);
    const counter_stream pick(seed, stream_role::generator_sparse);
    const counter_stream value(seed, stream_role::generator_left);

    std::vector<index_t>     offsets(static_cast<std::size_t>(n) + 1);
    std::vector<col_index_t> colidx(static_cast<std::size_t>(n * per_row));
    std::vector<double>      vals(static_cast<std::size_t>(n * per_row));
    for (index_t i = 0; i <= n; ++i)
        offsets[static_cast<std::size_t>(i)] = i * per_row;

#pragma omp parallel num_threads(num_workers())
    {
        std::vector<col_index_t> cols;
#pragma omp for schedule(static)
        for (index_t i = 0; i < n; ++i) {
            // Floyd's sampling of per_row distinct columns.
            cols.clear();
            for (index_t j = d - per_row; j < d; ++j) {
                const auto c = static_cast<col_index_t>(pick.below(static_cast<std::uint64_t>(i * d + j), static_cast<std::uint64_t>(j + 1)));
                cols.push_back(std::find(cols.begin(), cols.end(), c) == cols.end() ? c : static_cast<col_index_t>(j));
            }
            std::sort(cols.begin(), cols.end());
            for (index_t p = 0; p < per_row; ++p) {
                const auto dst = static_cast<std::size_t>(i * per_row + p);
                colidx[dst]    = cols[static_cast<std::size_t>(p)];
                double v       = value.normal(dst);
                vals[dst]      = v != 0.0 ? v : 1.0;
            }
        }
    }
    return SparseMatrix(n, d, std::move(offsets), std::move(colidx), std::move(vals));
}

} // namespace lspack
