#pragma once
//
// Randomized embeddings: Gaussian, CountSketch, SRHT and the compositions
// CountGauss (G S) and SRHT-CountSketch (F S).
//
// Gaussian factors are stored unnormalized (i.i.d. N(0,1) entries); the
// preconditioning bounds are written for that scaling. Callers that need a
// norm-preserving embedding use apply_embedding(), which applies 1/sqrt(m).
//

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "kernels.hpp"
#include "matrix.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace lspack {

enum class sketch_kind {
    gaussian,
    countsketch,
    srht,
    countgauss,
    srht_countsketch,
    identity,   // S = I_n; degenerate "exact" sketch for diagnostics
};

inline std::string to_string(sketch_kind k) {
    switch (k) {
    case sketch_kind::gaussian: return "gaussian";
    case sketch_kind::countsketch: return "countsketch";
    case sketch_kind::srht: return "srht";
    case sketch_kind::countgauss: return "countgauss";
    case sketch_kind::srht_countsketch: return "srht_countsketch";
    case sketch_kind::identity: return "identity";
    }
    return "unknown";
}

inline sketch_kind parse_sketch_kind(const std::string & s) {
    for (auto k : {sketch_kind::gaussian, sketch_kind::countsketch, sketch_kind::srht, sketch_kind::countgauss,
                   sketch_kind::srht_countsketch, sketch_kind::identity})
        if (to_string(k) == s)
            return k;
    throw usage_error("unknown sketch kind '" + s + "'");
}

inline constexpr double        default_eps           = 0.5;
inline constexpr double        default_delta         = 1.0 / 3.0;
inline constexpr double        default_gamma         = 2.0;
inline constexpr std::uint64_t default_seed          = 42;
inline constexpr std::size_t   default_memory_budget = std::size_t(1) << 30;

//
// Declarative sketch description. m (output rows) and r (inner rows of a
// composition) may be left at 0, meaning "derive from gamma and (eps, delta)
// for the input at hand"; resolved() fills them in.
//
struct SketchSpec {
    sketch_kind   kind  = sketch_kind::countgauss;
    index_t       m     = 0;
    index_t       r     = 0;
    std::uint64_t seed  = default_seed;
    double        eps   = default_eps;
    double        delta = default_delta;
    double        gamma = default_gamma;

    void validate() const {
        if (!(eps > 0.0 && eps < 1.0))
            throw usage_error("eps must lie in (0,1)");
        if (!(delta > 0.0 && delta < 1.0))
            throw usage_error("delta must lie in (0,1)");
        if (!(gamma > 1.0 && gamma <= 3.0))
            throw usage_error("gamma must lie in (1,3]");
        if (m < 0 || r < 0)
            throw usage_error("sketch dimensions must be non-negative");
        const bool composite = kind == sketch_kind::countgauss || kind == sketch_kind::srht_countsketch;
        if (composite && m > 0 && r > 0 && r < m)
            throw usage_error("composite sketch needs r >= m");
    }

    SketchSpec resolved(index_t n, index_t d) const;

    friend bool operator==(const SketchSpec &, const SketchSpec &) = default;
};

namespace detail {

// ceil with a relative guard so exact integers computed with rounding
// error (e.g. 3660 / 0.1875) do not round up.
inline index_t guarded_ceil(double x) {
    return static_cast<index_t>(std::ceil(x * (1.0 - 1e-12)));
}

} // namespace detail

// CountSketch rows for an (eps, delta)-OSE of a d-dimensional subspace:
// ceil((d^2 + d) / (delta (2 eps - eps^2)^2)). delta >= 1 is clamped below 1.
inline index_t countsketch_rows(index_t d, double eps, double delta) {
    if (!(eps > 0.0 && eps < 1.0))
        throw usage_error("countsketch_rows: eps must lie in (0,1)");
    if (!(delta > 0.0))
        throw usage_error("countsketch_rows: delta must be positive");
    delta = std::min(delta, std::nextafter(1.0, 0.0));
    const double q  = 2.0 * eps - eps * eps;
    const double dd = static_cast<double>(d);
    return std::max<index_t>(1, detail::guarded_ceil((dd * dd + dd) / (delta * q * q)));
}

// Gaussian JLT rows for n_points vectors: ceil(4 ln n / (eps^2/2 - eps^3/3)).
inline index_t gaussian_jlt_rows(index_t n_points, double eps) {
    if (n_points < 2)
        throw usage_error("gaussian_jlt_rows: need at least two points");
    if (!(eps > 0.0 && eps < 1.0))
        throw usage_error("gaussian_jlt_rows: eps must lie in (0,1)");
    return detail::guarded_ceil(4.0 * std::log(static_cast<double>(n_points)) / (eps * eps / 2.0 - eps * eps * eps / 3.0));
}

// SRHT rows for a d-dimensional subspace of R^n: ceil(4 (sqrt d + sqrt ln(nd))^2 ln d).
inline index_t srht_rows(index_t n, index_t d) {
    if (d < 2 || n < d)
        throw usage_error("srht_rows: need n >= d >= 2");
    const double dd = static_cast<double>(d);
    const double s  = std::sqrt(dd) + std::sqrt(std::log(static_cast<double>(n) * dd));
    return detail::guarded_ceil(4.0 * s * s * std::log(dd));
}

inline SketchSpec SketchSpec::resolved(index_t n, index_t d) const {
    validate();
    SketchSpec s = *this;
    switch (kind) {
    case sketch_kind::identity:
        s.m = n;
        s.r = 0;
        break;
    case sketch_kind::gaussian:
        if (s.m == 0)
            s.m = static_cast<index_t>(std::ceil(gamma * static_cast<double>(d)));
        break;
    case sketch_kind::countsketch:
        if (s.m == 0)
            s.m = countsketch_rows(d, eps, delta);
        break;
    case sketch_kind::srht:
        if (s.m == 0)
            s.m = std::min<index_t>(srht_rows(std::max(n, d), std::max<index_t>(d, 2)),
                                    static_cast<index_t>(std::bit_ceil(static_cast<std::uint64_t>(std::max<index_t>(n, 1)))));
        break;
    case sketch_kind::countgauss:
        if (s.r == 0)
            s.r = countsketch_rows(d, eps, delta);
        if (s.m == 0)
            s.m = static_cast<index_t>(std::ceil(gamma * static_cast<double>(d)));
        break;
    case sketch_kind::srht_countsketch:
        if (s.r == 0)
            s.r = countsketch_rows(d, eps, delta);
        if (s.m == 0)
            s.m = std::min<index_t>(srht_rows(std::max(s.r, d), std::max<index_t>(d, 2)),
                                    static_cast<index_t>(std::bit_ceil(static_cast<std::uint64_t>(s.r))));
        break;
    }
    s.validate();
    return s;
}

//
// CountSketch S (r x n): column i has its single nonzero signs[i] at row
// hash_targets[i]. Targets and signs are fully independent uniform draws.
//
struct CountSketchPlan {
    index_t              out_rows = 0;
    std::vector<index_t> hash_targets;
    std::vector<double>  signs;

    static CountSketchPlan make(index_t n, index_t r, std::uint64_t seed) {
        if (r < 1)
            throw usage_error("CountSketch needs at least one row");
        const counter_stream hash(seed, stream_role::countsketch_hash);
        const counter_stream sign(seed, stream_role::countsketch_sign);
        CountSketchPlan      plan{r, std::vector<index_t>(static_cast<std::size_t>(n)), std::vector<double>(static_cast<std::size_t>(n))};
        for (index_t i = 0; i < n; ++i) {
            plan.hash_targets[static_cast<std::size_t>(i)] = static_cast<index_t>(hash.below(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(r)));
            plan.signs[static_cast<std::size_t>(i)]        = sign.sign(static_cast<std::uint64_t>(i));
        }
        return plan;
    }

    index_t in_rows() const { return static_cast<index_t>(hash_targets.size()); }
};

//
// S A in a single pass over the nonzeros. Input rows are bucketed by target
// (stable in row order) and each output row is summed by one worker, so the
// result is bitwise independent of the thread count.
//
inline DenseMatrix apply_countsketch(const SparseMatrix & A, const CountSketchPlan & plan) {
    if (plan.in_rows() != A.rows())
        throw usage_error("CountSketch plan covers " + std::to_string(plan.in_rows()) + " rows, matrix has " +
                          std::to_string(A.rows()));
    const index_t r = plan.out_rows;
    const index_t d = A.cols();

    std::vector<index_t> bucket(static_cast<std::size_t>(r) + 1, 0);
    for (auto h : plan.hash_targets)
        ++bucket[static_cast<std::size_t>(h) + 1];
    std::partial_sum(bucket.begin(), bucket.end(), bucket.begin());
    std::vector<index_t> order(plan.hash_targets.size());
    {
        std::vector<index_t> fill(bucket.begin(), bucket.end() - 1);
        for (index_t i = 0; i < A.rows(); ++i)
            order[static_cast<std::size_t>(fill[plan.hash_targets[i]]++)] = i;
    }

    DenseMatrix SA = DenseMatrix::Zero(r, d);
#pragma omp parallel for num_threads(num_workers()) schedule(static)
    for (index_t t = 0; t < r; ++t) {
        double * out = SA.data() + t * d;
        for (index_t p = bucket[t]; p < bucket[t + 1]; ++p) {
            const index_t i   = order[static_cast<std::size_t>(p)];
            const double  s   = plan.signs[static_cast<std::size_t>(i)];
            const auto    row = A.row(i);
            for (std::size_t q = 0; q < row.size(); ++q)
                out[row.cols[q]] += s * row.vals[q];
        }
    }
    return SA;
}

//
// G B for a dense r x d input, G m x r with entry (i, j) drawn at counter
// i*r + j of the Gaussian stream. G is generated in row batches sized so a
// batch plus the input and output fit in memory_budget bytes.
//
inline constexpr index_t gemm_chunk = 64;

inline DenseMatrix apply_gaussian(const DenseMatrix & B, index_t m, std::uint64_t seed,
                                  std::size_t memory_budget = default_memory_budget,
                                  index_t batch_rows = 0) {
    if (m < 1)
        throw usage_error("apply_gaussian: m must be at least 1");
    const index_t r = B.rows();
    const index_t d = B.cols();

    if (batch_rows <= 0) {
        const double fixed = 8.0 * static_cast<double>(r * d + m * d);
        const double room  = static_cast<double>(memory_budget) - fixed;
        batch_rows = room > 8.0 * static_cast<double>(r) ? static_cast<index_t>(room / (8.0 * static_cast<double>(r))) : 1;
    }
    batch_rows = std::clamp<index_t>(batch_rows, 1, m);

    const counter_stream rng(seed, stream_role::gaussian);
    DenseMatrix          out(m, d);
    DenseMatrix          G;
    for (index_t start = 0; start < m; start += batch_rows) {
        const index_t rows = std::min(batch_rows, m - start);
        G.resize(rows, r);
#pragma omp parallel for num_threads(num_workers()) schedule(static)
        for (index_t i = 0; i < rows; ++i) {
            const auto base = static_cast<std::uint64_t>((start + i) * r);
            for (index_t j = 0; j < r; ++j)
                G(i, j) = rng.normal(base + static_cast<std::uint64_t>(j));
        }
        // Fixed row chunks, each multiplied sequentially inside the team, so
        // the result does not depend on the thread count.
        const index_t chunks = (rows + gemm_chunk - 1) / gemm_chunk;
#pragma omp parallel for num_threads(num_workers()) schedule(static)
        for (index_t c = 0; c < chunks; ++c) {
            const index_t s0  = c * gemm_chunk;
            const index_t len = std::min(gemm_chunk, rows - s0);
            out.middleRows(start + s0, len).noalias() = G.middleRows(s0, len) * B;
        }
    }
    return out;
}

//
// G A for a sparse n x d input without forming G: G is m x n with entry
// (i, j) at counter i*n + j, consistent with apply_gaussian on A densified.
// Cost O(nnz(A) m) plus m n normal draws.
//
inline DenseMatrix gaussian_sketch(const SparseMatrix & A, index_t m, std::uint64_t seed) {
    if (m < 1)
        throw usage_error("gaussian_sketch: m must be at least 1");
    const index_t n       = A.rows();
    const index_t d       = A.cols();
    const int     workers = static_cast<int>(std::min<index_t>(num_workers(), std::max<index_t>(n / 4096, 1)));
    const counter_stream rng(seed, stream_role::gaussian);

    // Column-major accumulators so each nonzero updates a contiguous column.
    std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(workers), Eigen::MatrixXd::Zero(m, d));
#pragma omp parallel num_threads(workers)
    {
        Eigen::VectorXd g(m);
        auto &          acc = partial[static_cast<std::size_t>(worker_id())];
#pragma omp for schedule(static)
        for (index_t j = 0; j < n; ++j) {
            const auto row = A.row(j);
            if (row.size() == 0)
                continue;
            for (index_t i = 0; i < m; ++i)
                g[i] = rng.normal(static_cast<std::uint64_t>(i * n + j));
            for (std::size_t p = 0; p < row.size(); ++p)
                acc.col(row.cols[p]).noalias() += row.vals[p] * g;
        }
    }
    for (std::size_t w = 1; w < partial.size(); ++w)
        partial[0] += partial[w];
    return DenseMatrix(partial[0]);
}

// In-place orthonormal Walsh-Hadamard transform along the rows of M
// (row count a power of two), scaled by 1/sqrt(p). Applying it twice is the
// identity.
inline void fwht_rows(DenseMatrix & M) {
    const index_t p = M.rows();
    if (p == 0)
        return;
    if (!std::has_single_bit(static_cast<std::uint64_t>(p)))
        throw usage_error("fwht_rows: row count must be a power of two");
    const index_t d = M.cols();
    for (index_t h = 1; h < p; h *= 2) {
#pragma omp parallel for num_threads(num_workers()) schedule(static)
        for (index_t block = 0; block < p / (2 * h); ++block) {
            const index_t base = block * 2 * h;
            for (index_t i = base; i < base + h; ++i) {
                double * a = M.data() + i * d;
                double * b = M.data() + (i + h) * d;
                for (index_t c = 0; c < d; ++c) {
                    const double x = a[c], y = b[c];
                    a[c] = x + y;
                    b[c] = x - y;
                }
            }
        }
    }
    M *= 1.0 / std::sqrt(static_cast<double>(p));
}

//
// SRHT: zero-pad B (r x d) to p = next power of two rows, flip row signs
// (D), apply the orthonormal Hadamard transform, keep t distinct rows chosen
// uniformly without replacement and scale by sqrt(p / t). The kept rows are
// returned in increasing index order.
//
inline DenseMatrix apply_srht(const DenseMatrix & B, index_t t, std::uint64_t seed) {
    const index_t r = B.rows();
    const index_t d = B.cols();
    const auto    p = static_cast<index_t>(std::bit_ceil(static_cast<std::uint64_t>(std::max<index_t>(r, 1))));
    if (t < 1 || t > p)
        throw usage_error("apply_srht: t must lie in [1, " + std::to_string(p) + "]");

    const counter_stream sign(seed, stream_role::srht_sign);
    DenseMatrix          H = DenseMatrix::Zero(p, d);
    for (index_t i = 0; i < r; ++i)
        H.row(i) = sign.sign(static_cast<std::uint64_t>(i)) * B.row(i);
    fwht_rows(H);

    // partial Fisher-Yates
    const counter_stream pick(seed, stream_role::srht_sample);
    std::vector<index_t> idx(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), 0);
    for (index_t i = 0; i < t; ++i) {
        const auto j = i + static_cast<index_t>(pick.below(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(p - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    std::sort(idx.begin(), idx.begin() + t);

    const double scale = std::sqrt(static_cast<double>(p) / static_cast<double>(t));
    DenseMatrix  out(t, d);
    for (index_t i = 0; i < t; ++i)
        out.row(i) = scale * H.row(idx[static_cast<std::size_t>(i)]);
    return out;
}

struct CountGaussOptions {
    index_t     inner_rows    = 0;   // CountSketch rows; 0 derives from (eps, delta)
    index_t     out_rows      = 0;   // Gaussian rows; 0 derives from gamma
    std::size_t memory_budget = default_memory_budget;
};

// True when A is not in the n >> d^2 regime CountGauss is designed for.
inline bool below_tall_regime(const SparseMatrix & A) { return A.rows() < A.cols() * A.cols(); }

namespace detail {

inline void check_intermediate(index_t r, index_t d, std::size_t budget, const char * suggestion) {
    const double bytes = 8.0 * static_cast<double>(r) * static_cast<double>(d);
    if (bytes > static_cast<double>(budget))
        throw memory_budget_error("CountSketch intermediate of " + std::to_string(r) + "x" + std::to_string(d) +
                                  " exceeds the memory budget of " + std::to_string(budget) + " bytes; " + suggestion);
}

} // namespace detail

//
// CountGauss sketch G (S A): r = countsketch_rows(d, eps, delta) and
// m = ceil(gamma d) unless overridden. Cost O(nnz(A) + m d r).
//
inline DenseMatrix countgauss_sketch(const SparseMatrix & A, double gamma, double delta, double eps, std::uint64_t seed,
                                     const CountGaussOptions & opts = {}) {
    SketchSpec spec{sketch_kind::countgauss, opts.out_rows, opts.inner_rows, seed, eps, delta, gamma};
    spec = spec.resolved(A.rows(), A.cols());
    detail::check_intermediate(spec.r, A.cols(), opts.memory_budget,
                               "use the srht_countsketch kind or a smaller inner row count");
    const auto plan = CountSketchPlan::make(A.rows(), spec.r, seed);
    return apply_gaussian(apply_countsketch(A, plan), spec.m, seed, opts.memory_budget);
}

// F (S A) with F a t-row SRHT. Cost O(nnz(A) + r d log r).
inline DenseMatrix srht_countsketch(const SparseMatrix & A, index_t t, double eps, double delta, std::uint64_t seed,
                                    const CountGaussOptions & opts = {}) {
    const index_t r = opts.inner_rows > 0 ? opts.inner_rows : countsketch_rows(A.cols(), eps, delta);
    detail::check_intermediate(static_cast<index_t>(std::bit_ceil(static_cast<std::uint64_t>(r))), A.cols(),
                               opts.memory_budget, "use a smaller inner row count");
    const auto plan = CountSketchPlan::make(A.rows(), r, seed);
    return apply_srht(apply_countsketch(A, plan), t, seed);
}

// Raw sketch per spec (Gaussian factors unnormalized).
inline DenseMatrix sketch(const SparseMatrix & A, const SketchSpec & spec_in,
                          std::size_t memory_budget = default_memory_budget) {
    const SketchSpec spec = spec_in.resolved(A.rows(), A.cols());
    switch (spec.kind) {
    case sketch_kind::identity:
        return A.to_dense();
    case sketch_kind::gaussian:
        return gaussian_sketch(A, spec.m, spec.seed);
    case sketch_kind::countsketch:
        detail::check_intermediate(spec.m, A.cols(), memory_budget, "reduce m");
        return apply_countsketch(A, CountSketchPlan::make(A.rows(), spec.m, spec.seed));
    case sketch_kind::srht:
        if (spec.m > static_cast<index_t>(std::bit_ceil(static_cast<std::uint64_t>(std::max<index_t>(A.rows(), 1)))))
            throw usage_error("srht: m exceeds the padded row count");
        return apply_srht(A.to_dense(), spec.m, spec.seed);
    case sketch_kind::countgauss:
        return countgauss_sketch(A, spec.gamma, spec.delta, spec.eps, spec.seed, {spec.r, spec.m, memory_budget});
    case sketch_kind::srht_countsketch:
        return srht_countsketch(A, spec.m, spec.eps, spec.delta, spec.seed, {spec.r, 0, memory_budget});
    }
    throw usage_error("unknown sketch kind");
}

// Scale that turns sketch() into a norm-preserving embedding.
inline double embedding_scale(const SketchSpec & resolved_spec) {
    switch (resolved_spec.kind) {
    case sketch_kind::gaussian:
    case sketch_kind::countgauss:
        return 1.0 / std::sqrt(static_cast<double>(resolved_spec.m));
    default:
        return 1.0;
    }
}

inline DenseMatrix apply_embedding(const SparseMatrix & A, const SketchSpec & spec,
                                   std::size_t memory_budget = default_memory_budget) {
    const SketchSpec resolved = spec.resolved(A.rows(), A.cols());
    DenseMatrix      S        = sketch(A, resolved, memory_budget);
    S *= embedding_scale(resolved);
    return S;
}

} // namespace lspack
