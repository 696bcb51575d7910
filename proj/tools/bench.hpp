#pragma once
//
// Experiment suites behind `lspack bench`. Each writes a plot-ready CSV
// table, one row per (configuration, seed) unless noted.
//

#include <chrono>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <lspack/lspack.hpp>

namespace lspack::bench {

struct Options {
    double        scale = 1.0;   // multiplies the row count n
    int           seeds = 20;
    std::uint64_t seed  = default_seed;
    bool          aggregate = false;
};

template <typename F>
double seconds(F && f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline index_t scaled(index_t n, double scale) {
    return std::max<index_t>(1, static_cast<index_t>(std::llround(static_cast<double>(n) * scale)));
}

inline std::string fmt(double v) { return format_double(v); }

// op,m,r,t_min,t_avg,t_max for SA, GA and GSA on a random sparse matrix.
inline void sketch_timing(const Options & o, std::ostream & out) {
    const index_t n = scaled(1'000'000, o.scale);
    const index_t d = 64;
    const auto    A = random_sparse(n, d, 20, o.seed);
    const index_t m = 2 * d;
    const int     reps = std::max(1, std::min(o.seeds, 5));

    out << "op,n,d,m,r,t_min,t_avg,t_max\n";
    auto row = [&](const std::string & op, index_t mm, index_t r, const std::vector<double> & t) {
        double lo = t[0], hi = t[0], sum = 0.0;
        for (double v : t) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        out << op << ',' << n << ',' << d << ',' << mm << ',' << r << ',' << fmt(lo) << ','
            << fmt(sum / static_cast<double>(t.size())) << ',' << fmt(hi) << '\n';
    };

    const std::vector<index_t> inner = {8 * d, 64 * d, countsketch_rows(d, default_eps, default_delta)};
    for (index_t r : inner) {
        std::vector<double> ts, tgs;
        for (int s = 0; s < reps; ++s) {
            const auto seed = derive_seed(o.seed, static_cast<std::uint64_t>(s));
            ts.push_back(seconds([&] { (void)apply_countsketch(A, CountSketchPlan::make(n, r, seed)); }));
            tgs.push_back(seconds([&] { (void)countgauss_sketch(A, default_gamma, default_delta, default_eps, seed, {r, m}); }));
        }
        row("SA", 0, r, ts);
        row("GSA", m, r, tgs);
    }
    std::vector<double> tg;
    for (int s = 0; s < reps; ++s)
        tg.push_back(seconds([&] { (void)gaussian_sketch(A, m, derive_seed(o.seed, static_cast<std::uint64_t>(s))); }));
    row("GA", m, 0, tg);
    std::vector<double> tgram;
    for (int s = 0; s < reps; ++s)
        tgram.push_back(seconds([&] { (void)gram(A); }));
    row("gram", 0, 0, tgram);
}

// kappa(AN) across spectra linspace(1, r, 60) for both constructions.
inline void precond_sweep(const Options & o, std::ostream & out) {
    const index_t n = scaled(5000, o.scale);
    const index_t d = 60;
    if (o.aggregate)
        out << "r,kappa_A,kappa_bound,kappa_AN_min,kappa_AN_mean,kappa_AN_max,within_bound,seeds\n";
    else
        out << "r,seed,kappa_A,kappa_bound,kappa_AN_svd,kappa_AN_qr,within_bound\n";

    for (int e = 2; e <= 10; ++e) {
        const double      last = std::pow(10.0, -e);
        const auto        spec = spectra::linspace(1.0, last, static_cast<int>(d));
        double            lo = INFINITY, hi = 0.0, sum = 0.0, bound = 0.0;
        int               within = 0;
        for (int s = 0; s < o.seeds; ++s) {
            const auto seed = derive_seed(o.seed, static_cast<std::uint64_t>(s));
            const auto A    = SparseMatrix::from_dense(generate_fixed_spectrum(n, d, spec, seed));
            auto       Psvd = build_preconditioner(A, default_gamma, default_delta, default_eps, default_rcond, seed, precond_route::svd);
            auto       Pqr  = build_preconditioner(A, default_gamma, default_delta, default_eps, default_rcond, seed, precond_route::qr);
            const double ks = verify_preconditioner(A, Psvd);
            const double kq = verify_preconditioner(A, Pqr);
            bound           = Psvd.certificate().kappa_bound.value_or(INFINITY);
            const bool ok   = ks <= bound;
            within += ok;
            lo = std::min(lo, ks);
            hi = std::max(hi, ks);
            sum += ks;
            if (!o.aggregate)
                out << fmt(last) << ',' << seed << ',' << fmt(spec.condition_number()) << ',' << fmt(bound) << ','
                    << fmt(ks) << ',' << fmt(kq) << ',' << ok << '\n';
        }
        if (o.aggregate)
            out << fmt(last) << ',' << fmt(spec.condition_number()) << ',' << fmt(bound) << ',' << fmt(lo) << ','
                << fmt(sum / o.seeds) << ',' << fmt(hi) << ',' << within << ',' << o.seeds << '\n';
    }
}

// Detected rank on the fixed-spectrum and large-gap presets via GA and GSA.
inline void rank_detect(const Options & o, std::ostream & out) {
    const index_t n = scaled(5000, o.scale);
    struct Case {
        std::string  name;
        SpectrumSpec spec;
        index_t      d;
        double       zeta;
        index_t      expected;
    };
    const std::vector<Case> cases = {
        {"fixed_svd_1e7", spectra::fixed_svd_1e7(), 60, std::pow(10.0, -6.5), 30},
        {"large_gap", spectra::large_gap(), 71, 1e-10, 64},
    };
    out << "preset,path,seed,k,expected,method,success\n";
    for (const auto & c : cases) {
        for (int s = 0; s < o.seeds; ++s) {
            const auto seed = derive_seed(o.seed, static_cast<std::uint64_t>(s));
            const auto A    = SparseMatrix::from_dense(generate_fixed_spectrum(std::max(n, c.d), c.d, c.spec, seed));
            for (const auto kind : {sketch_kind::gaussian, sketch_kind::countgauss}) {
                SketchSpec spec;
                spec.kind     = kind;
                spec.seed     = seed;
                const auto r  = sketch_srrqr(A, spec, c.zeta).rank;
                out << c.name << ',' << (kind == sketch_kind::gaussian ? "GA" : "GSA") << ',' << seed << ',' << r.k
                    << ',' << c.expected << ',' << to_string(r.method) << ',' << (r.k == c.expected) << '\n';
            }
        }
    }
}

// Dense n x d matrix with i.i.d. normal entries: leverage scores close to d/n.
inline SparseMatrix incoherent_matrix(index_t n, index_t d, std::uint64_t seed) {
    return SparseMatrix::from_dense(gaussian_matrix(n, d, seed, stream_role::generator_left));
}

struct AccuracyStats {
    double max_rel     = 0.0;
    double frac_within = 0.0;   // fraction of rows with relative error <= 0.5
};

inline AccuracyStats accuracy(const std::vector<double> & exact, const std::vector<double> & approx) {
    AccuracyStats st;
    std::size_t   within = 0, counted = 0;
    for (std::size_t i = 0; i < exact.size(); ++i) {
        if (exact[i] <= 0.0)
            continue;
        const double rel = std::abs(approx[i] - exact[i]) / exact[i];
        st.max_rel       = std::max(st.max_rel, rel);
        within += rel <= 0.5;
        ++counted;
    }
    st.frac_within = counted ? static_cast<double>(within) / static_cast<double>(counted) : 1.0;
    return st;
}

// Leverage score accuracy of the estimators against gram_svd.
inline void ls_accuracy(const Options & o, std::ostream & out) {
    const index_t n = scaled(100'000, o.scale);
    const index_t d = 32;
    out << "method,seed,k,max_rel_err,frac_within_50pct,seconds\n";
    const auto A     = incoherent_matrix(n, d, o.seed);
    const auto exact = leverage_gram_svd(A).scores;
    for (int s = 0; s < o.seeds; ++s) {
        const auto seed = derive_seed(o.seed, static_cast<std::uint64_t>(s));
        auto emit = [&](const std::string & name, const LeverageScores & ls, double t) {
            const auto st = accuracy(exact, ls.scores);
            out << name << ',' << seed << ',' << ls.k << ',' << fmt(st.max_rel) << ',' << fmt(st.frac_within) << ','
                << fmt(t) << '\n';
        };
        LeverageScores ls;
        double t = seconds([&] { ls = leverage_sketched(A, SketchSpec{sketch_kind::countgauss, 2 * d, 10 * d, seed}); });
        emit("sketched_m2d_r10d", ls, t);
        t = seconds([&] { ls = leverage_sketched(A, accurate_countgauss_spec(n, d, default_eps, default_delta, seed)); });
        emit("sketched_eps", ls, t);
        t = seconds([&] { ls = leverage_hrn_approx(A, default_rcond, default_eps, seed); });
        emit("hrn_approx", ls, t);
        t = seconds([&] { ls = leverage_hrn_exact(A, default_rcond, seed); });
        emit("hrn_exact", ls, t);
    }
}

inline const std::vector<std::string> & suites() {
    static const std::vector<std::string> s = {"sketch_timing", "precond_sweep", "rank_detect", "ls_accuracy"};
    return s;
}

inline void run(const std::string & suite, const Options & o, std::ostream & out) {
    if (suite == "sketch_timing")
        sketch_timing(o, out);
    else if (suite == "precond_sweep")
        precond_sweep(o, out);
    else if (suite == "rank_detect")
        rank_detect(o, out);
    else if (suite == "ls_accuracy")
        ls_accuracy(o, out);
    else
        throw usage_error("unknown bench suite '" + suite + "'");
}

} // namespace lspack::bench
