// lspack command-line front end.
//
// Exit codes: 0 success, 2 usage error, 3 input format error,
// 4 numerical failure.

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <lspack/lspack.hpp>

#include "bench.hpp"

namespace {

using namespace lspack;

struct Common {
    std::string input;
    std::string output;
    std::string method;
    std::string format = "json";
    std::string seed   = "42";
    double      rcond  = default_rcond;
    double      eps    = default_eps;
    double      delta  = default_delta;
    double      gamma  = default_gamma;
    int         threads = 0;
    bool        strict  = false;
};

void add_common(CLI::App * app, Common & c, bool with_input = true) {
    if (with_input)
        app->add_option("--input,-i", c.input, "input matrix (Matrix Market or LSPDENSE)")->required();
    app->add_option("--output,-o", c.output, "output file (default: stdout)");
    if (with_input)
        app->add_option("--method", c.method, "sketch kind or leverage method");
    app->add_option("--format", c.format, "output format")->check(CLI::IsMember({"json", "csv"}));
    app->add_option("--seed", c.seed, "integer seed, or 'random'");
    app->add_option("--rcond", c.rcond, "rank cutoff zeta");
    app->add_option("--eps", c.eps, "embedding accuracy eps");
    app->add_option("--delta", c.delta, "embedding failure probability delta");
    app->add_option("--gamma", c.gamma, "Gaussian oversampling factor");
    app->add_option("--threads", c.threads, "worker threads (overrides LSPACK_THREADS)");
    app->add_flag("--strict", c.strict, "single-threaded, bitwise reproducible");
}

std::uint64_t resolve_seed(const std::string & s) {
    if (s == "random")
        return (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
    std::uint64_t v   = 0;
    auto [ptr, ec]    = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw usage_error("--seed must be a non-negative integer or 'random'");
    return v;
}

void configure(const Common & c) {
    set_strict(c.strict);
    set_threads(c.threads);
}

// Writes to --output when given, else stdout.
template <typename F>
void emit(const std::string & path, F && write) {
    if (path.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw format_error("cannot write " + path);
    write(out);
    if (!out)
        throw format_error("write failed for " + path);
}

void print_json(std::ostream & out, const json & j) { out << j.dump(2) << '\n'; }

SketchSpec spec_from(const Common & c, std::uint64_t seed, index_t m, index_t r) {
    SketchSpec s;
    s.kind  = c.method.empty() ? sketch_kind::countgauss : parse_sketch_kind(c.method);
    s.m     = m;
    s.r     = r;
    s.seed  = seed;
    s.eps   = c.eps;
    s.delta = c.delta;
    s.gamma = c.gamma;
    s.validate();
    return s;
}

void warn_if_short(const SparseMatrix & A) {
    if (below_tall_regime(A))
        std::cerr << "warning: n = " << A.rows() << " < d^2 = " << A.cols() * A.cols()
                  << "; CountGauss sketches are sized for n >> d^2\n";
}

SparseMatrix load(const std::string & path) {
    if (!std::filesystem::exists(path))
        throw format_error("no such file: " + path);
    auto A = read_matrix(path);
    if (A.rows() < A.cols())
        throw usage_error("input has n < d; transpose it first");
    return A;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json header(const std::string & command, std::uint64_t seed) {
    return json{{"schema_version", schema_version}, {"command", command}, {"seed", seed}};
}

// --- gen --------------------------------------------------------------------

struct GenArgs {
    index_t     n = 1000;
    index_t     d = 10;
    std::string preset = "linspace";
    double      last   = 1e-6;
    std::string values;
    index_t     per_row = 0;
};

int cmd_gen(const Common & c, const GenArgs & g) {
    const auto seed = resolve_seed(c.seed);
    if (c.output.empty())
        throw usage_error("gen requires --output");
    json out = header("gen", seed);

    if (g.preset == "sparse") {
        if (g.per_row < 1)
            throw usage_error("--nnz-per-row must be positive for the sparse preset");
        const auto A = random_sparse(g.n, g.d, g.per_row, seed);
        write_matrix_market(A, std::filesystem::path(c.output));
        out.update({{"n", A.rows()}, {"d", A.cols()}, {"nnz", A.nnz()}, {"preset", g.preset}, {"output", c.output}});
        print_json(std::cout, out);
        return 0;
    }

    SpectrumSpec spec;
    if (!g.values.empty()) {
        std::vector<double> v;
        std::stringstream   ss(g.values);
        for (std::string item; std::getline(ss, item, ',');) {
            try {
                v.push_back(std::stod(item));
            } catch (const std::exception &) {
                throw usage_error("cannot parse spectrum value '" + item + "'");
            }
        }
        spec = SpectrumSpec(std::move(v));
    } else {
        spec = spectra::by_name(g.preset, static_cast<int>(g.d), g.last);
    }
    const auto D = generate_fixed_spectrum(g.n, g.d, spec, seed);
    const auto s = singular_values(D);
    const index_t k = static_cast<index_t>(spec.size());
    const double  kappa = s[k - 1] > 0.0 ? s[0] / s[k - 1] : INFINITY;

    const std::filesystem::path path(c.output);
    if (path.extension() == ".mtx")
        write_matrix_market(SparseMatrix::from_dense(D), path);
    else
        write_dense_binary(D, path);
    out.update({{"n", g.n}, {"d", g.d}, {"preset", g.values.empty() ? g.preset : "explicit"},
                {"spectrum_size", k}, {"kappa", kappa}, {"output", c.output}});
    print_json(std::cout, out);
    return 0;
}

// --- sketch -----------------------------------------------------------------

int cmd_sketch(const Common & c, index_t m, index_t r, const std::string & spec_file) {
    const auto seed = resolve_seed(c.seed);
    const auto A    = load(c.input);
    SketchSpec spec;
    if (!spec_file.empty()) {
        std::ifstream in(spec_file);
        if (!in)
            throw format_error("cannot open " + spec_file);
        try {
            spec = json::parse(in).get<SketchSpec>();
        } catch (const json::exception & e) {
            throw format_error(std::string("invalid sketch spec file: ") + e.what());
        }
    } else {
        spec = spec_from(c, seed, m, r);
    }
    if (spec.kind == sketch_kind::countgauss || spec.kind == sketch_kind::srht_countsketch)
        warn_if_short(A);
    spec = spec.resolved(A.rows(), A.cols());
    const DenseMatrix S = sketch(A, spec);

    emit(c.output, [&](std::ostream & out) {
        if (c.format == "csv") {
            write_dense_csv(S, out);
        } else {
            json j    = header("sketch", spec.seed);
            j["spec"] = spec;
            j["rows"] = S.rows();
            j["cols"] = S.cols();
            j["data"] = dense_json(S);
            print_json(out, j);
        }
    });
    return 0;
}

// --- rank / colselect -------------------------------------------------------

SubsetSelection select(const Common & c, const SparseMatrix & A, std::uint64_t seed) {
    const SketchSpec spec = spec_from(c, seed, 0, 0);
    if (spec.kind == sketch_kind::countgauss || spec.kind == sketch_kind::srht_countsketch)
        warn_if_short(A);
    return sketch_srrqr(A, spec, c.rcond);
}

int cmd_rank(const Common & c) {
    const auto seed = resolve_seed(c.seed);
    const auto A    = load(c.input);
    const auto sel  = select(c, A, seed);
    emit(c.output, [&](std::ostream & out) {
        if (c.format == "csv") {
            out << "j,value\n";
            for (std::size_t j = 0; j < sel.rank.values.size(); ++j)
                out << j << ',' << format_double(sel.rank.values[j]) << '\n';
        } else {
            json j    = header("rank", seed);
            j["rank"] = rank_json(sel.rank);
            print_json(out, j);
        }
    });
    return 0;
}

int cmd_colselect(const Common & c) {
    const auto seed = resolve_seed(c.seed);
    const auto A    = load(c.input);
    const auto sel  = select(c, A, seed);
    emit(c.output, [&](std::ostream & out) {
        if (c.format == "csv") {
            out << "position,column\n";
            for (std::size_t j = 0; j < sel.subset.perm.size(); ++j)
                out << j << ',' << sel.subset.perm[j] << '\n';
        } else {
            json j      = header("colselect", seed);
            j["subset"] = subset_json(sel.subset);
            j["rank"]   = rank_json(sel.rank);
            print_json(out, j);
        }
    });
    return 0;
}

// --- leverage ---------------------------------------------------------------

int cmd_leverage(const Common & c, index_t m, index_t r) {
    const auto seed   = resolve_seed(c.seed);
    const auto A      = load(c.input);
    const auto method = parse_leverage_method(c.method.empty() ? "gram_svd" : c.method);
    if (method == leverage_method::hrn_exact || method == leverage_method::hrn_approx || method == leverage_method::sketched)
        warn_if_short(A);

    LeverageParams p;
    p.zeta = c.rcond;
    p.eps  = c.eps;
    p.seed = seed;
    if (method == leverage_method::sketched)
        p.pi1 = SketchSpec{sketch_kind::countgauss, m, r, seed, c.eps, c.delta, c.gamma};

    const auto t0 = std::chrono::steady_clock::now();
    const auto ls = compute_leverage(A, method, p);
    const auto t  = elapsed(t0);

    json summary = header("leverage", seed);
    summary.update({{"method", to_string(method)}, {"n", A.rows()}, {"d", A.cols()}, {"k", ls.k},
                    {"sum", ls.sum()}, {"max", ls.coherence()}});
    if (!strict_mode())
        summary["wall_time_s"] = t;
    if (method == leverage_method::hrn_approx && ls.k > 0) {
        // Inputs of the approximate-estimator bound.
        const index_t m_sel = static_cast<index_t>(std::ceil(selection_gamma * static_cast<double>(A.cols())));
        const double  eps2  = ls.params.pi2 ? ls.params.pi2->eps : 0.0;
        const double  alpha = alpha_for_failure(m_sel, 0.01);
        json          b{{"eps1", c.eps}, {"eps2", eps2}, {"eps_tilde", combined_eps(c.eps, eps2)},
                        {"k", ls.k},     {"m", m_sel},   {"d", A.cols()},
                        {"alpha", alpha}, {"eps_selection", selection_eps}, {"phi", 2.0}};
        try {
            b["factor_product"] = bound_factors(ls.k, m_sel, A.cols(), alpha, selection_eps, 2.0).product();
        } catch (const usage_error &) {
            b["factor_product"] = nullptr;
        }
        summary["bound_inputs"] = b;
    }

    if (c.output.empty()) {
        if (c.format == "csv") {
            write_leverage_csv(ls, std::cout);
        } else {
            json j = leverage_json(ls);
            j["summary"] = summary;
            print_json(std::cout, j);
        }
        return 0;
    }
    emit(c.output, [&](std::ostream & out) {
        if (c.format == "csv")
            write_leverage_csv(ls, out);
        else
            out << leverage_json(ls).dump() << '\n';
    });
    print_json(std::cout, summary);
    return 0;
}

// --- precond ----------------------------------------------------------------

int cmd_precond(const Common & c, const std::string & route, bool verify, bool solve, double tol, index_t max_iter) {
    const auto seed = resolve_seed(c.seed);
    const auto A    = load(c.input);
    warn_if_short(A);
    const auto rt = route == "qr" ? precond_route::qr : precond_route::svd;
    auto       P  = build_preconditioner(A, c.gamma, c.delta, c.eps, c.rcond, seed, rt);
    if (verify)
        verify_preconditioner(A, P);

    json j            = header("precond", seed);
    j["route"]        = to_string(rt);
    j["certificate"]  = certificate_json(P.certificate());
    if (solve) {
        // b = A x* with x* = (1, ..., 1)
        const Vector xs  = Vector::Ones(A.cols());
        const Vector b   = multiply(A, xs);
        const auto   res = lsqr_preconditioned(A, P, b, tol, max_iter);
        j["lsqr"] = json{{"iterations", res.iterations},
                         {"converged", res.converged},
                         {"relative_error", (res.x - xs).norm() / xs.norm()},
                         {"final_residual", res.residual_history.back()}};
    }
    emit(c.output, [&](std::ostream & out) {
        if (c.format == "csv") {
            write_dense_csv(P.N(), out);
        } else {
            print_json(out, j);
        }
    });
    if (!c.output.empty() && c.format == "csv")
        print_json(std::cout, j);
    return 0;
}

// --- bench ------------------------------------------------------------------

int cmd_bench(const Common & c, const std::string & suite, const bench::Options & opts_in) {
    bench::Options o = opts_in;
    o.seed           = resolve_seed(c.seed);
    if (c.format != "json" && c.format != "csv")
        throw usage_error("bad format");
    emit(c.output, [&](std::ostream & out) { bench::run(suite, o, out); });
    return 0;
}

} // namespace

int main(int argc, char ** argv) {
    CLI::App app{"lspack: leverage scores, sketching, rank-revealing column selection and preconditioning"};
    app.require_subcommand(1);

    Common c;

    auto * gen = app.add_subcommand("gen", "generate a test matrix");
    add_common(gen, c, false);
    GenArgs g;
    gen->add_option("--n", g.n, "rows");
    gen->add_option("--d", g.d, "columns");
    gen->add_option("--preset", g.preset, "spectrum preset")
        ->check(CLI::IsMember({"fixed_svd_1e7", "fixed_svd_2.5e4", "linspace", "large_gap", "sparse"}));
    gen->add_option("--r", g.last, "last singular value of the linspace preset");
    gen->add_option("--spectrum", g.values, "explicit comma-separated singular values");
    gen->add_option("--nnz-per-row", g.per_row, "nonzeros per row (sparse preset)");

    auto *  sk = app.add_subcommand("sketch", "apply a sketch");
    add_common(sk, c);
    index_t m = 0, r = 0;
    std::string spec_file;
    sk->add_option("--m", m, "output rows (0: derive)");
    sk->add_option("--r", r, "inner CountSketch rows (0: derive)");
    sk->add_option("--spec", spec_file, "sketch spec JSON file");

    auto * rk = app.add_subcommand("rank", "numerical rank from a sketch");
    add_common(rk, c);
    auto * cs = app.add_subcommand("colselect", "column subset selection");
    add_common(cs, c);

    auto * lv = app.add_subcommand("leverage", "leverage scores");
    add_common(lv, c);
    lv->add_option("--m", m, "sketched: Gaussian rows (0: derive)");
    lv->add_option("--r", r, "sketched: CountSketch rows (0: derive)");

    auto *      pc = app.add_subcommand("precond", "build a right preconditioner");
    add_common(pc, c);
    std::string route = "svd";
    bool        verify = false, solve = false;
    double      tol      = 1e-10;
    index_t     max_iter = 1000;
    pc->add_option("--route", route, "construction")->check(CLI::IsMember({"svd", "qr"}));
    pc->add_flag("--verify", verify, "measure kappa(AN) densely");
    pc->add_flag("--solve", solve, "run LSQR on b = A * ones");
    pc->add_option("--tol", tol, "LSQR tolerance");
    pc->add_option("--max-iter", max_iter, "LSQR iteration limit");

    auto *         bn = app.add_subcommand("bench", "run an experiment suite (CSV)");
    add_common(bn, c, false);
    std::string    suite;
    bench::Options bo;
    bn->add_option("--suite", suite, "suite")->required()->check(CLI::IsMember(bench::suites()));
    bn->add_option("--scale", bo.scale, "row-count multiplier");
    bn->add_option("--seeds", bo.seeds, "seeded repetitions");
    bn->add_flag("--aggregate", bo.aggregate, "one row per configuration (precond_sweep)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError & e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        configure(c);
        if (*gen)
            return cmd_gen(c, g);
        if (*sk)
            return cmd_sketch(c, m, r, spec_file);
        if (*rk)
            return cmd_rank(c);
        if (*cs)
            return cmd_colselect(c);
        if (*lv)
            return cmd_leverage(c, m, r);
        if (*pc)
            return cmd_precond(c, route, verify, solve, tol, max_iter);
        if (*bn)
            return cmd_bench(c, suite, bo);
    } catch (const usage_error & e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const format_error & e) {
        std::cerr << "format error: " << e.what() << '\n';
        return 3;
    } catch (const std::filesystem::filesystem_error & e) {
        std::cerr << "format error: " << e.what() << '\n';
        return 3;
    } catch (const numerical_error & e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception & e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 2;
}
