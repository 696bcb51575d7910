#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace lspack;
namespace fs = std::filesystem;

namespace {

struct Run {
    int         code = -1;
    std::string out;
};

Run run(const std::string & args) {
    const std::string cmd = std::string(LSPACK_CLI_PATH) + " " + args + " 2>/dev/null";
    Run               r;
    FILE *            pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr)
        return r;
    std::array<char, 4096> buf{};
    std::size_t            got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
        r.out.append(buf.data(), got);
    const int status = pclose(pipe);
    r.code           = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path & p) {
    std::ifstream      in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("lspack_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string path(const std::string & name) const { return (dir / name).string(); }

    // [I_d; 0] as Matrix Market
    std::string stacked_identity(index_t n, index_t d) const {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, d);
        M.topRows(d).setIdentity();
        const auto p = path("eye.mtx");
        write_matrix_market(SparseMatrix::from_dense(M), fs::path(p));
        return p;
    }

    fs::path dir;
};

} // namespace

TEST_F(Cli, GenFixedSpectrumReportsKappa) {
    const auto r = run("gen --preset fixed_svd_1e7 --n 5000 --d 60 --seed 3 --output " + path("a.bin"));
    ASSERT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    EXPECT_NEAR(j["kappa"].get<double>(), 1e7, 1e5);
    EXPECT_EQ(j["seed"], 3);
    EXPECT_EQ(j["schema_version"], schema_version);
    const auto A = read_matrix(path("a.bin"));
    EXPECT_EQ(A.rows(), 5000);
    EXPECT_NEAR(oracle::kappa(oracle::dense(A)), 1e7, 1e5);
}

TEST_F(Cli, GenLinspaceAndSingleColumn) {
    auto r = run("gen --preset linspace --r 1e-6 --n 500 --d 60 --output " + path("a.mtx"));
    ASSERT_EQ(r.code, 0);
    EXPECT_NEAR(json::parse(r.out)["kappa"].get<double>(), 1e6, 1e4);
    EXPECT_EQ(json::parse(r.out)["seed"], 42);

    r = run("gen --preset linspace --n 50 --d 1 --output " + path("b.mtx"));
    ASSERT_EQ(r.code, 0);
    EXPECT_DOUBLE_EQ(json::parse(r.out)["kappa"].get<double>(), 1.0);
    EXPECT_EQ(read_matrix(path("b.mtx")).cols(), 1);

    r = run("gen --spectrum 3,2,1 --n 40 --d 3 --output " + path("c.mtx"));
    ASSERT_EQ(r.code, 0);
    EXPECT_NEAR(json::parse(r.out)["kappa"].get<double>(), 3.0, 1e-10);
}

TEST_F(Cli, GenSparsePreset) {
    const auto r = run("gen --preset sparse --n 300 --d 20 --nnz-per-row 4 --output " + path("s.mtx"));
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["nnz"], 1200);
    EXPECT_EQ(read_matrix(path("s.mtx")).nnz(), 1200);
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("gen --preset nope --output " + path("x.mtx")).code, 2);
    EXPECT_EQ(run("gen --preset linspace").code, 2);
    EXPECT_EQ(run("leverage --input " + stacked_identity(20, 3) + " --method nope").code, 2);
    EXPECT_EQ(run("leverage --input " + path("eye.mtx") + " --seed -1").code, 2);
    EXPECT_EQ(run("bench --suite nope").code, 2);
    EXPECT_EQ(run("--help").code, 0);

    EXPECT_EQ(run("leverage --input " + path("missing.mtx")).code, 3);
    {
        std::ofstream(path("bad.mtx")) << "%%MatrixMarket matrix array real general\n2 2\n1\n";
    }
    EXPECT_EQ(run("rank --input " + path("bad.mtx")).code, 3);

    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(400, 3);
    Z(0, 0)           = 0.0;
    write_matrix_market(SparseMatrix::from_dense(Z), fs::path(path("zero.mtx")));
    const auto r = run("precond --input " + path("zero.mtx"));
    EXPECT_EQ(r.code, 4);
}

TEST_F(Cli, LeverageOnStackedIdentity) {
    const auto in = stacked_identity(50, 4);
    for (const std::string m : {"gram-svd", "gram_svd", "spqr", "hrn-exact"}) {
        const auto r = run("leverage --input " + in + " --method " + m);
        ASSERT_EQ(r.code, 0) << m;
        const auto j = json::parse(r.out);
        EXPECT_EQ(j["summary"]["k"], 4);
        EXPECT_NEAR(j["summary"]["max"].get<double>(), 1.0, 1e-12);
        EXPECT_NEAR(j["summary"]["sum"].get<double>(), 4.0, 1e-12);
        EXPECT_EQ(j["scores"].size(), 50U);
        EXPECT_TRUE(j["summary"].contains("wall_time_s"));
    }
}

TEST_F(Cli, LeverageMethodsAgreeOnLargeGap) {
    ASSERT_EQ(run("gen --preset large_gap --n 3000 --d 71 --seed 5 --output " + path("g.mtx")).code, 0);
    ASSERT_EQ(run("leverage --input " + path("g.mtx") + " --method gram-svd --output " + path("a.json")).code, 0);
    const auto r = run("leverage --input " + path("g.mtx") + " --method hrn-exact --output " + path("b.json"));
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["k"], 64);
    const auto a = json::parse(slurp(path("a.json")))["scores"].get<std::vector<double>>();
    const auto b = json::parse(slurp(path("b.json")))["scores"].get<std::vector<double>>();
    ASSERT_EQ(a.size(), b.size());
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        diff = std::max(diff, std::abs(a[i] - b[i]));
    EXPECT_LE(diff, 1e-6);
}

TEST_F(Cli, LeverageHrnApproxRecordsBoundInputs) {
    ASSERT_EQ(run("gen --preset sparse --n 4000 --d 10 --nnz-per-row 3 --output " + path("s.mtx")).code, 0);
    const auto r = run("leverage --input " + path("s.mtx") + " --method hrn-approx --eps 0.5");
    ASSERT_EQ(r.code, 0);
    const auto b = json::parse(r.out)["summary"]["bound_inputs"];
    EXPECT_EQ(b["eps1"], 0.5);
    EXPECT_EQ(b["m"], 20);
    EXPECT_TRUE(b.contains("eps_tilde"));
    EXPECT_TRUE(b.contains("factor_product"));
}

TEST_F(Cli, LeverageCsv) {
    const auto r = run("leverage --input " + stacked_identity(6, 2) + " --format csv");
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string        line;
    std::getline(in, line);
    EXPECT_EQ(line, "row_index,score");
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    EXPECT_EQ(rows, 6);
}

TEST_F(Cli, SketchShapesAndSpecFile) {
    ASSERT_EQ(run("gen --preset sparse --n 2000 --d 8 --nnz-per-row 3 --output " + path("s.mtx")).code, 0);
    auto r = run("sketch --input " + path("s.mtx") + " --method gaussian --m 16");
    ASSERT_EQ(r.code, 0);
    auto j = json::parse(r.out);
    EXPECT_EQ(j["rows"], 16);
    EXPECT_EQ(j["cols"], 8);
    EXPECT_EQ(j["spec"]["kind"], "gaussian");

    {
        std::ofstream(path("spec.json")) << json(SketchSpec{sketch_kind::countsketch, 64, 0, 7}).dump();
    }
    r = run("sketch --input " + path("s.mtx") + " --spec " + path("spec.json"));
    ASSERT_EQ(r.code, 0);
    j = json::parse(r.out);
    EXPECT_EQ(j["rows"], 64);
    EXPECT_EQ(j["seed"], 7);

    {
        std::ofstream(path("broken.json")) << "{kind:";
    }
    EXPECT_EQ(run("sketch --input " + path("s.mtx") + " --spec " + path("broken.json")).code, 3);
    EXPECT_EQ(run("sketch --input " + path("s.mtx") + " --method nope").code, 2);
}

TEST_F(Cli, RankAndColselect) {
    ASSERT_EQ(run("gen --preset large_gap --n 5000 --d 71 --output " + path("g.mtx")).code, 0);
    auto r = run("rank --input " + path("g.mtx") + " --rcond 1e-10");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["rank"]["k"], 64);

    r = run("colselect --input " + path("g.mtx") + " --rcond 1e-10");
    ASSERT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["subset"]["perm"].size(), 64U);

    r = run("colselect --input " + path("g.mtx") + " --format csv");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, 16), "position,column\n");
}

TEST_F(Cli, PrecondCertificate) {
    ASSERT_EQ(run("gen --preset linspace --r 1e-8 --n 5000 --d 60 --output " + path("a.bin")).code, 0);
    auto r = run("precond --input " + path("a.bin"));
    ASSERT_EQ(r.code, 0);
    auto c = json::parse(r.out)["certificate"];
    EXPECT_EQ(c["k"], 60);
    EXPECT_EQ(c["m"], 120);
    EXPECT_FALSE(c.contains("kappa_measured"));
    const double bound = c["kappa_bound"].get<double>();

    r = run("precond --input " + path("a.bin") + " --route qr --verify --solve");
    ASSERT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["route"], "qr");
    EXPECT_LE(j["certificate"]["kappa_measured"].get<double>(), bound);
    EXPECT_TRUE(j["lsqr"]["converged"].get<bool>());
    // consistent b: runs until the residual itself reaches tol
    EXPECT_LE(j["lsqr"]["iterations"].get<int>(), 100);
    // forward error is bounded by kappa(A) tol = 1e-2
    EXPECT_LE(j["lsqr"]["relative_error"].get<double>(), 1e-2);
}

TEST_F(Cli, BenchSuitesEmitCsv) {
    auto r = run("bench --suite sketch_timing --scale 0.01 --seeds 1");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "op,n,d,m,r,t_min,t_avg,t_max");
    for (const std::string s : {"precond_sweep", "rank_detect", "ls_accuracy"}) {
        r = run("bench --suite " + s + " --scale 0.05 --seeds 1");
        ASSERT_EQ(r.code, 0) << s;
        EXPECT_GT(std::count(r.out.begin(), r.out.end(), '\n'), 1) << s;
    }
}

TEST_F(Cli, StrictModeIsByteIdentical) {
    ASSERT_EQ(run("gen --preset sparse --n 3000 --d 12 --nnz-per-row 4 --output " + path("s.mtx")).code, 0);
    const std::string in = " --input " + path("s.mtx") + " --strict --seed 9";
    for (const std::string cmd : {"leverage --method hrn-approx", "leverage --method sketched", "rank", "colselect",
                                  "sketch --method countgauss", "sketch --method srht --m 64", "precond --verify"}) {
        const auto a = run(cmd + in);
        const auto b = run(cmd + in + " --threads 3");
        ASSERT_EQ(a.code, 0) << cmd;
        EXPECT_EQ(a.out, b.out) << cmd;
        EXPECT_EQ(json::parse(a.out)["seed"].is_null() ? json::parse(a.out)["summary"]["seed"] : json::parse(a.out)["seed"], 9);
    }
    const auto l = json::parse(run("leverage --method gram-svd" + in).out);
    EXPECT_FALSE(l["summary"].contains("wall_time_s"));
}
