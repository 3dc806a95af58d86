#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "birs/cli.hpp"
#include "birs/io.hpp"
#include "birs/rng.hpp"

using namespace birs;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("birs_cli_test_" + std::to_string(std::rand()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_pair(const TempDir& dir, std::string& xp, std::string& yp, bool planted) {
    RngStream rng = make_rng(777);
    const std::size_t n = 30, p = 64;
    SampleMatrix x(n, p), y(n, p);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < p; ++c) {
            const bool sig = planted && c >= 16 && c < 24;
            x(r, c) = (sig ? 5.0 : 0.0) + rng.next_normal();
            y(r, c) = rng.next_normal();
        }
    xp = dir.file("x.bin");
    yp = dir.file("y.bin");
    write_matrix(x, xp, MatrixFormat::bin);
    write_matrix(y, yp, MatrixFormat::bin);
}

}  // namespace

TEST_CASE("detect subcommand writes a result and exits 0") {
    TempDir dir;
    std::string xp, yp;
    write_pair(dir, xp, yp, true);
    const std::string out = dir.file("result.json");

    const int code = cli::run({"detect", "--x", xp, "--y", yp, "--boot", "100", "--trunc", "2",
                               "--seed", "1", "--out", out});
    CHECK(code == 0);
    const auto regions = regions_from_json(slurp(out));
    REQUIRE(regions.size() >= 1);
    CHECK(regions[0].start >= 12);
    CHECK(regions[0].end <= 28);
}

TEST_CASE("detect with zero regions still exits 0") {
    TempDir dir;
    std::string xp, yp;
    write_pair(dir, xp, yp, false);
    const std::string out = dir.file("null.json");
    const int code = cli::run({"detect", "--x", xp, "--y", yp, "--boot", "80", "--trunc", "2",
                               "--seed", "1", "--out", out});
    CHECK(code == 0);
    CHECK(regions_from_json(slurp(out)).empty());
}

TEST_CASE("mismatched columns exit 2") {
    TempDir dir;
    std::string xp, yp;
    write_pair(dir, xp, yp, false);
    const std::string narrow = dir.file("narrow.csv");
    {
        std::ofstream out(narrow);
        out << "1,2\n3,4\n5,6\n";
    }
    CHECK(cli::run({"detect", "--x", xp, "--y", narrow, "--boot", "20", "--trunc", "2"}) == 2);
}

TEST_CASE("config errors exit 3") {
    TempDir dir;
    std::string xp, yp;
    write_pair(dir, xp, yp, false);
    CHECK(cli::run({"detect", "--x", xp, "--y", yp, "--alpha", "2.0", "--trunc", "2"}) == 3);
    CHECK(cli::run({"detect", "--x", xp, "--y", yp, "--method", "scan"}) == 3);  // no windows
    CHECK(cli::run({"detect", "--x", xp}) == 3);  // no second sample
}

TEST_CASE("scan method reports the window test count") {
    TempDir dir;
    std::string xp, yp;
    write_pair(dir, xp, yp, true);
    const std::string out = dir.file("scan.json");
    const int code = cli::run({"detect", "--x", xp, "--y", yp, "--method", "scan", "--windows",
                               "16,8", "--boot", "100", "--seed", "2", "--out", out});
    CHECK(code == 0);
    const auto doc = nlohmann::json::parse(slurp(out));
    CHECK(doc["tests_performed"] == (64 - 16 + 1) + (64 - 8 + 1));
}

TEST_CASE("simulate rejects unknown config keys by name") {
    TempDir dir;
    const std::string cfg = dir.file("exp.cfg");
    {
        std::ofstream out(cfg);
        out << "design=mes\nbeta=0\ndeltaa=0.1\n";
    }
    CHECK(cli::run({"simulate", "--config", cfg}) == 3);
}

TEST_CASE("simulate writes one csv row per delta and decay value") {
    TempDir dir;
    const std::string cfg = dir.file("exp.cfg");
    const std::string out = dir.file("exp.csv");
    {
        std::ofstream o(cfg);
        o << "# tiny grid\n"
          << "design=mes\nbeta=1\ndelta=2.0,4.0\ndelta0=0.05\ngamma=0.25\n"
          << "p=256\nn=30\nm=20\nruns=5\nmethod=birs\ndecay=both\ntrunc=2\nboot=40\n";
    }
    const int code = cli::run({"simulate", "--config", cfg, "--out", out, "--seed", "9"});
    CHECK(code == 0);
    const std::string csv = slurp(out);
    std::size_t rows = 0;
    for (const char ch : csv)
        if (ch == '\n') ++rows;
    CHECK(rows == 5);  // header + 2 deltas x 2 decay settings
    CHECK(csv.find("design,method,delta,decay,fwer,fdr,tpr,mean_tests,mean_runtime_ms") == 0);
}

TEST_CASE("calibrate runs permutations deterministically") {
    TempDir dir;
    std::string xp, yp;
    write_pair(dir, xp, yp, false);
    const std::string out1 = dir.file("cal1.json");
    const std::string out2 = dir.file("cal2.json");
    const std::vector<std::string> base = {"calibrate", "--x",    xp,   "--y",  yp,
                                           "--runs",    "12",     "--boot", "40",
                                           "--trunc",   "2",      "--seed", "5"};
    auto with_out = [&](const std::string& out) {
        std::vector<std::string> args = base;
        args.push_back("--out");
        args.push_back(out);
        return args;
    };
    CHECK(cli::run(with_out(out1)) == 0);
    CHECK(cli::run(with_out(out2)) == 0);
    CHECK(slurp(out1) == slurp(out2));
    const auto doc = nlohmann::json::parse(slurp(out1));
    CHECK(doc["runs"] == 12);
    CHECK(doc["fwer"].get<double>() <= 1.0);

    // Single-permutation run reports a bare 0/1 outcome.
    const std::string single = dir.file("single.json");
    std::vector<std::string> one = {"calibrate", "--x", xp, "--y", yp, "--runs", "1",
                                    "--boot", "40", "--trunc", "2", "--seed", "5",
                                    "--out", single};
    CHECK(cli::run(one) == 0);
    const auto sdoc = nlohmann::json::parse(slurp(single));
    const double fwer = sdoc["fwer"].get<double>();
    CHECK((fwer == 0.0 || fwer == 1.0));
}

TEST_CASE("calibrate fwer sits near the nominal level on null data") {
    TempDir dir;
    RngStream rng = make_rng(2026);
    const std::size_t n = 60, p = 64;
    SampleMatrix x(n, p), y(n, p);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < p; ++c) {
            x(r, c) = rng.next_normal();
            y(r, c) = rng.next_normal();
        }
    const std::string xp = dir.file("nx.bin"), yp = dir.file("ny.bin");
    write_matrix(x, xp, MatrixFormat::bin);
    write_matrix(y, yp, MatrixFormat::bin);

    const std::string out = dir.file("cal.json");
    const int code = cli::run({"calibrate", "--x", xp, "--y", yp, "--runs", "200", "--boot",
                               "200", "--trunc", "2", "--alpha", "0.05", "--seed", "11", "--out",
                               out});
    REQUIRE(code == 0);
    const double fwer = nlohmann::json::parse(slurp(out))["fwer"].get<double>();
    CHECK(fwer >= 0.02);
    CHECK(fwer <= 0.09);
}

TEST_CASE("config file values feed flags that were not set") {
    TempDir dir;
    std::string xp, yp;
    write_pair(dir, xp, yp, true);
    const std::string cfg = dir.file("detect.cfg");
    const std::string out = dir.file("from_cfg.json");
    {
        std::ofstream o(cfg);
        o << "boot=100\ntrunc=2\nseed=1\n";
    }
    const int code = cli::run({"detect", "--x", xp, "--y", yp, "--config", cfg, "--out", out});
    CHECK(code == 0);
    const auto doc = nlohmann::json::parse(slurp(out));
    CHECK(doc["config_echo"]["n_boot"] == 100);
    CHECK(doc["config_echo"]["trunc_s"] == 2);
}
