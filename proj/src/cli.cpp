#include "birs/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "birs/detect.hpp"
#include "birs/io.hpp"
#include "birs/metrics.hpp"
#include "birs/scan.hpp"
#include "birs/simulate.hpp"

namespace birs::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;

struct CommonOptions {
    std::string x_path, y_path, labels_path;
    double alpha = 0.05;
    int n_boot = 1000;
    int trunc_s = 6;
    int max_rounds = 32;
    std::uint64_t seed = 20240101;
    std::string method = "birs";
    std::string windows;
    std::string out_path;
    std::string format = "json";
    int threads = 0;  // 0 = auto
    std::string config_path;
    int runs = 200;
};

void apply_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

std::vector<std::size_t> parse_windows(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &pos);
        } catch (const std::exception&) {
            throw ConfigError("bad window length '" + item + "'");
        }
        if (pos != item.size() || v == 0) throw ConfigError("bad window length '" + item + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw ConfigError("window list is empty");
    return out;
}

Method parse_method(const std::string& name) {
    if (name == "birs") return Method::birs;
    if (name == "scan") return Method::scan;
    throw ConfigError("unknown method '" + name + "' (expected birs|scan)");
}

// Flat key=value file with '#' comments. Later keys override earlier ones;
// values are kept as strings and validated by the consumer.
std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config file line " + std::to_string(line_no) +
                              ": expected key=value");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config file line " + std::to_string(line_no) +
                                           ": empty key");
        kv[key] = value;
    }
    return kv;
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad number '" + value + "'");
    }
}

long long to_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad integer '" + value + "'");
    }
}

std::pair<SampleMatrix, SampleMatrix> load_samples(const CommonOptions& opt) {
    if (opt.x_path.empty()) throw ConfigError("--x is required");
    SampleMatrix first = read_matrix(opt.x_path);
    if (!opt.labels_path.empty()) {
        const std::vector<int> labels = read_labels(opt.labels_path);
        return split_by_labels(first, labels);
    }
    if (opt.y_path.empty()) throw ConfigError("need --y or --labels");
    SampleMatrix y = read_matrix(opt.y_path);
    if (first.cols() != y.cols())
        throw InputError("dimension mismatch: X has " + std::to_string(first.cols()) +
                         " columns, Y has " + std::to_string(y.cols()));
    return {std::move(first), std::move(y)};
}

nlohmann::ordered_json echo_common(const CommonOptions& opt) {
    nlohmann::ordered_json echo;
    echo["method"] = opt.method;
    echo["alpha"] = opt.alpha;
    echo["n_boot"] = opt.n_boot;
    if (opt.method == "birs") {
        echo["trunc_s"] = opt.trunc_s;
        echo["max_rounds"] = opt.max_rounds;
    } else {
        echo["windows"] = opt.windows;
    }
    echo["seed"] = opt.seed;
    return echo;
}

DetectionResult detect_with(const CommonOptions& opt, const SampleMatrix& x,
                            const SampleMatrix& y, const RngStream& rng) {
    if (parse_method(opt.method) == Method::birs) {
        BirsConfig cfg;
        cfg.alpha = opt.alpha;
        cfg.n_boot = opt.n_boot;
        cfg.trunc_s = opt.trunc_s;
        cfg.max_rounds = opt.max_rounds;
        return birs_detect(x, y, cfg, rng);
    }
    ScanConfig cfg;
    cfg.alpha = opt.alpha;
    cfg.n_boot = opt.n_boot;
    if (opt.windows.empty()) throw ConfigError("--method scan requires --windows");
    cfg.window_lengths = parse_windows(opt.windows);
    return scan_detect(x, y, cfg, rng);
}

void emit_result(const CommonOptions& opt, const DetectionResult& result,
                 const nlohmann::ordered_json& echo) {
    ResultFormat fmt;
    if (opt.format == "json")
        fmt = ResultFormat::json;
    else if (opt.format == "tsv")
        fmt = ResultFormat::tsv;
    else
        throw ConfigError("unknown format '" + opt.format + "' (expected json|tsv)");
    if (opt.out_path.empty()) {
        if (fmt == ResultFormat::json)
            std::cout << result_to_json(result, echo).dump(2) << '\n';
        else
            std::cout << result_to_tsv(result);
    } else {
        write_result(result, opt.out_path, fmt, echo);
    }
}

int cmd_detect(const CommonOptions& opt) {
    apply_threads(opt.threads);
    auto [x, y] = load_samples(opt);
    const auto t0 = std::chrono::steady_clock::now();
    const DetectionResult result = detect_with(opt, x, y, make_rng(opt.seed));
    const auto t1 = std::chrono::steady_clock::now();
    emit_result(opt, result, echo_common(opt));
    std::fprintf(stderr, "detect: %zu region(s), %zu tests, %d round(s), %.1f ms\n",
                 result.regions.size(), result.tests_performed, result.rounds_used,
                 std::chrono::duration<double, std::milli>(t1 - t0).count());
    return kExitOk;
}

int cmd_calibrate(const CommonOptions& opt) {
    apply_threads(opt.threads);
    if (opt.runs < 1) throw ConfigError("calibrate needs runs >= 1");
    auto [x, y] = load_samples(opt);
    const std::size_t n = x.rows(), m = y.rows(), p = x.cols();

    SampleMatrix pooled(n + m, p);
    for (std::size_t r = 0; r < n; ++r)
        std::copy_n(x.row_ptr(r), p, pooled.row_ptr(r));
    for (std::size_t r = 0; r < m; ++r)
        std::copy_n(y.row_ptr(r), p, pooled.row_ptr(n + r));

    const RngStream root = make_rng(opt.seed);
    int rejecting = 0;
    for (int run = 0; run < opt.runs; ++run) {
        const RngStream run_rng = root.substream(static_cast<std::uint64_t>(run));
        RngStream shuffle_rng = run_rng.substream(0);
        std::vector<std::size_t> order(n + m);
        std::iota(order.begin(), order.end(), std::size_t(0));
        for (std::size_t i = n + m; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(shuffle_rng.next_u64() % i);
            std::swap(order[i - 1], order[j]);
        }
        SampleMatrix px(n, p), py(m, p);
        for (std::size_t r = 0; r < n; ++r)
            std::copy_n(pooled.row_ptr(order[r]), p, px.row_ptr(r));
        for (std::size_t r = 0; r < m; ++r)
            std::copy_n(pooled.row_ptr(order[n + r]), p, py.row_ptr(r));
        const DetectionResult result = detect_with(opt, px, py, run_rng.substream(1));
        if (!result.regions.empty()) ++rejecting;
    }

    nlohmann::ordered_json doc;
    doc["config_echo"] = echo_common(opt);
    doc["runs"] = opt.runs;
    doc["rejecting_runs"] = rejecting;
    doc["fwer"] = static_cast<double>(rejecting) / static_cast<double>(opt.runs);
    if (opt.out_path.empty()) {
        std::cout << doc.dump(2) << '\n';
    } else {
        std::ofstream out(opt.out_path);
        if (!out) throw InputError("cannot write '" + opt.out_path + "'");
        out << doc.dump(2) << '\n';
    }
    std::fprintf(stderr, "calibrate: fwer %.4f over %d permutation(s)\n",
                 static_cast<double>(rejecting) / static_cast<double>(opt.runs), opt.runs);
    return kExitOk;
}

struct SimulateKeys {
    ExperimentConfig base;
    std::vector<double> deltas;
    std::vector<int> decay_values;  // 0, 1, or both
};

SimulateKeys read_simulate_config(const CommonOptions& opt) {
    if (opt.config_path.empty()) throw ConfigError("simulate requires --config FILE");
    const auto kv = parse_config_file(opt.config_path);

    static const std::vector<std::string> allowed = {
        "design", "beta", "delta",  "delta0", "gamma",      "p",       "n",
        "m",      "runs", "method", "decay",  "alpha",      "boot",    "trunc",
        "seed",   "windows", "max-rounds"};
    for (const auto& [key, value] : kv) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown config key '" + key + "'");
    }
    const auto get = [&](const char* key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };

    SimulateKeys out;
    ExperimentConfig& cfg = out.base;
    cfg.alpha = opt.alpha;
    cfg.n_boot = opt.n_boot;
    cfg.trunc_s = opt.trunc_s;
    cfg.max_rounds = opt.max_rounds;
    cfg.seed = opt.seed;

    if (const auto v = get("design")) cfg.design = *v;
    design_traits(cfg.design);  // validates
    if (const auto v = get("beta")) cfg.beta = static_cast<int>(to_int("beta", *v));
    if (const auto v = get("delta0")) cfg.delta0 = to_double("delta0", *v);
    if (const auto v = get("gamma")) cfg.gamma = to_double("gamma", *v);
    if (const auto v = get("p")) cfg.p = static_cast<std::size_t>(to_int("p", *v));
    if (const auto v = get("n")) cfg.n = static_cast<std::size_t>(to_int("n", *v));
    if (const auto v = get("m")) cfg.m = static_cast<std::size_t>(to_int("m", *v));
    if (const auto v = get("runs")) cfg.runs = static_cast<int>(to_int("runs", *v));
    if (const auto v = get("method")) cfg.method = parse_method(*v);
    if (const auto v = get("alpha")) cfg.alpha = to_double("alpha", *v);
    if (const auto v = get("boot")) cfg.n_boot = static_cast<int>(to_int("boot", *v));
    if (const auto v = get("trunc")) cfg.trunc_s = static_cast<int>(to_int("trunc", *v));
    if (const auto v = get("max-rounds"))
        cfg.max_rounds = static_cast<int>(to_int("max-rounds", *v));
    if (const auto v = get("seed"))
        cfg.seed = static_cast<std::uint64_t>(to_int("seed", *v));
    if (const auto v = get("windows")) cfg.windows = parse_windows(*v);
    if (cfg.runs < 1) throw ConfigError("simulate: runs must be >= 1");

    if (const auto v = get("delta")) {
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) out.deltas.push_back(to_double("delta", item));
    }
    if (out.deltas.empty()) out.deltas.push_back(0.0);

    if (const auto v = get("decay")) {
        if (*v == "on")
            out.decay_values = {1};
        else if (*v == "off")
            out.decay_values = {0};
        else if (*v == "both")
            out.decay_values = {0, 1};
        else
            throw ConfigError("config key 'decay': expected on|off|both, got '" + *v + "'");
    } else {
        out.decay_values = {0};
    }
    return out;
}

int cmd_simulate(const CommonOptions& opt) {
    apply_threads(opt.threads);
    const SimulateKeys keys = read_simulate_config(opt);

    std::ostringstream csv;
    csv << "design,method,delta,decay,fwer,fdr,tpr,mean_tests,mean_runtime_ms\n";
    for (const double delta : keys.deltas) {
        for (const int decay : keys.decay_values) {
            ExperimentConfig cfg = keys.base;
            cfg.delta = delta;
            cfg.decay = decay != 0;
            const ExperimentResult res = run_experiment(cfg, make_rng(cfg.seed));
            char row[256];
            std::snprintf(row, sizeof row, "%s,%s,%g,%s,%g,%g,%g,%g,%g\n", cfg.design.c_str(),
                          cfg.method == Method::birs ? "birs" : "scan", delta,
                          cfg.decay ? "on" : "off", res.fwer, res.mean_fdp, res.mean_tpr,
                          res.mean_tests, res.mean_runtime_ms);
            csv << row;
            std::fprintf(stderr, "simulate: design=%s delta=%g decay=%s done (%d runs)\n",
                         cfg.design.c_str(), delta, cfg.decay ? "on" : "off", cfg.runs);
        }
    }
    if (opt.out_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(opt.out_path);
        if (!out) throw InputError("cannot write '" + opt.out_path + "'");
        out << csv.str();
    }
    return kExitOk;
}

struct BenchOptions {
    std::size_t p = 8192;
    std::size_t n = 600;
    std::size_t m = 400;
    int beta = 0;
    double delta = 0.4;
    double delta0 = 0.05;
    double gamma = 0.25;
    int runs = 3;
};

int cmd_bench(const CommonOptions& opt, const BenchOptions& bench) {
    apply_threads(opt.threads);
    std::vector<std::size_t> windows;
    if (!opt.windows.empty()) {
        windows = parse_windows(opt.windows);
    } else {
        const std::vector<std::size_t> set = signal_length_set(bench.p);
        windows = {set[6], set[4], set[2], set[0]};  // four lengths, decreasing
    }

    CovarianceSpec spec;
    spec.kind = CovKind::m_dep;
    spec.p = bench.p;
    const CovarianceFactor factor = build_covariance(spec);

    BirsConfig bc;
    bc.alpha = opt.alpha;
    bc.n_boot = opt.n_boot;
    bc.trunc_s = opt.trunc_s;
    bc.max_rounds = opt.max_rounds;
    ScanConfig sc;
    sc.alpha = opt.alpha;
    sc.n_boot = opt.n_boot;
    sc.window_lengths = windows;

    const RngStream root = make_rng(opt.seed);
    double birs_ms = 0.0, scan_ms = 0.0;
    std::size_t birs_tests = 0, scan_tests = 0;
    std::cout << "run,method,wall_ms,tests,regions\n";
    for (int run = 0; run < bench.runs; ++run) {
        const RngStream run_rng = root.substream(static_cast<std::uint64_t>(run));
        std::vector<double> mu(bench.p, 0.0);
        if (bench.beta > 0 && bench.delta > 0.0) {
            SignalLayout layout = generate_signal_layout(run_rng.substream(0), bench.beta,
                                                         bench.p, SignalMode::normal);
            mu = inject_signals(layout, bench.delta, bench.delta0, bench.gamma,
                                run_rng.substream(1), bench.p);
        }
        const SampleMatrix x = sample_mvn(run_rng.substream(2), bench.n, mu, factor);
        const SampleMatrix y = sample_mvn(run_rng.substream(3), bench.m, {}, factor);

        const auto b0 = std::chrono::steady_clock::now();
        const DetectionResult br = birs_detect(x, y, bc, run_rng.substream(4));
        const auto b1 = std::chrono::steady_clock::now();
        const DetectionResult sr = scan_detect(x, y, sc, run_rng.substream(5));
        const auto b2 = std::chrono::steady_clock::now();

        const double bms = std::chrono::duration<double, std::milli>(b1 - b0).count();
        const double sms = std::chrono::duration<double, std::milli>(b2 - b1).count();
        birs_ms += bms;
        scan_ms += sms;
        birs_tests += br.tests_performed;
        scan_tests += sr.tests_performed;
        std::printf("%d,birs,%.2f,%zu,%zu\n", run, bms, br.tests_performed, br.regions.size());
        std::printf("%d,scan,%.2f,%zu,%zu\n", run, sms, sr.tests_performed, sr.regions.size());
    }
    std::printf("total,birs,%.2f,%zu,-\n", birs_ms, birs_tests);
    std::printf("total,scan,%.2f,%zu,-\n", scan_ms, scan_tests);
    std::fprintf(stderr, "bench: birs %.1f ms / %zu tests, scan %.1f ms / %zu tests\n", birs_ms,
                 birs_tests, scan_ms, scan_tests);

    if (windows.size() >= 2 && birs_tests >= scan_tests) {
        std::fprintf(stderr, "bench: FAIL expected birs test count < scan test count\n");
        return 1;
    }
    return kExitOk;
}

// Config-file values feed any flags the user did not set explicitly.
void merge_config_defaults(const CLI::App* sub, CommonOptions& opt,
                           const std::vector<std::string>& allowed) {
    if (opt.config_path.empty()) return;
    const auto kv = parse_config_file(opt.config_path);
    for (const auto& [key, value] : kv) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown config key '" + key + "'");
        const std::string flag = "--" + key;
        const auto* cli_opt = sub->get_option_no_throw(flag);
        if (cli_opt != nullptr && cli_opt->count() > 0) continue;  // flag wins
        if (key == "alpha") opt.alpha = to_double(key, value);
        else if (key == "boot") opt.n_boot = static_cast<int>(to_int(key, value));
        else if (key == "trunc") opt.trunc_s = static_cast<int>(to_int(key, value));
        else if (key == "max-rounds") opt.max_rounds = static_cast<int>(to_int(key, value));
        else if (key == "seed") opt.seed = static_cast<std::uint64_t>(to_int(key, value));
        else if (key == "method") opt.method = value;
        else if (key == "windows") opt.windows = value;
        else if (key == "runs") opt.runs = static_cast<int>(to_int(key, value));
        else if (key == "x") opt.x_path = value;
        else if (key == "y") opt.y_path = value;
        else if (key == "labels") opt.labels_path = value;
        else if (key == "out") opt.out_path = value;
        else if (key == "format") opt.format = value;
        else if (key == "threads") opt.threads = static_cast<int>(to_int(key, value));
    }
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Signal region detection via binary re-search with a "
                 "bootstrap-calibrated two-sample mean test"};
    app.require_subcommand(1);

    CommonOptions opt;
    BenchOptions bench;

    const auto add_common = [&](CLI::App* sub, bool io_flags) {
        sub->add_option("--alpha", opt.alpha, "significance level");
        sub->add_option("--boot", opt.n_boot, "bootstrap replicates");
        sub->add_option("--trunc", opt.trunc_s, "truncation parameter s");
        sub->add_option("--max-rounds", opt.max_rounds, "re-search round cap");
        sub->add_option("--seed", opt.seed, "RNG seed");
        sub->add_option("--threads", opt.threads, "worker threads (0 = auto)");
        sub->add_option("--config", opt.config_path, "key=value config file");
        if (io_flags) {
            sub->add_option("--x", opt.x_path, "X matrix (csv or bin), or pooled with --labels");
            sub->add_option("--y", opt.y_path, "Y matrix (csv or bin)");
            sub->add_option("--labels", opt.labels_path, "0/1 labels splitting a pooled matrix");
            sub->add_option("--method", opt.method, "birs | scan");
            sub->add_option("--windows", opt.windows, "scan window lengths, decreasing");
            sub->add_option("--out", opt.out_path, "output path (default stdout)");
            sub->add_option("--format", opt.format, "json | tsv");
        }
    };

    CLI::App* detect = app.add_subcommand("detect", "detect signal regions in two samples");
    add_common(detect, true);

    CLI::App* simulate = app.add_subcommand("simulate", "run a Monte Carlo experiment grid");
    add_common(simulate, false);
    simulate->add_option("--out", opt.out_path, "CSV output path (default stdout)");

    CLI::App* calibrate =
        app.add_subcommand("calibrate", "permutation FWER estimate on real samples");
    add_common(calibrate, true);
    calibrate->add_option("--runs", opt.runs, "number of permutations");

    CLI::App* bench_cmd = app.add_subcommand("bench", "time birs against scan on seeded data");
    add_common(bench_cmd, false);
    bench_cmd->add_option("--windows", opt.windows, "scan window lengths, decreasing");
    bench_cmd->add_option("--p", bench.p, "dimension");
    bench_cmd->add_option("--n", bench.n, "X sample size");
    bench_cmd->add_option("--m", bench.m, "Y sample size");
    bench_cmd->add_option("--beta", bench.beta, "planted signal regions (0 = null)");
    bench_cmd->add_option("--delta", bench.delta, "strong signal bound");
    bench_cmd->add_option("--runs", bench.runs, "repetitions");

    std::vector<const char*> argv;
    argv.push_back("birs");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? kExitOk : kExitConfig;
        }

        static const std::vector<std::string> detect_keys = {
            "x", "y", "labels", "alpha", "boot", "trunc", "max-rounds",
            "seed", "method", "windows", "out", "format", "threads"};
        static const std::vector<std::string> calibrate_keys = [] {
            std::vector<std::string> keys = detect_keys;
            keys.push_back("runs");
            return keys;
        }();

        if (detect->parsed()) {
            merge_config_defaults(detect, opt, detect_keys);
            return cmd_detect(opt);
        }
        if (simulate->parsed()) return cmd_simulate(opt);
        if (calibrate->parsed()) {
            merge_config_defaults(calibrate, opt, calibrate_keys);
            return cmd_calibrate(opt);
        }
        if (bench_cmd->parsed()) return cmd_bench(opt, bench);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace birs::cli
