#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "birs/simulate.hpp"

using namespace birs;

namespace {

double factor_product(const CovarianceFactor& f, std::size_t j, std::size_t k) {
    double sum = 0.0;
    for (std::size_t i = 0; i <= std::min(j, k); ++i) sum += f.entry(j, i) * f.entry(k, i);
    return sum;
}

double covariance_reference(const CovarianceSpec& spec, std::size_t j, std::size_t k) {
    const std::size_t d = j >= k ? j - k : k - j;
    double v = 0.0;
    switch (spec.kind) {
        case CovKind::m_dep:
            v = d <= spec.band ? std::pow(1.0 + double(d), -spec.exponent) : 0.0;
            break;
        case CovKind::weak:
            v = std::pow(spec.rho, double(d));
            break;
        case CovKind::genetic_band:
            v = d <= spec.band ? std::pow(spec.rho, double(d)) : 0.0;
            break;
    }
    return spec.scale * v;
}

}  // namespace

TEST_CASE("weak covariance factor reproduces the matrix") {
    CovarianceSpec spec;
    spec.kind = CovKind::weak;
    spec.p = 2;
    const CovarianceFactor f = build_covariance(spec);
    CHECK(factor_product(f, 0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(factor_product(f, 1, 0) == doctest::Approx(0.9).epsilon(1e-10));
    CHECK(factor_product(f, 1, 1) == doctest::Approx(1.0).epsilon(1e-10));

    spec.p = 64;
    const CovarianceFactor big = build_covariance(spec);
    for (const auto [j, k] : {std::pair<std::size_t, std::size_t>{5, 5}, {30, 12}, {63, 0}})
        CHECK(factor_product(big, j, k) ==
              doctest::Approx(covariance_reference(spec, j, k)).epsilon(1e-9));
}

TEST_CASE("m-dependence entries") {
    CovarianceSpec spec;
    spec.kind = CovKind::m_dep;
    spec.p = 256;
    CHECK(covariance_reference(spec, 10, 10) == 1.0);
    CHECK(covariance_reference(spec, 11, 10) == doctest::Approx(std::pow(2.0, -0.25)));
    CHECK(covariance_reference(spec, 100, 10) == 0.0);  // beyond the band

    // The hard-truncated band is indefinite, so the sampling factor carries
    // the Bartlett-tapered variant of the same entries.
    const CovarianceFactor f = build_covariance(spec);
    CHECK(f.tapered);
    const auto tapered = [&](std::size_t j, std::size_t k) {
        const double frac = double(j - k) / (double(spec.band) + 1.0);
        return covariance_reference(spec, j, k) * std::max(0.0, 1.0 - frac);
    };
    CHECK(factor_product(f, 0, 0) == doctest::Approx(1.0).epsilon(1e-8));
    for (const auto [j, k] :
         {std::pair<std::size_t, std::size_t>{200, 199}, {128, 100}, {255, 191}})
        CHECK(factor_product(f, j, k) == doctest::Approx(tapered(j, k)).epsilon(1e-8));
}

TEST_CASE("banded genetic covariance stays within its band") {
    CovarianceSpec spec;
    spec.kind = CovKind::genetic_band;
    spec.p = 200;
    const CovarianceFactor f = build_covariance(spec);
    CHECK(factor_product(f, 0, 0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(factor_product(f, 150, 149) == doctest::Approx(0.9).epsilon(1e-8));
    CHECK(factor_product(f, 199, 100) == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("mvn sampling moments") {
    CovarianceSpec spec;
    spec.kind = CovKind::m_dep;
    spec.p = 16;
    spec.band = 0;  // identity covariance
    const CovarianceFactor identity = build_covariance(spec);

    const SampleMatrix sample = sample_mvn(make_rng(606), 4000, {}, identity);
    for (std::size_t c = 0; c < spec.p; ++c) {
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t r = 0; r < sample.rows(); ++r) {
            sum += sample(r, c);
            sum_sq += sample(r, c) * sample(r, c);
        }
        const double mean = sum / double(sample.rows());
        const double var = sum_sq / double(sample.rows()) - mean * mean;
        CHECK(std::abs(mean) < 0.1);
        CHECK(std::abs(var - 1.0) < 0.1);
    }

    // Degenerate factor: rows reproduce the mean exactly.
    CovarianceFactor zero;
    zero.p = 8;
    zero.band = 0;
    zero.data.assign(8, 0.0);
    const std::vector<double> mu = {1, -2, 3, -4, 5, -6, 7, -8};
    const SampleMatrix fixed = sample_mvn(make_rng(1), 5, mu, zero);
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 8; ++c) CHECK(fixed(r, c) == mu[c]);
}

TEST_CASE("scaled covariance doubles the sample variance") {
    CovarianceSpec spec;
    spec.kind = CovKind::weak;
    spec.p = 8;
    spec.scale = 2.0;
    const CovarianceFactor f = build_covariance(spec);
    const SampleMatrix sample = sample_mvn(make_rng(41), 6000, {}, f);
    for (std::size_t c = 0; c < spec.p; ++c) {
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t r = 0; r < sample.rows(); ++r) {
            sum += sample(r, c);
            sum_sq += sample(r, c) * sample(r, c);
        }
        const double mean = sum / double(sample.rows());
        const double var = sum_sq / double(sample.rows()) - mean * mean;
        CHECK(var == doctest::Approx(2.0).epsilon(0.08));
    }
}

TEST_CASE("genotype transform boundaries") {
    const SampleMatrix m(1, 6, {1.0, 1.5, 2.0, 3.0, 3.5, -2.0});
    const SampleMatrix g = genotype_transform(m);
    CHECK(g.values() == std::vector<double>{0, 0, 1, 1, 2, 0});

    RngStream rng = make_rng(3);
    const SampleMatrix random(100, 100, rng.normals(10000));
    for (const double v : genotype_transform(random).values())
        CHECK((v == 0.0 || v == 1.0 || v == 2.0));
}

TEST_CASE("signal layout geometry") {
    const std::size_t p = 8192;
    const auto layout = generate_signal_layout(make_rng(5), 4, p, SignalMode::normal);
    REQUIRE(layout.regions.size() == 4);
    CHECK(layout.regions[0].start == 1024);  // (2*1 - 1) p / 8
    const auto lengths = signal_length_set(p);
    std::set<std::size_t> length_set(lengths.begin(), lengths.end());
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(layout.regions[i].start == (2 * i + 1) * p / 8);
        CHECK(length_set.count(layout.regions[i].length()) == 1);
    }
    for (std::size_t i = 1; i < 4; ++i) {
        const std::size_t gap = layout.regions[i].start - layout.regions[i - 1].end;
        CHECK(gap >= p / 8 - 320);
    }

    const auto single = generate_signal_layout(make_rng(6), 1, p, SignalMode::normal);
    CHECK(single.regions.size() == 1);

    CHECK(signal_length_set(1024) ==
          std::vector<std::size_t>{16, 20, 24, 28, 32, 36, 40});
}

TEST_CASE("signal injection") {
    SignalLayout layout;
    layout.mode = SignalMode::normal;
    layout.regions = {Region{100, 228}};  // length 128

    SUBCASE("null setting keeps the mean at zero") {
        const auto mu = inject_signals(layout, 0.0, 0.0, 0.25, make_rng(9), 512);
        for (const double v : mu) CHECK(v == 0.0);
    }

    SUBCASE("strong position count") {
        const auto mu = inject_signals(layout, 1.0, 0.0, 0.25, make_rng(9), 512);
        std::size_t nonzero = 0;
        for (std::size_t c = 0; c < mu.size(); ++c) {
            if (mu[c] != 0.0) {
                CHECK(layout.regions[0].contains(c));
                ++nonzero;
            }
        }
        CHECK(nonzero == 32);  // floor(0.25 * 128)
    }

    SUBCASE("genetic strong magnitudes live in the outer band") {
        layout.mode = SignalMode::genetic;
        const double delta = 0.45, delta0 = 0.05;
        const auto mu = inject_signals(layout, delta, delta0, 0.25, make_rng(10), 512);
        std::size_t strong = 0;
        for (std::size_t c = layout.regions[0].start; c < layout.regions[0].end; ++c) {
            const double a = std::abs(mu[c]);
            if (a > delta0) {
                CHECK(a >= delta - delta0);
                CHECK(a <= delta);
                ++strong;
            }
        }
        CHECK(strong == 32);
    }
}

TEST_CASE("decay adjustment") {
    SignalLayout layout;
    layout.regions = {Region{100, 200}};
    CHECK(decay_adjust(0.4, layout, 100, 1000) == std::vector<double>{0.4});

    layout.regions = {Region{100, 200}, Region{400, 500}, Region{700, 800}};
    const auto deltas = decay_adjust(0.4, layout, 100, 1000);
    REQUIRE(deltas.size() == 3);
    CHECK(deltas[0] == 0.4);

    // rho_2 = 5 (sqrt(log 1e5) - sqrt(log 9e4)) against a long-double oracle
    const long double rho2 =
        5.0L * (std::sqrt(std::log(100000.0L)) - std::sqrt(std::log(90000.0L)));
    CHECK(deltas[1] == doctest::Approx(0.4 - double(rho2)).epsilon(1e-12));

    // rho_j >= 0 and nondecreasing in j
    double prev = 0.0;
    for (std::size_t j = 1; j < deltas.size(); ++j) {
        const double rho = 0.4 - deltas[j];
        CHECK(rho >= 0.0);
        CHECK(rho >= prev);
        prev = rho;
    }
}

TEST_CASE("experiment harness smoke checks") {
    ExperimentConfig cfg;
    cfg.design = "mes";
    cfg.p = 64;
    cfg.n = 40;
    cfg.m = 30;
    cfg.runs = 0;
    CHECK_THROWS_AS(run_experiment(cfg, make_rng(1)), ConfigError);

    cfg.runs = 60;
    cfg.n_boot = 60;
    cfg.trunc_s = 2;
    const ExperimentResult null_result = run_experiment(cfg, make_rng(2));
    CHECK(null_result.fwer <= 0.2);
    CHECK(null_result.mean_tests >= 1.0);

    cfg.beta = 1;
    cfg.p = 512;  // scaled length set gives regions of 8..20 columns here
    cfg.n = 60;
    cfg.m = 40;
    cfg.delta = 4.0;
    cfg.delta0 = 0.05;
    cfg.runs = 20;
    const ExperimentResult power = run_experiment(cfg, make_rng(3));
    CHECK(power.mean_tpr > 0.4);
    CHECK(power.fwer >= 0.8);  // nearly every run detects something

    cfg.design = "genetic";
    cfg.delta = 0.45;
    cfg.runs = 10;
    const ExperimentResult genetic = run_experiment(cfg, make_rng(4));
    CHECK(genetic.runs == 10);  // genotype path runs to completion
}

TEST_CASE("tpr is nondecreasing in the signal strength") {
    // Reduced-scale version of the power-curve shape; slack covers the
    // Monte Carlo noise of 40 runs.
    ExperimentConfig cfg;
    cfg.design = "mes";
    cfg.beta = 2;
    cfg.delta0 = 0.05;
    cfg.gamma = 0.25;
    cfg.p = 512;
    cfg.n = 60;
    cfg.m = 40;
    cfg.runs = 40;
    cfg.n_boot = 100;
    cfg.trunc_s = 2;
    double prev = -1.0;
    for (const double delta : {0.8, 1.6, 3.2}) {
        cfg.delta = delta;
        const ExperimentResult res = run_experiment(cfg, make_rng(17));
        CHECK(res.mean_tpr >= prev - 0.05);
        prev = res.mean_tpr;
    }
    CHECK(prev > 0.5);  // the strongest setting has real power
}

TEST_CASE("generated matrices are finite") {
    CovarianceSpec spec;
    spec.kind = CovKind::weak;
    spec.p = 64;
    const CovarianceFactor f = build_covariance(spec);
    std::vector<double> mu(64, 0.0);
    mu[10] = 3.0;
    const SampleMatrix x = sample_mvn(make_rng(5), 50, mu, f);
    for (const double v : x.values()) CHECK(std::isfinite(v));
    for (const double v : genotype_transform(x).values()) CHECK(std::isfinite(v));
}
