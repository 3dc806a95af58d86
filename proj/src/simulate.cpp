#include "birs/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "birs/metrics.hpp"

namespace birs {

namespace {

double covariance_entry(const CovarianceSpec& spec, std::size_t j, std::size_t k) {
    const std::size_t d = j >= k ? j - k : k - j;
    switch (spec.kind) {
        case CovKind::m_dep:
            if (d > spec.band) return 0.0;
            return std::pow(1.0 + static_cast<double>(d), -spec.exponent);
        case CovKind::weak:
            return std::pow(spec.rho, static_cast<double>(d));
        case CovKind::genetic_band:
            if (d > spec.band) return 0.0;
            return std::pow(spec.rho, static_cast<double>(d));
    }
    return 0.0;
}

// In-place banded Cholesky on the factor's band storage. Returns false on a
// non-positive pivot.
bool banded_cholesky(CovarianceFactor& f) {
    const std::size_t w = f.band + 1;
    auto at = [&](std::size_t row, std::size_t col) -> double& {
        return f.data[row * w + (f.band - (row - col))];
    };
    for (std::size_t j = 0; j < f.p; ++j) {
        const std::size_t kmin = j > f.band ? j - f.band : 0;
        for (std::size_t k = kmin; k <= j; ++k) {
            double sum = at(j, k);
            const std::size_t imin = std::max(kmin, k > f.band ? k - f.band : std::size_t(0));
            for (std::size_t i = imin; i < k; ++i) sum -= at(j, i) * at(k, i);
            if (k == j) {
                if (sum <= 0.0) return false;
                at(j, j) = std::sqrt(sum);
            } else {
                at(j, k) = sum / at(k, k);
            }
        }
    }
    return true;
}

void fill_band_from_spec(CovarianceFactor& f, const CovarianceSpec& spec, double jitter,
                         bool taper) {
    const std::size_t w = f.band + 1;
    std::fill(f.data.begin(), f.data.end(), 0.0);
    for (std::size_t j = 0; j < f.p; ++j) {
        const std::size_t kmin = j > f.band ? j - f.band : 0;
        for (std::size_t k = kmin; k <= j; ++k) {
            double v = spec.scale * covariance_entry(spec, j, k);
            if (taper) {
                const double frac =
                    static_cast<double>(j - k) / (static_cast<double>(spec.band) + 1.0);
                v *= std::max(0.0, 1.0 - frac);
            }
            if (k == j) v += jitter;
            f.data[j * w + (f.band - (j - k))] = v;
        }
    }
}

}  // namespace

CovarianceFactor build_covariance(const CovarianceSpec& spec) {
    if (spec.p == 0) throw ConfigError("covariance dimension must be positive");
    CovarianceFactor f;
    f.p = spec.p;
    f.band = (spec.kind == CovKind::weak) ? spec.p - 1 : std::min(spec.band, spec.p - 1);
    f.data.assign(f.p * (f.band + 1), 0.0);

    const double jitter = 1e-8 * spec.scale;
    fill_band_from_spec(f, spec, 0.0, false);
    if (banded_cholesky(f)) return f;

    fill_band_from_spec(f, spec, jitter, false);
    f.jitter_applied = true;
    if (banded_cholesky(f)) return f;

    if (spec.kind != CovKind::weak) {
        // Hard band truncation can be strongly indefinite; a Bartlett taper
        // of the off-diagonals restores positive definiteness while keeping
        // the band.
        f.jitter_applied = false;
        f.tapered = true;
        fill_band_from_spec(f, spec, 0.0, true);
        if (banded_cholesky(f)) return f;
        fill_band_from_spec(f, spec, jitter, true);
        f.jitter_applied = true;
        if (banded_cholesky(f)) return f;
    }
    throw InputError("covariance factorization failed even with jitter and tapering");
}

SampleMatrix sample_mvn(const RngStream& rng, std::size_t n, std::span<const double> mean,
                        const CovarianceFactor& factor) {
    const std::size_t p = factor.p;
    if (!mean.empty() && mean.size() != p)
        throw InputError("mean vector length does not match covariance dimension");
    SampleMatrix out(n, p);
    const std::size_t w = factor.band + 1;
#pragma omp parallel
    {
        std::vector<double> z(p);
#pragma omp for schedule(static)
        for (std::ptrdiff_t ri = 0; ri < static_cast<std::ptrdiff_t>(n); ++ri) {
            const auto r = static_cast<std::size_t>(ri);
            RngStream row_rng = rng.substream(r);
            row_rng.fill_normal(z);
            double* row = out.row_ptr(r);
            for (std::size_t j = 0; j < p; ++j) {
                const std::size_t kmin = j > factor.band ? j - factor.band : 0;
                double sum = mean.empty() ? 0.0 : mean[j];
                const double* frow = factor.data.data() + j * w;
                for (std::size_t k = kmin; k <= j; ++k)
                    sum += frow[factor.band - (j - k)] * z[k];
                row[j] = sum;
            }
        }
    }
    return out;
}

SampleMatrix genotype_transform(const SampleMatrix& m) {
    SampleMatrix out(m.rows(), m.cols());
    const std::vector<double>& src = m.values();
    std::vector<double>& dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const double x = src[i];
        dst[i] = (x > 3.0) ? 2.0 : (x > 1.5 ? 1.0 : 0.0);
    }
    return out;
}

std::vector<std::size_t> signal_length_set(std::size_t p) {
    static constexpr std::size_t reference[] = {128, 160, 192, 224, 256, 288, 320};
    std::vector<std::size_t> lengths;
    lengths.reserve(std::size(reference));
    for (const std::size_t L : reference) {
        const double scaled = static_cast<double>(L) * static_cast<double>(p) / 8192.0;
        lengths.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(scaled))));
    }
    return lengths;
}

SignalLayout generate_signal_layout(RngStream rng, int beta, std::size_t p, SignalMode mode) {
    if (beta < 1 || beta > 4) throw ConfigError("beta must lie in 1..4");
    if (p % 8 != 0) throw ConfigError("signal layout needs p divisible by 8");

    const std::vector<std::size_t> length_set = signal_length_set(p);

    // Sample 4 lengths without replacement, then a random permutation
    // assigns them to the (up to four) regions.
    std::vector<std::size_t> pool(length_set.size());
    std::iota(pool.begin(), pool.end(), std::size_t(0));
    std::vector<std::size_t> lengths(4);
    for (std::size_t i = 0; i < 4; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (pool.size() - i));
        std::swap(pool[i], pool[j]);
        lengths[i] = length_set[pool[i]];
    }
    std::vector<std::size_t> perm = {0, 1, 2, 3};
    for (std::size_t i = 0; i < 3; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (4 - i));
        std::swap(perm[i], perm[j]);
    }

    SignalLayout layout;
    layout.mode = mode;
    for (int i = 1; i <= beta; ++i) {
        const std::size_t start = static_cast<std::size_t>(2 * i - 1) * p / 8;
        const std::size_t len = lengths[perm[static_cast<std::size_t>(i - 1)]];
        if (start + len > p)
            throw ConfigError("signal region exceeds dimension; p too small for the length set");
        layout.regions.push_back(Region{start, start + len});
    }
    return layout;
}

std::vector<double> inject_signals(const SignalLayout& layout, double delta, double delta0,
                                   double gamma, RngStream rng, std::size_t p) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    validate_regions(layout.regions, p);
    if (!layout.deltas.empty() && layout.deltas.size() != layout.regions.size())
        throw ConfigError("per-region delta list does not match the region count");

    std::vector<double> mu(p, 0.0);
    for (std::size_t ri = 0; ri < layout.regions.size(); ++ri) {
        const Region& region = layout.regions[ri];
        const double d = layout.deltas.empty() ? delta : layout.deltas[ri];
        if (!(d >= delta0 && delta0 >= 0.0))
            throw ConfigError("need delta >= delta0 >= 0 in every region");

        const std::size_t len = region.length();
        const auto n_strong = static_cast<std::size_t>(gamma * static_cast<double>(len));

        // Partial Fisher-Yates picks the strong positions uniformly.
        std::vector<std::size_t> idx(len);
        std::iota(idx.begin(), idx.end(), region.start);
        for (std::size_t i = 0; i < n_strong; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (len - i));
            std::swap(idx[i], idx[j]);
        }
        std::vector<bool> strong(len, false);
        for (std::size_t i = 0; i < n_strong; ++i) strong[idx[i] - region.start] = true;

        for (std::size_t c = region.start; c < region.end; ++c) {
            if (strong[c - region.start]) {
                if (layout.mode == SignalMode::normal) {
                    mu[c] = (2.0 * rng.next_uniform() - 1.0) * d;
                } else {
                    // U([-d, -d + delta0] U [d - delta0, d])
                    const double magnitude = d - delta0 * rng.next_uniform();
                    const double sign = (rng.next_u64() & 1) ? 1.0 : -1.0;
                    mu[c] = sign * magnitude;
                }
            } else {
                mu[c] = (2.0 * rng.next_uniform() - 1.0) * delta0;
            }
        }
    }
    return mu;
}

std::vector<double> decay_adjust(double delta1, const SignalLayout& layout, std::size_t n,
                                 std::size_t p) {
    std::vector<double> deltas(layout.regions.size(), delta1);
    const double nd = static_cast<double>(n);
    const double base = std::sqrt(std::log(static_cast<double>(p) * nd));
    std::size_t removed = 0;
    for (std::size_t j = 1; j < layout.regions.size(); ++j) {
        removed += layout.regions[j - 1].length();
        if (removed >= p) throw ConfigError("decay adjustment: regions cover the dimension");
        const double rest =
            std::sqrt(std::log(static_cast<double>(p - removed) * nd));
        const double rho = 50.0 / std::sqrt(nd) * (base - rest);
        deltas[j] = delta1 - rho;
        if (deltas[j] <= 0.0)
            throw ConfigError("decay adjustment drove a region delta non-positive");
    }
    return deltas;
}

DesignTraits design_traits(const std::string& design) {
    if (design == "mes") return {CovKind::m_dep, true, false};
    if (design == "mns") return {CovKind::m_dep, false, false};
    if (design == "wes") return {CovKind::weak, true, false};
    if (design == "wns") return {CovKind::weak, false, false};
    if (design == "genetic") return {CovKind::genetic_band, true, true};
    throw ConfigError("unknown design '" + design + "' (expected mes|mns|wes|wns|genetic)");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RngStream& rng) {
    if (cfg.runs < 1) throw ConfigError("experiment needs at least one run");
    const DesignTraits traits = design_traits(cfg.design);

    CovarianceSpec spec_y;
    spec_y.kind = traits.kind;
    spec_y.p = cfg.p;
    const CovarianceFactor factor_y = build_covariance(spec_y);
    CovarianceSpec spec_x = spec_y;
    if (!traits.equal_cov) spec_x.scale = 2.0;
    const CovarianceFactor factor_x =
        traits.equal_cov ? factor_y : build_covariance(spec_x);

    const SignalMode mode = traits.genetic ? SignalMode::genetic : SignalMode::normal;

    ExperimentResult agg;
    agg.runs = cfg.runs;
    double sum_fdp = 0.0, sum_tpr = 0.0, sum_tests = 0.0, sum_ms = 0.0;
    int rejecting = 0;

    for (int run = 0; run < cfg.runs; ++run) {
        const RngStream run_rng = rng.substream(static_cast<std::uint64_t>(run));

        SignalLayout layout;
        layout.mode = mode;
        std::vector<double> mu(cfg.p, 0.0);
        if (cfg.beta > 0) {
            layout = generate_signal_layout(run_rng.substream(0), cfg.beta, cfg.p, mode);
            if (cfg.decay) layout.deltas = decay_adjust(cfg.delta, layout, cfg.n, cfg.p);
            if (cfg.delta > 0.0)
                mu = inject_signals(layout, cfg.delta, cfg.delta0, cfg.gamma,
                                    run_rng.substream(1), cfg.p);
        }

        SampleMatrix x = sample_mvn(run_rng.substream(2), cfg.n, mu, factor_x);
        SampleMatrix y = sample_mvn(run_rng.substream(3), cfg.m, {}, factor_y);
        if (traits.genetic) {
            x = genotype_transform(x);
            y = genotype_transform(y);
        }

        const auto t0 = std::chrono::steady_clock::now();
        DetectionResult det;
        if (cfg.method == Method::birs) {
            BirsConfig bc;
            bc.alpha = cfg.alpha;
            bc.n_boot = cfg.n_boot;
            bc.trunc_s = cfg.trunc_s;
            bc.max_rounds = cfg.max_rounds;
            det = birs_detect(x, y, bc, run_rng.substream(4));
        } else {
            ScanConfig sc;
            sc.alpha = cfg.alpha;
            sc.n_boot = cfg.n_boot;
            sc.window_lengths = cfg.windows;
            if (sc.window_lengths.empty()) {
                sc.window_lengths = signal_length_set(cfg.p);
                std::sort(sc.window_lengths.rbegin(), sc.window_lengths.rend());
            }
            det = scan_detect(x, y, sc, run_rng.substream(4));
        }
        const auto t1 = std::chrono::steady_clock::now();

        std::vector<Region> truth = (cfg.delta > 0.0 && cfg.beta > 0)
                                        ? layout.regions
                                        : std::vector<Region>{};
        const EvalReport eval = eval_detection(det.regions, truth, cfg.p);
        if (eval.n_detected_points > 0) ++rejecting;
        sum_fdp += eval.fdp;
        sum_tpr += eval.tpr;
        sum_tests += static_cast<double>(det.tests_performed);
        sum_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
    }

    const double nruns = static_cast<double>(cfg.runs);
    agg.fwer = static_cast<double>(rejecting) / nruns;
    agg.mean_fdp = sum_fdp / nruns;
    agg.mean_tpr = sum_tpr / nruns;
    agg.mean_tests = sum_tests / nruns;
    agg.mean_runtime_ms = sum_ms / nruns;
    return agg;
}

}  // namespace birs
