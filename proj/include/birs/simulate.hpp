#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "birs/detect.hpp"
#include "birs/rng.hpp"
#include "birs/scan.hpp"
#include "birs/types.hpp"

namespace birs {

enum class CovKind {
    m_dep,         // (1 + |j-k|)^(-1/4) within a band of width M, else 0
    weak,          // rho^|j-k|, dense
    genetic_band,  // rho^|j-k| within a band of width M, else 0
};

struct CovarianceSpec {
    CovKind kind = CovKind::m_dep;
    std::size_t p = 0;
    std::size_t band = 64;     // M for the banded kinds
    double rho = 0.90;         // geometric decay base for weak / genetic_band
    double exponent = 0.25;    // polynomial decay exponent for m_dep
    double scale = 1.0;        // factor of scale * Sigma (unequal-covariance designs)
};

/// Lower-triangular Cholesky factor, banded or dense depending on the kind.
struct CovarianceFactor {
    std::size_t p = 0;
    std::size_t band = 0;  // stored sub-diagonals; band = p - 1 means dense
    // Row j holds entries F[j][j-band .. j], row-major, (band + 1) per row.
    std::vector<double> data;
    bool jitter_applied = false;
    bool tapered = false;

    double entry(std::size_t row, std::size_t col) const {
        if (col > row || row - col > band) return 0.0;
        return data[row * (band + 1) + (band - (row - col))];
    }
};

/// Builds Sigma for a CovarianceSpec and factors it. Truncated bands are not
/// guaranteed positive definite; the fallback ladder is a 1e-8 diagonal
/// jitter, then (banded kinds only) a Bartlett taper of the off-diagonals,
/// which keeps the matrix banded and is positive definite by the Schur
/// product theorem. The hard-truncated polynomial band is indefinite with
/// minimum eigenvalue near -4, far beyond any small jitter, so the tapered
/// form is what m_dep sampling actually uses; jitter_applied and tapered
/// record which rungs fired.
CovarianceFactor build_covariance(const CovarianceSpec& spec);

/// Rows are mean + F z with z i.i.d. standard normal; row i draws from
/// substream(rng, i), so the sample is thread-count independent.
SampleMatrix sample_mvn(const RngStream& rng, std::size_t n, std::span<const double> mean,
                        const CovarianceFactor& factor);

/// Entrywise genotype coding f(x) = 1{1.5 < x <= 3} + 2 * 1{x > 3}.
SampleMatrix genotype_transform(const SampleMatrix& m);

enum class SignalMode { normal, genetic };

struct SignalLayout {
    std::vector<Region> regions;  // position-ordered
    std::vector<double> deltas;   // per-region strong-signal bound; empty = uniform
    SignalMode mode = SignalMode::normal;
};

/// Candidate region lengths for dimension p: the reference set
/// {128,...,320} for p = 8192, scaled proportionally for other p.
std::vector<std::size_t> signal_length_set(std::size_t p);

/// beta regions; region i starts at (2i - 1) p / 8 with a length drawn from
/// signal_length_set(p) and assigned via a random permutation.
SignalLayout generate_signal_layout(RngStream rng, int beta, std::size_t p, SignalMode mode);

/// Mean vector for X: zero outside the regions; inside a region of length L,
/// floor(gamma L) uniformly chosen positions get strong draws (normal mode:
/// U(-delta, delta); genetic mode: sign * U(delta - delta0, delta)) and the
/// rest get regular draws U(-delta0, delta0). Per-region deltas from the
/// layout override the delta argument when present.
std::vector<double> inject_signals(const SignalLayout& layout, double delta, double delta0,
                                   double gamma, RngStream rng, std::size_t p);

/// Per-region strong-signal bounds under the decayed-signal design: region 1
/// keeps delta1, region j >= 2 gets delta1 - rho_j with
/// rho_j = 50 n^(-1/2) (sqrt(log(p n)) - sqrt(log((p - sum_{k<j} L_k) n))).
std::vector<double> decay_adjust(double delta1, const SignalLayout& layout, std::size_t n,
                                 std::size_t p);

enum class Method { birs, scan };

struct ExperimentConfig {
    std::string design = "mes";  // mes | mns | wes | wns | genetic
    int beta = 0;
    double delta = 0.0;
    double delta0 = 0.0;
    double gamma = 0.25;
    bool decay = false;
    std::size_t p = 1024;
    std::size_t n = 300;
    std::size_t m = 200;
    int runs = 200;
    Method method = Method::birs;
    double alpha = 0.05;
    int n_boot = 300;
    int trunc_s = 3;
    int max_rounds = 32;
    std::vector<std::size_t> windows;  // scan only; defaults to the length set
    std::uint64_t seed = 20240101;
};

struct ExperimentResult {
    int runs = 0;
    double fwer = 0.0;      // fraction of runs with >= 1 detected point
    double mean_fdp = 0.0;
    double mean_tpr = 0.0;
    double mean_tests = 0.0;
    double mean_runtime_ms = 0.0;
};

/// Covariance kind / equality / genetic flags implied by a design name.
struct DesignTraits {
    CovKind kind;
    bool equal_cov;
    bool genetic;
};
DesignTraits design_traits(const std::string& design);

/// Monte Carlo harness: run r uses substream(rng, r) for data generation and
/// detection; aggregates FWER, mean FDP, mean TPR, mean test count.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RngStream& rng);

}  // namespace birs
