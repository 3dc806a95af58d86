#pragma once

#include <span>
#include <vector>

#include "birs/kernels.hpp"
#include "birs/rng.hpp"
#include "birs/types.hpp"

namespace birs {

/// Column-centered copies of both samples plus the scale sqrt(n/m) that the
/// statistic applies to the second sample. Computed once per (X, Y) pair and
/// reused by every bootstrap replicate.
struct CenteredPair {
    SampleMatrix xc;
    SampleMatrix yc;
    double scale = 1.0;  // sqrt(n/m)

    std::size_t n() const { return xc.rows(); }
    std::size_t m() const { return yc.rows(); }
    std::size_t cols() const { return xc.cols(); }
};

/// Component j is (sum of column j) / sqrt(rows).
std::vector<double> normalized_sum(const SampleMatrix& m);

/// Column means removed; requires rows >= 2.
SampleMatrix center_columns(const SampleMatrix& m);

CenteredPair make_centered_pair(const SampleMatrix& x, const SampleMatrix& y);

/// Per-column difference of normalized sums: S_n^X[j] - sqrt(n/m) * S_m^Y[j].
/// The DCF statistic of any column subset is the max of |diff| over it.
std::vector<double> normalized_sum_diff(const SampleMatrix& x, const SampleMatrix& y);

/// Sup-norm statistic over all columns.
double dcf_statistic(const SampleMatrix& x, const SampleMatrix& y);

/// Stacked pre-scaled design used by the bootstrap kernels.
BootstrapDesign make_bootstrap_design(const CenteredPair& cp);

/// One multiplier-bootstrap replicate: sup-norm of the e-weighted centered
/// column sums; e has length n + m.
double bootstrap_replicate(const CenteredPair& cp, std::span<const double> e);

/// All n_boot replicate values; replicate b consumes substream(rng, b).
std::vector<double> bootstrap_replicate_values(const SampleMatrix& x, const SampleMatrix& y,
                                               int n_boot, const RngStream& rng);

/// Ascending order statistic of rank ceil(N * (1 - alpha)), 1-based.
double critical_value_from_replicates(std::vector<double> values, double alpha);

double bootstrap_critical_value(const SampleMatrix& x, const SampleMatrix& y, double alpha,
                                int n_boot, const RngStream& rng);

/// Full DCF two-sample mean test; rejects iff statistic > critical (strict).
TestOutcome dcf_test(const SampleMatrix& x, const SampleMatrix& y, double alpha, int n_boot,
                     const RngStream& rng);

}  // namespace birs
