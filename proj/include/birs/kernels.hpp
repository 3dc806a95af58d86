#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "birs/rng.hpp"
#include "birs/types.hpp"

namespace birs {

/// Pre-scaled stacked design for multiplier-bootstrap replicates.
/// Row i < n holds (X_i - mean(X)) / sqrt(n); row n + i holds
/// -sqrt(n/m) * (Y_i - mean(Y)) / sqrt(m). With this layout one replicate is
/// a single weighted column sum followed by a sup-norm over column slices.
struct BootstrapDesign {
    std::size_t n_rows = 0;
    std::size_t cols = 0;
    std::vector<double> g;  // row-major, n_rows x cols

    const double* row_ptr(std::size_t r) const { return g.data() + r * cols; }
};

/// One multiplier vector per replicate, row-major n_boot x n_rows.
/// Replicate b is drawn from substream(rng, b), so the matrix is identical
/// no matter how many threads later consume it.
std::vector<double> draw_multipliers(const RngStream& rng, std::size_t n_boot,
                                     std::size_t n_rows);

/// acc[c] += e[i] * g[i][c] accumulated over rows in ascending order.
/// Every kernel below funnels through the same accumulation order, which is
/// what makes serial and OpenMP results bit-identical.
void accumulate_weighted_columns(const BootstrapDesign& design, std::span<const double> e,
                                 std::span<double> acc);

/// Per-replicate sup-norm of the weighted column sums over the given column
/// slices. Serial reference implementation.
std::vector<double> replicate_sup_norms_serial(const BootstrapDesign& design,
                                               std::span<const double> multipliers,
                                               std::size_t n_boot,
                                               std::span<const Region> slices);

/// OpenMP version; replicates are distributed across threads in blocks and
/// each block tiles the column dimension for cache reuse of the design rows.
std::vector<double> replicate_sup_norms_omp(const BootstrapDesign& design,
                                            std::span<const double> multipliers,
                                            std::size_t n_boot,
                                            std::span<const Region> slices);

/// Dispatches to the OpenMP kernel (results equal the serial reference).
std::vector<double> replicate_sup_norms(const BootstrapDesign& design,
                                        std::span<const double> multipliers, std::size_t n_boot,
                                        std::span<const Region> slices);

/// Per-replicate maximum over every sliding window of each length: for
/// window w = [t, t+L) the window value is max_{c in w} |acc[c]|, and the
/// replicate value is the max over all windows. Serial reference.
std::vector<double> scan_replicate_maxima_serial(const BootstrapDesign& design,
                                                 std::span<const double> multipliers,
                                                 std::size_t n_boot,
                                                 std::span<const std::size_t> window_lengths);

/// OpenMP version of the scan replicate pass.
std::vector<double> scan_replicate_maxima_omp(const BootstrapDesign& design,
                                              std::span<const double> multipliers,
                                              std::size_t n_boot,
                                              std::span<const std::size_t> window_lengths);

std::vector<double> scan_replicate_maxima(const BootstrapDesign& design,
                                          std::span<const double> multipliers, std::size_t n_boot,
                                          std::span<const std::size_t> window_lengths);

}  // namespace birs
