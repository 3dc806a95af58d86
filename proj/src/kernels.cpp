#include "birs/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace birs {

namespace {

// Replicates processed together per design pass; keeps the accumulator block
// inside L2 while the design matrix streams through once per block.
constexpr std::size_t kReplicateBlock = 8;
constexpr std::size_t kColTile = 2048;

inline double slice_sup(std::span<const double> acc, std::span<const Region> slices) {
    double sup = 0.0;
    for (const Region& s : slices)
        for (std::size_t c = s.start; c < s.end; ++c) sup = std::max(sup, std::abs(acc[c]));
    return sup;
}

// Weighted column sums for a block of replicates restricted to one column
// tile. Accumulation over rows stays in ascending order for every column, so
// the result does not depend on the tile or block geometry.
inline void accumulate_block_tile(const BootstrapDesign& design,
                                  std::span<const double> multipliers, std::size_t rep_begin,
                                  std::size_t rep_count, std::size_t col_begin,
                                  std::size_t col_count, double* acc /* rep_count x col_count */) {
    std::fill(acc, acc + rep_count * col_count, 0.0);
    for (std::size_t i = 0; i < design.n_rows; ++i) {
        const double* grow = design.row_ptr(i) + col_begin;
        for (std::size_t b = 0; b < rep_count; ++b) {
            const double e = multipliers[(rep_begin + b) * design.n_rows + i];
            double* arow = acc + b * col_count;
            for (std::size_t c = 0; c < col_count; ++c) arow[c] += e * grow[c];
        }
    }
}

}  // namespace

std::vector<double> draw_multipliers(const RngStream& rng, std::size_t n_boot,
                                     std::size_t n_rows) {
    std::vector<double> mult(n_boot * n_rows);
    for (std::size_t b = 0; b < n_boot; ++b) {
        RngStream rep = rng.substream(b);
        rep.fill_normal({mult.data() + b * n_rows, n_rows});
    }
    return mult;
}

void accumulate_weighted_columns(const BootstrapDesign& design, std::span<const double> e,
                                 std::span<double> acc) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < design.n_rows; ++i) {
        const double ei = e[i];
        const double* grow = design.row_ptr(i);
        for (std::size_t c = 0; c < design.cols; ++c) acc[c] += ei * grow[c];
    }
}

std::vector<double> replicate_sup_norms_serial(const BootstrapDesign& design,
                                               std::span<const double> multipliers,
                                               std::size_t n_boot,
                                               std::span<const Region> slices) {
    std::vector<double> sups(n_boot, 0.0);
    std::vector<double> acc(design.cols);
    for (std::size_t b = 0; b < n_boot; ++b) {
        accumulate_weighted_columns(design, {multipliers.data() + b * design.n_rows, design.n_rows},
                                    acc);
        sups[b] = slice_sup(acc, slices);
    }
    return sups;
}

std::vector<double> replicate_sup_norms_omp(const BootstrapDesign& design,
                                            std::span<const double> multipliers,
                                            std::size_t n_boot, std::span<const Region> slices) {
    std::vector<double> sups(n_boot, 0.0);
    const std::size_t n_blocks = (n_boot + kReplicateBlock - 1) / kReplicateBlock;

#pragma omp parallel
    {
        std::vector<double> acc(kReplicateBlock * kColTile);
#pragma omp for schedule(dynamic)
        for (std::ptrdiff_t blk = 0; blk < static_cast<std::ptrdiff_t>(n_blocks); ++blk) {
            const std::size_t rep_begin = static_cast<std::size_t>(blk) * kReplicateBlock;
            const std::size_t rep_count = std::min(kReplicateBlock, n_boot - rep_begin);
            for (std::size_t col_begin = 0; col_begin < design.cols; col_begin += kColTile) {
                const std::size_t col_count = std::min(kColTile, design.cols - col_begin);
                accumulate_block_tile(design, multipliers, rep_begin, rep_count, col_begin,
                                      col_count, acc.data());
                const Region tile{col_begin, col_begin + col_count};
                for (std::size_t b = 0; b < rep_count; ++b) {
                    double sup = sups[rep_begin + b];
                    const double* arow = acc.data() + b * col_count;
                    for (const Region& s : slices) {
                        const std::size_t lo = std::max(s.start, tile.start);
                        const std::size_t hi = std::min(s.end, tile.end);
                        for (std::size_t c = lo; c < hi; ++c)
                            sup = std::max(sup, std::abs(arow[c - col_begin]));
                    }
                    sups[rep_begin + b] = sup;
                }
            }
        }
    }
    return sups;
}

std::vector<double> replicate_sup_norms(const BootstrapDesign& design,
                                        std::span<const double> multipliers, std::size_t n_boot,
                                        std::span<const Region> slices) {
#ifdef _OPENMP
    return replicate_sup_norms_omp(design, multipliers, n_boot, slices);
#else
    return replicate_sup_norms_serial(design, multipliers, n_boot, slices);
#endif
}

namespace {

inline double window_max_over_lengths(std::span<const double> acc,
                                      std::span<const std::size_t> window_lengths) {
    // |acc| once, then every window of every length. The per-window pass is
    // the scan method's honest cost profile: work proportional to the number
    // of candidate windows times their length.
    const std::size_t p = acc.size();
    std::vector<double> mag(p);
    for (std::size_t c = 0; c < p; ++c) mag[c] = std::abs(acc[c]);
    double best = 0.0;
    for (const std::size_t len : window_lengths) {
        for (std::size_t t = 0; t + len <= p; ++t) {
            double wmax = 0.0;
            for (std::size_t c = t; c < t + len; ++c) wmax = std::max(wmax, mag[c]);
            best = std::max(best, wmax);
        }
    }
    return best;
}

}  // namespace

std::vector<double> scan_replicate_maxima_serial(const BootstrapDesign& design,
                                                 std::span<const double> multipliers,
                                                 std::size_t n_boot,
                                                 std::span<const std::size_t> window_lengths) {
    std::vector<double> maxima(n_boot, 0.0);
    std::vector<double> acc(design.cols);
    for (std::size_t b = 0; b < n_boot; ++b) {
        accumulate_weighted_columns(design, {multipliers.data() + b * design.n_rows, design.n_rows},
                                    acc);
        maxima[b] = window_max_over_lengths(acc, window_lengths);
    }
    return maxima;
}

std::vector<double> scan_replicate_maxima_omp(const BootstrapDesign& design,
                                              std::span<const double> multipliers,
                                              std::size_t n_boot,
                                              std::span<const std::size_t> window_lengths) {
    std::vector<double> maxima(n_boot, 0.0);
#pragma omp parallel
    {
        std::vector<double> acc(design.cols);
#pragma omp for schedule(dynamic)
        for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(n_boot); ++b) {
            accumulate_weighted_columns(
                design, {multipliers.data() + static_cast<std::size_t>(b) * design.n_rows,
                         design.n_rows},
                acc);
            maxima[static_cast<std::size_t>(b)] = window_max_over_lengths(acc, window_lengths);
        }
    }
    return maxima;
}

std::vector<double> scan_replicate_maxima(const BootstrapDesign& design,
                                          std::span<const double> multipliers, std::size_t n_boot,
                                          std::span<const std::size_t> window_lengths) {
#ifdef _OPENMP
    return scan_replicate_maxima_omp(design, multipliers, n_boot, window_lengths);
#else
    return scan_replicate_maxima_serial(design, multipliers, n_boot, window_lengths);
#endif
}

}  // namespace birs
