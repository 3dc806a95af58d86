#pragma once

#include <vector>

#include "birs/rng.hpp"
#include "birs/types.hpp"

namespace birs {

struct ScanConfig {
    std::vector<std::size_t> window_lengths;  // strictly decreasing L1 > ... > Lr
    double alpha = 0.05;
    int n_boot = 1000;
};

/// Fixed-window scan with the DCF statistic: every unit-stride window of
/// every configured length is scored, one bootstrap threshold is taken as
/// the (1 - alpha) quantile of the per-replicate max over all windows, and
/// significant windows are kept greedily by descending statistic with
/// overlaps discarded. tests_performed counts the window statistics,
/// sum over lengths of (p - L + 1).
DetectionResult scan_detect(const SampleMatrix& x, const SampleMatrix& y, const ScanConfig& cfg,
                            const RngStream& rng);

}  // namespace birs
