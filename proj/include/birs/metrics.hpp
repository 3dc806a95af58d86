#pragma once

#include <span>
#include <utility>
#include <vector>

#include "birs/types.hpp"

namespace birs {

/// Intersection-over-union of two index sets given as region lists.
/// Both empty -> 1; exactly one empty -> 0.
double jaccard(std::span<const Region> a, std::span<const Region> b);

struct EvalReport {
    double tpr = 0.0;  // |detected ∩ truth| / |truth|
    double fdp = 0.0;  // |detected \ truth| / max(|detected|, 1)
    std::vector<std::pair<Region, double>> per_region_jaccard;  // per true region, best match
    std::size_t n_detected_points = 0;
};

EvalReport eval_detection(std::span<const Region> detected, std::span<const Region> truth,
                          std::size_t p);

/// Test-count bound ceil((m + 1) * (p / 2^(s-1) + log2(p) - s)) for a run
/// that used m binary-search rounds.
std::size_t prop1_bound(std::size_t p, int s, int m);

}  // namespace birs
