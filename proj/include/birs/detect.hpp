#pragma once

#include <span>
#include <utility>
#include <vector>

#include "birs/rng.hpp"
#include "birs/types.hpp"

namespace birs {

struct BirsConfig {
    double alpha = 0.05;
    int trunc_s = 6;     // binary splitting stops once a segment length is <= 2^trunc_s
    int n_boot = 1000;
    int max_rounds = 32; // safety cap on re-search iterations
};

/// How detected columns are neutralized between re-search rounds. Both modes
/// produce identical results; column removal skips dead columns instead of
/// multiplying by their zeros.
enum class ResearchMode {
    zero_substitution,
    column_removal,
};

/// Midpoint split: [start, start + floor(len/2)) and the remainder.
std::pair<Region, Region> split_region(const Region& r);

/// Copy of M with the listed columns set to zero.
SampleMatrix zero_out(const SampleMatrix& m, std::span<const Region> regions);

/// Copy of M with the listed columns physically removed.
SampleMatrix drop_columns(const SampleMatrix& m, std::span<const Region> regions);

/// Sort segments by start, merge every run of touching neighbours
/// (successor.start == predecessor.end). Throws std::logic_error on overlap.
std::vector<Region> rearrange(std::span<const DetectedSegment> segments);

struct RoundOutcome {
    std::vector<DetectedSegment> segments;
    std::size_t tests = 0;  // per-segment statistics plus one per critical value
};

/// One level-by-level binary search over [0, p). Depth j tests every active
/// segment against a single critical value bootstrapped from the
/// concatenation of all active segments (multipliers from substream(rng, j)).
/// The caller is expected to have already rejected the global test.
RoundOutcome binary_search_round(const SampleMatrix& x, const SampleMatrix& y,
                                 const BirsConfig& cfg, const RngStream& rng);

/// Full detection: global test, binary search, re-search with detected
/// columns neutralized, rearrangement. Substream layout: the round-r global
/// test uses substream(rng, 2r) and the round-r binary search uses
/// substream(rng, 2r + 1), so results are reproducible and thread-count
/// independent.
DetectionResult birs_detect(const SampleMatrix& x, const SampleMatrix& y, const BirsConfig& cfg,
                            const RngStream& rng,
                            ResearchMode mode = ResearchMode::column_removal);

}  // namespace birs
