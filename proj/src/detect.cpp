#include "birs/detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "birs/dcf.hpp"
#include "birs/kernels.hpp"

namespace birs {

std::pair<Region, Region> split_region(const Region& r) {
    if (r.length() < 2)
        throw std::invalid_argument("split_region: length " + std::to_string(r.length()) + " < 2");
    const std::size_t mid = r.start + r.length() / 2;
    return {Region{r.start, mid}, Region{mid, r.end}};
}

SampleMatrix zero_out(const SampleMatrix& m, std::span<const Region> regions) {
    validate_regions(regions, m.cols());
    SampleMatrix out = m;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        double* row = out.row_ptr(r);
        for (const Region& reg : regions)
            for (std::size_t c = reg.start; c < reg.end; ++c) row[c] = 0.0;
    }
    return out;
}

SampleMatrix drop_columns(const SampleMatrix& m, std::span<const Region> regions) {
    validate_regions(regions, m.cols());
    const std::vector<Region> dead = normalize_regions(regions);
    std::vector<std::size_t> keep;
    keep.reserve(m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) {
        bool removed = false;
        for (const Region& reg : dead)
            if (reg.contains(c)) { removed = true; break; }
        if (!removed) keep.push_back(c);
    }
    if (keep.empty()) throw InputError("drop_columns: no columns left");
    SampleMatrix out(m.rows(), keep.size());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* src = m.row_ptr(r);
        double* dst = out.row_ptr(r);
        for (std::size_t k = 0; k < keep.size(); ++k) dst[k] = src[keep[k]];
    }
    return out;
}

std::vector<Region> rearrange(std::span<const DetectedSegment> segments) {
    std::vector<Region> regions;
    regions.reserve(segments.size());
    for (const DetectedSegment& s : segments) regions.push_back(s.region);
    std::sort(regions.begin(), regions.end(),
              [](const Region& a, const Region& b) { return a.start < b.start; });
    std::vector<Region> merged;
    for (const Region& r : regions) {
        if (!merged.empty() && r.start < merged.back().end)
            throw std::logic_error("rearrange: overlapping segments [" +
                                   std::to_string(merged.back().start) + "," +
                                   std::to_string(merged.back().end) + ") and [" +
                                   std::to_string(r.start) + "," + std::to_string(r.end) + ")");
        if (!merged.empty() && r.start == merged.back().end)
            merged.back().end = r.end;
        else
            merged.push_back(r);
    }
    return merged;
}

namespace {

void validate_config(const BirsConfig& cfg, std::size_t p) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (cfg.n_boot < 1) throw ConfigError("n_boot must be >= 1");
    if (cfg.max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
    if (cfg.trunc_s < 0) throw ConfigError("truncation parameter must be >= 0");
    if (cfg.trunc_s >= 63 || (std::size_t(1) << cfg.trunc_s) >= p)
        throw ConfigError("truncation parameter too large: 2^" + std::to_string(cfg.trunc_s) +
                          " must be smaller than the dimension " + std::to_string(p));
}

// Sorted disjoint ranges of columns that have not been detected yet.
std::vector<Region> subtract_region(const std::vector<Region>& live, const Region& dead) {
    std::vector<Region> out;
    out.reserve(live.size() + 1);
    for (const Region& r : live) {
        if (dead.end <= r.start || dead.start >= r.end) {
            out.push_back(r);
            continue;
        }
        if (dead.start > r.start) out.push_back(Region{r.start, dead.start});
        if (dead.end < r.end) out.push_back(Region{dead.end, r.end});
    }
    return out;
}

std::vector<Region> intersect_ranges(std::span<const Region> segments,
                                     const std::vector<Region>& live) {
    std::vector<Region> out;
    for (const Region& seg : segments)
        for (const Region& r : live) {
            const std::size_t lo = std::max(seg.start, r.start);
            const std::size_t hi = std::min(seg.end, r.end);
            if (lo < hi) out.push_back(Region{lo, hi});
        }
    return out;
}

double sup_abs_over(const std::vector<double>& diff, std::span<const Region> slices) {
    double sup = 0.0;
    for (const Region& s : slices)
        for (std::size_t c = s.start; c < s.end; ++c) sup = std::max(sup, std::abs(diff[c]));
    return sup;
}

// Shared state for one detection run. The design matrix and diff vector keep
// full-width indexing across rounds; detected columns are zeroed in place so
// that both re-search modes read from the same storage.
struct DetectState {
    BootstrapDesign design;
    std::vector<double> diff;
    std::vector<Region> live;
    std::size_t p = 0;
};

double depth_critical_value(const DetectState& st, std::span<const Region> slices, int n_boot,
                            double alpha, const RngStream& rng) {
    const std::vector<double> mult =
        draw_multipliers(rng, static_cast<std::size_t>(n_boot), st.design.n_rows);
    std::vector<double> sups =
        replicate_sup_norms(st.design, mult, static_cast<std::size_t>(n_boot), slices);
    return critical_value_from_replicates(std::move(sups), alpha);
}

RoundOutcome run_binary_round(DetectState& st, const BirsConfig& cfg, const RngStream& round_rng,
                              int round_index, ResearchMode mode) {
    RoundOutcome out;
    const std::size_t terminal_len = std::size_t(1) << cfg.trunc_s;

    auto [left, right] = split_region(Region{0, st.p});
    std::vector<Region> level = {left, right};
    int depth = 1;

    while (!level.empty()) {
        const std::vector<Region> slices = (mode == ResearchMode::column_removal)
                                               ? intersect_ranges(level, st.live)
                                               : level;
        const double critical =
            depth_critical_value(st, slices, cfg.n_boot, cfg.alpha, round_rng.substream(depth));
        out.tests += level.size() + 1;

        std::vector<Region> next;
        for (const Region& seg : level) {
            double stat;
            if (mode == ResearchMode::column_removal) {
                const Region one[] = {seg};
                stat = sup_abs_over(st.diff, intersect_ranges(one, st.live));
            } else {
                stat = sup_abs_over(st.diff, {&seg, 1});
            }
            if (!(stat > critical)) continue;  // no signal in this segment
            if (seg.length() > terminal_len) {
                auto [a, b] = split_region(seg);
                next.push_back(a);
                next.push_back(b);
            } else {
                out.segments.push_back(DetectedSegment{seg, round_index, depth, stat});
            }
        }
        level = std::move(next);
        ++depth;
    }
    return out;
}

DetectState make_state(const SampleMatrix& x, const SampleMatrix& y) {
    DetectState st;
    st.p = x.cols();
    st.diff = normalized_sum_diff(x, y);
    st.design = make_bootstrap_design(make_centered_pair(x, y));
    st.live = {Region{0, st.p}};
    return st;
}

}  // namespace

RoundOutcome binary_search_round(const SampleMatrix& x, const SampleMatrix& y,
                                 const BirsConfig& cfg, const RngStream& rng) {
    validate_config(cfg, x.cols());
    DetectState st = make_state(x, y);
    return run_binary_round(st, cfg, rng, 0, ResearchMode::zero_substitution);
}

DetectionResult birs_detect(const SampleMatrix& x, const SampleMatrix& y, const BirsConfig& cfg,
                            const RngStream& rng, ResearchMode mode) {
    validate_config(cfg, x.cols());
    DetectState st = make_state(x, y);

    DetectionResult result;
    for (int round = 0;; ++round) {
        const std::vector<Region> global_slices =
            (mode == ResearchMode::column_removal) ? st.live
                                                   : std::vector<Region>{Region{0, st.p}};
        const double stat = sup_abs_over(st.diff, global_slices);
        const double critical = depth_critical_value(st, global_slices, cfg.n_boot, cfg.alpha,
                                                     rng.substream(2 * std::uint64_t(round)));
        result.tests_performed += 1;
        if (!(stat > critical)) break;  // no (further) signal region

        if (round >= cfg.max_rounds) {
            result.hit_round_cap = true;
            break;
        }

        RoundOutcome round_out = run_binary_round(
            st, cfg, rng.substream(2 * std::uint64_t(round) + 1), round, mode);
        result.tests_performed += round_out.tests;
        result.rounds_used += 1;

        if (round_out.segments.empty()) break;  // depth 1 rejected nothing; stop re-search

        for (const DetectedSegment& seg : round_out.segments) {
            // Neutralize detected columns for the next round: zero them in the
            // shared diff/design storage and shrink the live ranges.
            for (std::size_t c = seg.region.start; c < seg.region.end; ++c) st.diff[c] = 0.0;
            for (std::size_t i = 0; i < st.design.n_rows; ++i) {
                double* row = st.design.g.data() + i * st.design.cols;
                for (std::size_t c = seg.region.start; c < seg.region.end; ++c) row[c] = 0.0;
            }
            st.live = subtract_region(st.live, seg.region);
            result.segments.push_back(seg);
        }
    }

    result.regions = rearrange(result.segments);
    return result;
}

}  // namespace birs
