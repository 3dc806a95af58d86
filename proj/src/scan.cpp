#include "birs/scan.hpp"

#include <algorithm>
#include <cmath>

#include "birs/dcf.hpp"
#include "birs/detect.hpp"
#include "birs/kernels.hpp"

namespace birs {

namespace {

struct Window {
    Region region;
    double statistic = 0.0;
    double mass = 0.0;  // sum of |diff| over the window; tie-break only
};

void validate_scan_config(const ScanConfig& cfg, std::size_t p) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (cfg.n_boot < 1) throw ConfigError("n_boot must be >= 1");
    if (cfg.window_lengths.empty()) throw ConfigError("scan needs at least one window length");
    for (std::size_t i = 0; i < cfg.window_lengths.size(); ++i) {
        if (cfg.window_lengths[i] == 0) throw ConfigError("window length must be positive");
        if (cfg.window_lengths[i] > p)
            throw ConfigError("window length " + std::to_string(cfg.window_lengths[i]) +
                              " exceeds dimension " + std::to_string(p));
        if (i > 0 && cfg.window_lengths[i] >= cfg.window_lengths[i - 1])
            throw ConfigError("window lengths must be strictly decreasing");
    }
}

}  // namespace

DetectionResult scan_detect(const SampleMatrix& x, const SampleMatrix& y, const ScanConfig& cfg,
                            const RngStream& rng) {
    const std::size_t p = x.cols();
    validate_scan_config(cfg, p);

    const std::vector<double> diff = normalized_sum_diff(x, y);
    std::vector<double> mag(p);
    for (std::size_t c = 0; c < p; ++c) mag[c] = std::abs(diff[c]);

    // Observed statistic for every candidate window.
    std::vector<Window> windows;
    std::size_t n_windows = 0;
    for (const std::size_t len : cfg.window_lengths) n_windows += p - len + 1;
    windows.reserve(n_windows);
    for (const std::size_t len : cfg.window_lengths) {
        for (std::size_t t = 0; t + len <= p; ++t) {
            double wmax = 0.0, mass = 0.0;
            for (std::size_t c = t; c < t + len; ++c) {
                wmax = std::max(wmax, mag[c]);
                mass += mag[c];
            }
            windows.push_back(Window{Region{t, t + len}, wmax, mass});
        }
    }

    // One common threshold: bootstrap quantile of the max over all windows,
    // each replicate reusing a single multiplier vector across windows.
    const BootstrapDesign design = make_bootstrap_design(make_centered_pair(x, y));
    const std::vector<double> mult =
        draw_multipliers(rng, static_cast<std::size_t>(cfg.n_boot), design.n_rows);
    std::vector<double> maxima = scan_replicate_maxima(
        design, mult, static_cast<std::size_t>(cfg.n_boot), cfg.window_lengths);
    const double threshold = critical_value_from_replicates(std::move(maxima), cfg.alpha);

    // Greedy selection by descending statistic; every window containing the
    // same peak column ties on the max, so windowed mass decides among them
    // and keeps the selection centered on the signal. Overlaps are discarded.
    std::vector<const Window*> order;
    order.reserve(windows.size());
    for (const Window& w : windows)
        if (w.statistic > threshold) order.push_back(&w);
    std::sort(order.begin(), order.end(), [](const Window* a, const Window* b) {
        if (a->statistic != b->statistic) return a->statistic > b->statistic;
        if (a->mass != b->mass) return a->mass > b->mass;
        if (a->region.start != b->region.start) return a->region.start < b->region.start;
        return a->region.length() < b->region.length();
    });

    std::vector<DetectedSegment> selected;
    for (const Window* w : order) {
        bool overlaps = false;
        for (const DetectedSegment& s : selected)
            if (w->region.start < s.region.end && s.region.start < w->region.end) {
                overlaps = true;
                break;
            }
        if (!overlaps)
            selected.push_back(DetectedSegment{w->region, 0, 0, w->statistic});
    }

    DetectionResult result;
    result.regions = rearrange(selected);
    result.segments = std::move(selected);
    result.tests_performed = n_windows;
    result.rounds_used = 0;
    return result;
}

}  // namespace birs
