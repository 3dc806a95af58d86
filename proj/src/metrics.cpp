#include "birs/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace birs {

namespace {

std::size_t intersection_size(std::span<const Region> a, std::span<const Region> b) {
    std::size_t total = 0;
    for (const Region& ra : a)
        for (const Region& rb : b) {
            const std::size_t lo = std::max(ra.start, rb.start);
            const std::size_t hi = std::min(ra.end, rb.end);
            if (lo < hi) total += hi - lo;
        }
    return total;
}

}  // namespace

double jaccard(std::span<const Region> a, std::span<const Region> b) {
    const std::vector<Region> na = normalize_regions(a);
    const std::vector<Region> nb = normalize_regions(b);
    const std::size_t sa = region_union_size(na);
    const std::size_t sb = region_union_size(nb);
    const std::size_t inter = intersection_size(na, nb);
    const std::size_t uni = sa + sb - inter;
    if (uni == 0) return 1.0;  // both empty
    return static_cast<double>(inter) / static_cast<double>(uni);
}

EvalReport eval_detection(std::span<const Region> detected, std::span<const Region> truth,
                          std::size_t p) {
    validate_regions(detected, p);
    validate_regions(truth, p);
    const std::vector<Region> det = normalize_regions(detected);
    const std::vector<Region> tru = normalize_regions(truth);

    EvalReport report;
    report.n_detected_points = region_union_size(det);
    const std::size_t truth_points = region_union_size(tru);
    const std::size_t inter = intersection_size(det, tru);

    report.tpr = truth_points == 0
                     ? 1.0
                     : static_cast<double>(inter) / static_cast<double>(truth_points);
    const std::size_t false_points = report.n_detected_points - inter;
    report.fdp = static_cast<double>(false_points) /
                 static_cast<double>(std::max<std::size_t>(report.n_detected_points, 1));

    for (const Region& t : truth) {
        double best = 0.0;
        for (const Region& d : det) best = std::max(best, jaccard({&t, 1}, {&d, 1}));
        report.per_region_jaccard.emplace_back(t, best);
    }
    return report;
}

std::size_t prop1_bound(std::size_t p, int s, int m) {
    if (s < 0 || s >= 63 || (std::size_t(1) << s) >= p)
        throw ConfigError("prop1_bound: need 2^s < p");
    const double per_round = static_cast<double>(p) / std::pow(2.0, s - 1) +
                             std::log2(static_cast<double>(p)) - static_cast<double>(s);
    return static_cast<std::size_t>(std::ceil(static_cast<double>(m + 1) * per_round));
}

}  // namespace birs
