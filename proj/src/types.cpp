#include "birs/types.hpp"

#include <algorithm>

namespace birs {

void validate_regions(std::span<const Region> regions, std::size_t p) {
    for (const Region& r : regions) {
        if (r.start >= r.end)
            throw InputError("region [" + std::to_string(r.start) + "," + std::to_string(r.end) +
                             ") is empty or inverted");
        if (r.end > p)
            throw InputError("region [" + std::to_string(r.start) + "," + std::to_string(r.end) +
                             ") exceeds dimension " + std::to_string(p));
    }
}

std::vector<Region> normalize_regions(std::span<const Region> regions) {
    std::vector<Region> sorted(regions.begin(), regions.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const Region& a, const Region& b) { return a.start < b.start; });
    std::vector<Region> merged;
    for (const Region& r : sorted) {
        if (!merged.empty() && r.start <= merged.back().end)
            merged.back().end = std::max(merged.back().end, r.end);
        else
            merged.push_back(r);
    }
    return merged;
}

std::size_t region_union_size(std::span<const Region> regions) {
    std::size_t total = 0;
    for (const Region& r : normalize_regions(regions)) total += r.length();
    return total;
}

}  // namespace birs
