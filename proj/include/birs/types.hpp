#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace birs {

/// Thrown when an input file or input matrix is malformed (CLI exit code 2).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a configuration value is out of its legal domain (CLI exit code 3).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Dense row-major matrix of doubles; rows are subjects, columns are
/// features/variants. Immutable by convention once handed to the algorithms.
class SampleMatrix {
public:
    SampleMatrix() = default;

    SampleMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        check_shape();
    }

    SampleMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), data_(std::move(values)) {
        check_shape();
        if (data_.size() != rows_ * cols_)
            throw InputError("SampleMatrix: expected " + std::to_string(rows_ * cols_) +
                             " values, got " + std::to_string(data_.size()));
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }
    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }

    std::span<const double> row(std::size_t r) const { return {row_ptr(r), cols_}; }

    const std::vector<double>& values() const { return data_; }
    std::vector<double>& values() { return data_; }

    bool operator==(const SampleMatrix& other) const = default;

private:
    void check_shape() const {
        if (rows_ == 0 || cols_ == 0)
            throw InputError("SampleMatrix: rows and cols must be positive");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Half-open contiguous column interval [start, end).
struct Region {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - start; }
    bool contains(std::size_t idx) const { return idx >= start && idx < end; }
    bool operator==(const Region&) const = default;
};

/// Throws unless 0 <= start < end <= p for every region.
void validate_regions(std::span<const Region> regions, std::size_t p);

/// Number of distinct indices covered by the (possibly overlapping) regions.
std::size_t region_union_size(std::span<const Region> regions);

/// Sorted, merged (overlap- and adjacency-collapsed) copy of a region set.
std::vector<Region> normalize_regions(std::span<const Region> regions);

/// Result of one DCF two-sample test.
struct TestOutcome {
    double statistic = 0.0;
    double critical = 0.0;
    bool reject = false;  // statistic > critical, strict
    int n_boot = 0;
    double alpha = 0.0;
};

/// A terminal segment accepted by the search, with provenance.
struct DetectedSegment {
    Region region;
    int round = 0;  // re-search index; 0 = initial binary search
    int depth = 0;  // number of ancestral splits at acceptance
    double statistic = 0.0;
};

/// Final output of a detection algorithm.
struct DetectionResult {
    std::vector<Region> regions;            // merged, disjoint, non-adjacent, sorted
    std::vector<DetectedSegment> segments;  // pre-merge provenance
    std::size_t tests_performed = 0;
    int rounds_used = 0;
    bool hit_round_cap = false;  // re-search stopped by the max_rounds safety cap
};

}  // namespace birs
