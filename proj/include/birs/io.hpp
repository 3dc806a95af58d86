#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "birs/types.hpp"

namespace birs {

enum class MatrixFormat { csv, bin };
enum class ResultFormat { json, tsv };

/// Reads a matrix, auto-detecting the binary container by its magic bytes
/// and falling back to CSV (optional header row).
SampleMatrix read_matrix(const std::string& path);
SampleMatrix read_matrix(const std::string& path, MatrixFormat format);

/// CSV uses 17 significant digits; bin is the 8-byte magic "BIRSMAT1",
/// little-endian u64 rows and cols, then row-major little-endian doubles.
void write_matrix(const SampleMatrix& m, const std::string& path, MatrixFormat format);

/// Newline-delimited 0/1 labels, one per row of a pooled matrix.
std::vector<int> read_labels(const std::string& path);

/// Splits a pooled matrix into (X, Y): label 1 rows form X, label 0 rows Y.
std::pair<SampleMatrix, SampleMatrix> split_by_labels(const SampleMatrix& pooled,
                                                      const std::vector<int>& labels);

/// Detection result as a JSON document. Regions are reported 1-based
/// inclusive; a merged region carries the earliest contributing round, and
/// the depth/statistic of its strongest constituent segment.
nlohmann::ordered_json result_to_json(const DetectionResult& result,
                                      const nlohmann::ordered_json& config_echo);

std::string result_to_tsv(const DetectionResult& result);

void write_result(const DetectionResult& result, const std::string& path, ResultFormat format,
                  const nlohmann::ordered_json& config_echo);

/// Parses an emitted JSON document back into regions (0-based half-open).
std::vector<Region> regions_from_json(const std::string& text);

}  // namespace birs
