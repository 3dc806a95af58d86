#include "birs/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace birs {

namespace {

constexpr char kMagic[8] = {'B', 'I', 'R', 'S', 'M', 'A', 'T', '1'};

std::uint64_t read_u64_le(const unsigned char* b) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

void write_u64_le(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64_le(const unsigned char* b) {
    const std::uint64_t bits = read_u64_le(b);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

void write_f64_le(std::ostream& os, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    write_u64_le(os, bits);
}

bool parse_double(std::string_view text, double& out) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        std::string_view cell = (comma == std::string_view::npos)
                                    ? line.substr(pos)
                                    : line.substr(pos, comma - pos);
        while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t'))
            cell.remove_prefix(1);
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
            cell.remove_suffix(1);
        cells.push_back(cell);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return cells;
}

SampleMatrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::vector<double> values;
    std::size_t cols = 0, rows = 0, line_no = 0;
    std::string line;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        const auto cells = split_csv_line(line);
        if (first_content_line) {
            // Optional header: skip the first row when it is not numeric.
            double probe;
            if (!parse_double(cells[0], probe)) {
                first_content_line = false;
                continue;
            }
            cols = cells.size();
            first_content_line = false;
        }
        if (cols == 0) cols = cells.size();
        if (cells.size() != cols)
            throw InputError("'" + path + "' line " + std::to_string(line_no) + ": expected " +
                             std::to_string(cols) + " columns, found " +
                             std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v;
            if (!parse_double(cells[c], v))
                throw InputError("'" + path + "' line " + std::to_string(line_no) + " column " +
                                 std::to_string(c + 1) + ": not a number: '" +
                                 std::string(cells[c]) + "'");
            values.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) throw InputError("'" + path + "' contains no data rows");
    return SampleMatrix(rows, cols, std::move(values));
}

SampleMatrix read_matrix_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::array<unsigned char, 24> header{};
    in.read(reinterpret_cast<char*>(header.data()), header.size());
    if (in.gcount() != static_cast<std::streamsize>(header.size()) ||
        std::memcmp(header.data(), kMagic, 8) != 0)
        throw InputError("'" + path + "': bad magic, not a matrix file");
    const std::uint64_t rows = read_u64_le(header.data() + 8);
    const std::uint64_t cols = read_u64_le(header.data() + 16);
    if (rows == 0 || cols == 0 || rows > (std::uint64_t(1) << 32) ||
        cols > (std::uint64_t(1) << 32))
        throw InputError("'" + path + "': implausible shape " + std::to_string(rows) + "x" +
                         std::to_string(cols));
    const std::size_t count = static_cast<std::size_t>(rows * cols);
    std::vector<unsigned char> payload(count * 8);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (in.gcount() != static_cast<std::streamsize>(payload.size()))
        throw InputError("'" + path + "': truncated payload, expected " +
                         std::to_string(payload.size()) + " bytes after header, found " +
                         std::to_string(in.gcount()));
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) values[i] = read_f64_le(payload.data() + 8 * i);
    return SampleMatrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                        std::move(values));
}

}  // namespace

SampleMatrix read_matrix(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw InputError("cannot open '" + path + "'");
    char head[8] = {};
    probe.read(head, 8);
    const bool is_bin = probe.gcount() == 8 && std::memcmp(head, kMagic, 8) == 0;
    probe.close();
    return is_bin ? read_matrix_bin(path) : read_matrix_csv(path);
}

SampleMatrix read_matrix(const std::string& path, MatrixFormat format) {
    return format == MatrixFormat::bin ? read_matrix_bin(path) : read_matrix_csv(path);
}

void write_matrix(const SampleMatrix& m, const std::string& path, MatrixFormat format) {
    std::ofstream out(path, format == MatrixFormat::bin ? std::ios::binary : std::ios::out);
    if (!out) throw InputError("cannot write '" + path + "'");
    if (format == MatrixFormat::bin) {
        out.write(kMagic, 8);
        write_u64_le(out, m.rows());
        write_u64_le(out, m.cols());
        for (const double v : m.values()) write_f64_le(out, v);
    } else {
        char buf[40];
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t c = 0; c < m.cols(); ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
                if (c) out << ',';
                out << buf;
            }
            out << '\n';
        }
    }
    if (!out) throw InputError("write to '" + path + "' failed");
}

std::vector<int> read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        if (line == "0")
            labels.push_back(0);
        else if (line == "1")
            labels.push_back(1);
        else
            throw InputError("'" + path + "' line " + std::to_string(line_no) +
                             ": label must be 0 or 1, got '" + line + "'");
    }
    if (labels.empty()) throw InputError("'" + path + "' contains no labels");
    return labels;
}

std::pair<SampleMatrix, SampleMatrix> split_by_labels(const SampleMatrix& pooled,
                                                      const std::vector<int>& labels) {
    if (labels.size() != pooled.rows())
        throw InputError("label count " + std::to_string(labels.size()) +
                         " does not match row count " + std::to_string(pooled.rows()));
    const std::size_t n1 = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t n0 = labels.size() - n1;
    if (n1 == 0 || n0 == 0) throw InputError("labels must contain both classes");
    SampleMatrix x(n1, pooled.cols());
    SampleMatrix y(n0, pooled.cols());
    std::size_t xi = 0, yi = 0;
    for (std::size_t r = 0; r < pooled.rows(); ++r) {
        double* dst = labels[r] == 1 ? x.row_ptr(xi++) : y.row_ptr(yi++);
        std::memcpy(dst, pooled.row_ptr(r), pooled.cols() * sizeof(double));
    }
    return {std::move(x), std::move(y)};
}

namespace {

struct RegionRow {
    Region region;
    int round;
    int depth;
    double statistic;
};

// Provenance for a merged region: earliest round, and the depth/statistic of
// the strongest contributing segment.
std::vector<RegionRow> region_rows(const DetectionResult& result) {
    std::vector<RegionRow> rows;
    rows.reserve(result.regions.size());
    for (const Region& region : result.regions) {
        RegionRow row{region, 0, 0, 0.0};
        bool first = true;
        for (const DetectedSegment& seg : result.segments) {
            if (seg.region.start < region.start || seg.region.end > region.end) continue;
            if (first || seg.round < row.round) row.round = seg.round;
            if (first || seg.statistic > row.statistic) {
                row.statistic = seg.statistic;
                row.depth = seg.depth;
            }
            first = false;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

nlohmann::ordered_json result_to_json(const DetectionResult& result,
                                      const nlohmann::ordered_json& config_echo) {
    nlohmann::ordered_json doc;
    doc["config_echo"] = config_echo;
    doc["regions"] = nlohmann::ordered_json::array();
    for (const RegionRow& row : region_rows(result)) {
        nlohmann::ordered_json r;
        r["start_1based"] = row.region.start + 1;
        r["end_1based_inclusive"] = row.region.end;  // exclusive 0-based == inclusive 1-based
        r["round"] = row.round;
        r["depth"] = row.depth;
        r["statistic"] = row.statistic;
        doc["regions"].push_back(std::move(r));
    }
    doc["tests_performed"] = result.tests_performed;
    doc["rounds_used"] = result.rounds_used;
    doc["hit_round_cap"] = result.hit_round_cap;
    return doc;
}

std::string result_to_tsv(const DetectionResult& result) {
    std::ostringstream os;
    os << "start_1based\tend_1based_inclusive\tround\tdepth\tstatistic\n";
    char buf[40];
    for (const RegionRow& row : region_rows(result)) {
        std::snprintf(buf, sizeof buf, "%.17g", row.statistic);
        os << row.region.start + 1 << '\t' << row.region.end << '\t' << row.round << '\t'
           << row.depth << '\t' << buf << '\n';
    }
    os << "# tests_performed=" << result.tests_performed << '\n';
    os << "# rounds_used=" << result.rounds_used << '\n';
    return os.str();
}

void write_result(const DetectionResult& result, const std::string& path, ResultFormat format,
                  const nlohmann::ordered_json& config_echo) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    if (format == ResultFormat::json)
        out << result_to_json(result, config_echo).dump(2) << '\n';
    else
        out << result_to_tsv(result);
    if (!out) throw InputError("write to '" + path + "' failed");
}

std::vector<Region> regions_from_json(const std::string& text) {
    const auto doc = nlohmann::json::parse(text);
    std::vector<Region> regions;
    for (const auto& r : doc.at("regions")) {
        const std::size_t start1 = r.at("start_1based").get<std::size_t>();
        const std::size_t end1 = r.at("end_1based_inclusive").get<std::size_t>();
        regions.push_back(Region{start1 - 1, end1});
    }
    return regions;
}

}  // namespace birs
