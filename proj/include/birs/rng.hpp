#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace birs {

/// Counter-based random stream (Philox 4x32-10). A stream is identified by
/// (seed, stream_id); draw i is a pure function of (seed, stream_id, i), so
/// the same stream replays identically no matter how work is scheduled, and
/// jumping to any position costs nothing.
///
/// Streams are single-owner: parallel workers must each take their own
/// substream. Copying a stream copies its position.
class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::uint64_t position() const { return pos_; }

    /// Child stream determined by (seed, stream_id, index); distinct indexes
    /// under the same parent never share output with each other or the parent.
    RngStream substream(std::uint64_t index) const;

    std::uint64_t next_u64();

    /// Uniform draw strictly inside (0, 1), 53 usable bits.
    double next_uniform();

    /// Standard normal via the inverse CDF; one uniform consumed per draw.
    double next_normal();

    void fill_normal(std::span<double> out);
    std::vector<double> normals(std::size_t count);

private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::uint64_t pos_ = 0;
};

/// Root stream for a seed (stream_id 0).
RngStream make_rng(std::uint64_t seed);

/// Quantile of the standard normal distribution, full double accuracy
/// (Wichura's PPND16). Domain (0, 1), exclusive.
double inverse_normal_cdf(double p);

}  // namespace birs
