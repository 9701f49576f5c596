#ifndef SGS_STREAM_GEN_HPP
#define SGS_STREAM_GEN_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "sgs/core.hpp"

namespace sgs {

/// Seeded synthetic stream: k Gaussian blobs drifting through [0,1]^d plus
/// uniform background noise. Stands in for the proprietary feeds; every
/// draw comes from one seeded generator so replays are identical.
struct BlobStreamConfig {
    int d = 2;
    int blobs = 5;
    double sigma = 0.02;
    double noise_fraction = 0.1;
    double drift = 0.01;              // per-slide center movement scale
    std::uint32_t points_per_slide = 100;  // time-based mode only
    std::uint64_t seed = 1;
    WindowSpec window;
};

class BlobStream {
public:
    explicit BlobStream(BlobStreamConfig cfg);

    /// Points of the next batch, stamped inside the batch's interval. For
    /// count-based windows the batch size equals the interval width; for
    /// time-based windows it is points_per_slide, stamps evenly spaced.
    std::vector<StreamPoint> next_slide();

    const BlobStreamConfig& config() const { return cfg_; }

private:
    BlobStreamConfig cfg_;
    WindowTimeline timeline_;
    std::mt19937_64 rng_;
    std::vector<std::vector<double>> centers_;
    std::vector<std::vector<double>> velocity_;
    std::int64_t batch_no_ = 0;
    PointId next_id_ = 1;
};

}  // namespace sgs

#endif  // SGS_STREAM_GEN_HPP
