#include "sgs/stream_gen.hpp"

#include <cmath>
#include <stdexcept>

namespace sgs {

BlobStream::BlobStream(BlobStreamConfig cfg)
    : cfg_(std::move(cfg)), timeline_(cfg_.window), rng_(cfg_.seed) {
    if (cfg_.d < 1 || cfg_.blobs < 1) {
        throw std::invalid_argument("blob stream: d and blobs must be >= 1");
    }
    if (cfg_.noise_fraction < 0.0 || cfg_.noise_fraction > 1.0) {
        throw std::invalid_argument("blob stream: noise fraction must be in [0,1]");
    }
    std::uniform_real_distribution<double> center(0.2, 0.8);
    std::uniform_real_distribution<double> vel(-cfg_.drift, cfg_.drift);
    for (int b = 0; b < cfg_.blobs; ++b) {
        std::vector<double> c(static_cast<std::size_t>(cfg_.d));
        std::vector<double> v(static_cast<std::size_t>(cfg_.d));
        for (auto& x : c) x = center(rng_);
        for (auto& x : v) x = vel(rng_);
        centers_.push_back(std::move(c));
        velocity_.push_back(std::move(v));
    }
}

std::vector<StreamPoint> BlobStream::next_slide() {
    const auto [lo, hi] = timeline_.batch_interval(batch_no_);
    ++batch_no_;

    // Drift the blobs, bouncing off the [0.1, 0.9] walls.
    for (int b = 0; b < cfg_.blobs; ++b) {
        for (int a = 0; a < cfg_.d; ++a) {
            double& x = centers_[b][a];
            double& v = velocity_[b][a];
            x += v;
            if (x < 0.1) {
                x = 0.2 - x;
                v = -v;
            } else if (x > 0.9) {
                x = 1.8 - x;
                v = -v;
            }
        }
    }

    std::size_t count;
    if (cfg_.window.kind == WindowKind::count) {
        count = static_cast<std::size_t>(std::llround(hi - lo));
    } else {
        count = cfg_.points_per_slide;
    }

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> blob(0, cfg_.blobs - 1);
    std::normal_distribution<double> spread(0.0, cfg_.sigma);

    std::vector<StreamPoint> batch;
    batch.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        StreamPoint p;
        p.id = next_id_++;
        if (cfg_.window.kind == WindowKind::count) {
            p.t = lo + static_cast<double>(i + 1);
        } else {
            p.t = lo + (hi - lo) * static_cast<double>(i + 1) /
                           static_cast<double>(count);
        }
        p.coords.resize(static_cast<std::size_t>(cfg_.d));
        if (unit(rng_) < cfg_.noise_fraction) {
            for (auto& x : p.coords) x = unit(rng_);
        } else {
            const int b = blob(rng_);
            for (int a = 0; a < cfg_.d; ++a) {
                p.coords[static_cast<std::size_t>(a)] = centers_[b][a] + spread(rng_);
            }
        }
        batch.push_back(std::move(p));
    }
    return batch;
}

}  // namespace sgs
