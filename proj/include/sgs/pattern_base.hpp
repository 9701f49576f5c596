#ifndef SGS_PATTERN_BASE_HPP
#define SGS_PATTERN_BASE_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sgs/core.hpp"
#include "sgs/summary.hpp"

namespace sgs {

/// The four non-locational features a cluster is indexed by.
struct FeatureVector {
    std::uint32_t volume = 0;         // number of skeletal cells
    std::uint32_t core_count = 0;     // number of core cells
    double avg_density = 0.0;         // total population / volume
    double avg_connectivity = 0.0;    // mean true indicators per core cell

    std::array<double, 4> as_array() const {
        return {static_cast<double>(volume), static_cast<double>(core_count),
                avg_density, avg_connectivity};
    }
    bool operator==(const FeatureVector&) const = default;
};

FeatureVector feature_vector(const SGSummary& s);

using Mbr = std::vector<std::pair<double, double>>;

struct PatternRecord {
    std::uint64_t id = 0;
    WindowIndex window_index = 0;
    SGSummary sgs;   // archived form (booleans) at its level
    Mbr mbr;         // exact bounds of the cell footprint
    FeatureVector features;
    std::vector<StreamPoint> full_points;  // only with --emit-full

    bool operator==(const PatternRecord&) const = default;
};

/// Which clusters get archived, and at which resolution.
struct ArchivePolicy {
    enum class Mode { all, sample, predicate };
    Mode mode = Mode::all;
    double sample_rate = 1.0;              // mode == sample
    std::uint32_t min_population = 0;      // mode == predicate
    std::uint32_t min_volume = 0;          // mode == predicate

    int level = 0;                          // fixed archive level...
    std::optional<std::uint64_t> budget_bytes;  // ...unless a budget decides
    int max_level = 3;

    void validate() const;
};

enum class CellEncoding { json, binary };

/// Inclusive per-feature intervals; use +-infinity for open ends.
struct FeatureBox {
    std::array<std::pair<double, double>, 4> range{
        std::pair{-std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()},
        std::pair{-std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()},
        std::pair{-std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()},
        std::pair{-std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()}};

    bool contains(const FeatureVector& f) const {
        const auto v = f.as_array();
        for (int i = 0; i < 4; ++i) {
            if (v[i] < range[i].first || v[i] > range[i].second) return false;
        }
        return true;
    }
};

/// Indexed store of archived cluster summarizations. One writer, any number
/// of concurrent readers of a quiescent base. Backed by an R-tree over the
/// MBRs and a per-level 4-d grid of feature buckets; both answers are
/// re-checked exactly, so they always equal the linear-scan result.
class PatternBase {
public:
    explicit PatternBase(ArchivePolicy policy = {}, std::uint64_t seed = 0,
                         CellEncoding encoding = CellEncoding::json);
    ~PatternBase();
    PatternBase(PatternBase&&) noexcept;
    PatternBase& operator=(PatternBase&&) noexcept;

    /// Archive a level-0 summary if the policy admits it; the stored record
    /// is compressed to the policy's resolution. Returns the new record id,
    /// or nothing when the policy skips the cluster.
    std::optional<std::uint64_t> archive(const SGSummary& level0,
                                         WindowIndex window,
                                         std::vector<StreamPoint> full_points = {});

    const std::vector<PatternRecord>& records() const { return records_; }
    const PatternRecord* find(std::uint64_t id) const;

    /// Ids of records whose MBR intersects the box (closed intervals),
    /// ascending.
    std::vector<std::uint64_t> locate_overlapping(const Mbr& box) const;

    /// Ids of records whose feature vector lies in the box, ascending;
    /// optionally restricted to records archived at one level.
    std::vector<std::uint64_t> feature_range_search(
        const FeatureBox& box, std::optional<int> level = std::nullopt) const;

    std::vector<int> levels_present() const;

    const ArchivePolicy& policy() const { return policy_; }
    CellEncoding encoding() const { return encoding_; }

    /// Opaque run-configuration blob (JSON text) echoed into the manifest.
    std::string run_config;

    /// Directory layout: manifest.json plus one records/rec_<id>.json per
    /// record (with a .cells sidecar in binary mode). Loading rebuilds both
    /// indices; save then load is the identity on records.
    void save(const std::string& dir) const;
    static PatternBase load(const std::string& dir);

private:
    struct Indexes;

    void index_record(const PatternRecord& rec);

    ArchivePolicy policy_;
    CellEncoding encoding_;
    std::uint64_t seed_ = 0;
    std::uint64_t sample_draws_ = 0;
    std::mt19937_64 sample_rng_;
    std::uint64_t next_id_ = 1;
    std::vector<PatternRecord> records_;
    std::unique_ptr<Indexes> index_;
};

}  // namespace sgs

#endif  // SGS_PATTERN_BASE_HPP
