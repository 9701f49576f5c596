#ifndef SGS_ENGINE_HPP
#define SGS_ENGINE_HPP

#include <cstdint>
#include <limits>
#include <map>
#include <unordered_map>
#include <vector>

#include "sgs/core.hpp"
#include "sgs/summary.hpp"

namespace sgs {

/// One window's view of one cluster: the level-0 summarization plus the
/// full representation.
struct ClusterOutput {
    std::uint64_t cluster_id = 0;      // smallest member point id
    WindowIndex window_index = 0;
    SGSummary sgs;                     // level 0, lifespans still attached
    std::vector<PointId> members;      // full representation, ascending
    std::vector<PointId> core_members; // subset of members, ascending

    bool operator==(const ClusterOutput&) const = default;
};

struct EngineCounters {
    std::uint64_t range_queries = 0;
    std::uint64_t distance_computations = 0;
    std::uint64_t points_ingested = 0;
};

/// Integrated cluster extraction + summarization over sliding windows.
///
/// All expiry bookkeeping is done on absolute window indices: an entity with
/// expiry e is live in windows [birth, e). Advancing the window therefore
/// "decrements every lifespan" without touching the stored values, and
/// expirations never run a range query or compute a distance. The remaining
/// lifespan of anything at window w is expiry - w.
///
/// Single-writer: one thread mutates the engine. Emitted ClusterOutput
/// values are immutable snapshots.
class CsgsEngine {
public:
    struct Config {
        WindowSpec window;
        ClusterParams params;
        int d = 0;
        std::vector<double> origin;  // grid origin, all-zero default
        int rho = 3;                 // stamped into emitted summaries
    };

    explicit CsgsEngine(Config cfg);

    /// Feed the next batch. The first ceil(win/slide) batches fill W_0 (no
    /// output until the window completes); afterwards each batch is the
    /// fresh slide of the next window. Batches must arrive stamp-ordered
    /// and inside the expected stamp interval.
    std::vector<ClusterOutput> ingest_slide(const std::vector<StreamPoint>& batch);

    /// All live q != p with dist(p,q) <= range threshold; searches only p's
    /// cell plus the envelope cells.
    std::vector<PointId> range_query(const StreamPoint& p);

    /// Insert one point into the current window and propagate every status,
    /// connection and neighbor-list consequence. Runs exactly one range
    /// query.
    void apply_insertion(const StreamPoint& p);

    /// Slide to the next window: expire points, drop the first neighbor-list
    /// bucket of every live point. No distance computation happens here.
    void advance_window();

    /// Clusters of the current window: connected components of core cells
    /// under live connections, plus attached edge cells.
    std::vector<ClusterOutput> emit_clusters() const;

    WindowIndex window_index() const { return window_index_; }
    double window_start() const;
    const EngineCounters& counters() const { return counters_; }
    const GridSpec& grid() const { return grid_spec_; }
    const Config& config() const { return cfg_; }

    std::size_t live_point_count() const { return points_.size(); }
    std::vector<StreamPoint> live_points() const;  // sorted by id

    /// Largest non-core-career neighbor list currently held; must stay
    /// below the count threshold.
    std::size_t max_neighbor_list_size() const;

    struct CellInfo {
        CellCoord location;
        std::uint32_t population = 0;
        CellStatus status = CellStatus::noise;
        std::int32_t core_lifespan = 0;
    };
    /// Snapshot of every live cell with its derived status (edge = non-core
    /// but attached to a live core cell). Sorted by location.
    std::vector<CellInfo> cell_snapshot() const;

private:
    struct NeighborEntry {
        PointId id = 0;
        WindowIndex nexp = 0;  // neighborship expiry (min of both point expiries)
    };

    struct PointRec {
        StreamPoint pt;
        CellCoord cell;
        WindowIndex expiry = 0;
        WindowIndex core_expiry = 0;
        std::vector<NeighborEntry> ncl;  // sorted by nexp; < count_threshold entries
    };

    struct LinkSlot {
        std::uint16_t env_index = 0;
        WindowIndex expiry = 0;
    };

    struct CellRec {
        std::vector<PointId> pts;  // live residents, arrival order
        WindowIndex core_expiry = 0;
        std::vector<LinkSlot> conn;  // core-core, mirrored on both cells
        std::vector<LinkSlot> att;   // this cell is the core side
    };

    using Grid = std::unordered_map<CellCoord, CellRec, CellCoordHash>;

    bool live(WindowIndex expiry) const { return expiry > window_index_; }

    std::vector<NeighborEntry> find_neighbors(const StreamPoint& p,
                                              WindowIndex p_expiry);

    /// New core-career end for a point given one extra neighborship; the
    /// neighbor list plus the newcomer is everything that can extend it.
    WindowIndex recompute_core_expiry(const PointRec& rec, WindowIndex extra_nexp) const;

    /// Fold connection/attachment consequences of a (re)confirmed core
    /// career over the point's neighbor list, then prune entries the career
    /// now outlives.
    void apply_core_career_change(PointRec& rec);

    void fold_conn(const CellCoord& a, const CellCoord& b, WindowIndex expiry);
    void fold_att(const CellCoord& core_side, const CellCoord& other, WindowIndex expiry);
    static void fold_slot(std::vector<LinkSlot>& slots, std::uint16_t env_index,
                          WindowIndex expiry);

    Config cfg_;
    GridSpec grid_spec_;
    Envelope envelope_;
    WindowTimeline timeline_;

    Grid grid_;
    std::unordered_map<PointId, PointRec> points_;
    std::map<WindowIndex, std::vector<PointId>> expiry_schedule_;

    WindowIndex window_index_ = 0;
    std::int64_t batch_no_ = 0;
    double last_arrival_ = -std::numeric_limits<double>::infinity();
    EngineCounters counters_;
};

}  // namespace sgs

#endif  // SGS_ENGINE_HPP
