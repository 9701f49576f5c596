#ifndef SGS_CORE_HPP
#define SGS_CORE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace sgs {

using PointId = std::uint64_t;
using WindowIndex = std::int64_t;

/// One timestamped d-dimensional stream tuple.
/// For count-based windows `t` is the 1-based arrival index; for time-based
/// windows it is the stamp in stream time units. `t` must be non-decreasing
/// in arrival order.
struct StreamPoint {
    PointId id = 0;
    double t = 0.0;
    std::vector<double> coords;

    int dim() const { return static_cast<int>(coords.size()); }
    bool operator==(const StreamPoint&) const = default;
};

enum class WindowKind { count, time };

/// Sliding window description. Window W_n covers stamps in
/// (n*slide, n*slide + win], so a stamp sitting exactly on a slide boundary
/// belongs to the earlier window.
struct WindowSpec {
    WindowKind kind = WindowKind::count;
    double win = 0.0;
    double slide = 0.0;

    void validate() const;
};

/// Clustering thresholds: neighbor range and neighbor count.
struct ClusterParams {
    double range_threshold = 0.0;  // max neighbor distance, > 0
    int count_threshold = 0;       // min neighbors for a core point, >= 1

    void validate() const;
};

/// Per-axis signed grid cell indices. Also used for cell offsets.
struct CellCoord {
    std::vector<std::int32_t> idx;

    CellCoord() = default;
    explicit CellCoord(std::vector<std::int32_t> v) : idx(std::move(v)) {}

    int dim() const { return static_cast<int>(idx.size()); }
    bool operator==(const CellCoord&) const = default;
    bool operator<(const CellCoord& o) const { return idx < o.idx; }

    CellCoord operator+(const CellCoord& o) const;
    CellCoord operator-(const CellCoord& o) const;
    CellCoord operator-() const;

    std::string to_string() const;
};

using CellOffset = CellCoord;

struct CellCoordHash {
    std::size_t operator()(const CellCoord& c) const {
        std::size_t h = 1469598103934665603ull;
        for (auto v : c.idx) {
            h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(v));
            h *= 1099511628211ull;
        }
        return h;
    }
};

/// Uniform grid over the data space. The cell side is chosen so the cell
/// diagonal equals the range threshold; any two points sharing a cell are
/// neighbors.
struct GridSpec {
    int d = 0;
    double side = 0.0;
    std::vector<double> origin;  // all-zero by default

    static GridSpec make(const ClusterParams& params, int d,
                         std::vector<double> origin = {});

    /// Grid of the coarser summarization level: side scaled by rho^level.
    GridSpec at_level(int level, int rho) const;

    double axis_min(int axis, std::int32_t cell_index) const {
        return origin[axis] + side * cell_index;
    }

    bool operator==(const GridSpec&) const = default;

    void validate(const ClusterParams& params) const;
};

/// Number of windows, counted from the current window inclusive, in which a
/// property is known to persist. Only new arrivals can extend one.
struct Lifespan {
    std::int32_t remaining = 0;

    bool operator==(const Lifespan&) const = default;
};

enum class CellStatus : std::uint8_t { noise = 0, edge = 1, core = 2 };

const char* to_string(CellStatus s);

// --- grid geometry -------------------------------------------------------

/// Cell side length = range_threshold / sqrt(d) (diagonal == range threshold).
double grid_side_length(const ClusterParams& params, int d);

/// Cell indices of a point: floor((x - origin) / side) per axis. Boundary
/// values map to the cell whose minimum corner they are.
CellCoord cell_of(std::span<const double> coords, const GridSpec& g);
CellCoord cell_of(const StreamPoint& p, const GridSpec& g);

/// Minimum Euclidean distance between any point of cell a and any point of
/// cell b; 0 when the cells are identical or share a face/corner.
double min_cell_gap(const CellCoord& a, const CellCoord& b, const GridSpec& g);

/// All non-zero cell offsets o with min_cell_gap(c, c+o) < range_threshold.
/// This set bounds both range-query candidate cells and the index space of
/// the connection vector. Sorted lexicographically, closed under negation.
std::vector<CellOffset> neighbor_cell_envelope(const GridSpec& g,
                                               const ClusterParams& params);
std::vector<CellOffset> neighbor_cell_envelope(const GridSpec& g,
                                               double range_threshold);

/// Envelope with an offset -> index lookup; index order is the lexicographic
/// offset order and is the canonical order of connection indicators.
class Envelope {
public:
    Envelope() = default;
    static Envelope make(const GridSpec& g, double range_threshold);

    const std::vector<CellOffset>& offsets() const { return offsets_; }
    std::size_t size() const { return offsets_.size(); }
    const CellOffset& offset(std::size_t index) const { return offsets_[index]; }

    /// Index of an offset, or -1 if outside the envelope.
    int index_of(const CellOffset& o) const;

private:
    std::vector<CellOffset> offsets_;
};

// --- window & lifespan arithmetic ----------------------------------------

/// Largest window index m with m*slide < t, i.e. the last window the stamp
/// participates in. Exact on integral stamps/slides.
WindowIndex last_window_containing(double t, const WindowSpec& w);

/// ceil((p.t - window_start) / slide): how many windows, current inclusive,
/// the point participates in. The point must satisfy
/// window_start < p.t <= window_start + win.
Lifespan point_lifespan(const StreamPoint& p, double window_start,
                        const WindowSpec& w);

/// A neighborship persists while both endpoints do: min of the lifespans.
Lifespan neighborship_lifespan(Lifespan a, Lifespan b);

/// Remaining core career given the point's own lifespan and the neighborship
/// lifespans of its current neighbors: min(own, k-th largest) with
/// k = count_threshold, or 0 with fewer than k neighbors.
Lifespan core_lifespan(Lifespan own, std::span<const Lifespan> neighborships,
                       int count_threshold);

/// Remaining edge career: the windows right after the core career while some
/// neighbor is still core, max(0, min(own, max neighbor core) - own core).
Lifespan edge_lifespan(Lifespan own, Lifespan own_core,
                       std::span<const Lifespan> neighbor_core);

/// Squared Euclidean distance. The one comparison every neighbor test in the
/// library uses is dist2(a,b) <= r*r, so engine and oracle agree bit-exactly.
double dist2(std::span<const double> a, std::span<const double> b);

/// Batch layout of a stream run: the first fill_batches() batches fill W_0,
/// afterwards every batch is the fresh slide of the next window.
struct WindowTimeline {
    WindowSpec spec;

    explicit WindowTimeline(WindowSpec s) : spec(s) { spec.validate(); }

    std::int64_t fill_batches() const;

    /// Stamp interval (lo, hi] covered by batch b (0-based).
    std::pair<double, double> batch_interval(std::int64_t b) const;

    /// Window a batch belongs to: 0 throughout the fill, then one per batch.
    WindowIndex window_of_batch(std::int64_t b) const;

    /// Whether the batch closes a window (false only for fill batches before
    /// the first full window).
    bool batch_completes_window(std::int64_t b) const;

    std::pair<double, double> window_interval(WindowIndex n) const;
};

}  // namespace sgs

#endif  // SGS_CORE_HPP
