#ifndef SGS_ORACLE_HPP
#define SGS_ORACLE_HPP

#include <set>
#include <string>
#include <vector>

#include "sgs/core.hpp"
#include "sgs/engine.hpp"
#include "sgs/summary.hpp"

namespace sgs::oracle {

/// One cluster found from scratch. A point may appear as edge in several
/// clusters; core sets of distinct clusters are disjoint.
struct OracleCluster {
    std::set<PointId> core_ids;
    std::set<PointId> edge_ids;
};

/// Per-point neighbor index lists (indices into the window's point vector).
using NeighborLists = std::vector<std::vector<std::uint32_t>>;

/// All-pairs neighbor computation, one row per point. The two variants must
/// produce identical lists; the serial one is the reference the parallel
/// kernel is tested and benchmarked against.
NeighborLists neighbor_lists_serial(const std::vector<StreamPoint>& points,
                                    double range_threshold);
NeighborLists neighbor_lists_parallel(const std::vector<StreamPoint>& points,
                                      double range_threshold);

/// Everything the per-window verification needs, computed from scratch.
struct OracleWindow {
    std::vector<StreamPoint> points;
    ClusterParams params;
    GridSpec grid;
    NeighborLists neighbors;
    std::vector<bool> core;               // per point index
    std::vector<CellCoord> cells;         // per point index
    std::vector<OracleCluster> clusters;  // sorted by smallest core id

    static OracleWindow analyze(std::vector<StreamPoint> points,
                                const ClusterParams& params, const GridSpec& grid,
                                bool parallel = false);

    /// Full representation of one cluster: cores plus edges, ascending ids.
    std::vector<PointId> full_representation(std::size_t cluster_index) const;

    /// Build the cluster's summarization by direct definition checking over
    /// all object pairs.
    SGSummary sgs_of(std::size_t cluster_index, int rho = 3) const;
};

/// From-scratch clustering of one window. Cores are points with at least
/// count_threshold neighbors; clusters are connected components of cores.
/// A non-core point that shares a cell with some cluster's core belongs to
/// that cluster; otherwise it is an edge point of every cluster it has a
/// core neighbor in. Output is order-independent, sorted by smallest core id.
std::vector<OracleCluster> naive_dbscan(const std::vector<StreamPoint>& points,
                                        const ClusterParams& params,
                                        const GridSpec& grid,
                                        bool parallel = false);

/// Summarization of one cluster by definition scan (cells, statuses,
/// populations, connections).
SGSummary naive_sgs(const OracleCluster& cluster,
                    const std::vector<StreamPoint>& points,
                    const GridSpec& grid, const ClusterParams& params);

struct EquivalenceReport {
    bool pass = true;
    std::string divergence;  // first difference found, empty when passing
};

/// Exact comparison of one window's engine output against the from-scratch
/// reference: core partitions, edge memberships and per-cell
/// (location, population, status, connection set) must all match.
EquivalenceReport assert_equivalent(const std::vector<ClusterOutput>& engine_out,
                                    const OracleWindow& reference);

}  // namespace sgs::oracle

#endif  // SGS_ORACLE_HPP
