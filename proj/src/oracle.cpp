#include "sgs/oracle.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace sgs::oracle {

namespace {

NeighborLists neighbor_lists(const std::vector<StreamPoint>& points,
                             double range_threshold, bool parallel) {
    const double r2 = range_threshold * range_threshold;
    const std::int64_t n = static_cast<std::int64_t>(points.size());
    NeighborLists lists(points.size());

#pragma omp parallel for schedule(dynamic, 16) if (parallel)
    for (std::int64_t i = 0; i < n; ++i) {
        auto& row = lists[static_cast<std::size_t>(i)];
        const auto& pi = points[static_cast<std::size_t>(i)].coords;
        for (std::int64_t j = 0; j < n; ++j) {
            if (j == i) continue;
            if (dist2(pi, points[static_cast<std::size_t>(j)].coords) <= r2) {
                row.push_back(static_cast<std::uint32_t>(j));
            }
        }
    }
    return lists;
}

}  // namespace

NeighborLists neighbor_lists_serial(const std::vector<StreamPoint>& points,
                                    double range_threshold) {
    return neighbor_lists(points, range_threshold, false);
}

NeighborLists neighbor_lists_parallel(const std::vector<StreamPoint>& points,
                                      double range_threshold) {
    return neighbor_lists(points, range_threshold, true);
}

OracleWindow OracleWindow::analyze(std::vector<StreamPoint> points,
                                   const ClusterParams& params,
                                   const GridSpec& grid, bool parallel) {
    params.validate();
    OracleWindow w;
    w.points = std::move(points);
    w.params = params;
    w.grid = grid;
    w.neighbors = neighbor_lists(w.points, params.range_threshold, parallel);

    const std::size_t n = w.points.size();
    w.core.assign(n, false);
    w.cells.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        w.core[i] = static_cast<int>(w.neighbors[i].size()) >= params.count_threshold;
        w.cells.push_back(cell_of(w.points[i], grid));
    }

    // Connected components of core points under neighborship.
    std::vector<int> comp(n, -1);
    int comp_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!w.core[i] || comp[i] >= 0) continue;
        const int id = comp_count++;
        std::vector<std::size_t> stack{i};
        comp[i] = id;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::uint32_t v : w.neighbors[u]) {
                if (w.core[v] && comp[v] < 0) {
                    comp[v] = id;
                    stack.push_back(v);
                }
            }
        }
    }
    w.clusters.resize(static_cast<std::size_t>(comp_count));
    for (std::size_t i = 0; i < n; ++i) {
        if (w.core[i]) {
            w.clusters[static_cast<std::size_t>(comp[i])].core_ids.insert(w.points[i].id);
        }
    }

    // Cells hosting at least one core point, with the component they belong
    // to (all cores sharing a cell are mutual neighbors, hence one cluster).
    std::unordered_map<CellCoord, int, CellCoordHash> core_cell_comp;
    for (std::size_t i = 0; i < n; ++i) {
        if (w.core[i]) core_cell_comp.emplace(w.cells[i], comp[i]);
    }

    // Edge assignment. A non-core point inside a core cell follows that
    // cell's cluster; otherwise it attaches to every cluster it has a core
    // neighbor in.
    for (std::size_t i = 0; i < n; ++i) {
        if (w.core[i]) continue;
        auto host = core_cell_comp.find(w.cells[i]);
        if (host != core_cell_comp.end()) {
            w.clusters[static_cast<std::size_t>(host->second)].edge_ids.insert(
                w.points[i].id);
            continue;
        }
        for (std::uint32_t v : w.neighbors[i]) {
            if (w.core[v]) {
                w.clusters[static_cast<std::size_t>(comp[v])].edge_ids.insert(
                    w.points[i].id);
            }
        }
    }

    std::sort(w.clusters.begin(), w.clusters.end(),
              [](const OracleCluster& a, const OracleCluster& b) {
                  return *a.core_ids.begin() < *b.core_ids.begin();
              });
    return w;
}

std::vector<PointId> OracleWindow::full_representation(std::size_t cluster_index) const {
    const auto& c = clusters.at(cluster_index);
    std::vector<PointId> out(c.core_ids.begin(), c.core_ids.end());
    out.insert(out.end(), c.edge_ids.begin(), c.edge_ids.end());
    std::sort(out.begin(), out.end());
    return out;
}

SGSummary OracleWindow::sgs_of(std::size_t cluster_index, int rho) const {
    const auto& cluster = clusters.at(cluster_index);
    const double r2 = params.range_threshold * params.range_threshold;
    const std::size_t n = points.size();

    std::unordered_map<PointId, std::size_t> index_of;
    for (std::size_t i = 0; i < n; ++i) index_of.emplace(points[i].id, i);

    // Total residents per cell (population counts everything alive there,
    // members or not).
    std::unordered_map<CellCoord, std::uint32_t, CellCoordHash> occupancy;
    for (std::size_t i = 0; i < n; ++i) ++occupancy[cells[i]];

    std::map<CellCoord, CellStatus> status;
    std::map<CellCoord, std::vector<std::size_t>> cluster_cores;  // per core cell
    for (PointId id : cluster.core_ids) {
        const std::size_t i = index_of.at(id);
        status[cells[i]] = CellStatus::core;
        cluster_cores[cells[i]].push_back(i);
    }
    for (PointId id : cluster.edge_ids) {
        const std::size_t i = index_of.at(id);
        status.try_emplace(cells[i], CellStatus::edge);
    }

    SGSummary s;
    s.level = 0;
    s.rho = rho;
    s.range_threshold = params.range_threshold;
    s.grid = grid;

    const Envelope env = Envelope::make(grid, params.range_threshold);
    // Everything in a cell, used for attachment checks.
    std::unordered_map<CellCoord, std::vector<std::size_t>, CellCoordHash> residents;
    for (std::size_t i = 0; i < n; ++i) residents[cells[i]].push_back(i);

    for (const auto& [loc, st] : status) {
        SkeletalCell sc;
        sc.location = loc;
        sc.population = occupancy.at(loc);
        sc.status = st;
        sc.core_lifespan = (st == CellStatus::core) ? 1 : 0;
        if (st == CellStatus::core) {
            const auto& cores_here = cluster_cores.at(loc);
            for (std::size_t e = 0; e < env.size(); ++e) {
                const CellCoord other = loc + env.offset(e);
                auto oit = status.find(other);
                if (oit == status.end()) continue;
                bool linked = false;
                if (oit->second == CellStatus::core) {
                    // Directly connected: a core object on each side, in range.
                    for (std::size_t a : cores_here) {
                        for (std::size_t b : cluster_cores.at(other)) {
                            if (dist2(points[a].coords, points[b].coords) <= r2) {
                                linked = true;
                                break;
                            }
                        }
                        if (linked) break;
                    }
                } else {
                    // Attached: any object in the edge cell neighbors one of
                    // our core objects.
                    for (std::size_t a : cores_here) {
                        for (std::size_t b : residents.at(other)) {
                            if (dist2(points[a].coords, points[b].coords) <= r2) {
                                linked = true;
                                break;
                            }
                        }
                        if (linked) break;
                    }
                }
                if (linked) {
                    sc.connections.push_back({static_cast<std::uint16_t>(e), 1});
                }
            }
        }
        s.cells.push_back(std::move(sc));
    }

    std::vector<PointId> members = full_representation(cluster_index);
    s.cluster_id = members.front();
    return s;
}

std::vector<OracleCluster> naive_dbscan(const std::vector<StreamPoint>& points,
                                        const ClusterParams& params,
                                        const GridSpec& grid, bool parallel) {
    return OracleWindow::analyze(points, params, grid, parallel).clusters;
}

SGSummary naive_sgs(const OracleCluster& cluster,
                    const std::vector<StreamPoint>& points, const GridSpec& grid,
                    const ClusterParams& params) {
    auto w = OracleWindow::analyze(points, params, grid);
    for (std::size_t i = 0; i < w.clusters.size(); ++i) {
        if (w.clusters[i].core_ids == cluster.core_ids) return w.sgs_of(i);
    }
    throw std::invalid_argument("naive_sgs: cluster does not belong to this window");
}

namespace {

std::string ids_preview(const std::set<PointId>& s) {
    std::ostringstream os;
    os << '{';
    std::size_t k = 0;
    for (PointId id : s) {
        if (k++) os << ',';
        if (k > 8) {
            os << "...";
            break;
        }
        os << id;
    }
    os << '}';
    return os.str();
}

}  // namespace

EquivalenceReport assert_equivalent(const std::vector<ClusterOutput>& engine_out,
                                    const OracleWindow& reference) {
    EquivalenceReport rep;
    auto fail = [&](const std::string& msg) {
        rep.pass = false;
        rep.divergence = msg;
        return rep;
    };

    if (engine_out.size() != reference.clusters.size()) {
        return fail("cluster count: engine " + std::to_string(engine_out.size()) +
                    " vs oracle " + std::to_string(reference.clusters.size()));
    }
    for (std::size_t k = 0; k < engine_out.size(); ++k) {
        const auto& e = engine_out[k];
        const auto& o = reference.clusters[k];

        std::set<PointId> e_core(e.core_members.begin(), e.core_members.end());
        if (e_core != o.core_ids) {
            return fail("cluster " + std::to_string(k) + ": core sets differ, engine " +
                        ids_preview(e_core) + " vs oracle " + ids_preview(o.core_ids));
        }
        std::set<PointId> e_edge;
        for (PointId id : e.members) {
            if (!e_core.count(id)) e_edge.insert(id);
        }
        if (e_edge != o.edge_ids) {
            return fail("cluster " + std::to_string(k) + ": edge sets differ, engine " +
                        ids_preview(e_edge) + " vs oracle " + ids_preview(o.edge_ids));
        }

        const SGSummary ref_sgs = reference.sgs_of(k);
        if (e.sgs.cells.size() != ref_sgs.cells.size()) {
            return fail("cluster " + std::to_string(k) + ": cell count " +
                        std::to_string(e.sgs.cells.size()) + " vs " +
                        std::to_string(ref_sgs.cells.size()));
        }
        for (std::size_t c = 0; c < ref_sgs.cells.size(); ++c) {
            const auto& ec = e.sgs.cells[c];
            const auto& oc = ref_sgs.cells[c];
            if (!(ec.location == oc.location)) {
                return fail("cluster " + std::to_string(k) + ": cell location " +
                            ec.location.to_string() + " vs " + oc.location.to_string());
            }
            if (ec.population != oc.population) {
                return fail("cluster " + std::to_string(k) + " cell " +
                            ec.location.to_string() + ": population " +
                            std::to_string(ec.population) + " vs " +
                            std::to_string(oc.population));
            }
            if (ec.status != oc.status) {
                return fail("cluster " + std::to_string(k) + " cell " +
                            ec.location.to_string() + ": status " +
                            std::string(to_string(ec.status)) + " vs " +
                            to_string(oc.status));
            }
            if (ec.connections.size() != oc.connections.size() ||
                !std::equal(ec.connections.begin(), ec.connections.end(),
                            oc.connections.begin(),
                            [](const SkeletalCell::Link& a, const SkeletalCell::Link& b) {
                                return a.env_index == b.env_index;
                            })) {
                return fail("cluster " + std::to_string(k) + " cell " +
                            ec.location.to_string() + ": connection sets differ");
            }
        }
    }
    return rep;
}

}  // namespace sgs::oracle
