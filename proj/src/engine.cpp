#include "sgs/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace sgs {

namespace {

// Insert-or-max into a connection vector sorted by env_index.
void fold_link(std::vector<SkeletalCell::Link>& links, std::uint16_t env_index,
               std::int32_t lifespan) {
    auto it = std::lower_bound(
        links.begin(), links.end(), env_index,
        [](const SkeletalCell::Link& l, std::uint16_t v) { return l.env_index < v; });
    if (it != links.end() && it->env_index == env_index) {
        it->lifespan = std::max(it->lifespan, lifespan);
    } else {
        links.insert(it, SkeletalCell::Link{env_index, lifespan});
    }
}

}  // namespace

CsgsEngine::CsgsEngine(Config cfg)
    : cfg_(std::move(cfg)),
      grid_spec_(GridSpec::make(cfg_.params, cfg_.d, cfg_.origin)),
      envelope_(Envelope::make(grid_spec_, cfg_.params.range_threshold)),
      timeline_(cfg_.window) {
    if (cfg_.rho < 2) throw std::invalid_argument("engine: rho must be >= 2");
    if (envelope_.size() > 65535) {
        throw std::invalid_argument("engine: dimension too large, envelope exceeds 16-bit index space");
    }
}

double CsgsEngine::window_start() const {
    return static_cast<double>(window_index_) * cfg_.window.slide;
}

std::vector<CsgsEngine::NeighborEntry> CsgsEngine::find_neighbors(
    const StreamPoint& p, WindowIndex p_expiry) {
    const double r2 = cfg_.params.range_threshold * cfg_.params.range_threshold;
    const CellCoord home = cell_of(p, grid_spec_);
    std::vector<NeighborEntry> out;

    auto scan = [&](const CellCoord& cc) {
        auto it = grid_.find(cc);
        if (it == grid_.end()) return;
        for (PointId qid : it->second.pts) {
            if (qid == p.id) continue;
            const PointRec& q = points_.at(qid);
            ++counters_.distance_computations;
            if (dist2(p.coords, q.pt.coords) <= r2) {
                out.push_back({qid, std::min(p_expiry, q.expiry)});
            }
        }
    };

    scan(home);
    for (const auto& off : envelope_.offsets()) scan(home + off);
    ++counters_.range_queries;
    return out;
}

std::vector<PointId> CsgsEngine::range_query(const StreamPoint& p) {
    auto nbrs = find_neighbors(p, window_index_ + 1);
    std::vector<PointId> ids;
    ids.reserve(nbrs.size());
    for (const auto& n : nbrs) ids.push_back(n.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

WindowIndex CsgsEngine::recompute_core_expiry(const PointRec& rec,
                                              WindowIndex extra_nexp) const {
    const std::size_t have = rec.ncl.size() + 1;
    const std::size_t need = static_cast<std::size_t>(cfg_.params.count_threshold);
    if (have < need) return rec.core_expiry;
    // count_threshold-th largest neighborship expiry; the list is sorted
    // ascending, so walk from the top merging in the newcomer.
    std::vector<WindowIndex> top;
    top.reserve(have);
    for (const auto& e : rec.ncl) top.push_back(e.nexp);
    top.push_back(extra_nexp);
    std::nth_element(top.begin(), top.begin() + (need - 1), top.end(),
                     std::greater<>());
    const WindowIndex kth = top[need - 1];
    return std::max(rec.core_expiry, std::min(rec.expiry, kth));
}

void CsgsEngine::fold_slot(std::vector<LinkSlot>& slots, std::uint16_t env_index,
                           WindowIndex expiry) {
    auto it = std::lower_bound(
        slots.begin(), slots.end(), env_index,
        [](const LinkSlot& s, std::uint16_t v) { return s.env_index < v; });
    if (it != slots.end() && it->env_index == env_index) {
        it->expiry = std::max(it->expiry, expiry);
    } else {
        slots.insert(it, LinkSlot{env_index, expiry});
    }
}

void CsgsEngine::fold_conn(const CellCoord& a, const CellCoord& b,
                           WindowIndex expiry) {
    if (!live(expiry)) return;
    const int fwd = envelope_.index_of(b - a);
    const int bwd = envelope_.index_of(a - b);
    if (fwd < 0 || bwd < 0) {
        throw std::logic_error("engine: neighboring points in cells outside the envelope");
    }
    fold_slot(grid_.at(a).conn, static_cast<std::uint16_t>(fwd), expiry);
    fold_slot(grid_.at(b).conn, static_cast<std::uint16_t>(bwd), expiry);
}

void CsgsEngine::fold_att(const CellCoord& core_side, const CellCoord& other,
                          WindowIndex expiry) {
    if (!live(expiry)) return;
    const int fwd = envelope_.index_of(other - core_side);
    if (fwd < 0) {
        throw std::logic_error("engine: neighboring points in cells outside the envelope");
    }
    fold_slot(grid_.at(core_side).att, static_cast<std::uint16_t>(fwd), expiry);
}

void CsgsEngine::apply_core_career_change(PointRec& rec) {
    const CellCoord& home = rec.cell;
    CellRec& home_cell = grid_.at(home);
    home_cell.core_expiry = std::max(home_cell.core_expiry, rec.core_expiry);

    for (const auto& e : rec.ncl) {
        const PointRec& r = points_.at(e.id);
        if (r.cell == home) continue;
        fold_att(home, r.cell, std::min(rec.core_expiry, e.nexp));
        if (live(r.core_expiry)) {
            fold_conn(home, r.cell,
                      std::min({rec.core_expiry, r.core_expiry, e.nexp}));
        }
    }
    // Neighbors the career now outlives are only needed while it lasts.
    std::erase_if(rec.ncl,
                  [&](const NeighborEntry& e) { return e.nexp <= rec.core_expiry; });
}

void CsgsEngine::apply_insertion(const StreamPoint& p) {
    if (p.dim() != grid_spec_.d) {
        throw std::invalid_argument("insert: point dimension mismatch");
    }
    if (points_.count(p.id)) {
        throw std::invalid_argument("insert: duplicate point id " + std::to_string(p.id));
    }
    if (p.t < last_arrival_) {
        throw std::invalid_argument("insert: stamps must be non-decreasing in arrival order");
    }
    const Lifespan ls = point_lifespan(p, window_start(), cfg_.window);
    last_arrival_ = p.t;

    PointRec rec;
    rec.pt = p;
    rec.cell = cell_of(p, grid_spec_);
    rec.expiry = window_index_ + ls.remaining;
    rec.core_expiry = window_index_;

    CellRec& cell = grid_[rec.cell];
    cell.pts.push_back(p.id);

    const auto neighbors = find_neighbors(p, rec.expiry);

    // Own core career from the full neighborship picture.
    if (static_cast<int>(neighbors.size()) >= cfg_.params.count_threshold) {
        std::vector<WindowIndex> nexps;
        nexps.reserve(neighbors.size());
        for (const auto& n : neighbors) nexps.push_back(n.nexp);
        const std::size_t k = static_cast<std::size_t>(cfg_.params.count_threshold);
        std::nth_element(nexps.begin(), nexps.begin() + (k - 1), nexps.end(),
                         std::greater<>());
        rec.core_expiry = std::max(rec.core_expiry, std::min(rec.expiry, nexps[k - 1]));
    }

    // Promote / prolong each neighbor whose core career this arrival extends.
    for (const auto& n : neighbors) {
        PointRec& q = points_.at(n.id);
        const WindowIndex new_core = recompute_core_expiry(q, n.nexp);
        if (new_core > q.core_expiry && live(new_core)) {
            q.core_expiry = new_core;
            apply_core_career_change(q);
        }
        if (n.nexp > q.core_expiry) {
            auto it = std::upper_bound(
                q.ncl.begin(), q.ncl.end(), n.nexp,
                [](WindowIndex v, const NeighborEntry& e) { return v < e.nexp; });
            q.ncl.insert(it, NeighborEntry{p.id, n.nexp});
        }
    }

    // The newcomer's own cell status and pairwise consequences.
    if (live(rec.core_expiry)) {
        cell.core_expiry = std::max(cell.core_expiry, rec.core_expiry);
    }
    for (const auto& n : neighbors) {
        const PointRec& q = points_.at(n.id);
        if (q.cell == rec.cell) continue;
        if (live(rec.core_expiry)) {
            fold_att(rec.cell, q.cell, std::min(rec.core_expiry, n.nexp));
        }
        if (live(q.core_expiry)) {
            fold_att(q.cell, rec.cell, std::min(q.core_expiry, n.nexp));
        }
        if (live(rec.core_expiry) && live(q.core_expiry)) {
            fold_conn(rec.cell, q.cell,
                      std::min({rec.core_expiry, q.core_expiry, n.nexp}));
        }
    }
    for (const auto& n : neighbors) {
        if (n.nexp > rec.core_expiry) {
            rec.ncl.push_back(NeighborEntry{n.id, n.nexp});
        }
    }
    std::sort(rec.ncl.begin(), rec.ncl.end(),
              [](const NeighborEntry& a, const NeighborEntry& b) {
                  return a.nexp < b.nexp;
              });

    expiry_schedule_[rec.expiry].push_back(p.id);
    points_.emplace(p.id, std::move(rec));
    ++counters_.points_ingested;
}

void CsgsEngine::advance_window() {
    ++window_index_;
    const WindowIndex w = window_index_;

    auto sched = expiry_schedule_.find(w);
    if (sched != expiry_schedule_.end()) {
        for (PointId id : sched->second) {
            auto pit = points_.find(id);
            auto git = grid_.find(pit->second.cell);
            auto& pts = git->second.pts;
            pts.erase(std::find(pts.begin(), pts.end(), id));
            if (pts.empty()) grid_.erase(git);
            points_.erase(pit);
        }
        expiry_schedule_.erase(sched);
    }

    // Drop the first neighbor-list bucket of every live point: entries whose
    // neighborship expires with this slide.
    for (auto& [id, rec] : points_) {
        auto& ncl = rec.ncl;
        std::size_t n = 0;
        while (n < ncl.size() && ncl[n].nexp <= w) ++n;
        if (n) ncl.erase(ncl.begin(), ncl.begin() + n);
    }
}

std::vector<ClusterOutput> CsgsEngine::ingest_slide(
    const std::vector<StreamPoint>& batch) {
    const auto [lo, hi] = timeline_.batch_interval(batch_no_);
    if (batch_no_ >= timeline_.fill_batches()) {
        advance_window();
    }
    for (const auto& p : batch) {
        if (!(p.t > lo && p.t <= hi)) {
            throw std::invalid_argument(
                "ingest: stamp " + std::to_string(p.t) + " outside slide interval (" +
                std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
        apply_insertion(p);
    }
    const bool complete = timeline_.batch_completes_window(batch_no_);
    ++batch_no_;
    return complete ? emit_clusters() : std::vector<ClusterOutput>{};
}

std::vector<ClusterOutput> CsgsEngine::emit_clusters() const {
    const WindowIndex w = window_index_;

    std::vector<CellCoord> core_cells;
    for (const auto& [cc, cell] : grid_) {
        if (live(cell.core_expiry)) core_cells.push_back(cc);
    }
    std::sort(core_cells.begin(), core_cells.end());

    std::unordered_set<CellCoord, CellCoordHash> visited;
    std::vector<ClusterOutput> outputs;

    for (const auto& root : core_cells) {
        if (visited.count(root)) continue;

        std::vector<CellCoord> comp;
        std::vector<CellCoord> stack{root};
        visited.insert(root);
        while (!stack.empty()) {
            CellCoord c = stack.back();
            stack.pop_back();
            comp.push_back(c);
            for (const auto& slot : grid_.at(c).conn) {
                if (!live(slot.expiry)) continue;
                CellCoord n = c + envelope_.offset(slot.env_index);
                auto it = grid_.find(n);
                if (it == grid_.end() || !live(it->second.core_expiry)) {
                    throw std::logic_error("engine: live connection into a non-core cell");
                }
                if (visited.insert(n).second) stack.push_back(n);
            }
        }
        std::sort(comp.begin(), comp.end());
        std::unordered_set<CellCoord, CellCoordHash> comp_set(comp.begin(), comp.end());

        std::set<CellCoord> edge_cells;
        for (const auto& c : comp) {
            for (const auto& slot : grid_.at(c).att) {
                if (!live(slot.expiry)) continue;
                CellCoord n = c + envelope_.offset(slot.env_index);
                auto it = grid_.find(n);
                if (it != grid_.end() && !live(it->second.core_expiry)) {
                    edge_cells.insert(n);
                }
            }
        }

        ClusterOutput out;
        out.window_index = w;
        out.sgs.level = 0;
        out.sgs.rho = cfg_.rho;
        out.sgs.range_threshold = cfg_.params.range_threshold;
        out.sgs.grid = grid_spec_;

        auto emit_cell = [&](const CellCoord& cc, bool is_core) {
            const CellRec& cell = grid_.at(cc);
            SkeletalCell sc;
            sc.location = cc;
            sc.population = static_cast<std::uint32_t>(cell.pts.size());
            sc.status = is_core ? CellStatus::core : CellStatus::edge;
            if (is_core) {
                sc.core_lifespan = static_cast<std::int32_t>(cell.core_expiry - w);
                // Def 4.4 masking: point at directly connected core cells and
                // at attached edge cells; everything else reads false.
                for (const auto& slot : cell.conn) {
                    if (!live(slot.expiry)) continue;
                    sc.connections.push_back(
                        {slot.env_index, static_cast<std::int32_t>(slot.expiry - w)});
                }
                for (const auto& slot : cell.att) {
                    if (!live(slot.expiry)) continue;
                    CellCoord n = cc + envelope_.offset(slot.env_index);
                    auto it = grid_.find(n);
                    if (it == grid_.end() || live(it->second.core_expiry)) continue;
                    fold_link(sc.connections, slot.env_index,
                              static_cast<std::int32_t>(slot.expiry - w));
                }
            }
            out.sgs.cells.push_back(std::move(sc));
        };

        std::vector<CellCoord> all_cells = comp;
        all_cells.insert(all_cells.end(), edge_cells.begin(), edge_cells.end());
        std::sort(all_cells.begin(), all_cells.end());
        for (const auto& cc : all_cells) emit_cell(cc, comp_set.count(cc) > 0);

        for (const auto& c : comp) {
            for (PointId pid : grid_.at(c).pts) {
                out.members.push_back(pid);
                if (live(points_.at(pid).core_expiry)) out.core_members.push_back(pid);
            }
        }
        for (const auto& e : edge_cells) {
            for (PointId pid : grid_.at(e).pts) {
                const PointRec& rec = points_.at(pid);
                for (const auto& entry : rec.ncl) {
                    if (entry.nexp <= w) continue;
                    const PointRec& partner = points_.at(entry.id);
                    if (live(partner.core_expiry) && comp_set.count(partner.cell)) {
                        out.members.push_back(pid);
                        break;
                    }
                }
            }
        }
        std::sort(out.members.begin(), out.members.end());
        std::sort(out.core_members.begin(), out.core_members.end());
        out.cluster_id = out.members.front();
        out.sgs.cluster_id = out.cluster_id;
        outputs.push_back(std::move(out));
    }

    std::sort(outputs.begin(), outputs.end(),
              [](const ClusterOutput& a, const ClusterOutput& b) {
                  return a.core_members.front() < b.core_members.front();
              });
    return outputs;
}

std::vector<StreamPoint> CsgsEngine::live_points() const {
    std::vector<StreamPoint> out;
    out.reserve(points_.size());
    for (const auto& [id, rec] : points_) out.push_back(rec.pt);
    std::sort(out.begin(), out.end(),
              [](const StreamPoint& a, const StreamPoint& b) { return a.id < b.id; });
    return out;
}

std::size_t CsgsEngine::max_neighbor_list_size() const {
    std::size_t m = 0;
    for (const auto& [id, rec] : points_) m = std::max(m, rec.ncl.size());
    return m;
}

std::vector<CsgsEngine::CellInfo> CsgsEngine::cell_snapshot() const {
    const WindowIndex w = window_index_;
    // A cell is edge when non-core but attached from some live core cell.
    std::unordered_set<CellCoord, CellCoordHash> attached;
    for (const auto& [cc, cell] : grid_) {
        if (!live(cell.core_expiry)) continue;
        for (const auto& slot : cell.att) {
            if (live(slot.expiry)) attached.insert(cc + envelope_.offset(slot.env_index));
        }
    }
    std::vector<CellInfo> out;
    for (const auto& [cc, cell] : grid_) {
        CellInfo info;
        info.location = cc;
        info.population = static_cast<std::uint32_t>(cell.pts.size());
        if (live(cell.core_expiry)) {
            info.status = CellStatus::core;
            info.core_lifespan = static_cast<std::int32_t>(cell.core_expiry - w);
        } else {
            info.status = attached.count(cc) ? CellStatus::edge : CellStatus::noise;
        }
        out.push_back(std::move(info));
    }
    std::sort(out.begin(), out.end(), [](const CellInfo& a, const CellInfo& b) {
        return a.location < b.location;
    });
    return out;
}

}  // namespace sgs
