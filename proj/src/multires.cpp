#include "sgs/multires.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace sgs::multires {

namespace {

std::int32_t floor_div(std::int32_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if (a % b != 0 && a < 0) --q;
    return static_cast<std::int32_t>(q);
}

CellCoord parent_of(const CellCoord& c, std::int64_t scale) {
    CellCoord p = c;
    for (auto& v : p.idx) v = floor_div(v, scale);
    return p;
}

}  // namespace

SGSummary compress(const SGSummary& s) {
    if (s.rho < 2) throw std::invalid_argument("compress: rho must be >= 2");

    SGSummary out;
    out.cluster_id = s.cluster_id;
    out.level = s.level + 1;
    out.rho = s.rho;
    out.range_threshold = s.range_threshold;
    out.grid = s.grid.at_level(1, s.rho);

    const Envelope child_env = s.make_envelope();

    std::map<CellCoord, SkeletalCell> parents;
    std::map<CellCoord, const SkeletalCell*> child_at;
    for (const auto& c : s.cells) child_at.emplace(c.location, &c);

    // Single scan of the children: accumulate the parent attributes and
    // collect the parent pairs bridged by child links.
    std::set<std::pair<CellCoord, CellCoord>> bridged;
    for (const auto& c : s.cells) {
        const CellCoord p = parent_of(c.location, s.rho);
        auto [it, fresh] = parents.try_emplace(p);
        SkeletalCell& pc = it->second;
        if (fresh) {
            pc.location = p;
            pc.status = CellStatus::edge;
        }
        pc.population += c.population;
        if (c.status == CellStatus::core) {
            pc.status = CellStatus::core;
            pc.core_lifespan = 1;
        }
        for (const auto& link : c.connections) {
            const CellCoord target = c.location + child_env.offset(link.env_index);
            const CellCoord q = parent_of(target, s.rho);
            if (q == p) continue;
            bridged.emplace(std::min(p, q), std::max(p, q));
        }
    }

    const Envelope parent_env = Envelope::make(out.grid, out.range_threshold);
    for (const auto& [a, b] : bridged) {
        const int fwd = parent_env.index_of(b - a);
        const int bwd = parent_env.index_of(a - b);
        if (fwd < 0 || bwd < 0) {
            throw std::logic_error("compress: bridged parents outside the envelope");
        }
        auto add = [](SkeletalCell& cell, int index) {
            if (cell.status != CellStatus::core) return;  // edge cells stay all-false
            auto& links = cell.connections;
            SkeletalCell::Link l{static_cast<std::uint16_t>(index), 1};
            auto it = std::lower_bound(
                links.begin(), links.end(), l,
                [](const SkeletalCell::Link& x, const SkeletalCell::Link& y) {
                    return x.env_index < y.env_index;
                });
            if (it == links.end() || it->env_index != l.env_index) links.insert(it, l);
        };
        add(parents.at(a), fwd);
        add(parents.at(b), bwd);
    }

    for (auto& [loc, cell] : parents) out.cells.push_back(std::move(cell));
    return out;
}

SGSummary compress_to(const SGSummary& s, int level) {
    if (level < s.level) {
        throw std::invalid_argument("compress_to: cannot refine a summary");
    }
    SGSummary cur = (level == s.level) ? s.stripped() : s;
    while (cur.level < level) cur = compress(cur);
    return cur;
}

std::size_t encoded_cell_bytes(int d, std::size_t envelope_size) {
    return 4u * static_cast<std::size_t>(d) + 4u + 1u + (envelope_size + 7u) / 8u;
}

ResolutionCost resolution_cost(const SGSummary& s, int target_level) {
    if (target_level < s.level) {
        throw std::invalid_argument("resolution_cost: target below the summary level");
    }
    std::int64_t scale = 1;
    for (int l = s.level; l < target_level; ++l) scale *= s.rho;

    std::set<CellCoord> coords;
    for (const auto& c : s.cells) coords.insert(parent_of(c.location, scale));

    const GridSpec target_grid = s.grid.at_level(target_level - s.level, s.rho);
    const Envelope env = Envelope::make(target_grid, s.range_threshold);

    ResolutionCost cost;
    cost.cell_count = coords.size();
    cost.bytes = cost.cell_count * encoded_cell_bytes(s.grid.d, env.size());
    return cost;
}

int select_resolution(const SGSummary& s, std::uint64_t budget_bytes,
                      int max_level) {
    if (budget_bytes == 0) throw std::invalid_argument("select_resolution: zero budget");
    for (int level = s.level; level <= max_level; ++level) {
        if (resolution_cost(s, level).bytes <= budget_bytes) return level;
    }
    throw BudgetExceededError(
        "select_resolution: even level " + std::to_string(max_level) +
        " exceeds the byte budget of " + std::to_string(budget_bytes));
}

}  // namespace sgs::multires
