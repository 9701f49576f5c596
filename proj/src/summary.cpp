#include "sgs/summary.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace sgs {

bool SkeletalCell::has_link(std::uint16_t env_index) const {
    auto it = std::lower_bound(
        connections.begin(), connections.end(), env_index,
        [](const Link& l, std::uint16_t v) { return l.env_index < v; });
    return it != connections.end() && it->env_index == env_index;
}

std::uint64_t SGSummary::total_population() const {
    std::uint64_t total = 0;
    for (const auto& c : cells) total += c.population;
    return total;
}

std::uint32_t SGSummary::core_cell_count() const {
    std::uint32_t n = 0;
    for (const auto& c : cells) n += (c.status == CellStatus::core) ? 1 : 0;
    return n;
}

std::set<CellCoord> SGSummary::footprint() const {
    std::set<CellCoord> f;
    for (const auto& c : cells) f.insert(c.location);
    return f;
}

std::vector<std::pair<double, double>> SGSummary::mbr() const {
    if (cells.empty()) throw std::invalid_argument("mbr: empty summary");
    std::vector<std::pair<double, double>> box(
        static_cast<std::size_t>(grid.d),
        {std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity()});
    for (const auto& c : cells) {
        for (int a = 0; a < grid.d; ++a) {
            const double lo = grid.axis_min(a, c.location.idx[a]);
            box[a].first = std::min(box[a].first, lo);
            box[a].second = std::max(box[a].second, lo + grid.side);
        }
    }
    return box;
}

SGSummary SGSummary::stripped() const {
    SGSummary s = *this;
    for (auto& c : s.cells) {
        c.core_lifespan = (c.status == CellStatus::core) ? 1 : 0;
        for (auto& l : c.connections) l.lifespan = 1;
    }
    return s;
}

}  // namespace sgs
