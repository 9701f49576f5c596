#ifndef SGS_SUMMARY_HPP
#define SGS_SUMMARY_HPP

#include <cstdint>
#include <set>
#include <vector>

#include "sgs/core.hpp"

namespace sgs {

/// One grid cell of a cluster summarization. Connections are stored as
/// envelope indices; each entry says this cell links to the cell at
/// location + envelope_offset(env_index) for another `lifespan` windows.
/// Only core cells expose connections; edge cells report an all-false
/// vector. An archived cell carries booleans only: core_lifespan collapses
/// to 0/1 and every connection lifespan to 1.
struct SkeletalCell {
    CellCoord location;
    std::uint32_t population = 0;
    CellStatus status = CellStatus::noise;
    std::int32_t core_lifespan = 0;

    struct Link {
        std::uint16_t env_index = 0;
        std::int32_t lifespan = 0;

        bool operator==(const Link&) const = default;
    };
    std::vector<Link> connections;  // sorted by env_index

    bool has_link(std::uint16_t env_index) const;
    bool operator==(const SkeletalCell&) const = default;
};

/// A cluster's Skeletal Grid Summarization at one resolution level.
/// Level 0 is the finest grid (cell diagonal == range threshold); each
/// coarser level merges rho^d child cells into one parent.
struct SGSummary {
    std::uint64_t cluster_id = 0;
    int level = 0;
    int rho = 3;
    double range_threshold = 0.0;
    GridSpec grid;                    // grid of this level
    std::vector<SkeletalCell> cells;  // unique, sorted by location

    Envelope make_envelope() const { return Envelope::make(grid, range_threshold); }

    std::uint64_t total_population() const;
    std::uint32_t core_cell_count() const;
    std::set<CellCoord> footprint() const;

    /// Per-axis (min,max) real bounds of the union of cell extents.
    std::vector<std::pair<double, double>> mbr() const;

    /// Collapse lifespans to booleans (the archived form).
    SGSummary stripped() const;

    bool operator==(const SGSummary&) const = default;
};

}  // namespace sgs

#endif  // SGS_SUMMARY_HPP
