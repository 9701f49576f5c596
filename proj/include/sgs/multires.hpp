#ifndef SGS_MULTIRES_HPP
#define SGS_MULTIRES_HPP

#include <cstdint>
#include <stdexcept>

#include "sgs/summary.hpp"

namespace sgs::multires {

struct BudgetExceededError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One level coarser: children merge into the parent at floor(coord/rho)
/// per axis. A parent is core when any child is; populations add up; two
/// parents link when any boundary child of one links to a child of the
/// other. Output carries booleans only.
SGSummary compress(const SGSummary& s);

/// Repeated compression up to the requested level.
SGSummary compress_to(const SGSummary& s, int level);

struct ResolutionCost {
    std::uint64_t cell_count = 0;
    std::uint64_t bytes = 0;
};

/// Cells and bytes the summary would occupy at a coarser level, without
/// building it: distinct parent coordinates times the fixed per-cell
/// encoded size of that level.
ResolutionCost resolution_cost(const SGSummary& s, int target_level);

/// Smallest level, starting at the summary's own, whose encoded size fits
/// the byte budget. Throws BudgetExceededError when even max_level does not.
int select_resolution(const SGSummary& s, std::uint64_t budget_bytes,
                      int max_level);

/// Fixed binary size of one encoded cell: per-axis int32 location,
/// uint32 population, one status byte, and the envelope-wide connection
/// bitmask.
std::size_t encoded_cell_bytes(int d, std::size_t envelope_size);

}  // namespace sgs::multires

#endif  // SGS_MULTIRES_HPP
