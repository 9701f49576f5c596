#ifndef SGS_JSON_CODEC_HPP
#define SGS_JSON_CODEC_HPP

#include <json.hpp>

#include "sgs/core.hpp"
#include "sgs/summary.hpp"

namespace sgs::codec {

// JSON encodings used by the archive files, match queries and results.
// Object keys are emitted sorted, and numbers round-trip exactly, so a
// re-serialization of the same value is byte-identical.

nlohmann::json to_json(const GridSpec& g);
GridSpec grid_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SkeletalCell& c);
SkeletalCell cell_from_json(const nlohmann::json& j, int d);

/// `with_cells = false` leaves the "cells" array out (binary sidecar mode).
nlohmann::json to_json(const SGSummary& s, bool with_cells = true);
SGSummary sgs_from_json(const nlohmann::json& j);

/// Fixed-size binary cell block: per cell a little-endian int32 per axis,
/// uint32 population, one status byte, then the envelope-ordered connection
/// bitmask. Carries the archived boolean form only.
std::size_t encoded_cell_size(const SGSummary& s);
std::vector<std::uint8_t> encode_cells(const SGSummary& s);
std::vector<SkeletalCell> decode_cells(const SGSummary& meta,
                                       const std::vector<std::uint8_t>& bytes);

}  // namespace sgs::codec

#endif  // SGS_JSON_CODEC_HPP
