#include "sgs/json_codec.hpp"

#include <stdexcept>

#include "sgs/multires.hpp"

namespace sgs::codec {

using nlohmann::json;

json to_json(const GridSpec& g) {
    return json{{"d", g.d}, {"side", g.side}, {"origin", g.origin}};
}

GridSpec grid_from_json(const json& j) {
    GridSpec g;
    g.d = j.at("d").get<int>();
    g.side = j.at("side").get<double>();
    g.origin = j.at("origin").get<std::vector<double>>();
    if (g.d < 1 || static_cast<int>(g.origin.size()) != g.d || !(g.side > 0.0)) {
        throw std::invalid_argument("grid json: inconsistent fields");
    }
    return g;
}

json to_json(const SkeletalCell& c) {
    json conn = json::array();
    for (const auto& l : c.connections) {
        conn.push_back(json::array({l.env_index, l.lifespan}));
    }
    return json{{"loc", c.location.idx},
                {"pop", c.population},
                {"status", to_string(c.status)},
                {"core_ls", c.core_lifespan},
                {"conn", std::move(conn)}};
}

SkeletalCell cell_from_json(const json& j, int d) {
    SkeletalCell c;
    c.location = CellCoord{j.at("loc").get<std::vector<std::int32_t>>()};
    if (c.location.dim() != d) {
        throw std::invalid_argument("cell json: location dimension mismatch");
    }
    c.population = j.at("pop").get<std::uint32_t>();
    const std::string st = j.at("status").get<std::string>();
    if (st == "core") {
        c.status = CellStatus::core;
    } else if (st == "edge") {
        c.status = CellStatus::edge;
    } else if (st == "noise") {
        c.status = CellStatus::noise;
    } else {
        throw std::invalid_argument("cell json: unknown status '" + st + "'");
    }
    c.core_lifespan = j.at("core_ls").get<std::int32_t>();
    for (const auto& l : j.at("conn")) {
        c.connections.push_back({l.at(0).get<std::uint16_t>(),
                                 l.at(1).get<std::int32_t>()});
    }
    return c;
}

json to_json(const SGSummary& s, bool with_cells) {
    json j{{"cluster_id", s.cluster_id},
           {"level", s.level},
           {"rho", s.rho},
           {"theta_r", s.range_threshold},
           {"grid", to_json(s.grid)}};
    if (with_cells) {
        json cells = json::array();
        for (const auto& c : s.cells) cells.push_back(to_json(c));
        j["cells"] = std::move(cells);
    }
    return j;
}

SGSummary sgs_from_json(const json& j) {
    SGSummary s;
    s.cluster_id = j.at("cluster_id").get<std::uint64_t>();
    s.level = j.at("level").get<int>();
    s.rho = j.at("rho").get<int>();
    s.range_threshold = j.at("theta_r").get<double>();
    s.grid = grid_from_json(j.at("grid"));
    if (j.contains("cells")) {
        for (const auto& c : j.at("cells")) {
            s.cells.push_back(cell_from_json(c, s.grid.d));
        }
    }
    return s;
}

std::size_t encoded_cell_size(const SGSummary& s) {
    return multires::encoded_cell_bytes(s.grid.d, s.make_envelope().size());
}

std::vector<std::uint8_t> encode_cells(const SGSummary& s) {
    const Envelope env = s.make_envelope();
    const std::size_t mask_bytes = (env.size() + 7) / 8;
    std::vector<std::uint8_t> out;
    out.reserve(s.cells.size() * encoded_cell_size(s));

    auto put32 = [&](std::uint32_t v) {
        out.push_back(static_cast<std::uint8_t>(v));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
        out.push_back(static_cast<std::uint8_t>(v >> 16));
        out.push_back(static_cast<std::uint8_t>(v >> 24));
    };

    for (const auto& c : s.cells) {
        for (auto v : c.location.idx) put32(static_cast<std::uint32_t>(v));
        put32(c.population);
        out.push_back(static_cast<std::uint8_t>(c.status));
        std::vector<std::uint8_t> mask(mask_bytes, 0);
        for (const auto& l : c.connections) {
            if (l.env_index >= env.size()) {
                throw std::invalid_argument("encode_cells: connection index outside envelope");
            }
            mask[l.env_index / 8] |= static_cast<std::uint8_t>(1u << (l.env_index % 8));
        }
        out.insert(out.end(), mask.begin(), mask.end());
    }
    return out;
}

std::vector<SkeletalCell> decode_cells(const SGSummary& meta,
                                       const std::vector<std::uint8_t>& bytes) {
    const Envelope env = meta.make_envelope();
    const std::size_t mask_bytes = (env.size() + 7) / 8;
    const std::size_t cell_size = encoded_cell_size(meta);
    if (bytes.size() % cell_size != 0) {
        throw std::invalid_argument("decode_cells: byte count is not a multiple of the cell size");
    }

    std::vector<SkeletalCell> cells;
    std::size_t pos = 0;
    auto get32 = [&]() {
        std::uint32_t v = bytes[pos] | (bytes[pos + 1] << 8) |
                          (bytes[pos + 2] << 16) |
                          (static_cast<std::uint32_t>(bytes[pos + 3]) << 24);
        pos += 4;
        return v;
    };

    while (pos < bytes.size()) {
        SkeletalCell c;
        c.location.idx.resize(static_cast<std::size_t>(meta.grid.d));
        for (auto& v : c.location.idx) v = static_cast<std::int32_t>(get32());
        c.population = get32();
        const std::uint8_t st = bytes[pos++];
        if (st > 2) throw std::invalid_argument("decode_cells: bad status byte");
        c.status = static_cast<CellStatus>(st);
        c.core_lifespan = (c.status == CellStatus::core) ? 1 : 0;
        for (std::size_t b = 0; b < mask_bytes; ++b) {
            const std::uint8_t m = bytes[pos + b];
            if (!m) continue;
            for (int bit = 0; bit < 8; ++bit) {
                if (m & (1u << bit)) {
                    const std::size_t idx = b * 8 + static_cast<std::size_t>(bit);
                    if (idx >= env.size()) {
                        throw std::invalid_argument("decode_cells: mask bit outside envelope");
                    }
                    c.connections.push_back({static_cast<std::uint16_t>(idx), 1});
                }
            }
        }
        pos += mask_bytes;
        cells.push_back(std::move(c));
    }
    return cells;
}

}  // namespace sgs::codec
