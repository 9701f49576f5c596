#include "sgs/pattern_base.hpp"

#include <algorithm>
#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sgs/json_codec.hpp"
#include "sgs/multires.hpp"

namespace sgs {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;
namespace fs = std::filesystem;

namespace {

constexpr int kManifestVersion = 1;
constexpr int kRtreeDims = 8;  // runtime dims pad into a fixed-size box

using RPoint = bg::model::point<double, kRtreeDims, bg::cs::cartesian>;
using RBox = bg::model::box<RPoint>;
using RValue = std::pair<RBox, std::uint64_t>;

template <std::size_t... I>
RPoint make_rpoint(const std::array<double, kRtreeDims>& v, std::index_sequence<I...>) {
    RPoint p;
    (bg::set<I>(p, v[I]), ...);
    return p;
}

RBox padded_box(const Mbr& mbr) {
    if (mbr.size() > kRtreeDims) {
        throw std::invalid_argument("pattern base: more than 8 dimensions is unsupported");
    }
    std::array<double, kRtreeDims> lo{}, hi{};
    for (std::size_t i = 0; i < mbr.size(); ++i) {
        lo[i] = mbr[i].first;
        hi[i] = mbr[i].second;
    }
    return RBox(make_rpoint(lo, std::make_index_sequence<kRtreeDims>{}),
                make_rpoint(hi, std::make_index_sequence<kRtreeDims>{}));
}

bool mbr_intersects(const Mbr& a, const Mbr& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].first > b[i].second || b[i].first > a[i].second) return false;
    }
    return true;
}

/// 4-d grid of feature buckets: 32 equi-width buckets per feature over the
/// bounds seen at build time; later inserts clamp into the edge buckets.
/// Queries over-approximate and the caller re-checks exactly.
class FeatureGridIndex {
public:
    static constexpr int kBuckets = 32;

    void insert(const FeatureVector& f, std::uint64_t id) {
        const auto v = f.as_array();
        if (empty_) {
            for (int i = 0; i < 4; ++i) lo_hi_[i] = {v[i], v[i]};
            empty_ = false;
        }
        buckets_[key_of(v)].push_back(id);
    }

    std::vector<std::uint64_t> candidates(const FeatureBox& box) const {
        std::array<std::pair<int, int>, 4> span;
        for (int i = 0; i < 4; ++i) {
            span[i] = {bucket(i, box.range[i].first),
                       bucket(i, box.range[i].second)};
        }
        std::vector<std::uint64_t> out;
        for (const auto& [key, ids] : buckets_) {
            bool inside = true;
            for (int i = 0; i < 4; ++i) {
                inside &= key[i] >= span[i].first && key[i] <= span[i].second;
            }
            if (inside) out.insert(out.end(), ids.begin(), ids.end());
        }
        return out;
    }

private:
    int bucket(int dim, double v) const {
        const auto [lo, hi] = lo_hi_[dim];
        if (v <= lo) return 0;
        if (v >= hi) return kBuckets - 1;
        return std::min(kBuckets - 1,
                        static_cast<int>((v - lo) / (hi - lo) * kBuckets));
    }

    std::array<int, 4> key_of(const std::array<double, 4>& v) const {
        return {bucket(0, v[0]), bucket(1, v[1]), bucket(2, v[2]), bucket(3, v[3])};
    }

    bool empty_ = true;
    std::array<std::pair<double, double>, 4> lo_hi_{};
    std::map<std::array<int, 4>, std::vector<std::uint64_t>> buckets_;
};

}  // namespace

struct PatternBase::Indexes {
    bgi::rtree<RValue, bgi::rstar<16>> rtree;
    std::map<int, FeatureGridIndex> features;  // per archived level
};

void ArchivePolicy::validate() const {
    if (mode == Mode::sample && !(sample_rate > 0.0 && sample_rate <= 1.0)) {
        throw std::invalid_argument("archive policy: sample rate must be in (0,1]");
    }
    if (level < 0 || max_level < level) {
        throw std::invalid_argument("archive policy: invalid level bounds");
    }
}

FeatureVector feature_vector(const SGSummary& s) {
    if (s.cells.empty()) {
        throw std::invalid_argument("feature_vector: empty summarization");
    }
    FeatureVector f;
    f.volume = static_cast<std::uint32_t>(s.cells.size());
    std::uint64_t population = 0;
    std::uint64_t indicators = 0;
    for (const auto& c : s.cells) {
        population += c.population;
        if (c.status == CellStatus::core) {
            ++f.core_count;
            indicators += c.connections.size();
        }
    }
    f.avg_density = static_cast<double>(population) / f.volume;
    f.avg_connectivity =
        f.core_count ? static_cast<double>(indicators) / f.core_count : 0.0;
    return f;
}

PatternBase::PatternBase(ArchivePolicy policy, std::uint64_t seed,
                         CellEncoding encoding)
    : policy_(policy), encoding_(encoding), seed_(seed), sample_rng_(seed),
      index_(std::make_unique<Indexes>()) {
    policy_.validate();
}

PatternBase::~PatternBase() = default;
PatternBase::PatternBase(PatternBase&&) noexcept = default;
PatternBase& PatternBase::operator=(PatternBase&&) noexcept = default;

void PatternBase::index_record(const PatternRecord& rec) {
    index_->rtree.insert({padded_box(rec.mbr), rec.id});
    index_->features[rec.sgs.level].insert(rec.features, rec.id);
}

std::optional<std::uint64_t> PatternBase::archive(
    const SGSummary& level0, WindowIndex window,
    std::vector<StreamPoint> full_points) {
    if (level0.level != 0) {
        throw std::invalid_argument("archive: expected a level-0 summarization");
    }
    if (level0.cells.empty()) {
        throw std::invalid_argument("archive: empty summarization");
    }

    switch (policy_.mode) {
        case ArchivePolicy::Mode::all:
            break;
        case ArchivePolicy::Mode::sample: {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            ++sample_draws_;
            if (u(sample_rng_) >= policy_.sample_rate) return std::nullopt;
            break;
        }
        case ArchivePolicy::Mode::predicate:
            if (level0.total_population() < policy_.min_population ||
                level0.cells.size() < policy_.min_volume) {
                return std::nullopt;
            }
            break;
    }

    const int level = policy_.budget_bytes
                          ? multires::select_resolution(level0, *policy_.budget_bytes,
                                                        policy_.max_level)
                          : policy_.level;

    PatternRecord rec;
    rec.id = next_id_++;
    rec.window_index = window;
    rec.sgs = multires::compress_to(level0, level);
    rec.mbr = rec.sgs.mbr();
    rec.features = feature_vector(rec.sgs);
    rec.full_points = std::move(full_points);

    index_record(rec);
    records_.push_back(std::move(rec));
    return records_.back().id;
}

const PatternRecord* PatternBase::find(std::uint64_t id) const {
    auto it = std::lower_bound(records_.begin(), records_.end(), id,
                               [](const PatternRecord& r, std::uint64_t v) {
                                   return r.id < v;
                               });
    if (it == records_.end() || it->id != id) return nullptr;
    return &*it;
}

std::vector<std::uint64_t> PatternBase::locate_overlapping(const Mbr& box) const {
    std::vector<RValue> hits;
    index_->rtree.query(bgi::intersects(padded_box(box)), std::back_inserter(hits));
    std::vector<std::uint64_t> out;
    for (const auto& [rbox, id] : hits) {
        if (mbr_intersects(find(id)->mbr, box)) out.push_back(id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::uint64_t> PatternBase::feature_range_search(
    const FeatureBox& box, std::optional<int> level) const {
    std::vector<std::uint64_t> out;
    for (const auto& [lvl, index] : index_->features) {
        if (level && lvl != *level) continue;
        for (std::uint64_t id : index.candidates(box)) {
            if (box.contains(find(id)->features)) out.push_back(id);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> PatternBase::levels_present() const {
    std::vector<int> out;
    for (const auto& [lvl, index] : index_->features) out.push_back(lvl);
    return out;
}

// --- persistence -----------------------------------------------------------

namespace {

std::string record_stem(std::uint64_t id) {
    std::ostringstream os;
    os << "rec_" << std::setw(8) << std::setfill('0') << id;
    return os.str();
}

nlohmann::json policy_to_json(const ArchivePolicy& p) {
    nlohmann::json j;
    switch (p.mode) {
        case ArchivePolicy::Mode::all: j["mode"] = "all"; break;
        case ArchivePolicy::Mode::sample: j["mode"] = "sample"; break;
        case ArchivePolicy::Mode::predicate: j["mode"] = "predicate"; break;
    }
    j["sample_rate"] = p.sample_rate;
    j["min_population"] = p.min_population;
    j["min_volume"] = p.min_volume;
    j["level"] = p.level;
    j["max_level"] = p.max_level;
    if (p.budget_bytes) j["budget_bytes"] = *p.budget_bytes;
    return j;
}

ArchivePolicy policy_from_json(const nlohmann::json& j) {
    ArchivePolicy p;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "all") {
        p.mode = ArchivePolicy::Mode::all;
    } else if (mode == "sample") {
        p.mode = ArchivePolicy::Mode::sample;
    } else if (mode == "predicate") {
        p.mode = ArchivePolicy::Mode::predicate;
    } else {
        throw std::invalid_argument("manifest: unknown policy mode '" + mode + "'");
    }
    p.sample_rate = j.at("sample_rate").get<double>();
    p.min_population = j.at("min_population").get<std::uint32_t>();
    p.min_volume = j.at("min_volume").get<std::uint32_t>();
    p.level = j.at("level").get<int>();
    p.max_level = j.at("max_level").get<int>();
    if (j.contains("budget_bytes")) {
        p.budget_bytes = j.at("budget_bytes").get<std::uint64_t>();
    }
    return p;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void PatternBase::save(const std::string& dir) const {
    const fs::path root(dir);
    fs::create_directories(root / "records");

    for (const auto& rec : records_) {
        nlohmann::json j;
        j["id"] = rec.id;
        j["window"] = rec.window_index;
        j["features"] = {{"volume", rec.features.volume},
                         {"core_count", rec.features.core_count},
                         {"avg_density", rec.features.avg_density},
                         {"avg_connectivity", rec.features.avg_connectivity}};
        nlohmann::json mbr = nlohmann::json::array();
        for (const auto& [lo, hi] : rec.mbr) mbr.push_back({lo, hi});
        j["mbr"] = std::move(mbr);

        const std::string stem = record_stem(rec.id);
        if (encoding_ == CellEncoding::json) {
            j["sgs"] = codec::to_json(rec.sgs, true);
        } else {
            j["sgs"] = codec::to_json(rec.sgs, false);
            j["cells_file"] = stem + ".cells";
            const auto bytes = codec::encode_cells(rec.sgs);
            std::ofstream out(root / "records" / (stem + ".cells"),
                              std::ios::binary | std::ios::trunc);
            out.write(reinterpret_cast<const char*>(bytes.data()),
                      static_cast<std::streamsize>(bytes.size()));
            if (!out) {
                throw std::runtime_error("write failed for " + stem + ".cells");
            }
        }
        if (!rec.full_points.empty()) {
            nlohmann::json full = nlohmann::json::array();
            for (const auto& p : rec.full_points) {
                full.push_back({{"id", p.id}, {"t", p.t}, {"x", p.coords}});
            }
            j["full"] = std::move(full);
        }
        write_text(root / "records" / (stem + ".json"), j.dump(1) + "\n");
    }

    nlohmann::json manifest;
    manifest["format_version"] = kManifestVersion;
    manifest["policy"] = policy_to_json(policy_);
    manifest["cell_encoding"] = encoding_ == CellEncoding::json ? "json" : "binary";
    manifest["seed"] = seed_;
    manifest["sample_draws"] = sample_draws_;
    manifest["next_id"] = next_id_;
    manifest["record_count"] = records_.size();
    if (!run_config.empty()) {
        manifest["run_config"] = nlohmann::json::parse(run_config);
    }
    write_text(root / "manifest.json", manifest.dump(1) + "\n");
}

PatternBase PatternBase::load(const std::string& dir) {
    const fs::path root(dir);
    const fs::path manifest_path = root / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("load: cannot open " + manifest_path.string());
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const std::exception& e) {
        throw std::runtime_error("load: " + manifest_path.string() + ": " + e.what());
    }
    const int version = manifest.at("format_version").get<int>();
    if (version != kManifestVersion) {
        throw std::runtime_error("load: unsupported format version " +
                                 std::to_string(version) + " in " +
                                 manifest_path.string());
    }

    PatternBase base(policy_from_json(manifest.at("policy")),
                     manifest.at("seed").get<std::uint64_t>(),
                     manifest.at("cell_encoding").get<std::string>() == "binary"
                         ? CellEncoding::binary
                         : CellEncoding::json);
    base.sample_draws_ = manifest.at("sample_draws").get<std::uint64_t>();
    base.sample_rng_.discard(base.sample_draws_);
    base.next_id_ = manifest.at("next_id").get<std::uint64_t>();
    if (manifest.contains("run_config")) {
        base.run_config = manifest.at("run_config").dump();
    }

    std::vector<fs::path> files;
    const fs::path records_dir = root / "records";
    if (fs::exists(records_dir)) {
        for (const auto& entry : fs::directory_iterator(records_dir)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    for (const auto& file : files) {
        try {
            std::ifstream rin(file);
            nlohmann::json j;
            rin >> j;
            PatternRecord rec;
            rec.id = j.at("id").get<std::uint64_t>();
            rec.window_index = j.at("window").get<WindowIndex>();
            const auto& f = j.at("features");
            rec.features.volume = f.at("volume").get<std::uint32_t>();
            rec.features.core_count = f.at("core_count").get<std::uint32_t>();
            rec.features.avg_density = f.at("avg_density").get<double>();
            rec.features.avg_connectivity = f.at("avg_connectivity").get<double>();
            for (const auto& b : j.at("mbr")) {
                rec.mbr.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
            }
            rec.sgs = codec::sgs_from_json(j.at("sgs"));
            if (j.contains("cells_file")) {
                const fs::path cf = records_dir / j.at("cells_file").get<std::string>();
                std::ifstream cin_(cf, std::ios::binary);
                if (!cin_) throw std::runtime_error("missing cells file " + cf.string());
                std::vector<std::uint8_t> bytes(
                    (std::istreambuf_iterator<char>(cin_)),
                    std::istreambuf_iterator<char>());
                rec.sgs.cells = codec::decode_cells(rec.sgs, bytes);
            }
            if (j.contains("full")) {
                for (const auto& p : j.at("full")) {
                    StreamPoint sp;
                    sp.id = p.at("id").get<PointId>();
                    sp.t = p.at("t").get<double>();
                    sp.coords = p.at("x").get<std::vector<double>>();
                    rec.full_points.push_back(std::move(sp));
                }
            }
            base.index_record(rec);
            base.records_.push_back(std::move(rec));
        } catch (const std::exception& e) {
            throw std::runtime_error("load: " + file.string() + ": " + e.what());
        }
    }
    std::sort(base.records_.begin(), base.records_.end(),
              [](const PatternRecord& a, const PatternRecord& b) {
                  return a.id < b.id;
              });
    return base;
}

}  // namespace sgs
