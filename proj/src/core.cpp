#include "sgs/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sgs {

void WindowSpec::validate() const {
    if (!(slide > 0.0) || !(win > 0.0)) {
        throw std::invalid_argument("window spec: win and slide must be positive");
    }
    if (slide > win) {
        throw std::invalid_argument("window spec: slide must not exceed win");
    }
    if (kind == WindowKind::count &&
        (win != std::floor(win) || slide != std::floor(slide))) {
        throw std::invalid_argument("window spec: count-based win/slide must be integers");
    }
}

void ClusterParams::validate() const {
    if (!(range_threshold > 0.0)) {
        throw std::invalid_argument("cluster params: range threshold must be > 0");
    }
    if (count_threshold < 1) {
        throw std::invalid_argument("cluster params: count threshold must be >= 1");
    }
}

CellCoord CellCoord::operator+(const CellCoord& o) const {
    CellCoord r = *this;
    for (std::size_t i = 0; i < idx.size(); ++i) r.idx[i] += o.idx[i];
    return r;
}

CellCoord CellCoord::operator-(const CellCoord& o) const {
    CellCoord r = *this;
    for (std::size_t i = 0; i < idx.size(); ++i) r.idx[i] -= o.idx[i];
    return r;
}

CellCoord CellCoord::operator-() const {
    CellCoord r = *this;
    for (auto& v : r.idx) v = -v;
    return r;
}

std::string CellCoord::to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i) os << ',';
        os << idx[i];
    }
    os << ')';
    return os.str();
}

GridSpec GridSpec::make(const ClusterParams& params, int d,
                        std::vector<double> origin) {
    params.validate();
    if (d < 1) throw std::invalid_argument("grid: dimension must be >= 1");
    if (origin.empty()) origin.assign(static_cast<std::size_t>(d), 0.0);
    if (static_cast<int>(origin.size()) != d) {
        throw std::invalid_argument("grid: origin dimension mismatch");
    }
    GridSpec g;
    g.d = d;
    g.side = grid_side_length(params, d);
    g.origin = std::move(origin);
    return g;
}

GridSpec GridSpec::at_level(int level, int rho) const {
    if (level < 0 || rho < 2) {
        throw std::invalid_argument("grid: level must be >= 0 and rho >= 2");
    }
    GridSpec g = *this;
    std::int64_t scale = 1;
    for (int i = 0; i < level; ++i) scale *= rho;
    g.side = side * static_cast<double>(scale);
    return g;
}

void GridSpec::validate(const ClusterParams& params) const {
    const double diag = side * std::sqrt(static_cast<double>(d));
    if (std::abs(diag - params.range_threshold) >
        1e-9 * std::abs(params.range_threshold)) {
        throw std::invalid_argument("grid: side * sqrt(d) must equal the range threshold");
    }
}

const char* to_string(CellStatus s) {
    switch (s) {
        case CellStatus::noise: return "noise";
        case CellStatus::edge: return "edge";
        case CellStatus::core: return "core";
    }
    return "?";
}

double grid_side_length(const ClusterParams& params, int d) {
    params.validate();
    if (d < 1) throw std::invalid_argument("grid_side_length: dimension must be >= 1");
    return params.range_threshold / std::sqrt(static_cast<double>(d));
}

CellCoord cell_of(std::span<const double> coords, const GridSpec& g) {
    if (static_cast<int>(coords.size()) != g.d) {
        throw std::invalid_argument("cell_of: point dimension mismatch");
    }
    CellCoord c;
    c.idx.resize(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) {
        c.idx[i] = static_cast<std::int32_t>(
            std::floor((coords[i] - g.origin[i]) / g.side));
    }
    return c;
}

CellCoord cell_of(const StreamPoint& p, const GridSpec& g) {
    return cell_of(std::span<const double>(p.coords), g);
}

double min_cell_gap(const CellCoord& a, const CellCoord& b, const GridSpec& g) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("min_cell_gap: dimension mismatch");
    }
    double s2 = 0.0;
    for (int i = 0; i < a.dim(); ++i) {
        const std::int32_t delta = std::abs(a.idx[i] - b.idx[i]);
        if (delta > 1) {
            const double gap = (delta - 1) * g.side;
            s2 += gap * gap;
        }
    }
    return std::sqrt(s2);
}

std::vector<CellOffset> neighbor_cell_envelope(const GridSpec& g,
                                               double range_threshold) {
    if (!(range_threshold > 0.0)) {
        throw std::invalid_argument("envelope: range threshold must be > 0");
    }
    // Offsets whose minimum gap mathematically equals the threshold must stay
    // out. On canonical grids (side = theta_r/sqrt(d) * rho^level) every
    // sub-threshold gap is sqrt(S/d) * theta_r for an integer S < d, far from
    // the boundary, so a relative guard cannot misclassify a true member.
    const double bound = range_threshold * (1.0 - 1e-9);
    // Per-axis reach: (|o|-1) * side < theta_r bounds |o|.
    const int reach =
        static_cast<int>(std::ceil(range_threshold / g.side)) + 1;
    CellCoord zero;
    zero.idx.assign(static_cast<std::size_t>(g.d), 0);

    std::vector<CellOffset> out;
    CellOffset cur = zero;
    // Lexicographic enumeration of {-reach..reach}^d.
    std::vector<int> v(static_cast<std::size_t>(g.d), -reach);
    while (true) {
        for (int i = 0; i < g.d; ++i) cur.idx[i] = v[i];
        if (cur != zero && min_cell_gap(zero, cur, g) < bound) {
            out.push_back(cur);
        }
        int axis = g.d - 1;
        while (axis >= 0 && v[axis] == reach) {
            v[axis] = -reach;
            --axis;
        }
        if (axis < 0) break;
        ++v[axis];
    }
    return out;
}

std::vector<CellOffset> neighbor_cell_envelope(const GridSpec& g,
                                               const ClusterParams& params) {
    return neighbor_cell_envelope(g, params.range_threshold);
}

Envelope Envelope::make(const GridSpec& g, double range_threshold) {
    Envelope e;
    e.offsets_ = neighbor_cell_envelope(g, range_threshold);
    return e;
}

int Envelope::index_of(const CellOffset& o) const {
    auto it = std::lower_bound(offsets_.begin(), offsets_.end(), o);
    if (it == offsets_.end() || !(*it == o)) return -1;
    return static_cast<int>(it - offsets_.begin());
}

namespace {

// Smallest integer k with k * den >= num. std::ceil alone can be off by one
// on exact boundaries after division rounding, so fix up against the exact
// products.
std::int64_t ceil_ratio(double num, double den) {
    std::int64_t k = static_cast<std::int64_t>(std::ceil(num / den));
    while (static_cast<double>(k - 1) * den >= num) --k;
    while (static_cast<double>(k) * den < num) ++k;
    return k;
}

}  // namespace

WindowIndex last_window_containing(double t, const WindowSpec& w) {
    w.validate();
    // Largest m with m*slide < t  ==  (smallest k with k*slide >= t) - 1.
    return ceil_ratio(t, w.slide) - 1;
}

Lifespan point_lifespan(const StreamPoint& p, double window_start,
                        const WindowSpec& w) {
    w.validate();
    if (!(p.t > window_start) || !(p.t <= window_start + w.win)) {
        throw std::invalid_argument("point_lifespan: stamp outside the current window");
    }
    const std::int64_t k = ceil_ratio(p.t - window_start, w.slide);
    return Lifespan{static_cast<std::int32_t>(k)};
}

Lifespan neighborship_lifespan(Lifespan a, Lifespan b) {
    return Lifespan{std::min(a.remaining, b.remaining)};
}

Lifespan core_lifespan(Lifespan own, std::span<const Lifespan> neighborships,
                       int count_threshold) {
    if (static_cast<int>(neighborships.size()) < count_threshold) {
        return Lifespan{0};
    }
    std::vector<std::int32_t> ls;
    ls.reserve(neighborships.size());
    for (auto n : neighborships) ls.push_back(n.remaining);
    std::nth_element(ls.begin(), ls.begin() + (count_threshold - 1), ls.end(),
                     std::greater<>());
    return Lifespan{std::min(own.remaining, ls[count_threshold - 1])};
}

Lifespan edge_lifespan(Lifespan own, Lifespan own_core,
                       std::span<const Lifespan> neighbor_core) {
    std::int32_t best = 0;
    for (auto n : neighbor_core) best = std::max(best, n.remaining);
    const std::int32_t e = std::min(own.remaining, best) - own_core.remaining;
    return Lifespan{std::max(0, e)};
}

double dist2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::int64_t WindowTimeline::fill_batches() const {
    return ceil_ratio(spec.win, spec.slide);
}

std::pair<double, double> WindowTimeline::batch_interval(std::int64_t b) const {
    const std::int64_t fill = fill_batches();
    if (b < fill) {
        const double lo = static_cast<double>(b) * spec.slide;
        const double hi = std::min(static_cast<double>(b + 1) * spec.slide, spec.win);
        return {lo, hi};
    }
    const WindowIndex n = b - fill + 1;
    return {static_cast<double>(n - 1) * spec.slide + spec.win,
            static_cast<double>(n) * spec.slide + spec.win};
}

WindowIndex WindowTimeline::window_of_batch(std::int64_t b) const {
    const std::int64_t fill = fill_batches();
    return b < fill ? 0 : b - fill + 1;
}

bool WindowTimeline::batch_completes_window(std::int64_t b) const {
    return b >= fill_batches() - 1;
}

std::pair<double, double> WindowTimeline::window_interval(WindowIndex n) const {
    const double lo = static_cast<double>(n) * spec.slide;
    return {lo, lo + spec.win};
}

}  // namespace sgs
