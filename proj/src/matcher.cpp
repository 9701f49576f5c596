#include "sgs/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "sgs/multires.hpp"

namespace sgs::matcher {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_comparable(const SGSummary& a, const SGSummary& b) {
    if (a.level != b.level) {
        throw std::invalid_argument("matcher: summaries are at different levels");
    }
    if (a.grid.d != b.grid.d ||
        std::abs(a.grid.side - b.grid.side) > 1e-9 * a.grid.side ||
        a.grid.origin != b.grid.origin) {
        throw std::invalid_argument("matcher: summaries live on different grids");
    }
}

}  // namespace

void MatchQuery::validate() const {
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("match query: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("match query: weights must sum to 1");
    }
    if (threshold < 0.0 || threshold > 1.0) {
        throw std::invalid_argument("match query: threshold must be in [0,1]");
    }
    if (align_budget < 1) {
        throw std::invalid_argument("match query: alignment budget must be >= 1");
    }
    if (target.cells.empty()) {
        throw std::invalid_argument("match query: empty target summarization");
    }
}

int dist_location(const SGSummary& a, const SGSummary& b) {
    require_comparable(a, b);
    const auto fa = a.footprint();
    for (const auto& c : b.cells) {
        if (fa.count(c.location)) return 0;
    }
    return 1;
}

double dist_feature(double fa, double fb) {
    if (fa < 0.0 || fb < 0.0) {
        throw std::invalid_argument("dist_feature: features must be non-negative");
    }
    if (fa == 0.0 && fb == 0.0) return 0.0;
    if (fa == 0.0 || fb == 0.0) return 1.0;
    return std::min(1.0, std::abs(fa - fb) / std::min(fa, fb));
}

double summary_distance(const FeatureVector& fa, const FeatureVector& fb,
                        int location_distance, const MatchQuery& q) {
    if (q.position_sensitive && location_distance == 1) return 1.0;
    const auto va = fa.as_array();
    const auto vb = fb.as_array();
    double d = q.position_sensitive ? static_cast<double>(location_distance) : 0.0;
    for (int i = 0; i < 4; ++i) d += q.weights[i] * dist_feature(va[i], vb[i]);
    return d;
}

double summary_distance(const SGSummary& a, const SGSummary& b,
                        const MatchQuery& q) {
    const int loc = q.position_sensitive ? dist_location(a, b) : 0;
    return summary_distance(feature_vector(a), feature_vector(b), loc, q);
}

std::pair<double, double> feature_range_bounds(double q_value, double weight,
                                               double tau, bool integer_feature) {
    if (weight <= 0.0) return {-kInf, kInf};
    const double ratio = tau / weight;
    // Once the ratio reaches 1 the clamped distance can never exceed it, so
    // the feature carries no constraint at all.
    if (ratio >= 1.0) return {-kInf, kInf};
    double lo = q_value / (1.0 + ratio);
    double hi = q_value * (1.0 + ratio);
    if (integer_feature) {
        lo = std::ceil(lo - 1e-12);
        hi = std::floor(hi + 1e-12);
    }
    return {lo, hi};
}

double cell_level_distance(const SGSummary& a, const SGSummary& b,
                           const std::vector<std::int32_t>& alignment,
                           const MatchQuery& q) {
    require_comparable(a, b);
    if (static_cast<int>(alignment.size()) != a.grid.d) {
        throw std::invalid_argument("cell_level_distance: alignment dimension mismatch");
    }

    // Cell-level weights: the three per-cell features, renormalized. Volume
    // has no per-cell analogue; the unmatched-cell penalty plays its role.
    const double wsum = q.weights[1] + q.weights[2] + q.weights[3];
    const double ws = wsum > 0.0 ? q.weights[1] / wsum : 1.0 / 3.0;
    const double wd = wsum > 0.0 ? q.weights[2] / wsum : 1.0 / 3.0;
    const double wc = wsum > 0.0 ? q.weights[3] / wsum : 1.0 / 3.0;

    const CellCoord shift{alignment};
    std::map<CellCoord, const SkeletalCell*> bs;
    for (const auto& c : b.cells) bs.emplace(c.location - shift, &c);

    const double env_size = static_cast<double>(a.make_envelope().size());

    double sum = 0.0;
    std::size_t union_count = 0;
    std::set<CellCoord> seen;
    for (const auto& ca : a.cells) {
        ++union_count;
        seen.insert(ca.location);
        auto it = bs.find(ca.location);
        if (it == bs.end()) {
            sum += 1.0;
            continue;
        }
        const SkeletalCell& cb = *it->second;
        const double status_diff = (ca.status == cb.status) ? 0.0 : 1.0;
        const double pmax = std::max(ca.population, cb.population);
        const double density_diff =
            pmax > 0.0 ? std::abs(static_cast<double>(ca.population) -
                                  static_cast<double>(cb.population)) /
                             pmax
                       : 0.0;
        std::size_t differing = 0;
        {
            auto ia = ca.connections.begin();
            auto ib = cb.connections.begin();
            while (ia != ca.connections.end() || ib != cb.connections.end()) {
                if (ib == cb.connections.end() ||
                    (ia != ca.connections.end() && ia->env_index < ib->env_index)) {
                    ++differing;
                    ++ia;
                } else if (ia == ca.connections.end() ||
                           ib->env_index < ia->env_index) {
                    ++differing;
                    ++ib;
                } else {
                    ++ia;
                    ++ib;
                }
            }
        }
        const double conn_diff =
            env_size > 0.0 ? static_cast<double>(differing) / env_size : 0.0;
        sum += ws * status_diff + wd * density_diff + wc * conn_diff;
    }
    for (const auto& [loc, cb] : bs) {
        if (!seen.count(loc)) {
            ++union_count;
            sum += 1.0;
        }
    }

    const int loc = q.position_sensitive ? dist_location(a, b) : 0;
    return static_cast<double>(loc) +
           (union_count ? sum / static_cast<double>(union_count) : 0.0);
}

std::pair<std::vector<std::int32_t>, double> search_alignment(
    const SGSummary& a, const SGSummary& b, const MatchQuery& q) {
    require_comparable(a, b);
    if (q.position_sensitive) {
        throw std::invalid_argument("search_alignment: position-sensitive matches fix the zero alignment");
    }
    const int d = a.grid.d;

    // Start where the MBR centers line up, rounded to whole cells.
    auto center = [&](const SGSummary& s) {
        std::vector<double> lo(d, kInf), hi(d, -kInf);
        for (const auto& c : s.cells) {
            for (int i = 0; i < d; ++i) {
                lo[i] = std::min(lo[i], static_cast<double>(c.location.idx[i]));
                hi[i] = std::max(hi[i], static_cast<double>(c.location.idx[i]));
            }
        }
        std::vector<double> mid(d);
        for (int i = 0; i < d; ++i) mid[i] = (lo[i] + hi[i]) / 2.0;
        return mid;
    };
    const auto ca = center(a);
    const auto cb = center(b);
    std::vector<std::int32_t> start(d);
    for (int i = 0; i < d; ++i) {
        start[i] = static_cast<std::int32_t>(std::llround(cb[i] - ca[i]));
    }

    using Key = std::pair<double, std::vector<std::int32_t>>;
    std::set<Key> frontier;  // ordered: best distance first, then lexicographic
    std::set<std::vector<std::int32_t>> visited;

    int evals = 0;
    auto evaluate = [&](const std::vector<std::int32_t>& v) {
        ++evals;
        return cell_level_distance(a, b, v, q);
    };

    double best_d = evaluate(start);
    std::vector<std::int32_t> best_v = start;
    visited.insert(start);
    frontier.insert({best_d, start});

    while (!frontier.empty() && evals < q.align_budget && best_d > 0.0) {
        const auto [dist, v] = *frontier.begin();
        frontier.erase(frontier.begin());

        bool improved = false;
        for (int axis = 0; axis < d && evals < q.align_budget; ++axis) {
            for (int sign : {+1, -1}) {
                if (evals >= q.align_budget) break;
                auto u = v;
                u[axis] += sign;
                if (!visited.insert(u).second) continue;
                const double du = evaluate(u);
                if (du < dist) improved = true;
                if (du < best_d || (du == best_d && u < best_v)) {
                    best_d = du;
                    best_v = u;
                }
                frontier.insert({du, u});
            }
        }
        // Expanding the incumbent without any improvement means a local
        // minimum: the anytime answer.
        if (!improved && v == best_v) break;
    }
    return {best_v, best_d};
}

namespace {

struct RefineOutcome {
    bool matched = false;
    MatchResult result;
};

class MatchContext {
public:
    MatchContext(const MatchQuery& q, const PatternBase& base) : q_(q) {
        q_.validate();
        for (int level : base.levels_present()) {
            if (level < q_.target.level) {
                throw std::invalid_argument(
                    "execute_match: archived level " + std::to_string(level) +
                    " is finer than the query target's level");
            }
            auto s = multires::compress_to(q_.target, level);
            features_.emplace(level, feature_vector(s));
            targets_.emplace(level, std::move(s));
        }
    }

    const SGSummary& target_at(int level) const { return targets_.at(level); }
    const FeatureVector& features_at(int level) const { return features_.at(level); }

    RefineOutcome refine(const PatternRecord& rec) const {
        const int level = rec.sgs.level;
        const SGSummary& target = target_at(level);

        const int loc = q_.position_sensitive ? dist_location(target, rec.sgs) : 0;
        const double summary =
            summary_distance(features_at(level), rec.features, loc, q_);
        if (summary > q_.threshold) return {};

        std::vector<std::int32_t> alignment(
            static_cast<std::size_t>(target.grid.d), 0);
        double cell;
        if (q_.position_sensitive) {
            cell = cell_level_distance(target, rec.sgs, alignment, q_);
        } else {
            auto [v, dist] = search_alignment(target, rec.sgs, q_);
            alignment = std::move(v);
            cell = dist;
        }
        if (cell > q_.threshold) return {};
        return {true, MatchResult{rec.id, summary, cell, std::move(alignment)}};
    }

    const MatchQuery& query() const { return q_; }

private:
    MatchQuery q_;
    std::map<int, SGSummary> targets_;
    std::map<int, FeatureVector> features_;
};

std::vector<MatchResult> sort_results(std::vector<MatchResult> results) {
    std::sort(results.begin(), results.end(),
              [](const MatchResult& a, const MatchResult& b) {
                  if (a.cell_distance != b.cell_distance) {
                      return a.cell_distance < b.cell_distance;
                  }
                  return a.id < b.id;
              });
    return results;
}

}  // namespace

std::vector<MatchResult> execute_match(const MatchQuery& q,
                                       const PatternBase& base,
                                       bool parallel) {
    if (base.records().empty()) return {};
    MatchContext ctx(q, base);

    std::vector<std::uint64_t> candidate_ids;
    if (q.position_sensitive) {
        // Prefilter with the coarsest target MBR: footprints only grow with
        // the level, so this cannot lose an overlapping record.
        const auto levels = base.levels_present();
        const int coarsest = *std::max_element(levels.begin(), levels.end());
        candidate_ids = base.locate_overlapping(ctx.target_at(coarsest).mbr());
    } else {
        for (int level : base.levels_present()) {
            const auto f = ctx.features_at(level).as_array();
            FeatureBox box;
            for (int i = 0; i < 4; ++i) {
                box.range[i] = feature_range_bounds(f[i], ctx.query().weights[i],
                                                    ctx.query().threshold, i < 2);
            }
            auto ids = base.feature_range_search(box, level);
            candidate_ids.insert(candidate_ids.end(), ids.begin(), ids.end());
        }
        std::sort(candidate_ids.begin(), candidate_ids.end());
    }

    const std::int64_t n = static_cast<std::int64_t>(candidate_ids.size());
    std::vector<RefineOutcome> outcomes(candidate_ids.size());
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
    for (std::int64_t i = 0; i < n; ++i) {
        outcomes[static_cast<std::size_t>(i)] =
            ctx.refine(*base.find(candidate_ids[static_cast<std::size_t>(i)]));
    }

    std::vector<MatchResult> results;
    for (auto& o : outcomes) {
        if (o.matched) results.push_back(std::move(o.result));
    }
    return sort_results(std::move(results));
}

std::vector<MatchResult> exhaustive_match(const MatchQuery& q,
                                          const PatternBase& base) {
    if (base.records().empty()) return {};
    MatchContext ctx(q, base);
    std::vector<MatchResult> results;
    for (const auto& rec : base.records()) {
        auto o = ctx.refine(rec);
        if (o.matched) results.push_back(std::move(o.result));
    }
    return sort_results(std::move(results));
}

}  // namespace sgs::matcher
