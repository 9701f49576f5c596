#ifndef SGS_MATCHER_HPP
#define SGS_MATCHER_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "sgs/pattern_base.hpp"
#include "sgs/summary.hpp"

namespace sgs::matcher {

/// A cluster-matching query. Weights cover the four non-locational
/// features (volume, core count, average density, average connectivity)
/// and must sum to one. Position-sensitive matches require spatial overlap
/// and force the zero alignment; non-position-sensitive ones search for an
/// alignment within the evaluation budget.
struct MatchQuery {
    SGSummary target;
    bool position_sensitive = false;
    std::array<double, 4> weights{0.25, 0.25, 0.25, 0.25};
    double threshold = 0.2;
    int align_budget = 500;

    void validate() const;
};

struct MatchResult {
    std::uint64_t id = 0;
    double summary_distance = 0.0;
    double cell_distance = 0.0;
    std::vector<std::int32_t> alignment;

    bool operator==(const MatchResult&) const = default;
};

/// 0 when the two footprints share at least one cell location, else 1.
/// Both summaries must live on the same level and grid.
int dist_location(const SGSummary& a, const SGSummary& b);

/// Relative feature difference min(1, |fa-fb| / min(fa,fb)); 0 when both
/// are zero, 1 when exactly one is.
double dist_feature(double fa, double fb);

/// ps * dist_location + sum of weighted feature distances. With ps set and
/// disjoint footprints the distance short-circuits to 1.
double summary_distance(const FeatureVector& fa, const FeatureVector& fb,
                        int location_distance, const MatchQuery& q);
double summary_distance(const SGSummary& a, const SGSummary& b,
                        const MatchQuery& q);

/// Inclusive interval every candidate's feature must fall in when its
/// weighted distance is to stay within tau. Infinite bounds when the weight
/// carries no constraint (w = 0, or tau/w >= 1 where the clamp saturates).
/// Integer features round inward.
std::pair<double, double> feature_range_bounds(double q_value, double weight,
                                               double tau,
                                               bool integer_feature = false);

/// Aggregated per-cell difference over the union of a's footprint and b's
/// footprint shifted by -alignment (a cell at L corresponds to the b cell at
/// L + alignment). Cells present on one side only count the maximum
/// difference of 1.
double cell_level_distance(const SGSummary& a, const SGSummary& b,
                           const std::vector<std::int32_t>& alignment,
                           const MatchQuery& q);

/// Anytime best-first search over alignments, starting from the one that
/// aligns the MBR centers. Non-position-sensitive only. Never returns a
/// distance worse than the start alignment's.
std::pair<std::vector<std::int32_t>, double> search_alignment(
    const SGSummary& a, const SGSummary& b, const MatchQuery& q);

/// Filter-and-refine execution against the pattern base: index-driven
/// candidate search, then the two-stage distance criterion. A record
/// matches when both its summary distance and its cell-level distance stay
/// within the threshold. Results sort ascending by cell distance.
std::vector<MatchResult> execute_match(const MatchQuery& q,
                                       const PatternBase& base,
                                       bool parallel = true);

/// The defining oracle: the same two-stage criterion applied to every
/// record, serially, without indices.
std::vector<MatchResult> exhaustive_match(const MatchQuery& q,
                                          const PatternBase& base);

}  // namespace sgs::matcher

#endif  // SGS_MATCHER_HPP
