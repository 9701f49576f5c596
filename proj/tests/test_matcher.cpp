#include <doctest.h>

#include <cmath>
#include <random>

#include "sgs/matcher.hpp"
#include "sgs/multires.hpp"
#include "sgs/oracle.hpp"
#include "sgs/stream_gen.hpp"

using namespace sgs;
using namespace sgs::matcher;

namespace {

SGSummary make_summary(std::vector<SkeletalCell> cells, double theta_r = 0.5) {
    SGSummary s;
    s.level = 0;
    s.rho = 3;
    s.range_threshold = theta_r;
    s.grid = GridSpec::make(ClusterParams{theta_r, 2}, 2);
    s.cells = std::move(cells);
    std::sort(s.cells.begin(), s.cells.end(),
              [](const SkeletalCell& a, const SkeletalCell& b) {
                  return a.location < b.location;
              });
    return s;
}

SkeletalCell cell(std::vector<std::int32_t> loc, std::uint32_t pop, CellStatus st,
                  std::vector<std::uint16_t> links = {}) {
    SkeletalCell c;
    c.location = CellCoord{std::move(loc)};
    c.population = pop;
    c.status = st;
    c.core_lifespan = st == CellStatus::core ? 1 : 0;
    for (auto l : links) c.connections.push_back({l, 1});
    return c;
}

SGSummary translate(const SGSummary& s, std::vector<std::int32_t> by) {
    SGSummary t = s;
    for (auto& c : t.cells) {
        for (std::size_t i = 0; i < by.size(); ++i) c.location.idx[i] += by[i];
    }
    return t;
}

MatchQuery query_for(SGSummary target, bool ps, double tau, int budget = 500) {
    MatchQuery q;
    q.target = std::move(target);
    q.position_sensitive = ps;
    q.threshold = tau;
    q.align_budget = budget;
    return q;
}

// Real summaries harvested from random windows.
std::vector<SGSummary> harvest(int count, std::uint64_t seed) {
    BlobStreamConfig gen;
    gen.d = 2;
    gen.blobs = 4;
    gen.sigma = 0.035;
    gen.noise_fraction = 0.15;
    gen.seed = seed;
    gen.window = WindowSpec{WindowKind::count, 250, 250};
    ClusterParams params{0.09, 4};
    GridSpec grid = GridSpec::make(params, 2);
    BlobStream stream(gen);

    std::vector<SGSummary> out;
    while (static_cast<int>(out.size()) < count) {
        auto w = oracle::OracleWindow::analyze(stream.next_slide(), params, grid);
        for (std::size_t i = 0; i < w.clusters.size() &&
                               static_cast<int>(out.size()) < count;
             ++i) {
            out.push_back(w.sgs_of(i).stripped());
        }
    }
    return out;
}

PatternBase build_base(int records, std::uint64_t seed) {
    auto pool = harvest(std::min(records, 40), seed);
    PatternBase base;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> shift(-25, 25);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::uniform_int_distribution<int> pop_jitter(-3, 3);
    int window = 0;
    while (static_cast<int>(base.records().size()) < records) {
        SGSummary s = translate(pool[pick(rng)], {shift(rng), shift(rng)});
        for (auto& c : s.cells) {
            const int p = static_cast<int>(c.population) + pop_jitter(rng);
            c.population = static_cast<std::uint32_t>(std::max(1, p));
        }
        base.archive(s, window++);
    }
    return base;
}

}  // namespace

TEST_CASE("dist_location is footprint sharing, not MBR overlap") {
    auto a = make_summary({cell({0, 0}, 3, CellStatus::core),
                           cell({1, 0}, 2, CellStatus::core),
                           cell({0, 1}, 2, CellStatus::core)});
    CHECK(dist_location(a, a) == 0);

    auto far = translate(a, {10, 10});
    CHECK(dist_location(a, far) == 1);

    // L-shapes whose MBRs overlap while no cell is shared.
    auto l1 = make_summary({cell({0, 0}, 1, CellStatus::core),
                            cell({0, 1}, 1, CellStatus::core),
                            cell({0, 2}, 1, CellStatus::core),
                            cell({1, 0}, 1, CellStatus::core),
                            cell({2, 0}, 1, CellStatus::core)});
    auto l2 = make_summary({cell({1, 1}, 1, CellStatus::core),
                            cell({1, 2}, 1, CellStatus::core),
                            cell({2, 1}, 1, CellStatus::core),
                            cell({2, 2}, 1, CellStatus::core)});
    CHECK(dist_location(l1, l2) == 1);

    auto coarser = multires::compress(a);
    CHECK_THROWS_AS(dist_location(a, coarser), std::invalid_argument);
}

TEST_CASE("dist_feature formula, clamp and zero handling") {
    CHECK(dist_feature(20, 20) == doctest::Approx(0.0));
    CHECK(dist_feature(20, 30) == doctest::Approx(0.5));
    CHECK(dist_feature(30, 20) == doctest::Approx(0.5));
    CHECK(dist_feature(20, 80) == doctest::Approx(1.0));  // clamped
    CHECK(dist_feature(0, 0) == doctest::Approx(0.0));
    CHECK(dist_feature(0, 5) == doctest::Approx(1.0));
    CHECK_THROWS_AS(dist_feature(-1, 5), std::invalid_argument);
}

TEST_CASE("summary_distance composes the weighted features") {
    auto a = make_summary({cell({0, 0}, 3, CellStatus::core)});
    auto q = query_for(a, false, 1.0);

    CHECK(summary_distance(a, a, q) == doctest::Approx(0.0));

    SUBCASE("position-sensitive disjoint short-circuits to 1") {
        q.position_sensitive = true;
        CHECK(summary_distance(a, translate(a, {5, 5}), q) == doctest::Approx(1.0));
    }

    SUBCASE("hand-evaluated feature mix") {
        FeatureVector fa{4, 2, 2.5, 1.0};
        FeatureVector fb{4, 2, 2.5, 2.0};
        CHECK(summary_distance(fa, fb, 0, q) == doctest::Approx(0.25));
    }

    SUBCASE("symmetry") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> f(0.0, 30.0);
        for (int rep = 0; rep < 200; ++rep) {
            FeatureVector fa{static_cast<std::uint32_t>(f(rng)),
                             static_cast<std::uint32_t>(f(rng)), f(rng), f(rng)};
            FeatureVector fb{static_cast<std::uint32_t>(f(rng)),
                             static_cast<std::uint32_t>(f(rng)), f(rng), f(rng)};
            CHECK(summary_distance(fa, fb, 0, q) ==
                  doctest::Approx(summary_distance(fb, fa, 0, q)));
        }
    }
}

TEST_CASE("feature_range_bounds reproduces the volume pruning interval") {
    // Ratio tau/w = 0.5 around a volume of 20.
    auto [lo, hi] = feature_range_bounds(20.0, 0.4, 0.2, true);
    CHECK(lo == doctest::Approx(14.0));
    CHECK(hi == doctest::Approx(30.0));

    auto exact = feature_range_bounds(20.0, 0.5, 0.0, true);
    CHECK(exact.first == doctest::Approx(20.0));
    CHECK(exact.second == doctest::Approx(20.0));

    auto open = feature_range_bounds(20.0, 0.0, 0.2);
    CHECK(std::isinf(open.first));
    CHECK(std::isinf(open.second));

    // The clamp saturates once tau/w reaches 1: no constraint survives.
    auto saturated = feature_range_bounds(20.0, 0.2, 0.25);
    CHECK(std::isinf(saturated.first));
    CHECK(std::isinf(saturated.second));
}

TEST_CASE("feature_range_bounds is sound for the weighted distance") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> f(0.0, 50.0);
    std::uniform_real_distribution<double> w(0.0, 1.0);
    std::uniform_real_distribution<double> t(0.0, 1.0);
    for (int rep = 0; rep < 20000; ++rep) {
        const double qv = f(rng), x = f(rng), weight = w(rng), tau = t(rng);
        if (weight * dist_feature(qv, x) <= tau) {
            auto [lo, hi] = feature_range_bounds(qv, weight, tau);
            CHECK(x >= lo);
            CHECK(x <= hi);
        }
    }
}

TEST_CASE("cell_level_distance matches an exhaustive per-cell evaluation") {
    const Envelope env = make_summary({}).make_envelope();
    const auto right = static_cast<std::uint16_t>(env.index_of(CellCoord{{1, 0}}));
    const auto left = static_cast<std::uint16_t>(env.index_of(CellCoord{{-1, 0}}));

    auto a = make_summary({cell({0, 0}, 4, CellStatus::core, {right}),
                           cell({1, 0}, 8, CellStatus::core, {left, right}),
                           cell({2, 0}, 2, CellStatus::edge)});
    auto q = query_for(a, false, 1.0);

    CHECK(cell_level_distance(a, a, {0, 0}, q) == doctest::Approx(0.0));

    SUBCASE("shift by one cell, position-sensitive zero alignment") {
        auto q1 = query_for(a, true, 1.0);
        auto b = translate(a, {1, 0});
        // Exhaustive evaluation: union of 4 locations; (1,0) and (2,0)
        // overlap, (0,0) and (3,0) are one-sided.
        const double w3 = 1.0 / 3.0;
        double expected = 0.0;
        expected += 1.0;  // (0,0) only in a
        {                 // (1,0): a core pop 8 {left,right} vs b core pop 4 {right}
            const double status = 0.0;
            const double density = std::abs(8.0 - 4.0) / 8.0;
            const double conn = 1.0 / static_cast<double>(env.size());
            expected += w3 * status + w3 * density + w3 * conn;
        }
        {  // (2,0): a edge pop 2 {} vs b core pop 8 {left,right}
            const double status = 1.0;
            const double density = std::abs(2.0 - 8.0) / 8.0;
            const double conn = 2.0 / static_cast<double>(env.size());
            expected += w3 * status + w3 * density + w3 * conn;
        }
        expected += 1.0;      // (3,0) only in b
        expected /= 4.0;      // union size
        expected += 0.0;      // ps * dist_location: footprints share (1,0),(2,0)
        CHECK(cell_level_distance(a, b, {0, 0}, q1) == doctest::Approx(expected));
    }

    SUBCASE("against an empty summary every cell is unmatched") {
        SGSummary empty = a;
        empty.cells.clear();
        CHECK(cell_level_distance(a, empty, {0, 0}, q) == doctest::Approx(1.0));
    }

    SUBCASE("symmetric under alignment negation") {
        std::mt19937_64 rng(13);
        auto pool = harvest(6, 99);
        std::uniform_int_distribution<int> sh(-3, 3);
        for (int rep = 0; rep < 30; ++rep) {
            const auto& x = pool[rep % pool.size()];
            const auto& y = pool[(rep + 1) % pool.size()];
            std::vector<std::int32_t> v{sh(rng), sh(rng)};
            auto qq = query_for(x, false, 1.0);
            CHECK(cell_level_distance(x, y, v, qq) ==
                  doctest::Approx(cell_level_distance(y, x, {-v[0], -v[1]}, qq)));
        }
    }
}

TEST_CASE("search_alignment recovers a pure shift") {
    auto pool = harvest(5, 101);
    for (const auto& s : pool) {
        auto shifted = translate(s, {2, 1});
        auto q = query_for(s, false, 1.0, 500);
        auto [alignment, dist] = search_alignment(s, shifted, q);
        CHECK(dist == doctest::Approx(0.0));
        CHECK(alignment == std::vector<std::int32_t>{2, 1});
    }
}

TEST_CASE("search_alignment honours the anytime contract") {
    auto pool = harvest(8, 103);
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> sh(-4, 4);
    for (int rep = 0; rep < 20; ++rep) {
        const auto& a = pool[rep % pool.size()];
        const auto& b = translate(pool[(rep + 3) % pool.size()], {sh(rng), sh(rng)});
        auto q1 = query_for(a, false, 1.0, 1);
        auto [v1, d1] = search_alignment(a, b, q1);
        // Budget 1 returns the start alignment's distance.
        CHECK(d1 == doctest::Approx(cell_level_distance(a, b, v1, q1)));

        double prev = d1;
        for (int budget : {5, 25, 125, 500}) {
            auto qb = query_for(a, false, 1.0, budget);
            auto [vb, db] = search_alignment(a, b, qb);
            CHECK(db <= prev + 1e-12);  // anytime dominance
            prev = db;
        }
    }
}

TEST_CASE("execute_match finds a verbatim archived target first") {
    auto base = build_base(100, 301);
    const auto& rec = base.records()[42];
    REQUIRE(rec.sgs.level == 0);

    for (bool ps : {true, false}) {
        auto q = query_for(rec.sgs, ps, 0.2);
        auto results = execute_match(q, base);
        REQUIRE(!results.empty());
        CHECK(results[0].id == rec.id);
        CHECK(results[0].summary_distance == doctest::Approx(0.0));
        CHECK(results[0].cell_distance == doctest::Approx(0.0));
    }
}

TEST_CASE("execute_match equals the exhaustive scan") {
    auto base = build_base(1000, 307);
    auto pool = harvest(6, 311);
    for (bool ps : {true, false}) {
        for (double tau : {0.0, 0.15, 0.35}) {
            for (const auto& target : pool) {
                auto q = query_for(target, ps, tau, 200);
                q.weights = {0.4, 0.2, 0.2, 0.2};
                auto fast = execute_match(q, base);
                auto slow = exhaustive_match(q, base);
                CHECK(fast == slow);
            }
            // A target drawn from the base itself must match at least itself.
            auto self = query_for(base.records()[10].sgs, ps, tau, 200);
            auto fast = execute_match(self, base);
            auto slow = exhaustive_match(self, base);
            CHECK(fast == slow);
            CHECK(!fast.empty());
        }
    }
}

TEST_CASE("execute_match on an empty base returns nothing") {
    PatternBase base;
    auto target = make_summary({cell({0, 0}, 3, CellStatus::core)});
    CHECK(execute_match(query_for(target, false, 0.5), base).empty());
}

TEST_CASE("filter stage never drops a record the summary distance admits") {
    auto base = build_base(600, 317);
    auto pool = harvest(4, 331);
    for (const auto& target : pool) {
        auto q = query_for(target, false, 0.25);
        // Candidate set from the feature index, unioned over levels.
        const auto f = feature_vector(target).as_array();
        FeatureBox box;
        for (int i = 0; i < 4; ++i) {
            box.range[i] = feature_range_bounds(f[i], q.weights[i], q.threshold, i < 2);
        }
        auto candidates = base.feature_range_search(box, 0);
        std::set<std::uint64_t> cset(candidates.begin(), candidates.end());
        for (const auto& rec : base.records()) {
            const double sd =
                summary_distance(feature_vector(target), rec.features, 0, q);
            if (sd <= q.threshold) CHECK(cset.count(rec.id) == 1);
        }
    }
}

TEST_CASE("match query validation") {
    auto target = make_summary({cell({0, 0}, 3, CellStatus::core)});
    auto q = query_for(target, false, 0.5);
    CHECK_NOTHROW(q.validate());
    q.weights = {0.5, 0.5, 0.5, 0.5};
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
    q.weights = {0.25, 0.25, 0.25, 0.25};
    q.threshold = 1.5;
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
    q.threshold = 0.5;
    q.align_budget = 0;
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}
