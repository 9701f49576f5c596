#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "sgs/core.hpp"

using namespace sgs;

namespace {

ClusterParams params(double r, int c) { return ClusterParams{r, c}; }

// Dense-sampling reference for the minimum inter-cell distance: sample a
// lattice of points in both cells and take the minimum pairwise distance.
double sampled_cell_gap(const CellCoord& a, const CellCoord& b, const GridSpec& g,
                        int per_axis = 6) {
    auto samples = [&](const CellCoord& c) {
        std::vector<std::vector<double>> pts;
        std::vector<int> v(static_cast<std::size_t>(g.d), 0);
        while (true) {
            std::vector<double> p(static_cast<std::size_t>(g.d));
            for (int i = 0; i < g.d; ++i) {
                p[i] = g.axis_min(i, c.idx[i]) +
                       g.side * v[i] / static_cast<double>(per_axis - 1);
            }
            pts.push_back(std::move(p));
            int axis = g.d - 1;
            while (axis >= 0 && v[axis] == per_axis - 1) v[axis--] = 0;
            if (axis < 0) break;
            ++v[axis];
        }
        return pts;
    };
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : samples(a)) {
        for (const auto& q : samples(b)) {
            best = std::min(best, std::sqrt(dist2(p, q)));
        }
    }
    return best;
}

// Window-by-window status simulation used to pin the career arithmetic.
// Returns the number of leading windows in which at least `threshold` of the
// given neighborships survive, capped by the point's own lifespan.
int simulated_core_career(int own, const std::vector<int>& neighborships,
                          int threshold) {
    int career = 0;
    for (int w = 1; w <= own; ++w) {
        int alive = 0;
        for (int ls : neighborships) alive += (ls >= w) ? 1 : 0;
        if (alive >= threshold) {
            career = w;
        } else {
            break;
        }
    }
    return career;
}

int simulated_edge_career(int own, int own_core,
                          const std::vector<int>& neighbor_core) {
    int career = 0;
    for (int w = own_core + 1; w <= own; ++w) {
        bool some_core_neighbor = false;
        for (int c : neighbor_core) some_core_neighbor |= (c >= w);
        if (some_core_neighbor) {
            ++career;
        } else {
            break;
        }
    }
    return career;
}

}  // namespace

TEST_CASE("grid side length follows the diagonal rule") {
    CHECK(grid_side_length(params(1.0, 1), 1) == doctest::Approx(1.0));
    CHECK(grid_side_length(params(1.0, 1), 2) == doctest::Approx(0.7071067811865475));
    CHECK(grid_side_length(params(0.2, 1), 4) == doctest::Approx(0.1));
    CHECK_THROWS_AS(grid_side_length(params(0.0, 1), 2), std::invalid_argument);
    CHECK_THROWS_AS(grid_side_length(params(-1.0, 1), 2), std::invalid_argument);
    CHECK_THROWS_AS(grid_side_length(params(1.0, 1), 0), std::invalid_argument);
    CHECK_THROWS_AS(grid_side_length(params(1.0, 0), 2), std::invalid_argument);
}

TEST_CASE("points in one cell are always within the range threshold") {
    std::mt19937_64 rng(7);
    for (int d = 1; d <= 4; ++d) {
        const GridSpec g = GridSpec::make(params(0.5, 3), d);
        std::uniform_int_distribution<int> cell(-5, 5);
        std::uniform_real_distribution<double> in_cell(0.0, g.side);
        for (int rep = 0; rep < 200; ++rep) {
            CellCoord c;
            for (int a = 0; a < d; ++a) c.idx.push_back(cell(rng));
            std::vector<double> p(d), q(d);
            for (int a = 0; a < d; ++a) {
                p[a] = g.axis_min(a, c.idx[a]) + in_cell(rng);
                q[a] = g.axis_min(a, c.idx[a]) + in_cell(rng);
            }
            CHECK(std::sqrt(dist2(p, q)) <= 0.5 * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("cell_of uses the floor convention") {
    const GridSpec g = GridSpec::make(params(1.0, 1), 2);
    CHECK(cell_of(std::vector<double>{1.5, 0.3}, g) ==
          CellCoord{{2, 0}});
    CHECK(cell_of(std::vector<double>{0.0, 0.0}, g) == CellCoord{{0, 0}});
    CHECK(cell_of(std::vector<double>{-0.1, 0.0}, g) == CellCoord{{-1, 0}});
    // A boundary value maps to the cell whose minimum corner it is.
    CHECK(cell_of(std::vector<double>{g.side, 0.0}, g) == CellCoord{{1, 0}});
    CHECK_THROWS_AS(cell_of(std::vector<double>{1.0}, g), std::invalid_argument);
}

TEST_CASE("min_cell_gap matches dense sampling") {
    const GridSpec g = GridSpec::make(params(1.0, 1), 2);
    const double s = g.side;
    const CellCoord zero{{0, 0}};

    CHECK(min_cell_gap(zero, zero, g) == 0.0);
    CHECK(min_cell_gap(zero, CellCoord{{1, 1}}, g) == 0.0);
    CHECK(min_cell_gap(zero, CellCoord{{2, 0}}, g) == doctest::Approx(s));
    CHECK(min_cell_gap(zero, CellCoord{{2, 2}}, g) ==
          doctest::Approx(s * std::sqrt(2.0)));

    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> off(-3, 3);
    for (int rep = 0; rep < 30; ++rep) {
        CellCoord b{{off(rng), off(rng)}};
        const double expected = min_cell_gap(zero, b, g);
        const double sampled = sampled_cell_gap(zero, b, g);
        CHECK(sampled == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("envelope d=1 is exactly the two unit offsets") {
    const GridSpec g = GridSpec::make(params(1.0, 1), 1);
    const auto env = neighbor_cell_envelope(g, params(1.0, 1));
    REQUIRE(env.size() == 2);
    CHECK(env[0] == CellCoord{{-1}});
    CHECK(env[1] == CellCoord{{1}});
}

TEST_CASE("envelope d=2 is the 20 offsets of max-norm 2 minus the corners") {
    const GridSpec g = GridSpec::make(params(1.0, 1), 2);
    const auto env = neighbor_cell_envelope(g, params(1.0, 1));
    std::set<CellCoord> got(env.begin(), env.end());

    std::set<CellCoord> expected;
    for (int i = -2; i <= 2; ++i) {
        for (int j = -2; j <= 2; ++j) {
            if (i == 0 && j == 0) continue;
            if (std::abs(i) == 2 && std::abs(j) == 2) continue;
            expected.insert(CellCoord{{i, j}});
        }
    }
    CHECK(expected.size() == 20);
    CHECK(got == expected);
}

TEST_CASE("envelope d=4 matches an independent enumeration") {
    const GridSpec g = GridSpec::make(params(0.8, 1), 4);
    const auto env = neighbor_cell_envelope(g, params(0.8, 1));
    std::set<CellCoord> got(env.begin(), env.end());

    // Independent route: sum over axes of (|o|-1)^2 must stay below d.
    std::set<CellCoord> expected;
    for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b)
            for (int c = -3; c <= 3; ++c)
                for (int e = -3; e <= 3; ++e) {
                    if (!a && !b && !c && !e) continue;
                    int s = 0;
                    for (int v : {a, b, c, e}) {
                        const int m = std::abs(v) - 1;
                        if (m > 0) s += m * m;
                    }
                    if (s < 4) expected.insert(CellCoord{{a, b, c, e}});
                }
    CHECK(got == expected);
}

TEST_CASE("envelope is negation-closed and excludes zero") {
    for (int d = 1; d <= 4; ++d) {
        const GridSpec g = GridSpec::make(params(0.3, 1), d);
        const auto env = neighbor_cell_envelope(g, params(0.3, 1));
        std::set<CellCoord> s(env.begin(), env.end());
        CellCoord zero;
        zero.idx.assign(d, 0);
        CHECK(s.count(zero) == 0);
        for (const auto& o : env) CHECK(s.count(-o) == 1);
        CHECK(std::is_sorted(env.begin(), env.end()));
    }
}

TEST_CASE("neighboring points always land in envelope cells") {
    std::mt19937_64 rng(11);
    for (int d = 1; d <= 4; ++d) {
        const double r = 0.4;
        const GridSpec g = GridSpec::make(params(r, 1), d);
        const Envelope env = Envelope::make(g, r);
        std::uniform_real_distribution<double> pos(-2.0, 2.0);
        std::uniform_real_distribution<double> delta(-1.2 * r, 1.2 * r);
        int in_range = 0;
        for (int rep = 0; rep < 100000; ++rep) {
            std::vector<double> p(d), q(d);
            for (int a = 0; a < d; ++a) {
                p[a] = pos(rng);
                q[a] = p[a] + delta(rng);
            }
            if (dist2(p, q) > r * r) continue;
            ++in_range;
            const CellCoord off = cell_of(q, g) - cell_of(p, g);
            bool zero = std::all_of(off.idx.begin(), off.idx.end(),
                                    [](int v) { return v == 0; });
            if (!zero) CHECK(env.index_of(off) >= 0);
        }
        CHECK(in_range > 1000);  // the sampler actually exercised the property
    }
}

TEST_CASE("point lifespan follows the ceiling formula") {
    WindowSpec w{WindowKind::count, 10, 2};
    StreamPoint p;
    p.t = 5;  // window start 0
    CHECK(point_lifespan(p, 0, w).remaining == 3);

    p.t = 2;  // exactly one slide into the window: survives only this window
    CHECK(point_lifespan(p, 0, w).remaining == 1);

    WindowSpec w5{WindowKind::count, 20, 5};
    p.t = 7;
    CHECK(point_lifespan(p, 0, w5).remaining == 2);

    p.t = 0;  // left boundary excluded
    CHECK_THROWS_AS(point_lifespan(p, 0, w), std::invalid_argument);
    p.t = 11;  // beyond the window
    CHECK_THROWS_AS(point_lifespan(p, 0, w), std::invalid_argument);
}

TEST_CASE("point lifespan is monotone in the stamp") {
    WindowSpec w{WindowKind::count, 12, 5};
    int prev = 0;
    for (int t = 1; t <= 12; ++t) {
        StreamPoint p;
        p.t = t;
        const int ls = point_lifespan(p, 0, w).remaining;
        CHECK(ls >= prev);
        CHECK(ls >= 1);
        prev = ls;
    }
}

TEST_CASE("neighborship lifespan is the minimum") {
    CHECK(neighborship_lifespan(Lifespan{3}, Lifespan{5}).remaining == 3);
    CHECK(neighborship_lifespan(Lifespan{4}, Lifespan{4}).remaining == 4);
    CHECK(neighborship_lifespan(Lifespan{1}, Lifespan{9}).remaining == 1);
}

TEST_CASE("core lifespan equals the simulated career") {
    auto run = [](int own, std::vector<int> ns, int threshold) {
        std::vector<Lifespan> ls;
        for (int v : ns) ls.push_back(Lifespan{std::min(v, own)});
        return core_lifespan(Lifespan{own}, ls, threshold).remaining;
    };

    // Frozen from the simulation oracle.
    CHECK(simulated_core_career(5, {5, 4, 2, 1}, 3) == 2);
    CHECK(run(5, {6, 4, 2, 1}, 3) == 2);

    CHECK(run(5, {6, 4}, 3) == 0);  // fewer than threshold neighbors
    CHECK(run(1, {9, 9, 9}, 3) == 1);

    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> len(0, 12), life(1, 9), thr(1, 5);
    for (int rep = 0; rep < 2000; ++rep) {
        const int own = life(rng);
        const int threshold = thr(rng);
        std::vector<int> ns(len(rng));
        for (auto& v : ns) v = std::min(life(rng), own);  // neighborship <= own
        const int expected = simulated_core_career(own, ns, threshold);
        CHECK(run(own, ns, threshold) == expected);
    }
}

TEST_CASE("edge lifespan equals the simulated career") {
    auto run = [](int own, int own_core, std::vector<int> cores) {
        std::vector<Lifespan> ls;
        for (int v : cores) ls.push_back(Lifespan{v});
        return edge_lifespan(Lifespan{own}, Lifespan{own_core}, ls).remaining;
    };

    CHECK(simulated_edge_career(5, 2, {4}) == 2);
    CHECK(run(5, 2, {4}) == 2);
    CHECK(run(5, 2, {}) == 0);
    CHECK(run(5, 3, {2}) == 0);  // neighbor core career inside the own one

    std::mt19937_64 rng(29);
    std::uniform_int_distribution<int> len(0, 6), life(1, 9);
    for (int rep = 0; rep < 2000; ++rep) {
        const int own = life(rng);
        std::uniform_int_distribution<int> core_d(0, own);
        const int own_core = core_d(rng);
        std::vector<int> cores(len(rng));
        for (auto& v : cores) v = life(rng);
        CHECK(run(own, own_core, cores) ==
              simulated_edge_career(own, own_core, cores));
    }
}

TEST_CASE("window timeline cuts batches as expected") {
    WindowTimeline t(WindowSpec{WindowKind::count, 10, 5});
    CHECK(t.fill_batches() == 2);
    CHECK(t.batch_interval(0) == std::pair<double, double>{0, 5});
    CHECK(t.batch_interval(1) == std::pair<double, double>{5, 10});
    CHECK(t.batch_interval(2) == std::pair<double, double>{10, 15});
    CHECK(!t.batch_completes_window(0));
    CHECK(t.batch_completes_window(1));
    CHECK(t.window_of_batch(0) == 0);
    CHECK(t.window_of_batch(1) == 0);
    CHECK(t.window_of_batch(2) == 1);
    CHECK(t.window_interval(1) == std::pair<double, double>{5, 15});

    // win not a multiple of slide: the last fill batch is short.
    WindowTimeline u(WindowSpec{WindowKind::count, 10, 4});
    CHECK(u.fill_batches() == 3);
    CHECK(u.batch_interval(2) == std::pair<double, double>{8, 10});
    CHECK(u.batch_interval(3) == std::pair<double, double>{10, 14});
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(WindowSpec({WindowKind::count, 5, 10}).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(WindowSpec({WindowKind::count, 10, 0}).validate(),
                    std::invalid_argument);
    CHECK_NOTHROW(WindowSpec({WindowKind::time, 2.5, 0.5}).validate());
    CHECK_THROWS_AS(GridSpec::make(params(1.0, 1), 2, {0.0}).validate(params(1.0, 1)),
                    std::invalid_argument);
    CHECK_NOTHROW(GridSpec::make(params(1.0, 1), 2).validate(params(1.0, 1)));
}
