#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/coding.hpp"
#include "core/errors.hpp"
#include "core/transport.hpp"
#include "test_util.hpp"

using namespace latcode;
using testutil::rand_mat;
using testutil::rand_vec;

namespace {

// Exact 1-D optimal transport: expand rational weights (multiples of 1/den)
// into equal-mass particles, sort both sides, pair in order. This is the
// classic monotone-coupling solution, independent of the LP solver.
double w_oracle_1d(const std::vector<double>& xs, const std::vector<int>& xw,
                   const std::vector<double>& ys, const std::vector<int>& yw, int den, int p) {
    std::vector<double> a, b;
    for (size_t i = 0; i < xs.size(); ++i) a.insert(a.end(), xw[i], xs[i]);
    for (size_t i = 0; i < ys.size(); ++i) b.insert(b.end(), yw[i], ys[i]);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double cost = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(a[i] - b[i]);
        cost += (p == 1 ? d : d * d) / den;
    }
    return cost;
}

// random positive integer weights summing to den
std::vector<int> rand_weights(StreamRng& rng, int n, int den) {
    std::vector<int> w(n, 1);
    for (int extra = den - n; extra > 0; --extra) ++w[rng.uniform_int(n)];
    return w;
}

}  // namespace

TEST_CASE("two single atoms") {
    DiscreteMeasure P({{0.0, 0.0}}, {1.0});
    DiscreteMeasure Q({{3.0, 4.0}}, {1.0});
    TransportResult r2 = wasserstein(P, Q, 2);
    CHECK(r2.cost == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(r2.distance == doctest::Approx(5.0).epsilon(1e-12));
    TransportResult r1 = wasserstein(P, Q, 1);
    CHECK(r1.cost == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(r1.distance == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(r1.coupling.nnz() == 1);
}

TEST_CASE("identical measures cost nothing") {
    StreamRng rng = StreamRng::derive(51);
    std::vector<Vec> atoms;
    for (int i = 0; i < 5; ++i) atoms.push_back(rand_vec(rng, 3));
    DiscreteMeasure P = DiscreteMeasure::uniform(atoms);
    TransportResult r = wasserstein(P, P, 2);
    CHECK(r.cost == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("lp solution matches the sorted one-dimensional oracle") {
    StreamRng rng = StreamRng::derive(52);
    const int den = 12;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(5));
        const int m = 2 + static_cast<int>(rng.uniform_int(5));
        std::vector<double> xs, ys;
        for (int i = 0; i < n; ++i) xs.push_back(rng.uniform(-3, 3));
        for (int j = 0; j < m; ++j) ys.push_back(rng.uniform(-3, 3));
        std::vector<int> xw = rand_weights(rng, n, den);
        std::vector<int> yw = rand_weights(rng, m, den);

        std::vector<Vec> xa, ya;
        Vec wx, wy;
        for (int i = 0; i < n; ++i) { xa.push_back({xs[i]}); wx.push_back(xw[i] / double(den)); }
        for (int j = 0; j < m; ++j) { ya.push_back({ys[j]}); wy.push_back(yw[j] / double(den)); }
        DiscreteMeasure P(xa, wx), Q(ya, wy);

        const int p = 1 + static_cast<int>(rng.uniform_int(2));
        TransportResult r = wasserstein(P, Q, p);
        const double want = w_oracle_1d(xs, xw, ys, yw, den, p);
        CHECK(r.cost == doctest::Approx(want).epsilon(1e-9));
        CHECK(r.coupling.marginal_residual(P.weights, Q.weights) <= 1e-10);
    }
}

TEST_CASE("transport cost is symmetric and respects the triangle inequality") {
    StreamRng rng = StreamRng::derive(53);
    for (int trial = 0; trial < 40; ++trial) {
        auto mk = [&](int n) {
            std::vector<Vec> atoms;
            for (int i = 0; i < n; ++i) atoms.push_back(rand_vec(rng, 2, 2.0));
            Vec w(n);
            double s = 0;
            for (double& x : w) { x = rng.uniform(0.05, 1.0); s += x; }
            for (double& x : w) x /= s;
            return DiscreteMeasure(atoms, w);
        };
        DiscreteMeasure P = mk(4), Q = mk(3), R = mk(5);
        const double pq = wasserstein(P, Q, 2).distance;
        const double qp = wasserstein(Q, P, 2).distance;
        CHECK(pq == doctest::Approx(qp).epsilon(1e-9));
        const double pr = wasserstein(P, R, 2).distance;
        const double qr = wasserstein(Q, R, 2).distance;
        CHECK(pr <= pq + qr + 1e-9);
    }
}

TEST_CASE("pushforward clips, keeps weights, merges duplicates") {
    LinearMap f{Mat(1, 1, {2.0})};
    DiscreteMeasure pi({{1.0}, {2.0}, {1.0}}, {0.25, 0.5, 0.25});
    DiscreteMeasure img = pushforward(f, pi);
    REQUIRE(img.size() == 2);  // the two h=1 atoms land together
    CHECK(img.atoms[0][0] == 2.0);
    CHECK(img.weights[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(img.atoms[1][0] == 4.0);

    DataSpace space = DataSpace::ball({0.0}, 3.0);
    DiscreteMeasure clipped = pushforward(f, pi, &space);
    REQUIRE(clipped.size() == 2);
    CHECK(clipped.atoms[1][0] == 3.0);  // 4 projected onto the ball
}

TEST_CASE("best pushforward reproduces the exhaustive-net risk arithmetic") {
    StreamRng rng = StreamRng::derive(54);
    DataSpace space = DataSpace::ball(Vec(2, 0.0), 5.0);
    for (int trial = 0; trial < 10; ++trial) {
        LinearMap f{rand_mat(rng, 2, 2)};
        std::vector<Vec> net;
        for (int i = 0; i < 6; ++i) net.push_back(rand_vec(rng, 2));
        std::vector<Vec> atoms;
        for (int i = 0; i < 7; ++i) atoms.push_back(testutil::rand_in_ball(rng, space.center, 5.0));
        DiscreteMeasure P = DiscreteMeasure::uniform(atoms);

        BestPushforward bp = best_pushforward(P, f, space, net);
        const double risk = weighted_risk(f, space, P, LatentSpace::finite(net),
                                          EncodeStrategy::exhaustive(0.1));
        CHECK(bp.w2sq == risk);

        // and the LP against the induced pushforward agrees
        DiscreteMeasure img = pushforward(f, bp.pi_star, &space);
        TransportResult lp = wasserstein(P, img, 2);
        CHECK(lp.cost == doctest::Approx(bp.w2sq).epsilon(1e-9));
    }
}

TEST_CASE("pollard check on a hand-made line") {
    // four unit-weight points on a line; best 2-grouping splits the pairs
    DiscreteMeasure P({{0.0, 0.0}, {1.0, 0.0}, {10.0, 0.0}, {11.0, 0.0}},
                      {0.25, 0.25, 0.25, 0.25});
    PollardResult r = pollard_check(P, 2);
    // each pair collapses to its midpoint: four points at distance 0.5,
    // cost 4 * 0.25 * 0.5^2 = 0.25
    CHECK(r.e_k == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(r.w2sq_min == doctest::Approx(r.e_k).epsilon(1e-12));
}

TEST_CASE("pollard enumeration limits") {
    std::vector<Vec> atoms(13, Vec{0.0});
    for (int i = 0; i < 13; ++i) atoms[i][0] = i;
    DiscreteMeasure big = DiscreteMeasure::uniform(atoms);
    CHECK_THROWS_AS(pollard_check(big, 2), ValidationError);
    DiscreteMeasure ok = DiscreteMeasure::uniform({{0.0}, {1.0}});
    CHECK_THROWS_AS(pollard_check(ok, 5), ValidationError);
}

TEST_CASE("degenerate weights exercise blands rule safely") {
    // many coincident atoms and tied costs: the simplex must not cycle
    std::vector<Vec> xs(6, Vec{0.0, 0.0}), ys(6, Vec{1.0, 0.0});
    DiscreteMeasure P = DiscreteMeasure::uniform(xs);
    DiscreteMeasure Q = DiscreteMeasure::uniform(ys);
    TransportResult r = wasserstein(P, Q, 2);
    CHECK(r.cost == doctest::Approx(1.0).epsilon(1e-12));
}
