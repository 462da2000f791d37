#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/coding.hpp"
#include "core/errors.hpp"
#include "core/rate_distortion.hpp"
#include "test_util.hpp"

using namespace latcode;
using testutil::rand_vec;

namespace {

double binary_entropy(double p) {
    if (p <= 0 || p >= 1) return 0.0;
    return -p * std::log(p) - (1 - p) * std::log(1 - p);
}

// mutual information of a source/kernel pair, recomputed from scratch
double mutual_information(const Vec& p, const Mat& k) {
    Vec q(static_cast<size_t>(k.cols), 0.0);
    for (int i = 0; i < k.rows; ++i)
        for (int j = 0; j < k.cols; ++j) q[static_cast<size_t>(j)] += p[static_cast<size_t>(i)] * k(i, j);
    double info = 0.0;
    for (int i = 0; i < k.rows; ++i)
        for (int j = 0; j < k.cols; ++j) {
            const double kij = k(i, j);
            if (kij > 0) info += p[static_cast<size_t>(i)] * kij * std::log(kij / q[static_cast<size_t>(j)]);
        }
    return info;
}

RDProblem binary_symmetric() {
    DiscreteMeasure src({{0.0}, {1.0}}, {0.5, 0.5});
    return RDProblem(src, {{0.0}, {1.0}});
}

}  // namespace

TEST_CASE("problem costs are squared distances") {
    DiscreteMeasure src({{0.0, 0.0}, {1.0, 2.0}}, {0.5, 0.5});
    RDProblem prob(src, {{3.0, 4.0}});
    CHECK(prob.n() == 2);
    CHECK(prob.m() == 1);
    CHECK(prob.c(0, 0) == doctest::Approx(25.0).epsilon(1e-15));
    CHECK(prob.c(1, 0) == doctest::Approx(8.0).epsilon(1e-15));
    CHECK_THROWS_AS(RDProblem(src, {}), ValidationError);
    CHECK_THROWS_AS(RDProblem(src, {{1.0}}), ValidationError);
}

TEST_CASE("binary symmetric curve matches the closed form") {
    // R(D) = log 2 - H_b(D) for the uniform binary source with 0/1 cost
    RDProblem prob = binary_symmetric();
    for (double slope : {-0.5, -1.0, -2.0, -4.0}) {
        BlahutResult r = blahut(prob, slope, 1e-12, 20000);
        REQUIRE(r.distortion > 0);
        REQUIRE(r.distortion < 0.5);
        const double want = std::log(2.0) - binary_entropy(r.distortion);
        CHECK(r.rate == doctest::Approx(want).epsilon(1e-6));
        // and the tilted kernel sits where the slope says it should:
        // D(s) = sigma(s) for this cost matrix
        CHECK(r.distortion == doctest::Approx(1.0 / (1.0 + std::exp(-slope))).epsilon(1e-6));
    }
}

TEST_CASE("reported rate and distortion match the kernel") {
    StreamRng rng = StreamRng::derive(61);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(4));
        const int m = 2 + static_cast<int>(rng.uniform_int(4));
        std::vector<Vec> atoms, letters;
        for (int i = 0; i < n; ++i) atoms.push_back(rand_vec(rng, 2, 2.0));
        for (int j = 0; j < m; ++j) letters.push_back(rand_vec(rng, 2, 2.0));
        Vec w(static_cast<size_t>(n));
        double s = 0;
        for (double& x : w) { x = rng.uniform(0.1, 1.0); s += x; }
        for (double& x : w) x /= s;
        RDProblem prob(DiscreteMeasure(atoms, w), letters);

        BlahutResult r = blahut(prob, -1.5, 1e-11, 10000);
        CHECK(r.gap <= 1e-11);

        for (int i = 0; i < r.kernel.rows; ++i) {
            double row = 0;
            for (int j = 0; j < r.kernel.cols; ++j) row += r.kernel(i, j);
            CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
        }
        double dist = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                dist += prob.source.weights[static_cast<size_t>(i)] * r.kernel(i, j) * prob.c(i, j);
        CHECK(r.distortion == doctest::Approx(dist).epsilon(1e-12));
        CHECK(r.rate == doctest::Approx(mutual_information(prob.source.weights, r.kernel)).epsilon(1e-9));

        // plain updates descend; each support edit may lift the Lagrangian
        // once, so upticks are capped by the alphabet size
        int upticks = 0;
        for (size_t t = 1; t < r.objective_trace.size(); ++t)
            if (r.objective_trace[t] > r.objective_trace[t - 1] + 1e-12) ++upticks;
        CHECK(upticks <= m);
        CHECK(r.objective_trace.back() <= r.objective_trace.front() + 1e-12);
    }
}

TEST_CASE("slope and tolerance validation") {
    RDProblem prob = binary_symmetric();
    CHECK_THROWS_AS(blahut(prob, 0.0, 1e-9, 100), ValidationError);
    CHECK_THROWS_AS(blahut(prob, 1.0, 1e-9, 100), ValidationError);
    CHECK_THROWS_AS(blahut(prob, -1.0, 0.0, 100), ValidationError);
    CHECK_THROWS_AS(blahut(prob, -1.0, 1e-9, 0), ValidationError);
    // asymmetric source: the uniform init is off the fixed point, so a
    // single iteration cannot certify a tiny gap
    DiscreteMeasure skew({{0.0}, {1.0}}, {0.3, 0.7});
    RDProblem skewed(skew, {{0.0}, {1.0}});
    CHECK_THROWS_AS(blahut(skewed, -1.0, 1e-15, 1), NumericError);
}

TEST_CASE("curve sweep keeps monotonicity and convexity") {
    StreamRng rng = StreamRng::derive(62);
    std::vector<Vec> atoms, letters;
    for (int i = 0; i < 5; ++i) atoms.push_back(rand_vec(rng, 1, 2.0));
    for (int j = 0; j < 4; ++j) letters.push_back(rand_vec(rng, 1, 2.0));
    RDProblem prob(DiscreteMeasure::uniform(atoms), letters);

    RDCurve curve = rd_curve(prob, {-8.0, -4.0, -2.0, -1.0, -0.5, -0.25}, 1e-11, 20000);
    REQUIRE(curve.points.size() == 6);
    curve.check_invariants();  // throws on violation
    for (size_t t = 1; t < curve.points.size(); ++t) {
        CHECK(curve.points[t].rate >= curve.points[t - 1].rate);
        CHECK(curve.points[t].distortion <= curve.points[t - 1].distortion + 1e-9);
    }

    CHECK_THROWS_AS(rd_curve(prob, {}, 1e-9, 100), ValidationError);
    CHECK_THROWS_AS(rd_curve(prob, {-1.0, -2.0}, 1e-9, 100), ValidationError);  // descending
    CHECK_THROWS_AS(rd_curve(prob, {-1.0, 1.0}, 1e-9, 100), ValidationError);
}

TEST_CASE("distortion at rate zero is the one-letter optimum") {
    StreamRng rng = StreamRng::derive(63);
    std::vector<Vec> atoms, letters;
    for (int i = 0; i < 6; ++i) atoms.push_back(rand_vec(rng, 2, 2.0));
    for (int j = 0; j < 3; ++j) letters.push_back(rand_vec(rng, 2, 2.0));
    RDProblem prob(DiscreteMeasure::uniform(atoms), letters);

    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < prob.m(); ++j) {
        double d = 0;
        for (int i = 0; i < prob.n(); ++i) d += prob.source.weights[static_cast<size_t>(i)] * prob.c(i, j);
        best = std::min(best, d);
    }
    RateTargetResult r = distortion_at_rate(prob, 0.0, 1e-10, 5000);
    CHECK(r.distortion == doctest::Approx(best).epsilon(1e-12));
    CHECK(r.slope == 0.0);
}

TEST_CASE("distortion at a binary rate target") {
    RDProblem prob = binary_symmetric();
    const double target = 0.3;
    RateTargetResult r = distortion_at_rate(prob, target, 1e-10, 20000);
    CHECK(!r.saturated);
    CHECK(r.rate >= target - 1e-8);

    // independent inversion of R = log2 - H_b(D) by bisection
    double lo = 1e-12, hi = 0.5;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (std::log(2.0) - binary_entropy(mid) > target ? lo : hi) = mid;
    }
    CHECK(r.distortion == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-6));
}

TEST_CASE("rate targets beyond the alphabet saturate at the floor") {
    DiscreteMeasure src({{0.0}, {1.0}}, {0.5, 0.5});
    RDProblem prob(src, {{0.25}});
    RateTargetResult r = distortion_at_rate(prob, 0.5, 1e-10, 5000);
    CHECK(r.saturated);
    // nearest-letter floor: 0.5 * 0.0625 + 0.5 * 0.5625
    CHECK(r.distortion == doctest::Approx(0.3125).epsilon(1e-12));

    // two letters, target above log 2: still saturated, floor is zero
    RDProblem both = binary_symmetric();
    RateTargetResult r2 = distortion_at_rate(both, 2.0, 1e-10, 5000);
    CHECK(r2.saturated);
    CHECK(r2.distortion == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("single-atom source needs no rate") {
    DiscreteMeasure src({{1.0, 1.0}}, {1.0});
    RDProblem prob(src, {{0.0, 0.0}, {1.0, 1.0}});
    BlahutResult r = blahut(prob, -2.0, 1e-11, 5000);
    CHECK(r.rate == doctest::Approx(0.0).epsilon(1e-9));
    RateTargetResult t = distortion_at_rate(prob, 1.0, 1e-10, 5000);
    CHECK(t.distortion == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("finite-alphabet distortion never beats the encode risk") {
    StreamRng rng = StreamRng::derive(64);
    DataSpace space = DataSpace::ball(Vec(2, 0.0), 4.0);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Vec> atoms;
        for (int i = 0; i < 8; ++i) atoms.push_back(testutil::rand_in_ball(rng, space.center, 3.0));
        DiscreteMeasure P = DiscreteMeasure::uniform(atoms);
        LinearMap f{testutil::rand_mat(rng, 2, 2)};
        std::vector<Vec> hs;
        for (int i = 0; i < 4; ++i) hs.push_back(rand_vec(rng, 2));
        LatentSpace H = LatentSpace::finite(hs);

        RDLowerBoundReport rep = rd_lower_bound_check(P, f, space, H);
        CHECK(rep.holds);
        CHECK(rep.risk >= rep.d_hat - 1e-7);
        CHECK(rep.rate_target == doctest::Approx(std::log(4.0)).epsilon(1e-12));

        // enriching the alphabet only lowers the distortion side
        RDLowerBoundReport rich = rd_lower_bound_check(P, f, space, H, 3);
        CHECK(rich.holds);
        CHECK(rich.d_hat <= rep.d_hat + 1e-9);
        CHECK(rich.risk == doctest::Approx(rep.risk).epsilon(1e-15));
    }

    LatentSpace ball = LatentSpace::ball(2, 1.0);
    DiscreteMeasure P = DiscreteMeasure::uniform({Vec{0.0, 0.0}});
    LinearMap f{Mat(2, 2, {1.0, 0.0, 0.0, 1.0})};
    CHECK_THROWS_AS(rd_lower_bound_check(P, f, DataSpace::ball(Vec(2, 0.0), 2.0), ball),
                    ValidationError);
}

TEST_CASE("cover bound arithmetic") {
    CHECK(cover_bound_value(1.0, 0.5, 2.0, 0.1) == doctest::Approx(0.46).epsilon(1e-12));
    CHECK_THROWS_AS(cover_bound_value(1.0, 0.0, 2.0, 0.1), ValidationError);
    CHECK_THROWS_AS(cover_bound_value(1.0, 1.0, 2.0, 0.1), ValidationError);
}

TEST_CASE("lipschitz product over layers") {
    LinearMap lin{Mat(2, 2, {3.0, 0.0, 0.0, 4.0})};
    CHECK(map_lipschitz_bound(lin) == doctest::Approx(4.0).epsilon(1e-9));

    const Mat eye(2, 2, {1.0, 0.0, 0.0, 1.0});
    DenseNet net;
    net.layers.push_back({eye, Activation::tanh(), BudgetKind::Spectral, 2.0});
    net.layers.push_back({eye, Activation::relu(), BudgetKind::Spectral, 3.0});
    CHECK(map_lipschitz_bound(ReconMap{net}) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("cover lower bound stays below the risk") {
    StreamRng rng = StreamRng::derive(65);
    DataSpace space = DataSpace::ball(Vec(2, 0.0), 4.0);
    LatentSpace H = LatentSpace::ball(2, 1.0);
    std::vector<Vec> atoms;
    for (int i = 0; i < 10; ++i) atoms.push_back(testutil::rand_in_ball(rng, space.center, 2.0));
    DiscreteMeasure P = DiscreteMeasure::uniform(atoms);
    LinearMap f{testutil::rand_mat(rng, 2, 2)};

    const double risk = weighted_risk(ReconMap{f}, space, P, H, EncodeStrategy::refined(32, 40, 1e-12));
    const double lb = cover_lower_bound(P, ReconMap{f}, space, H, 0.25, 0.5);
    CHECK(lb <= risk + 1e-7);
    const double grid = cover_lower_bound_grid(P, ReconMap{f}, space, H, {0.5, 0.25}, {0.3, 0.5, 0.7});
    CHECK(grid <= risk + 1e-7);
    CHECK(grid >= lb - 1e-12);  // the grid includes (0.25, 0.5)

    CHECK_THROWS_AS(cover_lower_bound(P, ReconMap{f}, space, H, 0.25, 1.5), ValidationError);
    CHECK_THROWS_AS(cover_lower_bound(P, ReconMap{f}, space, H, -1.0, 0.5), ValidationError);
    CHECK_THROWS_AS(cover_lower_bound_grid(P, ReconMap{f}, space, H, {}, {}), ValidationError);
}
