#pragma once

#include <vector>

#include "core/maps.hpp"
#include "core/spaces.hpp"

namespace latcode {

// Finite rate-distortion instance: discrete source, finite reproduction
// alphabet, squared-euclidean cost.
struct RDProblem {
    DiscreteMeasure source;
    std::vector<Vec> reproduction;
    std::vector<double> cost;  // row-major, source x reproduction

    RDProblem(DiscreteMeasure src, std::vector<Vec> repro);
    int n() const { return source.size(); }
    int m() const { return static_cast<int>(reproduction.size()); }
    double c(int i, int j) const { return cost[static_cast<size_t>(i) * m() + j]; }
};

struct BlahutResult {
    double rate = 0;        // mutual information of the returned kernel, nats
    double distortion = 0;  // expected cost under the kernel
    Mat kernel;             // rows sum to one
    double gap = 0;         // final one-step duality gap bound
    int iterations = 0;
    // Lagrangian per iteration; non-increasing between support edits (a
    // dying letter being zeroed, or a zeroed one restored, can lift it)
    std::vector<double> objective_trace;
};

// Blahut-Arimoto at Lagrange slope s < 0: alternate the output marginal and
// the exponential-tilt kernel until log(max_j g_j) <= tol, where g_j is the
// marginal update factor (that log bounds the one-step duality gap by
// Jensen, taken over the full alphabet). Letters with persistently shrinking
// mass are zeroed so near-boundary solutions converge within the iteration
// budget; the terminal gap still covers the full alphabet. Log-domain row
// sums keep extreme slopes stable.
BlahutResult blahut(const RDProblem& problem, double slope, double tol, int max_iter);

struct RDCurve {
    struct Point {
        double rate, distortion, slope;
    };
    std::vector<Point> points;  // sorted by rate

    // D non-increasing in R (tol_mono) and convex within tol_convex.
    void check_invariants(double tol_mono = 1e-9, double tol_convex = 1e-8) const;
};

// Sweep of blahut over negative, ascending slopes.
RDCurve rd_curve(const RDProblem& problem, const std::vector<double>& slopes, double tol,
                 int max_iter);

struct RateTargetResult {
    double distortion = 0;
    double rate = 0;   // achieved rate, >= target unless the curve saturates
    double slope = 0;  // 0 when the closed form (rate target ~ 0) was used
    int blahut_calls = 0;
    int max_iterations_used = 0;  // worst single blahut call
    bool saturated = false;       // curve tops out below the target rate
};

// Distortion at a target rate, approached from the high-rate side so the
// returned value never exceeds the true D(target) by more than the
// convergence slack. Rate targets near zero use the exact one-letter
// optimum; saturation falls back to the nearest-letter floor.
RateTargetResult distortion_at_rate(const RDProblem& problem, double target_rate, double tol,
                                    int max_iter);

struct RDLowerBoundReport {
    double risk = 0;         // weighted encode risk of f over the finite latent set
    double d_hat = 0;        // distortion at rate log k
    double rate_target = 0;  // log k
    double achieved_rate = 0;
    bool holds = false;  // risk >= d_hat - tol
};

// Prop-style direction check: the alphabet contains every image point, so
// the deterministic nearest-image kernel is feasible at rate <= log k and
// the finite-alphabet distortion at rate log k cannot exceed the risk.
// enrichment_per_axis > 0 adds a uniform grid over the data space's
// bounding box to the alphabet (only lowers d_hat, keeping the direction).
RDLowerBoundReport rd_lower_bound_check(const DiscreteMeasure& P_hat, const ReconMap& f,
                                        const DataSpace& space, const LatentSpace& H_finite,
                                        int enrichment_per_axis = 0, double tol = 1e-7,
                                        double ba_tol = 1e-10, int max_iter = 5000);

// lambda * D - lambda/(1-lambda) * L^2 eps^2: the printed formula.
double cover_bound_value(double distortion, double lambda, double lipschitz, double eps);

// Product Lipschitz bound prod_j L_j M_j (budgets as layer norms; spectral
// norm for an unbudgeted linear map; pooling counts as 1).
double map_lipschitz_bound(const ReconMap& f);

// Cover-based risk lower bound: quantizing latents to an eps-net of H costs
// at most (1/lambda - 1) slack plus the L^2 eps^2 penalty, so
// lambda * D(log |C_eps|) - lambda/(1-lambda) L^2 eps^2 lower-bounds the
// risk of f. The alphabet is exactly the image of the net.
double cover_lower_bound(const DiscreteMeasure& P_hat, const ReconMap& f, const DataSpace& space,
                         const LatentSpace& H, double eps, double lambda, double ba_tol = 1e-10,
                         int max_iter = 20000);

// Max of cover_lower_bound over a small (eps, lambda) grid.
double cover_lower_bound_grid(const DiscreteMeasure& P_hat, const ReconMap& f,
                              const DataSpace& space, const LatentSpace& H,
                              const std::vector<double>& epss, const std::vector<double>& lambdas,
                              double ba_tol = 1e-10, int max_iter = 20000);

}  // namespace latcode
