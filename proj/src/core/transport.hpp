#pragma once

#include <vector>

#include "core/maps.hpp"
#include "core/spaces.hpp"

namespace latcode {

// Transport plan between two discrete measures. Row sums match the source
// weights and column sums the target weights to within 1e-10.
struct Coupling {
    int rows = 0, cols = 0;
    std::vector<double> flow;  // row-major, dense

    double& at(int i, int j) { return flow[static_cast<size_t>(i) * cols + j]; }
    double at(int i, int j) const { return flow[static_cast<size_t>(i) * cols + j]; }
    int nnz() const;
    // max marginal residual against the given weights
    double marginal_residual(const Vec& source_w, const Vec& target_w) const;
};

struct TransportResult {
    double distance = 0;  // cost^(1/p)
    double cost = 0;      // optimal LP objective sum flow * |z-z'|^p
    Coupling coupling;
};

// Exact solution of the transportation LP with cost |z-z'|^p via the
// tree-based transportation simplex (Bland's rule guards against degenerate
// cycling). p is 1 or 2.
TransportResult wasserstein(const DiscreteMeasure& P, const DiscreteMeasure& Q, int p);

// f#pi: images of the atoms (clipped onto `space` when given), weights kept,
// exactly coincident images merged with summed weights.
DiscreteMeasure pushforward(const ReconMap& f, const DiscreteMeasure& pi,
                            const DataSpace* space = nullptr);

struct BestPushforward {
    DiscreteMeasure pi_star;  // measure on the latent net points
    double w2sq = 0;          // = W2^2(P_hat, f#pi_star), the separable optimum
};

// The W2^2-closest pushforward of a measure supported on the given latent
// net: every atom goes to its nearest image (ties to the lowest index), so
// w2sq equals the exhaustive-net empirical risk arithmetic exactly.
BestPushforward best_pushforward(const DiscreteMeasure& P_hat, const ReconMap& f,
                                 const DataSpace& space, const std::vector<Vec>& H_net);

struct PollardResult {
    double e_k = 0;       // optimal k-group weighted centroid cost
    double w2sq_min = 0;  // min over enumerated k-point measures of W2^2 (via the LP)
};

// Exhaustive verification that the optimal k-point quantization cost equals
// the minimal squared W2 distance to a k-point measure. Enumerates set
// partitions of the atoms into at most k groups; capped at n <= 12, k <= 4.
PollardResult pollard_check(const DiscreteMeasure& P_hat, int k);

}  // namespace latcode
