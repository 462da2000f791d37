#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "core/maps.hpp"
#include "core/spaces.hpp"

namespace latcode {

struct EncodeStrategy {
    enum class Kind { Exhaustive, Refined };

    Kind kind = Kind::Exhaustive;
    double net_eps = 0.1;
    int gd_steps = 20;       // refined only
    double step_size = 0.1;  // refined only
    int restarts = 1;        // refined: net candidates used as descent starts

    static EncodeStrategy exhaustive(double eps) {
        EncodeStrategy s;
        s.kind = Kind::Exhaustive;
        s.net_eps = eps;
        return s;
    }
    static EncodeStrategy refined(double eps, int steps, double step, int restarts_ = 1);
    void check() const;
};

struct EncodeResult {
    Vec h;
    double error = 0;
};

// Shared candidate state for encoding many points against one map: the net
// and its projected images are computed once.
class Encoder {
  public:
    Encoder(const ReconMap& f, const DataSpace& space, const LatentSpace& latent,
            const EncodeStrategy& strategy);

    // Minimal reconstruction error search. Exact over finite latents with
    // the exhaustive strategy; refined polishing starts from the best net
    // candidates and never returns a worse error than the net optimum.
    EncodeResult encode(const Vec& z) const;
    // Same search, with one extra candidate included (training warm start).
    EncodeResult encode(const Vec& z, const Vec* warm) const;

    const std::vector<Vec>& candidates() const { return net_; }
    const std::vector<Vec>& images() const { return images_; }

  private:
    const ReconMap& f_;
    const DataSpace& space_;
    const LatentSpace& latent_;
    EncodeStrategy strat_;
    bool refine_ = false;
    std::vector<Vec> net_;
    std::vector<Vec> images_;
};

EncodeResult encode(const Vec& z, const ReconMap& f, const DataSpace& space,
                    const LatentSpace& latent, const EncodeStrategy& strategy);

// Mean encode error over the dataset, reduced in sample index order with a
// fixed chunk width so results do not depend on the thread count.
double empirical_risk(const ReconMap& f, const Dataset& data, const LatentSpace& latent,
                      const EncodeStrategy& strategy, int threads = 1);

// Expected encode error under a weighted measure on the data space.
double weighted_risk(const ReconMap& f, const DataSpace& space, const DiscreteMeasure& P,
                     const LatentSpace& latent, const EncodeStrategy& strategy, int threads = 1);

struct TrainConfig {
    int outer_iterations = 30;
    EncodeStrategy latent_strategy;
    double param_step_size = 0.1;
    int param_steps_per_outer = 10;
    uint64_t seed = 1;

    void check() const;
};

struct TrainResult {
    ReconMap map;
    std::vector<double> trace;  // initial risk, then one entry per outer iteration
};

// Alternating minimization: re-encode latents, then budget-rescaled gradient
// steps on parameters with halving on increase. The trace is non-increasing
// by construction; non-finite parameters raise NumericError with the
// iteration index.
TrainResult erm_train(ReconMap initial, const Dataset& data, const LatentSpace& latent,
                      const TrainConfig& config, int threads = 1);

struct PcaResult {
    LinearMap map;  // orthonormal columns
    double risk;    // sum of the d-k smallest eigenvalues
    Vec eigenvalues;
};

// Top-k eigenvectors of the uncentered second moment (1/n) sum z z^T.
PcaResult fit_pca(const Dataset& data, int k);

struct VqResult {
    LinearMap map;  // centroids as columns, latent space {e_1..e_k}
    double risk;
    std::vector<double> trace;  // risk per Lloyd iteration
};

// Lloyd iterations from k-means++ style seeding; nearest-centroid ties break
// to the lowest index; empty clusters keep their centroid.
VqResult fit_vq_lloyd(const Dataset& data, int k, uint64_t seed, int restarts = 1);
// Lloyd from explicit starting centroids (restart studies, oracles).
VqResult lloyd_from(const Dataset& data, std::vector<Vec> centroids);

struct ExcessRiskReport {
    double excess;         // R_test(f_hat) - min over candidates of R_test
    double twice_sup_gap;  // 2 max |R_train - R_test| over candidates + f_hat
    bool fhat_minimizes_train;
    bool inequality_holds;  // excess <= twice_sup_gap + 1e-9 (when applicable)
    double train_risk_fhat;
    double test_risk_fhat;
};

ExcessRiskReport excess_risk_check(const ReconMap& f_hat,
                                   const std::vector<const ReconMap*>& candidates,
                                   const Dataset& train, const Dataset& test,
                                   const LatentSpace& latent, const EncodeStrategy& strategy,
                                   int threads = 1);

// Fixed-width chunked parallel loop; fn(begin, end, chunk_index) runs over
// disjoint ranges. Chunk boundaries are independent of the thread count.
void for_chunks(int n, int threads, const std::function<void(int, int, int)>& fn);
int chunk_count(int n);

}  // namespace latcode
