#include "core/coding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace latcode {

namespace {
constexpr int kChunk = 64;
}

int chunk_count(int n) { return (n + kChunk - 1) / kChunk; }

void for_chunks(int n, int threads, const std::function<void(int, int, int)>& fn) {
    const int chunks = chunk_count(n);
    if (threads <= 1 || chunks <= 1) {
        for (int c = 0; c < chunks; ++c)
            fn(c * kChunk, std::min(n, (c + 1) * kChunk), c);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int c = next.fetch_add(1);
            if (c >= chunks) return;
            fn(c * kChunk, std::min(n, (c + 1) * kChunk), c);
        }
    };
    std::vector<std::thread> pool;
    const int nt = std::min(threads, chunks);
    pool.reserve(static_cast<size_t>(nt));
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

EncodeStrategy EncodeStrategy::refined(double eps, int steps, double step, int restarts_) {
    EncodeStrategy s;
    s.kind = Kind::Refined;
    s.net_eps = eps;
    s.gd_steps = steps;
    s.step_size = step;
    s.restarts = restarts_;
    s.check();
    return s;
}

void EncodeStrategy::check() const {
    if (!(net_eps > 0)) throw ValidationError("encode strategy: net_eps must be positive");
    if (gd_steps < 0) throw ValidationError("encode strategy: gd_steps must be >= 0");
    if (restarts < 1) throw ValidationError("encode strategy: restarts must be >= 1");
    if (kind == Kind::Refined && !(step_size > 0))
        throw ValidationError("encode strategy: step_size must be positive");
}

Encoder::Encoder(const ReconMap& f, const DataSpace& space, const LatentSpace& latent,
                 const EncodeStrategy& strategy)
    : f_(f), space_(space), latent_(latent), strat_(strategy) {
    strat_.check();
    if (latent_dim(f) != latent.dim)
        throw ValidationError("encode: map latent dimension does not match latent space");
    if (output_dim(f) != space.dim)
        throw ValidationError("encode: map output dimension does not match data space");
    net_ = latent.eps_net(strat_.net_eps);
    images_.reserve(net_.size());
    for (const auto& h : net_) images_.push_back(eval(f_, space_, h));
    // gradient polish is meaningless over a finite latent set
    refine_ = strat_.kind == EncodeStrategy::Kind::Refined &&
              latent.kind != LatentSpace::Kind::Finite && strat_.gd_steps > 0;
}

EncodeResult Encoder::encode(const Vec& z) const { return encode(z, nullptr); }

EncodeResult Encoder::encode(const Vec& z, const Vec* warm) const {
    if (!space_.contains(z)) throw ValidationError("encode: point lies outside the data space");

    size_t best = 0;
    double bd = sqdist(z, images_[0]);
    for (size_t i = 1; i < images_.size(); ++i) {
        const double d = sqdist(z, images_[i]);
        if (d < bd) { bd = d; best = i; }
    }
    EncodeResult res{net_[best], bd};

    if (warm) {
        const double we = sqdist(z, eval(f_, space_, *warm));
        if (we < res.error) res = {*warm, we};
    }
    if (!refine_) return res;

    // descent starts: the `restarts` best net candidates by error
    const int nstarts = std::min<int>(strat_.restarts, static_cast<int>(net_.size()));
    std::vector<size_t> order(net_.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::partial_sort(order.begin(), order.begin() + nstarts, order.end(),
                      [&](size_t a, size_t b) {
                          const double da = sqdist(z, images_[a]), db = sqdist(z, images_[b]);
                          return da < db || (da == db && a < b);
                      });

    for (int s = 0; s < nstarts; ++s) {
        Vec h = net_[order[s]];
        for (int t = 0; t < strat_.gd_steps; ++t) {
            LossGradients g = loss_gradients(f_, space_, z, h, false, true);
            axpy(h, -strat_.step_size, g.wrt_latent);
            h = latent_.project(h);
            const double e = sqdist(z, eval(f_, space_, h));
            if (e < res.error) res = {h, e};
        }
    }
    if (warm) {
        Vec h = *warm;
        for (int t = 0; t < strat_.gd_steps; ++t) {
            LossGradients g = loss_gradients(f_, space_, z, h, false, true);
            axpy(h, -strat_.step_size, g.wrt_latent);
            h = latent_.project(h);
            const double e = sqdist(z, eval(f_, space_, h));
            if (e < res.error) res = {h, e};
        }
    }
    return res;
}

EncodeResult encode(const Vec& z, const ReconMap& f, const DataSpace& space,
                    const LatentSpace& latent, const EncodeStrategy& strategy) {
    return Encoder(f, space, latent, strategy).encode(z);
}

namespace {

// Chunked mean of per-point encode errors; the reduction order is fixed by
// the chunk layout, never by thread scheduling.
double mean_error(const Encoder& enc, const std::vector<Vec>& pts, const Vec* weights,
                  int threads) {
    const int n = static_cast<int>(pts.size());
    std::vector<double> partial(static_cast<size_t>(chunk_count(n)), 0.0);
    for_chunks(n, threads, [&](int b, int e, int c) {
        double s = 0.0;
        for (int i = b; i < e; ++i) {
            const double err = enc.encode(pts[static_cast<size_t>(i)]).error;
            s += weights ? (*weights)[static_cast<size_t>(i)] * err : err;
        }
        partial[static_cast<size_t>(c)] = s;
    });
    double total = 0.0;
    for (double s : partial) total += s;
    return weights ? total : total / n;
}

}  // namespace

double empirical_risk(const ReconMap& f, const Dataset& data, const LatentSpace& latent,
                      const EncodeStrategy& strategy, int threads) {
    if (data.size() == 0) throw ValidationError("empirical_risk: empty dataset");
    Encoder enc(f, data.space, latent, strategy);
    return mean_error(enc, data.samples, nullptr, threads);
}

double weighted_risk(const ReconMap& f, const DataSpace& space, const DiscreteMeasure& P,
                     const LatentSpace& latent, const EncodeStrategy& strategy, int threads) {
    Encoder enc(f, space, latent, strategy);
    return mean_error(enc, P.atoms, &P.weights, threads);
}

void TrainConfig::check() const {
    if (outer_iterations <= 0) throw ValidationError("train: outer_iterations must be positive");
    if (param_steps_per_outer < 0)
        throw ValidationError("train: param_steps_per_outer must be >= 0");
    if (!(param_step_size > 0)) throw ValidationError("train: step size must be positive");
    latent_strategy.check();
}

namespace {

bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Objective and mean parameter gradient at fixed latents.
double risk_at(const ReconMap& f, const Dataset& data, const std::vector<Vec>& hs, int threads) {
    const int n = data.size();
    std::vector<double> partial(static_cast<size_t>(chunk_count(n)), 0.0);
    for_chunks(n, threads, [&](int b, int e, int c) {
        double s = 0.0;
        for (int i = b; i < e; ++i) {
            Vec y = eval(f, data.space, hs[static_cast<size_t>(i)]);
            s += sqdist(data.samples[static_cast<size_t>(i)], y);
        }
        partial[static_cast<size_t>(c)] = s;
    });
    double total = 0.0;
    for (double s : partial) total += s;
    return total / n;
}

Vec mean_param_grad(const ReconMap& f, const Dataset& data, const std::vector<Vec>& hs,
                    int threads) {
    const int n = data.size();
    const size_t np = num_params(f);
    std::vector<Vec> partial(static_cast<size_t>(chunk_count(n)), Vec(np, 0.0));
    for_chunks(n, threads, [&](int b, int e, int c) {
        Vec& acc = partial[static_cast<size_t>(c)];
        for (int i = b; i < e; ++i) {
            LossGradients g = loss_gradients(f, data.space, data.samples[static_cast<size_t>(i)],
                                             hs[static_cast<size_t>(i)], true, false);
            axpy(acc, 1.0, g.wrt_params);
        }
    });
    Vec total(np, 0.0);
    for (const auto& p : partial) axpy(total, 1.0, p);
    for (auto& v : total) v /= n;
    return total;
}

}  // namespace

TrainResult erm_train(ReconMap initial, const Dataset& data, const LatentSpace& latent,
                      const TrainConfig& config, int threads) {
    config.check();
    if (data.size() == 0) throw ValidationError("erm_train: empty dataset");
    validate(initial);

    ReconMap f = std::move(initial);
    const int n = data.size();
    std::vector<Vec> hs(static_cast<size_t>(n));
    std::vector<double> errs(static_cast<size_t>(n), 0.0);

    // (a) latent assignment, warm-started so it can only improve
    auto reencode = [&](bool warm) {
        Encoder enc(f, data.space, latent, config.latent_strategy);
        for_chunks(n, threads, [&](int b, int e, int) {
            for (int i = b; i < e; ++i) {
                const auto ui = static_cast<size_t>(i);
                EncodeResult r = enc.encode(data.samples[ui], warm ? &hs[ui] : nullptr);
                hs[ui] = std::move(r.h);
                errs[ui] = r.error;
            }
        });
        double s = 0.0;
        for (double e : errs) s += e;
        return s / n;
    };

    TrainResult out;
    double obj = reencode(false);
    out.trace.push_back(obj);

    for (int outer = 0; outer < config.outer_iterations; ++outer) {
        // (b) parameter descent at fixed latents; halve the step when a
        // proposal (step + budget rescale) fails to improve
        double step = config.param_step_size;
        for (int t = 0; t < config.param_steps_per_outer && num_params(f) > 0; ++t) {
            Vec g = mean_param_grad(f, data, hs, threads);
            Vec theta = get_params(f);
            bool accepted = false;
            while (step > 1e-300) {
                Vec proposal = theta;
                axpy(proposal, -step, g);
                ReconMap cand = f;
                set_params(cand, proposal);
                rescale_to_budgets(cand);  // (c)
                const double obj2 = risk_at(cand, data, hs, threads);
                if (obj2 <= obj) {
                    f = std::move(cand);
                    obj = obj2;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;
        }
        if (!all_finite(get_params(f)))
            throw NumericError("erm_train: non-finite parameters at outer iteration " +
                               std::to_string(outer + 1));

        obj = std::min(obj, reencode(true));
        out.trace.push_back(obj);
    }

    out.map = std::move(f);
    return out;
}

PcaResult fit_pca(const Dataset& data, int k) {
    const int d = data.dim();
    if (k <= 0 || k > d) throw ValidationError("fit_pca: need 1 <= k <= d");
    if (data.size() == 0) throw ValidationError("fit_pca: empty dataset");

    Mat S(d, d);
    for (const auto& z : data.samples)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) S(i, j) += z[i] * z[j];
    for (auto& v : S.a) v /= data.size();

    Vec evals;
    Mat V;
    eigen_sym(S, evals, V);

    PcaResult out;
    out.map.A = Mat(d, k);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < k; ++j) out.map.A(i, j) = V(i, j);
    out.eigenvalues = evals;
    out.risk = 0.0;
    for (int j = k; j < d; ++j) out.risk += std::max(0.0, evals[j]);
    return out;
}

namespace {

LinearMap centroids_to_map(const std::vector<Vec>& centroids) {
    const int d = static_cast<int>(centroids[0].size());
    const int k = static_cast<int>(centroids.size());
    LinearMap m;
    m.A = Mat(d, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < d; ++i) m.A(i, j) = centroids[static_cast<size_t>(j)][i];
    return m;
}

}  // namespace

VqResult lloyd_from(const Dataset& data, std::vector<Vec> centroids) {
    if (centroids.empty()) throw ValidationError("lloyd: need at least one centroid");
    const int n = data.size();
    const int k = static_cast<int>(centroids.size());
    std::vector<int> assign(static_cast<size_t>(n), 0);
    VqResult out;

    for (int iter = 0; iter < 1000; ++iter) {
        bool changed = iter == 0;
        double risk = 0.0;
        for (int i = 0; i < n; ++i) {
            const Vec& z = data.samples[static_cast<size_t>(i)];
            int best = 0;
            double bd = sqdist(z, centroids[0]);
            for (int j = 1; j < k; ++j) {
                const double dd = sqdist(z, centroids[static_cast<size_t>(j)]);
                if (dd < bd) { bd = dd; best = j; }
            }
            if (assign[static_cast<size_t>(i)] != best) changed = true;
            assign[static_cast<size_t>(i)] = best;
            risk += bd;
        }
        risk /= n;
        out.trace.push_back(risk);
        if (!changed && iter > 0) break;

        std::vector<Vec> sums(static_cast<size_t>(k), Vec(static_cast<size_t>(data.dim()), 0.0));
        std::vector<int> counts(static_cast<size_t>(k), 0);
        for (int i = 0; i < n; ++i) {
            axpy(sums[static_cast<size_t>(assign[static_cast<size_t>(i)])], 1.0,
                 data.samples[static_cast<size_t>(i)]);
            counts[static_cast<size_t>(assign[static_cast<size_t>(i)])]++;
        }
        for (int j = 0; j < k; ++j)
            if (counts[static_cast<size_t>(j)] > 0)
                centroids[static_cast<size_t>(j)] =
                    scale(sums[static_cast<size_t>(j)], 1.0 / counts[static_cast<size_t>(j)]);
    }

    out.map = centroids_to_map(centroids);
    out.risk = out.trace.back();
    return out;
}

VqResult fit_vq_lloyd(const Dataset& data, int k, uint64_t seed, int restarts) {
    if (k < 1) throw ValidationError("fit_vq_lloyd: k must be >= 1");
    if (data.size() == 0) throw ValidationError("fit_vq_lloyd: empty dataset");
    if (restarts < 1) throw ValidationError("fit_vq_lloyd: restarts must be >= 1");
    const int n = data.size();

    VqResult best;
    bool have = false;
    for (int r = 0; r < restarts; ++r) {
        StreamRng rng = StreamRng::derive(seed, 0x766f, static_cast<uint64_t>(r));
        // k-means++ seeding: first uniform, then squared-distance weighted
        std::vector<Vec> seeds;
        seeds.push_back(data.samples[rng.uniform_int(static_cast<uint64_t>(n))]);
        Vec d2(static_cast<size_t>(n));
        while (static_cast<int>(seeds.size()) < k) {
            double total = 0.0;
            for (int i = 0; i < n; ++i) {
                double m = sqdist(data.samples[static_cast<size_t>(i)], seeds[0]);
                for (size_t j = 1; j < seeds.size(); ++j)
                    m = std::min(m, sqdist(data.samples[static_cast<size_t>(i)], seeds[j]));
                d2[static_cast<size_t>(i)] = m;
                total += m;
            }
            if (total <= 0) {
                seeds.push_back(data.samples[static_cast<size_t>(static_cast<int>(seeds.size()) % n)]);
                continue;
            }
            double u = rng.uniform01() * total;
            int pick = n - 1;
            for (int i = 0; i < n; ++i) {
                u -= d2[static_cast<size_t>(i)];
                if (u <= 0) { pick = i; break; }
            }
            seeds.push_back(data.samples[static_cast<size_t>(pick)]);
        }
        VqResult cur = lloyd_from(data, std::move(seeds));
        if (!have || cur.risk < best.risk) {
            best = std::move(cur);
            have = true;
        }
    }
    return best;
}

ExcessRiskReport excess_risk_check(const ReconMap& f_hat,
                                   const std::vector<const ReconMap*>& candidates,
                                   const Dataset& train, const Dataset& test,
                                   const LatentSpace& latent, const EncodeStrategy& strategy,
                                   int threads) {
    std::vector<const ReconMap*> all{&f_hat};
    for (const auto* c : candidates)
        if (c) all.push_back(c);

    std::vector<double> r_train, r_test;
    for (const auto* f : all) {
        r_train.push_back(empirical_risk(*f, train, latent, strategy, threads));
        r_test.push_back(empirical_risk(*f, test, latent, strategy, threads));
    }

    ExcessRiskReport rep{};
    rep.train_risk_fhat = r_train[0];
    rep.test_risk_fhat = r_test[0];
    const double best_test = *std::min_element(r_test.begin(), r_test.end());
    rep.excess = r_test[0] - best_test;
    double sup = 0.0;
    for (size_t i = 0; i < all.size(); ++i)
        sup = std::max(sup, std::abs(r_train[i] - r_test[i]));
    rep.twice_sup_gap = 2.0 * sup;
    const double best_train = *std::min_element(r_train.begin(), r_train.end());
    rep.fhat_minimizes_train = r_train[0] <= best_train + 1e-12;
    rep.inequality_holds = !rep.fhat_minimizes_train || rep.excess <= rep.twice_sup_gap + 1e-9;
    return rep;
}

}  // namespace latcode
