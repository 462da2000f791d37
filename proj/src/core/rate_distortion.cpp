#include "core/rate_distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/coding.hpp"
#include "core/errors.hpp"

namespace latcode {

RDProblem::RDProblem(DiscreteMeasure src, std::vector<Vec> repro)
    : source(std::move(src)), reproduction(std::move(repro)) {
    if (reproduction.empty()) throw ValidationError("rd: empty reproduction alphabet");
    for (const auto& r : reproduction)
        if (static_cast<int>(r.size()) != source.dim())
            throw ValidationError("rd: reproduction dimension mismatch");
    cost.resize(static_cast<size_t>(n()) * m());
    for (int i = 0; i < n(); ++i)
        for (int j = 0; j < m(); ++j)
            cost[static_cast<size_t>(i) * m() + j] =
                sqdist(source.atoms[static_cast<size_t>(i)], reproduction[static_cast<size_t>(j)]);
}

BlahutResult blahut(const RDProblem& problem, double slope, double tol, int max_iter) {
    if (!(slope < 0)) throw ValidationError("blahut: slope must be negative");
    if (!(tol > 0)) throw ValidationError("blahut: tol must be positive");
    if (max_iter < 1) throw ValidationError("blahut: max_iter must be >= 1");

    const int n = problem.n(), m = problem.m();
    const Vec& p = problem.source.weights;
    Vec q(static_cast<size_t>(m), 1.0 / m);
    Vec logl(static_cast<size_t>(n), 0.0);
    Vec g(static_cast<size_t>(m), 0.0);

    // Letters destined for zero mass drain at a ratio that can sit just
    // below one, holding the all-letter gap above tol for ~1/(1-ratio)
    // iterations. A letter whose update factor stays below one for a full
    // streak gets its mass zeroed (the multiplicative update then keeps it
    // at zero), after a lookahead discards candidates that would regrow
    // against the reduced support. If a zeroed letter later dominates the
    // all-letter gap, it is restored with a seed mass; a letter restored
    // twice is never pruned again, so the edit churn is bounded. The
    // returned gap is always the bound over the full alphabet, so pruning
    // never weakens the certificate.
    const double dying_margin = 1e-12;
    const int streak_limit = 60;
    const int blocked_limit = 10;
    const int extrap_period = 40;
    std::vector<int> streak(static_cast<size_t>(m), 0);
    std::vector<char> restores(static_cast<size_t>(m), 0);
    int blocked_run = 0;

    // per-letter log factors recorded at the last extrapolation checkpoint;
    // the ratio across one full checkpoint lag estimates the dominant
    // contraction mode far more reliably than adjacent iterations do
    Vec u_mem(static_cast<size_t>(m), 0.0);
    int mem_it = -1;  // iteration the memory was taken at; -1 = invalid
    // rejected guesses back the attempt cadence off so a stretch of
    // hopeless extrapolations cannot eat the iteration budget; the cap
    // stays low because a retry is cheap next to the cost of missing the
    // moment a candidate first turns viable
    int backoff = extrap_period;
    int next_attempt = 0;
    // a letter whose removal was tried and rejected is barred from the
    // kill slot for a while, so its jumps-only siblings still get vetted
    std::vector<int> kill_ban(static_cast<size_t>(m), 0);
    std::vector<int> kill_backoff(static_cast<size_t>(m), 4 * extrap_period);

    // update factors for the marginal q over the given letter set
    const auto factors = [&](const Vec& marginal, Vec& loglam, Vec& out) {
        for (int i = 0; i < n; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < m; ++j) {
                if (marginal[static_cast<size_t>(j)] <= 0) continue;
                mx = std::max(mx,
                              std::log(marginal[static_cast<size_t>(j)]) + slope * problem.c(i, j));
            }
            double s = 0.0;
            for (int j = 0; j < m; ++j) {
                if (marginal[static_cast<size_t>(j)] <= 0) continue;
                s += std::exp(std::log(marginal[static_cast<size_t>(j)]) + slope * problem.c(i, j) -
                              mx);
            }
            loglam[static_cast<size_t>(i)] = mx + std::log(s);
        }
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += p[static_cast<size_t>(i)] *
                     std::exp(slope * problem.c(i, j) - loglam[static_cast<size_t>(i)]);
            out[static_cast<size_t>(j)] = s;
        }
    };

    BlahutResult res;
    double gap = std::numeric_limits<double>::infinity();

    for (int it = 1; it <= max_iter; ++it) {
        factors(q, logl, g);

        double objective = 0.0;
        for (int i = 0; i < n; ++i) objective -= p[static_cast<size_t>(i)] * logl[static_cast<size_t>(i)];
        res.objective_trace.push_back(objective);

        // the gap bound runs over the full alphabet (dead letters included,
        // so it holds against arbitrary competing marginals)
        double gmax = 0.0, gmax_active = 0.0;
        for (int j = 0; j < m; ++j) {
            gmax = std::max(gmax, g[static_cast<size_t>(j)]);
            if (q[static_cast<size_t>(j)] > 0)
                gmax_active = std::max(gmax_active, g[static_cast<size_t>(j)]);
        }
        gap = std::log(std::max(gmax, 1.0));
        res.iterations = it;
        if (gap <= tol) break;
        if (it >= max_iter)
            throw NumericError("blahut: gap " + std::to_string(gap) + " above tol after " +
                               std::to_string(max_iter) + " iterations");

        blocked_run = gmax_active < gmax ? blocked_run + 1 : 0;
        if (std::log(std::max(gmax_active, 1.0)) <= tol || blocked_run >= blocked_limit) {
            // zeroed letters dominate the gap: restore every blocker at once
            int count = 0;
            for (int j = 0; j < m; ++j)
                if (q[static_cast<size_t>(j)] <= 0 && g[static_cast<size_t>(j)] > 1.0) ++count;
            if (count > 0) {
                const double seed = std::min(0.25 / m, 0.25 / count);
                for (auto& v : q) v *= 1.0 - seed * count;
                for (int j = 0; j < m; ++j) {
                    if (q[static_cast<size_t>(j)] > 0 || !(g[static_cast<size_t>(j)] > 1.0))
                        continue;
                    q[static_cast<size_t>(j)] = seed;
                    if (restores[static_cast<size_t>(j)] < 2) ++restores[static_cast<size_t>(j)];
                    streak[static_cast<size_t>(j)] = 0;
                }
                blocked_run = 0;
                mem_it = -1;
                continue;
            }
        }

        if (it % extrap_period == 0) {
            // geometric extrapolation of each letter's log mass along the
            // contraction mode estimated per letter across the checkpoint
            // lag, deliberately undershot so a good landing stays on the
            // near side of the limit; a letter draining steadily with no
            // finite landing point is heading to zero mass, so the
            // candidate tries life without the fastest-draining such
            // letter — only that one, because slower apparent drains are
            // often transients coupled to it that reverse once it dies.
            // Ratio mismatch across letters excites quickly-decaying
            // directions, so the landing point is polished with a short
            // run of plain updates, and the move is kept only if it
            // strictly lowers the Lagrangian — the quantity the plain
            // update itself descends — so accepted jumps can never cycle.
            // Polish passes are charged to the iteration budget; a
            // rejected guess leaves the iterate alone
            const int polish = 15;
            if (mem_it >= 0 && it > mem_it && it >= next_attempt &&
                it + polish + 1 <= max_iter) {
                const double lag = static_cast<double>(it - mem_it);
                Vec cand = q;
                bool any = false, sane = true;
                int kill = -1;
                double kill_u = 0.0;
                for (int j = 0; j < m && sane; ++j) {
                    if (q[static_cast<size_t>(j)] <= 0) continue;
                    const double u1 = std::log(g[static_cast<size_t>(j)]);
                    const double u0 = u_mem[static_cast<size_t>(j)];
                    // floor sits well above the fp noise on the log factors,
                    // where a converged letter's increments live
                    if (std::abs(u1) < 1e-12 || std::abs(u0) < 1e-12) continue;
                    const double rho = u1 / u0;
                    if (!(rho > 0.0)) continue;
                    if (rho < 1.0) {
                        const double lam = std::pow(rho, 1.0 / lag);
                        const double jump = 0.8 * u1 * lam / (1.0 - lam);
                        if (std::abs(jump) <= 40.0) {
                            cand[static_cast<size_t>(j)] =
                                q[static_cast<size_t>(j)] * std::exp(jump);
                            if (!std::isfinite(cand[static_cast<size_t>(j)])) sane = false;
                            any = true;
                            continue;
                        }
                    }
                    // a letter still carrying a sizable share of the
                    // marginal is never written off on tail evidence alone
                    if (u1 < 0 && u1 < kill_u && q[static_cast<size_t>(j)] <= 0.15 &&
                        it >= kill_ban[static_cast<size_t>(j)]) {
                        kill = j;
                        kill_u = u1;
                    }
                }
                if (kill >= 0) {
                    cand[static_cast<size_t>(kill)] = 0.0;
                    any = true;
                }
                if (any && sane) {
                    double cs = 0.0;
                    for (double v : cand) cs += v;
                    for (auto& v : cand) v /= cs;
                    Vec logl_c(static_cast<size_t>(n), 0.0), g_c(static_cast<size_t>(m), 0.0);
                    for (int b = 0; b < polish; ++b) {
                        factors(cand, logl_c, g_c);
                        double cs2 = 0.0;
                        for (int j = 0; j < m; ++j) {
                            cand[static_cast<size_t>(j)] *= g_c[static_cast<size_t>(j)];
                            cs2 += cand[static_cast<size_t>(j)];
                        }
                        for (auto& v : cand) v /= cs2;
                    }
                    factors(cand, logl_c, g_c);
                    double cand_obj = 0.0;
                    for (int i = 0; i < n; ++i)
                        cand_obj -= p[static_cast<size_t>(i)] * logl_c[static_cast<size_t>(i)];
                    it += polish + 1;
                    if (cand_obj < objective) {
                        q = cand;
                        mem_it = -1;
                        streak.assign(static_cast<size_t>(m), 0);
                        backoff = extrap_period;
                        next_attempt = 0;
                        continue;
                    }
                    backoff = std::min(backoff * 2, 4 * extrap_period);
                    next_attempt = it + backoff;
                    if (kill >= 0) {
                        kill_ban[static_cast<size_t>(kill)] =
                            it + kill_backoff[static_cast<size_t>(kill)];
                        kill_backoff[static_cast<size_t>(kill)] = std::min(
                            kill_backoff[static_cast<size_t>(kill)] * 4, 64 * extrap_period);
                    }
                }
            }
            for (int j = 0; j < m; ++j)
                u_mem[static_cast<size_t>(j)] =
                    q[static_cast<size_t>(j)] > 0 ? std::log(g[static_cast<size_t>(j)]) : 0.0;
            mem_it = it;
        }

        double qs = 0.0;
        for (int j = 0; j < m; ++j) {
            q[static_cast<size_t>(j)] *= g[static_cast<size_t>(j)];
            qs += q[static_cast<size_t>(j)];
        }
        for (auto& v : q) v /= qs;

        int active = 0;
        std::vector<int> doomed;
        for (int j = 0; j < m; ++j) {
            if (q[static_cast<size_t>(j)] <= 0) continue;
            ++active;
            if (restores[static_cast<size_t>(j)] >= 2) continue;
            if (g[static_cast<size_t>(j)] < 1.0 - dying_margin) {
                if (++streak[static_cast<size_t>(j)] >= streak_limit) doomed.push_back(j);
            } else {
                streak[static_cast<size_t>(j)] = 0;
            }
        }
        if (!doomed.empty() && static_cast<int>(doomed.size()) < active) {
            // lookahead: drop candidates that would regrow once removed
            Vec trial = q;
            for (int j : doomed) trial[static_cast<size_t>(j)] = 0.0;
            Vec logl_red(static_cast<size_t>(n), 0.0), g_red(static_cast<size_t>(m), 0.0);
            for (int pass = 0; pass < 3 && !doomed.empty(); ++pass) {
                factors(trial, logl_red, g_red);
                bool changed = false;
                for (size_t t = 0; t < doomed.size();) {
                    const int j = doomed[t];
                    if (g_red[static_cast<size_t>(j)] >= 1.0 - dying_margin) {
                        trial[static_cast<size_t>(j)] = q[static_cast<size_t>(j)];
                        streak[static_cast<size_t>(j)] = 0;
                        doomed.erase(doomed.begin() + static_cast<long>(t));
                        changed = true;
                    } else {
                        ++t;
                    }
                }
                if (!changed) break;
            }
            double removed = 0.0;
            for (int j : doomed) {
                removed += q[static_cast<size_t>(j)];
                q[static_cast<size_t>(j)] = 0.0;
                streak[static_cast<size_t>(j)] = 0;
            }
            if (removed > 0) {
                for (auto& v : q) v /= 1.0 - removed;
                mem_it = -1;
            }
        }
    }
    res.gap = gap;

    // kernel from the final marginal; rows normalized exactly
    res.kernel = Mat(n, m);
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < m; ++j) {
            const double v = q[static_cast<size_t>(j)] <= 0
                                 ? 0.0
                                 : std::exp(std::log(q[static_cast<size_t>(j)]) +
                                            slope * problem.c(i, j) - logl[static_cast<size_t>(i)]);
            res.kernel(i, j) = v;
            row += v;
        }
        for (int j = 0; j < m; ++j) res.kernel(i, j) /= row;
    }

    // rate = mutual information against the induced marginal, nats
    Vec marg(static_cast<size_t>(m), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            marg[static_cast<size_t>(j)] += p[static_cast<size_t>(i)] * res.kernel(i, j);
    double rate = 0.0, dist = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            const double pij = p[static_cast<size_t>(i)] * res.kernel(i, j);
            if (pij > 0) rate += pij * std::log(res.kernel(i, j) / marg[static_cast<size_t>(j)]);
            dist += pij * problem.c(i, j);
        }
    res.rate = std::max(0.0, rate);
    res.distortion = dist;
    return res;
}

void RDCurve::check_invariants(double tol_mono, double tol_convex) const {
    for (size_t i = 1; i < points.size(); ++i) {
        if (points[i].rate < points[i - 1].rate)
            throw NumericError("rd curve: rates out of order");
        if (points[i].distortion > points[i - 1].distortion + tol_mono)
            throw NumericError("rd curve: distortion increases with rate");
    }
    for (size_t i = 1; i + 1 < points.size(); ++i) {
        const auto &a = points[i - 1], &b = points[i], &c = points[i + 1];
        const double span = c.rate - a.rate;
        if (span <= 1e-15) continue;
        const double t = (b.rate - a.rate) / span;
        const double chord = (1 - t) * a.distortion + t * c.distortion;
        if (b.distortion > chord + tol_convex)
            throw NumericError("rd curve: convexity violated");
    }
}

RDCurve rd_curve(const RDProblem& problem, const std::vector<double>& slopes, double tol,
                 int max_iter) {
    if (slopes.empty()) throw ValidationError("rd_curve: need at least one slope");
    for (size_t i = 0; i < slopes.size(); ++i) {
        if (!(slopes[i] < 0)) throw ValidationError("rd_curve: slopes must be negative");
        if (i > 0 && slopes[i] < slopes[i - 1])
            throw ValidationError("rd_curve: slopes must be sorted ascending");
    }
    RDCurve curve;
    for (double s : slopes) {
        BlahutResult r = blahut(problem, s, tol, max_iter);
        curve.points.push_back({r.rate, r.distortion, s});
    }
    std::stable_sort(curve.points.begin(), curve.points.end(),
                     [](const RDCurve::Point& a, const RDCurve::Point& b) { return a.rate < b.rate; });
    return curve;
}

namespace {

// Best constant reproduction letter: the exact rate-zero distortion.
double one_letter_floor(const RDProblem& pr) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < pr.m(); ++j) {
        double d = 0.0;
        for (int i = 0; i < pr.n(); ++i)
            d += pr.source.weights[static_cast<size_t>(i)] * pr.c(i, j);
        best = std::min(best, d);
    }
    return best;
}

// Nearest-letter assignment: the unconstrained-rate distortion floor.
double assignment_floor(const RDProblem& pr) {
    double s = 0.0;
    for (int i = 0; i < pr.n(); ++i) {
        double bd = pr.c(i, 0);
        for (int j = 1; j < pr.m(); ++j) bd = std::min(bd, pr.c(i, j));
        s += pr.source.weights[static_cast<size_t>(i)] * bd;
    }
    return s;
}

}  // namespace

RateTargetResult distortion_at_rate(const RDProblem& problem, double target_rate, double tol,
                                    int max_iter) {
    RateTargetResult out;
    if (target_rate < 1e-12) {
        out.distortion = one_letter_floor(problem);
        out.rate = 0.0;
        return out;
    }

    auto probe = [&](double slope) {
        BlahutResult r = blahut(problem, slope, tol, max_iter);
        out.blahut_calls++;
        out.max_iterations_used = std::max(out.max_iterations_used, r.iterations);
        return r;
    };

    // expand the steep side until the achieved rate reaches the target;
    // once the distortion touches the nearest-letter floor the kernel is a
    // hard assignment and steeper slopes change nothing, so stop there
    // rather than pushing the solver into degenerate exponent ranges
    const double floor_d = assignment_floor(problem);
    double lo = -0.5;
    BlahutResult at_lo = probe(lo);
    int expand = 0;
    while (at_lo.rate < target_rate && expand < 60 &&
           at_lo.distortion - floor_d > 1e-12 * (1.0 + std::abs(floor_d))) {
        lo *= 2.0;
        at_lo = probe(lo);
        ++expand;
    }
    if (at_lo.rate < target_rate) {
        // curve saturates below the target; distortion there is the
        // nearest-letter floor
        out.saturated = true;
        out.distortion = floor_d;
        out.rate = at_lo.rate;
        out.slope = lo;
        return out;
    }

    // expand the shallow side until its rate drops below the target,
    // keeping the tightest feasible point seen
    BlahutResult best = std::move(at_lo);
    double best_slope = lo;
    double hi = lo / 2.0;
    BlahutResult at_hi = probe(hi);
    while (at_hi.rate >= target_rate && hi < -1e-12) {
        if (at_hi.rate < best.rate) {
            best = at_hi;
            best_slope = hi;
        }
        lo = hi;
        hi /= 2.0;
        at_hi = probe(hi);
    }
    if (at_hi.rate >= target_rate) {
        best = std::move(at_hi);
        best_slope = hi;
    }

    for (int it = 0; it < 80; ++it) {
        if (best.rate <= target_rate * (1.0 + 1e-9) + 1e-12) break;
        if (std::abs(lo - hi) <= 1e-12 * std::abs(lo)) break;
        const double mid = -std::sqrt(lo * hi);  // geometric bisection
        BlahutResult r = probe(mid);
        if (r.rate >= target_rate) {
            lo = mid;
            if (r.rate < best.rate || (r.rate == best.rate && r.distortion > best.distortion)) {
                best = std::move(r);
                best_slope = mid;
            }
        } else {
            hi = mid;
        }
    }
    out.distortion = best.distortion;
    out.rate = best.rate;
    out.slope = best_slope;
    return out;
}

RDLowerBoundReport rd_lower_bound_check(const DiscreteMeasure& P_hat, const ReconMap& f,
                                        const DataSpace& space, const LatentSpace& H_finite,
                                        int enrichment_per_axis, double tol, double ba_tol,
                                        int max_iter) {
    if (H_finite.kind != LatentSpace::Kind::Finite)
        throw ValidationError("rd_lower_bound_check: latent space must be finite");

    std::vector<Vec> alphabet;
    for (const auto& h : H_finite.points) alphabet.push_back(eval(f, space, h));
    if (enrichment_per_axis > 0) {
        // uniform grid over the data space's bounding box
        Vec lo(static_cast<size_t>(space.dim)), hi(static_cast<size_t>(space.dim));
        if (space.kind == DataSpace::Kind::Ball) {
            for (int i = 0; i < space.dim; ++i) {
                lo[static_cast<size_t>(i)] = space.center[static_cast<size_t>(i)] - space.radius;
                hi[static_cast<size_t>(i)] = space.center[static_cast<size_t>(i)] + space.radius;
            }
        } else {
            lo = space.lower;
            hi = space.upper;
        }
        std::vector<int> idx(static_cast<size_t>(space.dim), 0);
        std::vector<int> shape(static_cast<size_t>(space.dim), enrichment_per_axis);
        size_t total = 1;
        for (int i = 0; i < space.dim; ++i) total *= static_cast<size_t>(enrichment_per_axis);
        if (total > (1u << 16))
            throw ValidationError("rd_lower_bound_check: enrichment grid too large");
        Vec pt(static_cast<size_t>(space.dim));
        for (size_t c = 0; c < total; ++c) {
            size_t rem = c;
            for (int i = space.dim - 1; i >= 0; --i) {
                idx[static_cast<size_t>(i)] = static_cast<int>(rem % enrichment_per_axis);
                rem /= enrichment_per_axis;
            }
            for (int i = 0; i < space.dim; ++i) {
                const double t = enrichment_per_axis == 1
                                     ? 0.5
                                     : static_cast<double>(idx[static_cast<size_t>(i)]) /
                                           (enrichment_per_axis - 1);
                pt[static_cast<size_t>(i)] =
                    lo[static_cast<size_t>(i)] +
                    t * (hi[static_cast<size_t>(i)] - lo[static_cast<size_t>(i)]);
            }
            alphabet.push_back(space.project(pt));
        }
    }

    RDLowerBoundReport rep;
    rep.rate_target = std::log(static_cast<double>(H_finite.points.size()));
    rep.risk = weighted_risk(f, space, P_hat, H_finite,
                             EncodeStrategy::exhaustive(1.0));  // finite latents: exact
    RDProblem pr(P_hat, std::move(alphabet));
    RateTargetResult rt = distortion_at_rate(pr, rep.rate_target, ba_tol, max_iter);
    rep.d_hat = rt.distortion;
    rep.achieved_rate = rt.rate;
    rep.holds = rep.risk >= rep.d_hat - tol;
    return rep;
}

double cover_bound_value(double distortion, double lambda, double lipschitz, double eps) {
    if (!(lambda > 0 && lambda < 1))
        throw ValidationError("cover bound: lambda must lie in (0, 1)");
    return lambda * distortion - lambda / (1.0 - lambda) * lipschitz * lipschitz * eps * eps;
}

double map_lipschitz_bound(const ReconMap& f) {
    if (std::holds_alternative<LinearMap>(f))
        return spectral_norm(std::get<LinearMap>(f).A);
    double prod = 1.0;
    if (std::holds_alternative<DenseNet>(f)) {
        for (const auto& l : std::get<DenseNet>(f).layers)
            prod *= l.act.lipschitz() * l.budget;
    } else {
        for (const auto& l : std::get<ConvNet>(f).layers) {
            if (l.is_pool) continue;  // non-overlapping max pooling is 1-Lipschitz
            prod *= l.act.lipschitz() * l.budget;
        }
    }
    return prod;
}

double cover_lower_bound(const DiscreteMeasure& P_hat, const ReconMap& f, const DataSpace& space,
                         const LatentSpace& H, double eps, double lambda, double ba_tol,
                         int max_iter) {
    if (!(lambda > 0 && lambda < 1))
        throw ValidationError("cover_lower_bound: lambda must lie in (0, 1)");
    if (!(eps > 0)) throw ValidationError("cover_lower_bound: eps must be positive");

    const std::vector<Vec> net = H.eps_net(eps);
    std::vector<Vec> alphabet;
    alphabet.reserve(net.size());
    for (const auto& h : net) alphabet.push_back(eval(f, space, h));

    RDProblem pr(P_hat, std::move(alphabet));
    const double rate = std::log(static_cast<double>(net.size()));
    RateTargetResult rt = distortion_at_rate(pr, rate, ba_tol, max_iter);
    return cover_bound_value(rt.distortion, lambda, map_lipschitz_bound(f), eps);
}

double cover_lower_bound_grid(const DiscreteMeasure& P_hat, const ReconMap& f,
                              const DataSpace& space, const LatentSpace& H,
                              const std::vector<double>& epss, const std::vector<double>& lambdas,
                              double ba_tol, int max_iter) {
    if (epss.empty() || lambdas.empty())
        throw ValidationError("cover_lower_bound_grid: empty grid");
    double best = -std::numeric_limits<double>::infinity();
    for (double e : epss)
        for (double l : lambdas)
            best = std::max(best, cover_lower_bound(P_hat, f, space, H, e, l, ba_tol, max_iter));
    return best;
}

}  // namespace latcode
