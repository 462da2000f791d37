#include "core/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace latcode {

namespace {

void check_tail(double n, double delta) {
    if (!(n >= 1)) throw ValidationError("sample count must be >= 1");
    if (!(delta > 0) || !(delta < 1)) throw ValidationError("delta must lie in (0, 1)");
}

void flag_vacuous(BoundReport& r, double diam) {
    r.vacuous = r.value > diam * diam;
    r.constants.emplace_back("diam", diam);
}

}  // namespace

CoveringFunction CoveringFunction::maurey(double M, int d_rows, int k_cols) {
    if (!(M >= 0)) throw ValidationError("maurey cover needs M >= 0");
    if (d_rows < 1 || k_cols < 1) throw ValidationError("maurey cover needs positive dimensions");
    CoveringFunction c;
    c.kind = Kind::Maurey;
    c.M = M;
    c.d_rows = d_rows;
    c.k_cols = k_cols;
    return c;
}

CoveringFunction CoveringFunction::volumetric(double param_count, double scale) {
    if (!(param_count >= 0)) throw ValidationError("volumetric cover needs param_count >= 0");
    if (!(scale > 0)) throw ValidationError("volumetric cover needs scale > 0");
    CoveringFunction c;
    c.kind = Kind::Volumetric;
    c.param_count = param_count;
    c.scale = scale;
    return c;
}

CoveringFunction CoveringFunction::tabulated(std::vector<std::pair<double, double>> entries) {
    if (entries.empty()) throw ValidationError("tabulated cover needs at least one entry");
    std::sort(entries.begin(), entries.end());
    for (size_t i = 0; i < entries.size(); ++i) {
        if (!(entries[i].second >= 0) || !std::isfinite(entries[i].second))
            throw ValidationError("tabulated cover needs finite logN >= 0");
        if (i > 0 && entries[i].second > entries[i - 1].second + 1e-12)
            throw ValidationError("tabulated cover must be non-increasing in eps");
    }
    CoveringFunction c;
    c.kind = Kind::Tabulated;
    c.table = std::move(entries);
    return c;
}

double CoveringFunction::log_cover(double eps) const {
    switch (kind) {
        case Kind::Maurey:
            return maurey_logcover(M, d_rows, k_cols, eps);
        case Kind::Volumetric:
            if (eps >= scale) return 0.0;
            return param_count * std::log(scale / eps);
        case Kind::Tabulated: {
            // last entry with eps_i <= eps; below the table, the first entry
            auto it = std::upper_bound(table.begin(), table.end(),
                                       std::make_pair(eps, std::numeric_limits<double>::max()));
            if (it == table.begin()) return table.front().second;
            return std::prev(it)->second;
        }
    }
    return 0.0;
}

double maurey_logcover(double M, int d_rows, int k_cols, double eps) {
    if (!(eps > 0)) throw ValidationError("maurey_logcover needs eps > 0");
    if (d_rows < 1 || k_cols < 1) throw ValidationError("maurey_logcover needs positive dimensions");
    if (!(M >= 0)) throw ValidationError("maurey_logcover needs M >= 0");
    if (eps > M) return 0.0;
    const double ratio = (M / eps) * (M / eps);
    const double pieces = std::ceil(ratio);
    const double dk = static_cast<double>(d_rows) * static_cast<double>(k_cols);
    return pieces * std::log1p(2.0 * dk / ratio);
}

Vec maurey_sparsify(const Vec& v, double M, double eps, uint64_t seed) {
    if (!(M > 0)) throw ValidationError("maurey_sparsify needs M > 0");
    if (!(eps > 0)) throw ValidationError("maurey_sparsify needs eps > 0");
    double l1 = 0;
    for (double x : v) l1 += std::abs(x);
    if (l1 > M * (1 + 1e-12)) throw ValidationError("maurey_sparsify: |v|_1 exceeds the stated radius");

    const size_t k = static_cast<size_t>(std::ceil(M * M / (eps * eps)));
    StreamRng rng = StreamRng::derive(seed, 0x6d61, 0x7572, 0x6579);

    constexpr int kRetryBudget = 1000;
    for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
        Vec avg(v.size(), 0.0);
        for (size_t t = 0; t < k; ++t) {
            // U = sign(v_i) M e_i w.p. |v_i|/M, zero otherwise; E U = v
            double r = rng.uniform01() * M;
            double cum = 0;
            for (size_t i = 0; i < v.size(); ++i) {
                cum += std::abs(v[i]);
                if (r < cum) {
                    avg[i] += v[i] > 0 ? M : -M;
                    break;
                }
            }
        }
        for (double& x : avg) x /= static_cast<double>(k);
        Vec diff = sub(avg, v);
        if (norm2(diff) <= eps) return avg;
    }
    throw NumericError("maurey_sparsify: retry budget exhausted");
}

namespace {

// Adaptive Simpson with local error splitting; depth-capped so the stepped
// maurey integrand cannot recurse forever around its jumps.
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    if (!(b > a)) return 0.0;
    // Seed the absolute tolerance from a coarse pass over a few panels.
    const int kPanels = 16;
    double coarse = 0, h = (b - a) / kPanels;
    for (int i = 0; i < kPanels; ++i) {
        double x0 = a + i * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
        coarse += h / 6.0 * (f(x0) + 4 * f(xm) + f(x1));
    }
    double tol = std::max(std::abs(coarse) * rel_tol, 1e-15);
    double total = 0;
    for (int i = 0; i < kPanels; ++i) {
        double x0 = a + i * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
        double f0 = f(x0), fm = f(xm), f1 = f(x1);
        double whole = h / 6.0 * (f0 + 4 * fm + f1);
        total += simpson_rec(f, x0, x1, f0, fm, f1, whole, tol / kPanels, 36);
    }
    return total;
}

}  // namespace

double entropy_integral_at(const CoveringFunction& cover, double diam_Z, double n, double alpha) {
    if (!(diam_Z >= 0)) throw ValidationError("entropy integral needs diam >= 0");
    if (!(n >= 1)) throw ValidationError("entropy integral needs n >= 1");
    if (!(alpha >= 0)) throw ValidationError("entropy integral needs alpha >= 0");
    const double hi = 0.5 * diam_Z;
    // The integrand can blow up (integrably) as u -> 0; keep the endpoint off zero.
    const double lo = std::max(alpha, std::max(hi, 1.0) * 1e-14);
    auto integrand = [&cover](double u) { return std::sqrt(std::max(0.0, cover.log_cover(u))); };
    double integral = lo < hi ? integrate(integrand, lo, hi, 1e-8) : 0.0;
    return alpha * std::sqrt(n) / 6.0 + integral;
}

double entropy_integral(const CoveringFunction& cover, double diam_Z, double n) {
    if (!(diam_Z >= 0)) throw ValidationError("entropy integral needs diam >= 0");
    if (!(n >= 1)) throw ValidationError("entropy integral needs n >= 1");
    const double hi = 0.5 * diam_Z;
    if (hi <= 0) return 0.0;
    auto g = [&](double alpha) { return entropy_integral_at(cover, diam_Z, n, alpha); };

    // Golden-section over [0, diam/2]; g is convex (its slope sqrt(n)/6 -
    // sqrt(logN(alpha)) is non-decreasing).
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = hi;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double g1 = g(x1), g2 = g(x2);
    for (int it = 0; it < 120 && (b - a) > 1e-13 * hi; ++it) {
        if (g1 <= g2) {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - invphi * (b - a);
            g1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + invphi * (b - a);
            g2 = g(x2);
        }
    }
    double best = std::min(g(0.5 * (a + b)), std::min(g1, g2));
    best = std::min(best, std::min(g(0.0), g(hi)));
    return best;
}

double BoundReport::constant(const std::string& key) const {
    for (const auto& [k, v] : constants)
        if (k == key) return v;
    throw ValidationError("bound report has no constant named '" + key + "'");
}

double ArchitectureSpec::lm_product() const {
    double p = 1;
    for (const auto& l : layers) p *= l.lipschitz * l.budget;
    return p;
}

double ArchitectureSpec::m_product() const {
    double p = 1;
    for (const auto& l : layers) p *= l.budget;
    return p;
}

void ArchitectureSpec::check() const {
    if (layers.empty()) throw ValidationError("architecture needs at least one layer");
    if (!(latent_max_norm > 0)) throw ValidationError("latent sup-norm must be positive");
    if (!(data_diameter > 0)) throw ValidationError("data diameter must be positive");
    for (const auto& l : layers) {
        if (!(l.lipschitz >= 0) || !std::isfinite(l.lipschitz))
            throw ValidationError("layer Lipschitz constants must be finite and >= 0");
        if (!(l.budget >= 0) || !std::isfinite(l.budget))
            throw ValidationError("layer budgets must be finite and >= 0");
        if (l.output_bound && !(*l.output_bound >= 0))
            throw ValidationError("layer output bounds must be >= 0");
    }
    if (kind == Kind::Dense) {
        if (widths.size() != layers.size() + 1)
            throw ValidationError("dense architecture needs depth+1 widths");
        for (int w : widths)
            if (w < 1) throw ValidationError("widths must be positive");
    } else {
        if (channels.size() != layers.size() + 1)
            throw ValidationError("conv architecture needs depth+1 channel counts");
        for (int v : channels)
            if (v < 1) throw ValidationError("channel counts must be positive");
        for (const auto& l : layers) {
            if (l.filter_dims.empty())
                throw ValidationError("conv layers need at least one filter dimension");
            for (int u : l.filter_dims)
                if (u < 1) throw ValidationError("filter dimensions must be positive");
        }
    }
}

ArchitectureSpec arch_of(const ReconMap& f, const LatentSpace& H, const DataSpace& Z) {
    ArchitectureSpec spec;
    spec.latent_max_norm = H.max_norm();
    spec.data_diameter = Z.diameter();
    if (const auto* lin = std::get_if<LinearMap>(&f)) {
        spec.kind = ArchitectureSpec::Kind::Dense;
        spec.widths = {lin->A.cols, lin->A.rows};
        ArchLayer l;
        l.lipschitz = 1.0;
        l.budget = spectral_norm(lin->A);
        spec.layers.push_back(l);
        spec.budget_kind = BudgetKind::Spectral;
    } else if (const auto* net = std::get_if<DenseNet>(&f)) {
        spec.kind = ArchitectureSpec::Kind::Dense;
        spec.widths.push_back(net->layers.front().A.cols);
        bool first = true;
        for (const auto& layer : net->layers) {
            spec.widths.push_back(layer.A.rows);
            ArchLayer l;
            l.lipschitz = layer.act.lipschitz();
            l.budget = layer.budget;
            l.zizo = layer.act.zizo();
            l.output_bound = layer.act.output_bound(layer.A.rows);
            spec.layers.push_back(l);
            if (first) {
                spec.budget_kind = layer.budget_kind;
                first = false;
            } else if (layer.budget_kind != spec.budget_kind) {
                throw ValidationError("mixed per-layer budget kinds have no architecture summary");
            }
        }
    } else {
        const auto& cnet = std::get<ConvNet>(f);
        spec.kind = ArchitectureSpec::Kind::Conv;
        spec.budget_kind = BudgetKind::Filter12;
        spec.channels.push_back(cnet.input_shape.back());
        for (const auto& layer : cnet.layers) {
            if (layer.is_pool) continue;  // 1-Lipschitz, no parameters
            spec.channels.push_back(static_cast<int>(layer.filters.size()));
            ArchLayer l;
            l.lipschitz = layer.act.lipschitz();
            l.budget = layer.budget;
            l.zizo = layer.act.zizo();
            l.filter_dims.assign(layer.filters.front().shape.begin(),
                                 layer.filters.front().shape.end() - 1);
            spec.layers.push_back(l);
        }
        if (spec.layers.empty()) throw ValidationError("conv net has no parameterized layers");
    }
    spec.check();
    return spec;
}

double wasserstein_constant(double q, int d) {
    if (!(q > 2)) throw ValidationError("moment order q must exceed 2");
    if (d < 3) throw ValidationError("dimension must be at least 3");
    const double dd = static_cast<double>(d);
    const double a = (dd - 1.0) / dd * q;
    const double first = 18.0 * dd * std::exp2(dd) * std::exp2(a) / (0.5 - std::exp2(-a));
    const double second =
        6.0 * dd * std::exp2(0.5 * dd) * std::exp2(0.5 * q) / (1.0 - std::exp2(0.5 * (2.0 - q)));
    return first + second;
}

BoundReport bound_thm_wasserstein(double q, int d, double diam_Z, double moment_q, double n,
                                  double delta) {
    check_tail(n, delta);
    if (!(diam_Z >= 0)) throw ValidationError("diameter must be >= 0");
    if (!(moment_q >= 0)) throw ValidationError("the q-th moment must be >= 0");
    const double c = wasserstein_constant(q, d);
    const double approx = c * diam_Z * std::pow(moment_q, 1.0 / q) * std::pow(n, -1.0 / d);
    const double tail = diam_Z * diam_Z * std::sqrt(2.0 * std::log(1.0 / delta) / n);
    BoundReport r;
    r.name = "moment_transport";
    r.value = approx + tail;
    r.n = n;
    r.delta = delta;
    r.constants = {{"C_qd", c},          {"q", q},
                   {"d", double(d)},     {"moment_q", moment_q},
                   {"approx_term", approx}, {"tail_term", tail}};
    flag_vacuous(r, diam_Z);
    return r;
}

BoundReport bound_thm_complexity(double entropy_int_value, double diam_Z, double n, double delta,
                                 bool one_sided) {
    check_tail(n, delta);
    if (!(diam_Z >= 0)) throw ValidationError("diameter must be >= 0");
    if (!(entropy_int_value >= 0)) throw ValidationError("entropy integral must be >= 0");
    const double coef = one_sided ? 48.0 : 96.0;
    const double tails = one_sided ? 1.0 : 2.0;
    const double main = coef * diam_Z * entropy_int_value / std::sqrt(n);
    const double tail = diam_Z * diam_Z * std::sqrt(2.0 * std::log(tails / delta) / n);
    BoundReport r;
    r.name = one_sided ? "entropy_one_sided" : "entropy";
    r.value = main + tail;
    r.n = n;
    r.delta = delta;
    r.constants = {{"entropy_integral", entropy_int_value},
                   {"coefficient", coef},
                   {"main_term", main},
                   {"tail_term", tail}};
    flag_vacuous(r, diam_Z);
    return r;
}

namespace {

double width_log_sum(const ArchitectureSpec& spec) {
    double s = 0;
    for (size_t j = 1; j < spec.widths.size(); ++j)
        s += std::log(2.0 * spec.widths[j - 1] * spec.widths[j] + 1.0);
    return s;
}

double dense_param_count(const ArchitectureSpec& spec) {
    double s = 0;
    for (size_t j = 1; j < spec.widths.size(); ++j)
        s += static_cast<double>(spec.widths[j - 1]) * spec.widths[j];
    return s;
}

double conv_param_count(const ArchitectureSpec& spec) {
    double s = 0;
    for (size_t j = 0; j < spec.layers.size(); ++j) {
        double filt = 1;
        for (int u : spec.layers[j].filter_dims) filt *= u;
        s += static_cast<double>(spec.channels[j]) * spec.channels[j + 1] * filt;
    }
    return s;
}

// Shared shape of the two covering-by-parameter-count bounds: the only knobs
// are the parameter count and the product inside the log.
BoundReport param_count_bound(const std::string& name, const ArchitectureSpec& spec,
                              double param_count, double log_product, double n, double delta) {
    const double diam = spec.data_diameter;
    const double ell = spec.depth();
    const double log_arg = 3.0 * ell * std::sqrt(n) * spec.latent_max_norm * log_product;
    if (!(log_arg > 1.0))
        throw ValidationError("degenerate scale: the covering log argument must exceed 1");
    const double main = diam * diam * std::sqrt(2.0 * param_count) / std::sqrt(n) *
                        std::sqrt(std::log(log_arg));
    const double tail = diam * diam * std::sqrt(2.0 * std::log(2.0 / delta) / n);
    const double slack = 4.0 / std::sqrt(n);
    BoundReport r;
    r.name = name;
    r.value = main + tail + slack;
    r.n = n;
    r.delta = delta;
    r.constants = {{"param_count", param_count}, {"depth", ell},
                   {"latent_max_norm", spec.latent_max_norm},
                   {"log_product", log_product}, {"main_term", main},
                   {"tail_term", tail},          {"slack_term", slack}};
    flag_vacuous(r, diam);
    return r;
}

}  // namespace

BoundReport bound_dense_wide(const ArchitectureSpec& spec, double n, double delta) {
    spec.check();
    check_tail(n, delta);
    if (spec.kind != ArchitectureSpec::Kind::Dense)
        throw ValidationError("the wide-net bound covers dense architectures");
    if (spec.budget_kind != BudgetKind::EntrywiseL1)
        throw ValidationError("the wide-net bound needs entrywise-l1 budgets");
    for (const auto& l : spec.layers)
        if (!l.zizo)
            throw ValidationError(
                "the wide-net bound needs zero-in-zero-out activations; use bound_sigmoid for "
                "layers with bounded outputs instead");
    const double diam = spec.data_diameter;
    const double ell = spec.depth();
    const double lm = spec.lm_product();
    const double logs = width_log_sum(spec);
    const double main = 48.0 * std::sqrt(2.0) * ell * std::log(n) / std::sqrt(n) * diam *
                        spec.latent_max_norm * lm * std::sqrt(logs);
    const double mid = 8.0 * diam * diam / std::sqrt(n);
    const double tail = diam * diam * std::sqrt(2.0 * std::log(2.0 / delta) / n);
    BoundReport r;
    r.name = "dense_wide";
    r.value = main + mid + tail;
    r.n = n;
    r.delta = delta;
    r.constants = {{"depth", ell},
                   {"latent_max_norm", spec.latent_max_norm},
                   {"lipschitz_budget_product", lm},
                   {"width_log_sum", logs},
                   {"main_term", main},
                   {"mid_term", mid},
                   {"tail_term", tail}};
    flag_vacuous(r, diam);
    return r;
}

BoundReport bound_dense_deep(const ArchitectureSpec& spec, double n, double delta) {
    spec.check();
    check_tail(n, delta);
    if (spec.kind != ArchitectureSpec::Kind::Dense)
        throw ValidationError("the deep-net bound covers dense architectures");
    if (spec.budget_kind != BudgetKind::Spectral)
        throw ValidationError("the deep-net bound needs spectral budgets");
    return param_count_bound("dense_deep", spec, dense_param_count(spec), spec.lm_product(), n,
                             delta);
}

BoundReport bound_cnn(const ArchitectureSpec& spec, double n, double delta) {
    spec.check();
    check_tail(n, delta);
    if (spec.kind != ArchitectureSpec::Kind::Conv)
        throw ValidationError("the conv bound covers convolutional architectures");
    if (spec.budget_kind != BudgetKind::Filter12)
        throw ValidationError("the conv bound needs filter (1,2)-norm budgets");
    return param_count_bound("cnn", spec, conv_param_count(spec), spec.m_product(), n, delta);
}

BoundReport bound_sigmoid(const ArchitectureSpec& spec, double n, double delta) {
    spec.check();
    check_tail(n, delta);
    if (spec.kind != ArchitectureSpec::Kind::Dense)
        throw ValidationError("the bounded-output bound covers dense architectures");
    const int ell = spec.depth();
    // B_0 is the latent sup-norm; the terms use B_0..B_{l-1}, so the last
    // layer needs no output bound of its own.
    std::vector<double> B(ell);
    B[0] = spec.latent_max_norm;
    for (int i = 1; i < ell; ++i) {
        const auto& ob = spec.layers[i - 1].output_bound;
        if (!ob) {
            std::ostringstream msg;
            msg << "the bounded-output bound needs an output bound on layer " << i
                << " (none is known for its activation)";
            throw ValidationError(msg.str());
        }
        B[i] = *ob;
    }
    double weighted = 0;
    for (int i = 1; i <= ell; ++i) {
        double prod = 1;
        for (int j = i; j <= ell; ++j)
            prod *= spec.layers[j - 1].lipschitz * spec.layers[j - 1].budget;
        weighted += B[i - 1] * prod;
    }
    const double diam = spec.data_diameter;
    const double logs = width_log_sum(spec);
    const double main = 48.0 * std::sqrt(2.0) * std::log(n) / std::sqrt(n) * weighted *
                        std::sqrt(logs);
    const double mid = 8.0 * diam * diam / std::sqrt(n);
    const double tail = diam * diam * std::sqrt(2.0 * std::log(2.0 / delta) / n);
    BoundReport r;
    r.name = "bounded_output";
    r.value = main + mid + tail;
    r.n = n;
    r.delta = delta;
    r.constants = {{"depth", double(ell)},
                   {"latent_max_norm", spec.latent_max_norm},
                   {"weighted_tail_sum", weighted},
                   {"width_log_sum", logs},
                   {"main_term", main},
                   {"mid_term", mid},
                   {"tail_term", tail}};
    flag_vacuous(r, diam);
    return r;
}

BoundReport bound_lemma21(double B, double d_cover, double C, double n, double delta) {
    check_tail(n, delta);
    if (!(B >= 0)) throw ValidationError("the envelope B must be >= 0");
    if (!(d_cover > 0)) throw ValidationError("the covering dimension must be positive");
    if (!(C > 0)) throw ValidationError("the covering scale C must be positive");
    const double main = B * (std::sqrt(d_cover * std::log(C * std::sqrt(n)) / (2.0 * n)) +
                             std::sqrt(std::log(1.0 / delta) / (2.0 * n)));
    const double slack = 2.0 / std::sqrt(n);
    BoundReport r;
    r.name = "parametric_cover";
    r.value = main + slack;
    r.n = n;
    r.delta = delta;
    r.constants = {{"B", B}, {"d_cover", d_cover}, {"C", C}, {"main_term", main},
                   {"slack_term", slack}};
    return r;
}

}  // namespace latcode
