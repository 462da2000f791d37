#include "core/maps.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace latcode {

Activation Activation::leaky_relu(double slope) {
    if (!(slope >= 0.0 && slope <= 1.0))
        throw ValidationError("leaky_relu: slope must lie in [0, 1]");
    Activation a;
    a.kind = Kind::LeakyRelu;
    a.leaky_slope = slope;
    return a;
}

double Activation::lipschitz() const {
    switch (kind) {
        case Kind::Sigmoid: return 0.25;
        default: return 1.0;
    }
}

bool Activation::zizo() const { return kind != Kind::Sigmoid; }

std::optional<double> Activation::output_bound(int width) const {
    switch (kind) {
        case Kind::Tanh:
        case Kind::Sigmoid:
            return std::sqrt(static_cast<double>(width));
        default:
            return std::nullopt;
    }
}

double Activation::apply(double x) const {
    switch (kind) {
        case Kind::Relu: return x > 0 ? x : 0.0;
        case Kind::LeakyRelu: return x > 0 ? x : leaky_slope * x;
        case Kind::Tanh: return std::tanh(x);
        case Kind::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case Kind::Identity: return x;
    }
    return x;
}

double Activation::deriv(double x) const {
    switch (kind) {
        case Kind::Relu: return x > 0 ? 1.0 : 0.0;
        case Kind::LeakyRelu: return x > 0 ? 1.0 : leaky_slope;
        case Kind::Tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case Kind::Sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-x));
            return s * (1.0 - s);
        }
        case Kind::Identity: return 1.0;
    }
    return 1.0;
}

std::string Activation::name() const {
    switch (kind) {
        case Kind::Relu: return "relu";
        case Kind::LeakyRelu: return "leaky_relu";
        case Kind::Tanh: return "tanh";
        case Kind::Sigmoid: return "sigmoid";
        case Kind::Identity: return "identity";
    }
    return "identity";
}

Activation Activation::parse(const std::string& name, double leaky_slope) {
    if (name == "relu") return relu();
    if (name == "leaky_relu") return Activation::leaky_relu(leaky_slope);
    if (name == "tanh") return tanh();
    if (name == "sigmoid") return sigmoid();
    if (name == "identity") return identity();
    throw ValidationError("unknown activation: " + name);
}

Tensor::Tensor(std::vector<int> shp) : shape(std::move(shp)) {
    size_t n = 1;
    for (int e : shape) {
        if (e <= 0) throw ValidationError("tensor: extents must be positive");
        n *= static_cast<size_t>(e);
    }
    a.assign(n, 0.0);
}

int Tensor::numel() const {
    size_t n = 1;
    for (int e : shape) n *= static_cast<size_t>(e);
    return static_cast<int>(n);
}

namespace {

// Row-major strides for a shape (last index fastest).
std::vector<size_t> flat_strides(const std::vector<int>& shape) {
    std::vector<size_t> st(shape.size(), 1);
    for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i)
        st[i] = st[i + 1] * static_cast<size_t>(shape[i + 1]);
    return st;
}

bool next_index(std::vector<int>& idx, const std::vector<int>& shape) {
    for (int i = static_cast<int>(shape.size()) - 1; i >= 0; --i) {
        if (++idx[i] < shape[i]) return true;
        idx[i] = 0;
    }
    return false;
}

int out_extent(int w, double s) {
    return static_cast<int>(std::ceil(static_cast<double>(w) / s - 1e-12));
}

// 0-based read position for output index r0 and filter index f0 along one
// axis, per the convolution's index rule. Returns -1 when the position is
// fractional or out of range.
int read_pos(int f0, double stride, int r0, int u, int w) {
    const double p = f0 + stride * r0 + 0.5 * (1.0 - u);
    const double pr = std::round(p);
    if (std::abs(p - pr) > 1e-9) return -1;
    const int pi = static_cast<int>(pr);
    if (pi < 0 || pi >= w) return -1;
    return pi;
}

void check_conv_args(const Tensor& in, const std::vector<Tensor>& filters,
                     const std::vector<double>& strides) {
    if (in.shape.size() < 2)
        throw ValidationError("conv: input needs at least one spatial axis plus channels");
    const size_t m = in.shape.size() - 1;
    if (strides.size() != m) throw ValidationError("conv: stride count must match spatial rank");
    for (double s : strides)
        if (!(s > 0) || !std::isfinite(s)) throw ValidationError("conv: strides must be positive");
    if (filters.empty()) throw ValidationError("conv: need at least one filter");
    for (const auto& f : filters) {
        if (f.shape.size() != m + 1)
            throw ValidationError("conv: filter rank must match input rank");
        if (f.shape.back() != in.shape.back())
            throw ValidationError("conv: filter channels must match input channels");
        if (f.shape != filters[0].shape)
            throw ValidationError("conv: filters must share one shape");
    }
}

}  // namespace

Tensor conv_forward(const Tensor& in, const std::vector<Tensor>& filters,
                    const std::vector<double>& strides) {
    check_conv_args(in, filters, strides);
    const size_t m = strides.size();
    const int vin = in.shape.back();
    const int vout = static_cast<int>(filters.size());

    std::vector<int> oshape(m + 1);
    for (size_t t = 0; t < m; ++t) oshape[t] = out_extent(in.shape[t], strides[t]);
    oshape[m] = vout;
    Tensor out(oshape);

    const auto ist = flat_strides(in.shape);
    const auto ost = flat_strides(oshape);
    const auto fst = flat_strides(filters[0].shape);

    std::vector<int> r(m, 0);       // output spatial index
    std::vector<int> fidx(m, 0);    // filter spatial index
    std::vector<int> rshape(oshape.begin(), oshape.end() - 1);
    std::vector<int> fshape(filters[0].shape.begin(), filters[0].shape.end() - 1);

    do {
        size_t obase = 0;
        for (size_t t = 0; t < m; ++t) obase += static_cast<size_t>(r[t]) * ost[t];
        std::fill(fidx.begin(), fidx.end(), 0);
        do {
            size_t ibase = 0;
            bool ok = true;
            for (size_t t = 0; t < m; ++t) {
                const int p = read_pos(fidx[t], strides[t], r[t], fshape[t], in.shape[t]);
                if (p < 0) { ok = false; break; }
                ibase += static_cast<size_t>(p) * ist[t];
            }
            if (!ok) continue;
            size_t fbase = 0;
            for (size_t t = 0; t < m; ++t) fbase += static_cast<size_t>(fidx[t]) * fst[t];
            for (int c = 0; c < vout; ++c) {
                double acc = 0.0;
                for (int j = 0; j < vin; ++j) acc += filters[c].a[fbase + j] * in.a[ibase + j];
                out.a[obase + c] += acc;
            }
        } while (next_index(fidx, fshape));
    } while (next_index(r, rshape));

    return out;
}

double filter_norm_12(const std::vector<Tensor>& filters) {
    double s = 0.0;
    for (const auto& f : filters) {
        double l1 = 0.0;
        for (double v : f.a) l1 += std::abs(v);
        s += l1 * l1;
    }
    return std::sqrt(s);
}

namespace {

constexpr double kBudgetTol = 1e-9;

double dense_layer_norm(const DenseLayer& l) {
    return l.budget_kind == BudgetKind::Spectral ? spectral_norm(l.A) : entrywise_l1(l.A);
}

std::vector<int> pool_out_shape(const std::vector<int>& in_shape, const std::vector<int>& window) {
    const size_t m = in_shape.size() - 1;
    if (window.size() != m) throw ValidationError("pool: window rank must match spatial rank");
    std::vector<int> os(in_shape);
    for (size_t t = 0; t < m; ++t) {
        if (window[t] < 1) throw ValidationError("pool: window extents must be >= 1");
        os[t] = (in_shape[t] + window[t] - 1) / window[t];
    }
    return os;
}

// Walks a conv net's shapes, validating as it goes.
std::vector<std::vector<int>> conv_shape_chain(const ConvNet& f) {
    if (f.input_shape.size() < 2)
        throw ValidationError("conv net: input shape needs spatial axes plus channels");
    for (int e : f.input_shape)
        if (e <= 0) throw ValidationError("conv net: input extents must be positive");
    if (f.layers.empty()) throw ValidationError("conv net: need at least one layer");
    std::vector<std::vector<int>> chain{f.input_shape};
    for (const auto& l : f.layers) {
        const auto& cur = chain.back();
        if (l.is_pool) {
            chain.push_back(pool_out_shape(cur, l.window));
            continue;
        }
        Tensor probe(cur);
        check_conv_args(probe, l.filters, l.strides);
        if (!(l.budget > 0)) throw ValidationError("conv layer: budget must be positive");
        if (filter_norm_12(l.filters) > l.budget + kBudgetTol)
            throw ValidationError("conv layer: filter norm exceeds budget");
        std::vector<int> os(cur.size());
        for (size_t t = 0; t + 1 < cur.size(); ++t) os[t] = out_extent(cur[t], l.strides[t]);
        os.back() = static_cast<int>(l.filters.size());
        chain.push_back(os);
    }
    return chain;
}

Tensor pool_forward(const Tensor& in, const std::vector<int>& window, std::vector<int>* argmax) {
    const size_t m = in.shape.size() - 1;
    Tensor out(pool_out_shape(in.shape, window));
    const int ch = in.shape.back();
    const auto ist = flat_strides(in.shape);
    const auto ost = flat_strides(out.shape);
    if (argmax) argmax->assign(out.a.size(), -1);

    std::vector<int> r(m, 0);
    std::vector<int> rshape(out.shape.begin(), out.shape.end() - 1);
    std::vector<int> w(m, 0);
    do {
        size_t obase = 0;
        for (size_t t = 0; t < m; ++t) obase += static_cast<size_t>(r[t]) * ost[t];
        std::vector<int> wext(m);
        for (size_t t = 0; t < m; ++t)
            wext[t] = std::min(window[t], in.shape[t] - r[t] * window[t]);
        for (int c = 0; c < ch; ++c) {
            double best = 0.0;
            size_t besti = 0;
            bool first = true;
            std::fill(w.begin(), w.end(), 0);
            do {
                size_t ibase = 0;
                for (size_t t = 0; t < m; ++t)
                    ibase += static_cast<size_t>(r[t] * window[t] + w[t]) * ist[t];
                const double v = in.a[ibase + c];
                if (first || v > best) {
                    best = v;
                    besti = ibase + c;
                    first = false;
                }
            } while (next_index(w, wext));
            out.a[obase + c] = best;
            if (argmax) (*argmax)[obase + c] = static_cast<int>(besti);
        }
    } while (next_index(r, rshape));
    return out;
}

// Accumulates filter and input gradients for one conv layer; mirrors
// conv_forward's index walk exactly.
void conv_backward(const Tensor& in, const std::vector<Tensor>& filters,
                   const std::vector<double>& strides, const Tensor& gout,
                   std::vector<Tensor>* gfilters, Tensor* gin) {
    const size_t m = strides.size();
    const int vin = in.shape.back();
    const int vout = static_cast<int>(filters.size());
    const auto ist = flat_strides(in.shape);
    const auto ost = flat_strides(gout.shape);
    const auto fst = flat_strides(filters[0].shape);

    std::vector<int> r(m, 0), fidx(m, 0);
    std::vector<int> rshape(gout.shape.begin(), gout.shape.end() - 1);
    std::vector<int> fshape(filters[0].shape.begin(), filters[0].shape.end() - 1);
    do {
        size_t obase = 0;
        for (size_t t = 0; t < m; ++t) obase += static_cast<size_t>(r[t]) * ost[t];
        std::fill(fidx.begin(), fidx.end(), 0);
        do {
            size_t ibase = 0;
            bool ok = true;
            for (size_t t = 0; t < m; ++t) {
                const int p = read_pos(fidx[t], strides[t], r[t], fshape[t], in.shape[t]);
                if (p < 0) { ok = false; break; }
                ibase += static_cast<size_t>(p) * ist[t];
            }
            if (!ok) continue;
            size_t fbase = 0;
            for (size_t t = 0; t < m; ++t) fbase += static_cast<size_t>(fidx[t]) * fst[t];
            for (int c = 0; c < vout; ++c) {
                const double g = gout.a[obase + c];
                if (g == 0.0) continue;
                for (int j = 0; j < vin; ++j) {
                    if (gfilters) (*gfilters)[c].a[fbase + j] += g * in.a[ibase + j];
                    if (gin) gin->a[ibase + j] += g * filters[c].a[fbase + j];
                }
            }
        } while (next_index(fidx, fshape));
    } while (next_index(r, rshape));
}

struct Visitor {
    template <class F>
    static auto apply(const ReconMap& f, F&& fn) {
        return std::visit(std::forward<F>(fn), f);
    }
};

}  // namespace

void validate(const ReconMap& f) {
    if (std::holds_alternative<LinearMap>(f)) {
        const auto& l = std::get<LinearMap>(f);
        if (l.A.rows <= 0 || l.A.cols <= 0)
            throw ValidationError("linear map: empty matrix");
        for (double v : l.A.a)
            if (!std::isfinite(v)) throw ValidationError("linear map: non-finite weight");
        return;
    }
    if (std::holds_alternative<DenseNet>(f)) {
        const auto& net = std::get<DenseNet>(f);
        if (net.layers.empty()) throw ValidationError("dense net: need at least one layer");
        int prev = net.layers[0].A.cols;
        for (size_t j = 0; j < net.layers.size(); ++j) {
            const auto& l = net.layers[j];
            if (l.A.rows <= 0 || l.A.cols <= 0)
                throw ValidationError("dense net: empty layer matrix");
            if (l.A.cols != prev)
                throw ValidationError("dense net: layer " + std::to_string(j) +
                                      " width does not chain");
            for (double v : l.A.a)
                if (!std::isfinite(v)) throw ValidationError("dense net: non-finite weight");
            if (l.budget_kind == BudgetKind::Filter12)
                throw ValidationError("dense net: filter_12 budget is conv-only");
            if (!(l.budget > 0)) throw ValidationError("dense net: budget must be positive");
            if (dense_layer_norm(l) > l.budget + kBudgetTol)
                throw ValidationError("dense net: layer " + std::to_string(j) +
                                      " norm exceeds budget");
            if (l.act.kind == Activation::Kind::LeakyRelu &&
                !(l.act.leaky_slope >= 0 && l.act.leaky_slope <= 1))
                throw ValidationError("dense net: leaky slope must lie in [0, 1]");
            prev = l.A.rows;
        }
        return;
    }
    conv_shape_chain(std::get<ConvNet>(f));
}

int latent_dim(const ReconMap& f) {
    return Visitor::apply(f, [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearMap>) return m.A.cols;
        else if constexpr (std::is_same_v<T, DenseNet>) return m.layers.front().A.cols;
        else {
            int n = 1;
            for (int e : m.input_shape) n *= e;
            return n;
        }
    });
}

int output_dim(const ReconMap& f) {
    return Visitor::apply(f, [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearMap>) return m.A.rows;
        else if constexpr (std::is_same_v<T, DenseNet>) return m.layers.back().A.rows;
        else {
            ConvNet copy = m;
            auto chain = conv_shape_chain(copy);
            int n = 1;
            for (int e : chain.back()) n *= e;
            return n;
        }
    });
}

namespace {

struct DenseStates {
    std::vector<Vec> x;  // x[0] = h, x[j] = activations after layer j
    std::vector<Vec> s;  // pre-activations
};

DenseStates dense_forward(const DenseNet& net, const Vec& h) {
    DenseStates st;
    st.x.push_back(h);
    for (const auto& l : net.layers) {
        Vec pre = matvec(l.A, st.x.back());
        Vec post(pre.size());
        for (size_t i = 0; i < pre.size(); ++i) post[i] = l.act.apply(pre[i]);
        st.s.push_back(std::move(pre));
        st.x.push_back(std::move(post));
    }
    return st;
}

struct ConvStates {
    std::vector<Tensor> x;                 // x[0] = input tensor
    std::vector<Tensor> s;                 // pre-activations (empty for pool)
    std::vector<std::vector<int>> argmax;  // pool routing (empty for conv)
};

ConvStates conv_net_forward(const ConvNet& net, const Vec& h) {
    ConvStates st;
    Tensor in(net.input_shape);
    if (h.size() != in.a.size())
        throw ValidationError("conv net: latent dimension does not match input shape");
    in.a = h;
    st.x.push_back(std::move(in));
    for (const auto& l : net.layers) {
        if (l.is_pool) {
            std::vector<int> am;
            Tensor out = pool_forward(st.x.back(), l.window, &am);
            st.s.emplace_back();
            st.argmax.push_back(std::move(am));
            st.x.push_back(std::move(out));
        } else {
            Tensor pre = conv_forward(st.x.back(), l.filters, l.strides);
            Tensor post = pre;
            for (auto& v : post.a) v = l.act.apply(v);
            st.s.push_back(std::move(pre));
            st.argmax.emplace_back();
            st.x.push_back(std::move(post));
        }
    }
    return st;
}

}  // namespace

Vec forward(const ReconMap& f, const Vec& h) {
    if (static_cast<int>(h.size()) != latent_dim(f))
        throw ValidationError("forward: latent dimension mismatch");
    return Visitor::apply(f, [&](const auto& m) -> Vec {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearMap>) {
            return matvec(m.A, h);
        } else if constexpr (std::is_same_v<T, DenseNet>) {
            return dense_forward(m, h).x.back();
        } else {
            return conv_net_forward(m, h).x.back().a;
        }
    });
}

Vec eval(const ReconMap& f, const DataSpace& space, const Vec& h) {
    Vec y = forward(f, h);
    if (static_cast<int>(y.size()) != space.dim)
        throw ValidationError("eval: map output dimension does not match space");
    return space.project(y);
}

std::vector<LayerNorms> layer_norms(const ReconMap& f) {
    std::vector<LayerNorms> out;
    Visitor::apply(f, [&](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearMap>) {
            LayerNorms n;
            n.layer_kind = "linear";
            n.entrywise_l1 = entrywise_l1(m.A);
            n.frobenius = frobenius(m.A);
            n.spectral = spectral_norm(m.A);
            out.push_back(std::move(n));
        } else if constexpr (std::is_same_v<T, DenseNet>) {
            for (const auto& l : m.layers) {
                LayerNorms n;
                n.layer_kind = "dense";
                n.entrywise_l1 = entrywise_l1(l.A);
                n.frobenius = frobenius(l.A);
                n.spectral = spectral_norm(l.A);
                n.budget = l.budget;
                out.push_back(std::move(n));
            }
        } else {
            for (const auto& l : m.layers) {
                LayerNorms n;
                if (l.is_pool) {
                    n.layer_kind = "pool";
                } else {
                    n.layer_kind = "conv";
                    double l1 = 0.0, fr = 0.0;
                    for (const auto& flt : l.filters)
                        for (double v : flt.a) {
                            l1 += std::abs(v);
                            fr += v * v;
                        }
                    n.entrywise_l1 = l1;
                    n.frobenius = std::sqrt(fr);
                    n.filter_12 = filter_norm_12(l.filters);
                    n.budget = l.budget;
                }
                out.push_back(std::move(n));
            }
        }
        return 0;
    });
    return out;
}

double map_distance(const ReconMap& f, const ReconMap& g, const LatentSpace& latent, double eps) {
    if (latent_dim(f) != latent_dim(g) || output_dim(f) != output_dim(g))
        throw ValidationError("map_distance: maps must share dimensions");
    if (latent_dim(f) != latent.dim)
        throw ValidationError("map_distance: latent space dimension mismatch");
    double best = 0.0;
    for (const auto& h : latent.eps_net(eps)) {
        const double d = std::sqrt(sqdist(forward(f, h), forward(g, h)));
        best = std::max(best, d);
    }
    return best;
}

size_t num_params(const ReconMap& f) {
    return Visitor::apply(f, [](const auto& m) -> size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearMap>) return m.A.a.size();
        else if constexpr (std::is_same_v<T, DenseNet>) {
            size_t n = 0;
            for (const auto& l : m.layers) n += l.A.a.size();
            return n;
        } else {
            size_t n = 0;
            for (const auto& l : m.layers)
                if (!l.is_pool)
                    for (const auto& flt : l.filters) n += flt.a.size();
            return n;
        }
    });
}

Vec get_params(const ReconMap& f) {
    Vec p;
    p.reserve(num_params(f));
    Visitor::apply(f, [&](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearMap>) {
            p.insert(p.end(), m.A.a.begin(), m.A.a.end());
        } else if constexpr (std::is_same_v<T, DenseNet>) {
            for (const auto& l : m.layers) p.insert(p.end(), l.A.a.begin(), l.A.a.end());
        } else {
            for (const auto& l : m.layers)
                if (!l.is_pool)
                    for (const auto& flt : l.filters) p.insert(p.end(), flt.a.begin(), flt.a.end());
        }
        return 0;
    });
    return p;
}

void set_params(ReconMap& f, const Vec& p) {
    if (p.size() != num_params(f)) throw ValidationError("set_params: size mismatch");
    size_t off = 0;
    std::visit(
        [&](auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearMap>) {
                std::copy(p.begin(), p.end(), m.A.a.begin());
            } else if constexpr (std::is_same_v<T, DenseNet>) {
                for (auto& l : m.layers) {
                    std::copy(p.begin() + off, p.begin() + off + l.A.a.size(), l.A.a.begin());
                    off += l.A.a.size();
                }
            } else {
                for (auto& l : m.layers)
                    if (!l.is_pool)
                        for (auto& flt : l.filters) {
                            std::copy(p.begin() + off, p.begin() + off + flt.a.size(),
                                      flt.a.begin());
                            off += flt.a.size();
                        }
            }
        },
        f);
}

void rescale_to_budgets(ReconMap& f) {
    std::visit(
        [&](auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DenseNet>) {
                for (auto& l : m.layers) {
                    const double n = dense_layer_norm(l);
                    if (n > l.budget) {
                        const double s = l.budget / n;
                        for (auto& v : l.A.a) v *= s;
                    }
                }
            } else if constexpr (std::is_same_v<T, ConvNet>) {
                for (auto& l : m.layers) {
                    if (l.is_pool) continue;
                    const double n = filter_norm_12(l.filters);
                    if (n > l.budget) {
                        const double s = l.budget / n;
                        for (auto& flt : l.filters)
                            for (auto& v : flt.a) v *= s;
                    }
                }
            }
        },
        f);
}

namespace {

// d project(y) / dy, transposed, applied to g. The box projection uses the
// zero subgradient on active faces.
Vec proj_jtv(const DataSpace& sp, const Vec& y, const Vec& g) {
    if (sp.kind == DataSpace::Kind::Box) {
        Vec r(g.size(), 0.0);
        for (int i = 0; i < sp.dim; ++i)
            if (y[i] > sp.lower[i] && y[i] < sp.upper[i]) r[i] = g[i];
        return r;
    }
    Vec u = sub(y, sp.center);
    const double n = norm2(u);
    if (n <= sp.radius) return g;
    Vec r = g;
    axpy(r, -dot(u, g) / (n * n), u);
    for (auto& v : r) v *= sp.radius / n;
    return r;
}

}  // namespace

LossGradients loss_gradients(const ReconMap& f, const DataSpace& space, const Vec& z,
                             const Vec& h, bool want_params, bool want_latent) {
    if (static_cast<int>(z.size()) != space.dim)
        throw ValidationError("loss_gradients: sample dimension mismatch");

    LossGradients out;
    const auto finish = [&](const Vec& y) -> Vec {
        Vec p = space.project(y);
        Vec resid = sub(p, z);
        out.loss = sqnorm(resid);
        return proj_jtv(space, y, scale(resid, 2.0));  // d loss / d y
    };

    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearMap>) {
                Vec y = matvec(m.A, h);
                Vec gy = finish(y);
                if (want_latent) out.wrt_latent = matTvec(m.A, gy);
                if (want_params) {
                    out.wrt_params.assign(m.A.a.size(), 0.0);
                    for (int i = 0; i < m.A.rows; ++i)
                        for (int j = 0; j < m.A.cols; ++j)
                            out.wrt_params[static_cast<size_t>(i) * m.A.cols + j] = gy[i] * h[j];
                }
            } else if constexpr (std::is_same_v<T, DenseNet>) {
                DenseStates st = dense_forward(m, h);
                Vec g = finish(st.x.back());
                std::vector<Mat> grads;
                if (want_params) {
                    grads.reserve(m.layers.size());
                    for (const auto& l : m.layers) grads.emplace_back(l.A.rows, l.A.cols);
                }
                for (int j = static_cast<int>(m.layers.size()) - 1; j >= 0; --j) {
                    const auto& l = m.layers[j];
                    Vec gs(g.size());
                    for (size_t i = 0; i < g.size(); ++i)
                        gs[i] = g[i] * l.act.deriv(st.s[j][i]);
                    if (want_params) {
                        auto& G = grads[j];
                        const Vec& xin = st.x[j];
                        for (int r = 0; r < G.rows; ++r)
                            for (int c = 0; c < G.cols; ++c)
                                G(r, c) = gs[r] * xin[c];
                    }
                    g = matTvec(l.A, gs);
                }
                if (want_latent) out.wrt_latent = std::move(g);
                if (want_params) {
                    out.wrt_params.reserve(num_params(f));
                    for (const auto& G : grads)
                        out.wrt_params.insert(out.wrt_params.end(), G.a.begin(), G.a.end());
                }
            } else {
                ConvStates st = conv_net_forward(m, h);
                Vec gy = finish(st.x.back().a);
                Tensor g = st.x.back();
                g.a = gy;
                std::vector<std::vector<Tensor>> fgrads(m.layers.size());
                for (int j = static_cast<int>(m.layers.size()) - 1; j >= 0; --j) {
                    const auto& l = m.layers[j];
                    Tensor gin(st.x[j].shape);
                    if (l.is_pool) {
                        const auto& am = st.argmax[j];
                        for (size_t i = 0; i < g.a.size(); ++i)
                            if (am[i] >= 0) gin.a[static_cast<size_t>(am[i])] += g.a[i];
                    } else {
                        Tensor gs = g;
                        for (size_t i = 0; i < gs.a.size(); ++i)
                            gs.a[i] *= l.act.deriv(st.s[j].a[i]);
                        if (want_params) {
                            fgrads[j].reserve(l.filters.size());
                            for (const auto& flt : l.filters) fgrads[j].emplace_back(flt.shape);
                        }
                        conv_backward(st.x[j], l.filters, l.strides, gs,
                                      want_params ? &fgrads[j] : nullptr, &gin);
                    }
                    g = std::move(gin);
                }
                if (want_latent) out.wrt_latent = std::move(g.a);
                if (want_params) {
                    out.wrt_params.reserve(num_params(f));
                    for (const auto& layer_grads : fgrads)
                        for (const auto& t : layer_grads)
                            out.wrt_params.insert(out.wrt_params.end(), t.a.begin(), t.a.end());
                }
            }
        },
        f);
    return out;
}

}  // namespace latcode
