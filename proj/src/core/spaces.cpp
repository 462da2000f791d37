#include "core/spaces.hpp"

#include <cmath>
#include <cstdint>

#include "core/errors.hpp"

namespace latcode {

DataSpace DataSpace::ball(Vec center, double radius) {
    if (center.empty()) throw ValidationError("ball: empty center");
    if (!(radius >= 0) || !std::isfinite(radius))
        throw ValidationError("ball: radius must be finite and nonnegative");
    DataSpace s;
    s.kind = Kind::Ball;
    s.dim = static_cast<int>(center.size());
    s.center = std::move(center);
    s.radius = radius;
    return s;
}

DataSpace DataSpace::box(Vec lower, Vec upper) {
    if (lower.empty() || lower.size() != upper.size())
        throw ValidationError("box: bounds must be nonempty and of equal dimension");
    for (size_t i = 0; i < lower.size(); ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
            throw ValidationError("box: bounds must be finite");
        if (lower[i] > upper[i]) throw ValidationError("box: lower bound exceeds upper bound");
    }
    DataSpace s;
    s.kind = Kind::Box;
    s.dim = static_cast<int>(lower.size());
    s.lower = std::move(lower);
    s.upper = std::move(upper);
    return s;
}

double DataSpace::diameter() const {
    if (kind == Kind::Ball) return 2.0 * radius;
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double d = upper[i] - lower[i];
        s += d * d;
    }
    return std::sqrt(s);
}

Vec DataSpace::project(const Vec& x) const {
    if (static_cast<int>(x.size()) != dim)
        throw ValidationError("project: dimension mismatch");
    if (kind == Kind::Ball) {
        Vec d = sub(x, center);
        const double n = norm2(d);
        if (n <= radius) return x;
        Vec r = center;
        if (n > 0) axpy(r, radius / n, d);
        return r;
    }
    Vec r(x.size());
    for (int i = 0; i < dim; ++i) r[i] = std::min(std::max(x[i], lower[i]), upper[i]);
    return r;
}

bool DataSpace::contains(const Vec& x, double tol) const {
    if (static_cast<int>(x.size()) != dim) return false;
    if (kind == Kind::Ball) return norm2(sub(x, center)) <= radius + tol;
    for (int i = 0; i < dim; ++i)
        if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
    return true;
}

double DataSpace::max_norm() const {
    if (kind == Kind::Ball) return norm2(center) + radius;
    double s = 0.0;
    for (int i = 0; i < dim; ++i)
        s += std::max(lower[i] * lower[i], upper[i] * upper[i]);
    return std::sqrt(s);
}

std::string DataSpace::describe() const {
    if (kind == Kind::Ball)
        return "ball(dim=" + std::to_string(dim) + ", r=" + std::to_string(radius) + ")";
    return "box(dim=" + std::to_string(dim) + ")";
}

LatentSpace LatentSpace::ball(int k, double radius) {
    if (k <= 0) throw ValidationError("latent ball: dimension must be positive");
    if (!(radius >= 0) || !std::isfinite(radius))
        throw ValidationError("latent ball: radius must be finite and nonnegative");
    LatentSpace h;
    h.kind = Kind::Ball;
    h.dim = k;
    h.radius = radius;
    return h;
}

LatentSpace LatentSpace::box(Vec lower, Vec upper) {
    DataSpace chk = DataSpace::box(lower, upper);  // reuse validation
    LatentSpace h;
    h.kind = Kind::Box;
    h.dim = chk.dim;
    h.lower = std::move(chk.lower);
    h.upper = std::move(chk.upper);
    return h;
}

LatentSpace LatentSpace::finite(std::vector<Vec> pts) {
    if (pts.empty()) throw ValidationError("latent finite: need at least one point");
    const size_t d = pts[0].size();
    if (d == 0) throw ValidationError("latent finite: zero-dimensional points");
    for (const auto& p : pts)
        if (p.size() != d) throw ValidationError("latent finite: inconsistent dimensions");
    LatentSpace h;
    h.kind = Kind::Finite;
    h.dim = static_cast<int>(d);
    h.points = std::move(pts);
    return h;
}

LatentSpace LatentSpace::basis(int k) {
    if (k <= 0) throw ValidationError("latent basis: k must be positive");
    std::vector<Vec> pts(static_cast<size_t>(k), Vec(static_cast<size_t>(k), 0.0));
    for (int i = 0; i < k; ++i) pts[i][i] = 1.0;
    return finite(std::move(pts));
}

double LatentSpace::max_norm() const {
    switch (kind) {
        case Kind::Ball: return radius;
        case Kind::Box: {
            double s = 0.0;
            for (int i = 0; i < dim; ++i)
                s += std::max(lower[i] * lower[i], upper[i] * upper[i]);
            return std::sqrt(s);
        }
        case Kind::Finite: {
            double m = 0.0;
            for (const auto& p : points) m = std::max(m, norm2(p));
            return m;
        }
    }
    return 0.0;
}

Vec LatentSpace::project(const Vec& h) const {
    if (static_cast<int>(h.size()) != dim)
        throw ValidationError("latent project: dimension mismatch");
    switch (kind) {
        case Kind::Ball: {
            const double n = norm2(h);
            if (n <= radius) return h;
            return n > 0 ? scale(h, radius / n) : Vec(h.size(), 0.0);
        }
        case Kind::Box: {
            Vec r(h.size());
            for (int i = 0; i < dim; ++i) r[i] = std::min(std::max(h[i], lower[i]), upper[i]);
            return r;
        }
        case Kind::Finite: {
            // nearest point, lowest index on ties
            size_t best = 0;
            double bd = sqdist(h, points[0]);
            for (size_t i = 1; i < points.size(); ++i) {
                const double d = sqdist(h, points[i]);
                if (d < bd) { bd = d; best = i; }
            }
            return points[best];
        }
    }
    return h;
}

bool LatentSpace::contains(const Vec& h, double tol) const {
    if (static_cast<int>(h.size()) != dim) return false;
    switch (kind) {
        case Kind::Ball: return norm2(h) <= radius + tol;
        case Kind::Box:
            for (int i = 0; i < dim; ++i)
                if (h[i] < lower[i] - tol || h[i] > upper[i] + tol) return false;
            return true;
        case Kind::Finite:
            for (const auto& p : points)
                if (std::sqrt(sqdist(h, p)) <= tol) return true;
            return false;
    }
    return false;
}

namespace {

constexpr uint64_t kNetCap = uint64_t(1) << 24;

// Axis grids with cells of half-width <= eps/sqrt(k); emits cell centers.
std::vector<Vec> grid_net(const Vec& lo, const Vec& hi, double eps, int k) {
    const double per_axis = eps / std::sqrt(static_cast<double>(k));
    std::vector<int> m(static_cast<size_t>(k));
    uint64_t total = 1;
    for (int i = 0; i < k; ++i) {
        const double len = hi[i] - lo[i];
        int mi = 1;
        if (len > 0) mi = static_cast<int>(std::ceil(len / (2.0 * per_axis) - 1e-12));
        m[i] = std::max(1, mi);
        total *= static_cast<uint64_t>(m[i]);
        if (total > kNetCap)
            throw ValidationError("eps_net: grid would exceed 2^24 points; increase eps");
    }
    std::vector<Vec> out;
    out.reserve(total);
    Vec cur(static_cast<size_t>(k));
    std::vector<int> idx(static_cast<size_t>(k), 0);
    for (uint64_t c = 0; c < total; ++c) {
        uint64_t rem = c;
        for (int i = k - 1; i >= 0; --i) {
            idx[i] = static_cast<int>(rem % m[i]);
            rem /= m[i];
        }
        for (int i = 0; i < k; ++i) {
            const double len = hi[i] - lo[i];
            cur[i] = lo[i] + (idx[i] + 0.5) * len / m[i];
        }
        out.push_back(cur);
    }
    return out;
}

}  // namespace

std::vector<Vec> LatentSpace::eps_net(double eps) const {
    if (kind == Kind::Finite) return points;
    if (!(eps > 0) || !std::isfinite(eps))
        throw ValidationError("eps_net: eps must be positive and finite");
    if (kind == Kind::Box) return grid_net(lower, upper, eps, dim);

    // Ball: grid the bounding box, keep centers whose cell can meet the
    // ball, then project. For x in the ball with cell center g we have
    // |x - g| <= eps, hence |x - project(g)| <= eps by nonexpansiveness.
    Vec lo(static_cast<size_t>(dim), -radius), hi(static_cast<size_t>(dim), radius);
    std::vector<Vec> raw = grid_net(lo, hi, eps, dim);
    std::vector<Vec> out;
    out.reserve(raw.size());
    for (auto& g : raw) {
        if (norm2(g) <= radius + eps) out.push_back(project(g));
    }
    if (out.empty()) out.push_back(Vec(static_cast<size_t>(dim), 0.0));
    return out;
}

DiscreteMeasure::DiscreteMeasure(std::vector<Vec> atoms_, Vec weights_) {
    if (atoms_.empty()) throw ValidationError("measure: need at least one atom");
    if (atoms_.size() != weights_.size())
        throw ValidationError("measure: atom/weight count mismatch");
    const size_t d = atoms_[0].size();
    if (d == 0) throw ValidationError("measure: zero-dimensional atoms");
    double sum = 0.0;
    for (size_t i = 0; i < atoms_.size(); ++i) {
        if (atoms_[i].size() != d) throw ValidationError("measure: inconsistent atom dimensions");
        for (double v : atoms_[i])
            if (!std::isfinite(v)) throw ValidationError("measure: non-finite atom coordinate");
        if (!(weights_[i] >= 0) || !std::isfinite(weights_[i]))
            throw ValidationError("measure: weights must be finite and nonnegative");
        sum += weights_[i];
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("measure: weights sum to " + std::to_string(sum) + ", expected 1");
    for (size_t i = 0; i < atoms_.size(); ++i) {
        const double w = weights_[i] / sum;
        if (w > 0) {
            atoms.push_back(std::move(atoms_[i]));
            weights.push_back(w);
        }
    }
    if (atoms.empty()) throw ValidationError("measure: all weights are zero");
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<Vec> atoms_) {
    const size_t n = atoms_.size();
    return DiscreteMeasure(std::move(atoms_), Vec(n, 1.0 / static_cast<double>(n)));
}

Vec DiscreteMeasure::mean() const {
    Vec m(static_cast<size_t>(dim()), 0.0);
    for (size_t i = 0; i < atoms.size(); ++i) axpy(m, weights[i], atoms[i]);
    return m;
}

Dataset::Dataset(DataSpace sp, std::vector<Vec> pts) : space(std::move(sp)), samples(std::move(pts)) {
    for (size_t i = 0; i < samples.size(); ++i) {
        if (static_cast<int>(samples[i].size()) != space.dim)
            throw ValidationError("dataset: sample " + std::to_string(i) + " has wrong dimension");
        if (!space.contains(samples[i]))
            throw ValidationError("dataset: sample " + std::to_string(i) + " lies outside " +
                                  space.describe());
    }
}

DiscreteMeasure Dataset::empirical() const {
    if (samples.empty()) throw ValidationError("dataset: empty, no empirical measure");
    return DiscreteMeasure::uniform(samples);
}

}  // namespace latcode
