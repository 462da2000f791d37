#pragma once

#include <string>
#include <vector>

#include "core/linalg.hpp"

namespace latcode {

// Compact subset of R^d the data lives in: a closed euclidean ball or an
// axis-aligned box. Projection is the euclidean metric projection.
struct DataSpace {
    enum class Kind { Ball, Box };

    Kind kind = Kind::Ball;
    int dim = 0;
    Vec center;        // ball
    double radius = 0; // ball
    Vec lower, upper;  // box

    static DataSpace ball(Vec center, double radius);
    static DataSpace box(Vec lower, Vec upper);

    double diameter() const;
    Vec project(const Vec& x) const;
    bool contains(const Vec& x, double tol = 1e-9) const;
    // sup over the space of the euclidean norm
    double max_norm() const;
    std::string describe() const;
};

// Latent space H in R^k: origin-centered ball, box, or an explicit finite
// set (codebook index sets are the finite case).
struct LatentSpace {
    enum class Kind { Ball, Box, Finite };

    Kind kind = Kind::Ball;
    int dim = 0;
    double radius = 0;        // ball
    Vec lower, upper;         // box
    std::vector<Vec> points;  // finite

    static LatentSpace ball(int k, double radius);
    static LatentSpace box(Vec lower, Vec upper);
    static LatentSpace finite(std::vector<Vec> pts);
    // {e_1, ..., e_k}: the standard basis codebook index set
    static LatentSpace basis(int k);

    double max_norm() const;
    Vec project(const Vec& h) const;
    bool contains(const Vec& h, double tol = 1e-9) const;

    // Finite subset with covering radius <= eps, built from axis grids whose
    // per-axis cell half-width is at most eps/sqrt(k); ball nets are grid
    // centers with cells meeting the ball, projected onto it (projection is
    // nonexpansive, so the covering radius is preserved). Finite spaces are
    // their own net. Throws if the grid would exceed 2^24 points.
    std::vector<Vec> eps_net(double eps) const;
};

// Finitely supported probability measure. Weights are validated
// (nonnegative, summing to one within 1e-9), renormalized exactly, and
// zero-weight atoms are dropped.
struct DiscreteMeasure {
    std::vector<Vec> atoms;
    Vec weights;

    DiscreteMeasure() = default;
    DiscreteMeasure(std::vector<Vec> atoms_, Vec weights_);
    static DiscreteMeasure uniform(std::vector<Vec> atoms_);

    int size() const { return static_cast<int>(atoms.size()); }
    int dim() const { return atoms.empty() ? 0 : static_cast<int>(atoms[0].size()); }
    Vec mean() const;
};

// Sample set bound to the space it was drawn from. Construction rejects
// points outside the space (tolerance 1e-9).
struct Dataset {
    DataSpace space;
    std::vector<Vec> samples;

    Dataset(DataSpace sp, std::vector<Vec> pts);

    int size() const { return static_cast<int>(samples.size()); }
    int dim() const { return space.dim; }
    DiscreteMeasure empirical() const;
};

}  // namespace latcode
