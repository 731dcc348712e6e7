#pragma once

#include <cstdint>
#include <vector>

#include "strata/fields.hpp"

namespace strata {

struct DiscreteMeasure {
    std::vector<Vec> points;
    Vec weights;

    int dim() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }
    size_t size() const { return points.size(); }
    // Throws InvalidArgument / DimensionMismatch on malformed input.
    void validate() const;
};

struct SymmetricEigen {
    Vec values;              // descending
    std::vector<Vec> vectors;  // orthonormal, first nonzero coordinate positive
    int sweeps = 0;
};

// Cyclic Jacobi on a row-major n x n symmetric matrix, stopped once the
// off-diagonal Frobenius norm is below 1e-13 * trace.
SymmetricEigen symmetric_eigen(const Vec& a, int n);

struct MomentSpectrum {
    Vec x_cm;
    double mass = 0.0;
    Vec values;
    std::vector<Vec> vectors;
    Vec moment;  // the second-moment matrix about x_cm, row-major
};

struct AffineSubspace {
    Vec base;
    std::vector<Vec> frame;
    int k() const { return static_cast<int>(frame.size()); }
};

// Restriction is to the open ball |y - x| < r.
MomentSpectrum moment_spectrum(const DiscreteMeasure& mu, const Vec& x, double r);

struct Displacement {
    double value = 0.0;
    AffineSubspace minimizer;
};

Displacement displacement(const DiscreteMeasure& mu, const Vec& x, double r, int k);

// Sampling oracle for the closed form above: random and gridded frames, x_cm
// and perturbed bases, then a shrinking random-rotation polish of the best frame.
double displacement_bruteforce(const DiscreteMeasure& mu, const Vec& x, double r, int k,
                               int trials = 2000, std::uint64_t seed = 1);

// Principal-angle distance between linear parts plus the base offset measured
// orthogonally to V.
double subspace_distance(const AffineSubspace& V, const AffineSubspace& W);

// r^{a_p-n-2} int_{B_r(x)} |u - v|^2 plus a bump-family surrogate of d_{0,1}.
double pair_distance(const Field& u, const DiscreteMeasure& mu, const Field& v,
                     const DiscreteMeasure& eta, const Vec& x, double r, int bumps = 64);

// The measure part alone.
double measure_distance(const DiscreteMeasure& mu, const DiscreteMeasure& eta, const Vec& x,
                        double r, int bumps = 64);

}  // namespace strata
