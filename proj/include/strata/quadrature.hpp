#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "strata/fields.hpp"

namespace strata {

// Node counts refer to the reported (fine) evaluation; the tolerance run
// halves every count and reports the difference.
struct QuadOptions {
    int radial = 64;   // Gauss-Legendre nodes per radial piece
    int axial = 64;    // polar-angle nodes when the integrand is axially symmetric
    int angular = 8;   // nodes per polar angle of the product sphere grid
    bool tolerance = true;
    bool skip_capped = true;  // grid cells touching capped samples
};

struct QuadValue {
    double value = 0.0;
    double tol = 0.0;
    double scale = 0.0;  // integral of the absolute integrand
};

// Radial weights as functions of tau = |y - x|^2 / r^2.
enum class Weight { Ball, Phi, PhiPrime };

struct BallIntegral {
    Vec x;
    double r = 1.0;
    std::vector<Weight> weights;  // one per integrand component
    // Integrand depends on y only through u, grad u and |y - x|, so a power-law
    // field may be integrated on its symmetry orbits.
    bool axial = false;
    // Grid balls must hold at least this many cells within radius r (0 disables).
    int min_cells = 50;
};

// out[j] receives the unweighted j-th component at y.
using Integrand = std::function<void(const double* y, double u, const double* grad, double* out)>;

std::vector<QuadValue> integrate_ball(const Field& u, const BallIntegral& spec, const Integrand& f,
                                      const QuadOptions& opt = {});

// Gauss-Legendre rule on [0,1]; cached and thread safe.
const std::vector<std::pair<double, double>>& gauss_legendre01(int n);

// Product-angle rule on S^{dim-1}: points (dim entries each, flattened) and weights.
struct SphereRule {
    int dim = 0;
    std::vector<double> points;
    std::vector<double> weights;
    size_t size() const { return weights.size(); }
};
const SphereRule& sphere_rule(int dim, int nodes);

}  // namespace strata
