#pragma once

#include <memory>
#include <vector>

#include "strata/common.hpp"

namespace strata {

// Exponent data for -Δu = |u|^{p-1}u in R^n.
struct ProblemParams {
    int n = 3;
    double p = 6.0;

    double alpha() const { return 2.0 / (p - 1.0); }
    double alpha_p() const { return 2.0 * (p + 1.0) / (p - 1.0); }

    // Throws SupercriticalityViolated unless n >= 3 and p > (n+2)/(n-2).
    static ProblemParams make(int n, double p);
};

enum class FieldKind { Zero, PowerLaw, AffineBump, Grid };

// c |P(y - center)|^{-alpha}, P the projection orthogonal to span(frame).
struct PowerLawData {
    double c = 0.0;
    Vec center;
    std::vector<Vec> frame;   // orthonormal, m vectors
    std::vector<Vec> normal;  // orthonormal basis of the complement, n-m vectors
    int m() const { return static_cast<int>(frame.size()); }
};

// (amp + slope.(y-center)) exp(-|y-center|^2 / width^2)
struct BumpData {
    double amp = 0.0;
    Vec slope;
    Vec center;
    double width = 1.0;
};

// Cell-centred samples on a uniform grid, row-major with the last axis fastest.
struct GridData {
    Vec origin;
    double spacing = 0.0;
    std::vector<int> shape;
    std::shared_ptr<const std::vector<double>> values;
    std::shared_ptr<const std::vector<char>> capped_mask;
    double amplitude = 1.0;  // blow-ups rescale values lazily

    size_t size() const;
    std::vector<size_t> strides() const;
    double at(size_t flat) const { return amplitude * (*values)[flat]; }
    bool capped(size_t flat) const { return (*capped_mask)[flat] != 0; }
    std::vector<int> capped_cells() const;
};

class Field {
public:
    static Field zero(const ProblemParams& params);
    // No solution identity is imposed on c; frame must be orthonormal.
    static Field power_law(const ProblemParams& params, double c, const Vec& center,
                           const std::vector<Vec>& frame);
    static Field affine_bump(const ProblemParams& params, double amp, const Vec& slope,
                             const Vec& center, double width);
    static Field grid(const ProblemParams& params, const Vec& origin, double spacing,
                      const std::vector<int>& shape, std::vector<double> values,
                      const std::vector<int>& capped_cells = {});

    FieldKind kind() const { return kind_; }
    const ProblemParams& params() const { return params_; }
    int dim() const { return params_.n; }
    bool is_analytic() const { return kind_ != FieldKind::Grid; }

    const PowerLawData& power() const { return power_; }
    const BumpData& bump() const { return bump_; }
    const GridData& grid_data() const { return grid_; }

    double value(const Vec& y) const { return value(y.data()); }
    double value(const double* y) const;
    // Returns u(y) and writes the gradient into grad (length n).
    double value_grad(const double* y, double* grad) const;
    Vec gradient(const Vec& y) const;
    // Row-major n x n.
    Vec hessian(const Vec& y) const;
    // Frobenius norm of the order-th derivative tensor at y.
    double derivative_norm(const Vec& y, int order) const;

    // Distance to the singular set; +inf for fields without one.
    double dist_to_singular(const double* y) const;
    bool has_singular_set() const { return kind_ == FieldKind::PowerLaw; }

    // Whether B_r(x) lies where the field and its gradient can be evaluated.
    bool contains_ball(const Vec& x, double r) const;

    // Same grid samples viewed through new geometry and amplitude.
    Field regridded(const Vec& origin, double spacing, double amplitude) const;

private:
    ProblemParams params_;
    FieldKind kind_ = FieldKind::Zero;
    PowerLawData power_;
    BumpData bump_;
    GridData grid_;
};

// c0 with c0^{p-1} = alpha (n - m - 2 - alpha).
double singular_constant(int n, double p, int m);

// v0 = c0 |P(x - center)|^{-2/(p-1)} with singular set center + span(frame).
Field make_singular_solution(int n, double p, int m, const Vec& center,
                             const std::vector<Vec>& frame);

// T_{x,r}u(y) = r^{2/(p-1)} u(x + r y).
Field blow_up(const Field& u, const Vec& x, double r);

// Cell-centred sampling of an analytic field on origin + [0, side]^n.
Field sample_to_grid(const Field& u, const Vec& origin, double side, double h);

// Pointwise -Δu - |u|^{p-1}u from closed-form second derivatives.
double pde_residual(const Field& u, const Vec& y);

}  // namespace strata
