#pragma once

#include <string>
#include <vector>

#include "strata/fields.hpp"
#include "strata/quadrature.hpp"

namespace strata {

struct PhiValue {
    double value = 0.0;
    double derivative = 0.0;
};

// Fixed C^2 cutoff: phi' = -1 on [0,8], a quintic smoothstep ramp on (8,9.5),
// zero beyond; phi(t) = int_t^inf -phi'.
PhiValue cutoff_phi(double t);
double cutoff_phi_second(double t);

// r^{a_p-n} int_{B_r(x)} ((p-1)/2 |Du|^2 + (p-1)/(p+1) |u|^{p+1}).
QuadValue theta(const Field& u, const Vec& x, double r, const QuadOptions& opt = {});

// Cutoff-weighted density.
QuadValue vartheta(const Field& u, const Vec& x, double r, const QuadOptions& opt = {});

// vartheta(2r) - vartheta(r); tol is the sum of both tolerances.
QuadValue density_gap(const Field& u, const Vec& x, double r, const QuadOptions& opt = {});

// s^{a_p-n-2} int_{B_{8s}(x)} |(y-x).Du + 2u/(p-1)|^2.
QuadValue radial_deficit(const Field& u, const Vec& x, double s, const QuadOptions& opt = {});

// Y(y) = psi(|y-c|^2/rho^2) (A (y-c) + a) with psi(t) = (1-t)_+^5.
struct VectorTestField {
    Vec center;
    double radius = 1.0;
    Vec matrix;  // n x n row-major; empty means zero
    Vec shift;   // empty means zero
};

// phi(y) = psi(|y-c|^2/rho^2) (amp + slope.(y-c)).
struct ScalarTestFunction {
    Vec center;
    double radius = 1.0;
    double amp = 1.0;
    Vec slope;  // empty means zero
};

// value: int [(|Du|^2/2 - |u|^{p+1}/(p+1)) div Y - DY(Du,Du)];
// scale: the same integral with every term in absolute value.
QuadValue stationarity_residual(const Field& u, const VectorTestField& Y,
                                const QuadOptions& opt = {});

// value: int (Du.Dphi - |u|^{p-1} u phi); scale as above.
QuadValue weak_residual(const Field& u, const ScalarTestFunction& phi, const QuadOptions& opt = {});

struct DensityScan {
    Vec x;
    std::vector<double> radii;
    std::vector<double> theta;
    std::vector<double> vartheta;
    std::vector<double> gap;  // vartheta(2r) - vartheta(r)
    std::vector<double> tol;  // tolerance of gap
    std::string rule;
    int radial_nodes = 0;
    int angular_nodes = 0;
};

DensityScan density_scan(const Field& u, const Vec& x, const std::vector<double>& radii,
                         const QuadOptions& opt = {});

std::string density_scan_csv(const DensityScan& scan);

}  // namespace strata
