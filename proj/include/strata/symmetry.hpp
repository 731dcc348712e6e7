#pragma once

#include <vector>

#include "strata/density.hpp"
#include "strata/subspace.hpp"

namespace strata {

// r^{a_p-n} int_{B_r(x)} Du (x) Du, row-major. tol bounds the Frobenius norm
// of the quadrature error.
struct GradientMoment {
    Vec matrix;
    double tol = 0.0;
};

GradientMoment gradient_moment(const Field& u, const Vec& x, double r, const QuadOptions& opt = {});

struct Deficit {
    double value = 0.0;
    double tol = 0.0;
    std::vector<Vec> frame;
};

// r^{a_p-n} int_{B_r(x)} sum_i |v_i . Du|^2 for an orthonormal frame.
Deficit invariance_deficit(const Field& u, const std::vector<Vec>& frame, const Vec& x, double r,
                           const QuadOptions& opt = {});

// Minimum over k-planes: the k smallest eigenvalues of the gradient moment.
Deficit min_invariance_deficit(const Field& u, const Vec& x, double r, int k, const QuadOptions& opt = {});

enum class HomogeneityMode { DensityGap, RadialDeficit };

struct SymmetryProbe {
    Vec x;
    double r = 0.0;
    int k = 0;
    double homogeneity_deficit = 0.0;
    double homogeneity_tol = 0.0;
    double invariance_deficit = 0.0;
    double invariance_tol = 0.0;
    std::vector<Vec> best_frame;
    bool verdict = false;
};

// Deficits at one (x, r) that serve every k at once.
struct ScaleProbe {
    Vec x;
    double r = 0.0;
    double gap = 0.0;
    double gap_tol = 0.0;
    Vec eigenvalues;  // gradient moment, descending
    std::vector<Vec> eigenvectors;
    double moment_tol = 0.0;

    // Sum of the k smallest eigenvalues (k = 0 gives 0).
    double min_deficit(int k) const;
    SymmetryProbe probe(int k, double eps) const;
};

ScaleProbe scale_probe(const Field& u, const Vec& x, double r, const QuadOptions& opt = {},
                       HomogeneityMode mode = HomogeneityMode::DensityGap);

SymmetryProbe hsv_symmetric(const Field& u, const Vec& x, double r, int k, double eps,
                            const QuadOptions& opt = {}, HomogeneityMode mode = HomogeneityMode::DensityGap);

// Radius the probe at (x, r) needs inside the field domain.
double probe_reach(double r, HomogeneityMode mode);

// Dyadic scales r_min * 2^j below 1.
std::vector<double> dyadic_scales(double r_min);

struct Membership {
    bool member = false;
    bool undetermined = false;
    int scales_tested = 0;
    int scales_skipped = 0;
    int exit_scale = -1;  // index of the symmetric scale for non-members
};

// x lies in S^k unless some dyadic scale in [r_min, 1) is (k+1, eps)-symmetric.
// Scales whose probe leaves the domain are skipped; more than a quarter
// skipped leaves the point undetermined. first_scale is only a search hint:
// that index is tried first, the verdict does not depend on it.
Membership stratum_membership(const Field& u, const Vec& x, int k, double eps, double r_min,
                              const QuadOptions& opt = {}, HomogeneityMode mode = HomogeneityMode::DensityGap,
                              int first_scale = 0);

// sup{0 <= r <= 1 : sup_{B_r(x)} sum_{i<=j} r^i |D^i u| <= r^{-2/(p-1)}}.
double regularity_scale(const Field& u, const Vec& x, int j);

int knp(int n, double p);

struct PointStrata {
    Vec x;
    std::vector<ScaleProbe> scales;  // one per dyadic scale; skipped scales have r < 0
    std::vector<char> member;        // per k in [0, n]
    bool undetermined = false;
    int stratum = -1;                // smallest k with membership, -1 if undetermined
    double regularity = 0.0;         // regularity_scale with j = 0
};

struct StrataReport {
    double eps = 0.0;
    double r_min = 0.0;
    std::vector<double> scales;
    std::vector<PointStrata> points;
};

StrataReport strata_report(const Field& u, const std::vector<Vec>& points, double eps, double r_min,
                           const QuadOptions& opt = {}, HomogeneityMode mode = HomogeneityMode::DensityGap);

}  // namespace strata
