#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "strata/symmetry.hpp"

namespace strata {

struct SpanResult {
    int k = 0;
    std::vector<size_t> indices;  // selected points, in selection order
    std::vector<Vec> basis_points;
};

// Greedy rho-independent selection: start at index 0, then repeatedly add the
// point farthest from the current affine span while that distance is >= 2 rho.
// Ties go to the lowest index.
SpanResult effective_span(const std::vector<Vec>& points, double rho);

// Weights omega_k r^k for a family of balls.
DiscreteMeasure ball_measure(const std::vector<Vec>& centers, const Vec& radii, int k);

struct ReifenbergOptions {
    int t_levels = 4;        // t = (r/10) 2^{-i}, i < t_levels
    int s_levels = 8;        // minimum dyadic levels in the ds/s integral
    double delta = 1e-2;     // hypothesis threshold
    double packing_bound = -1.0;  // default 4 omega_k
};

struct PackingReport {
    int k = 0;
    Vec x0;
    double r = 0.0;
    std::vector<double> t_values;
    std::vector<double> hypothesis_by_t;  // max over x of the hypothesis integral / t^k
    double hypothesis_ratio = 0.0;
    double packing_ratio = 0.0;           // mu(B_r(x0)) / r^k
    bool hypothesis_ok = false;
    bool packing_ok = false;
    size_t centers = 0;
};

PackingReport reifenberg_check(const std::vector<Vec>& centers, const Vec& radii, int k, const Vec& x0,
                               double r, const ReifenbergOptions& opt = {});

// Radii recovered from weights omega_k r^k (k >= 1).
PackingReport reifenberg_check(const DiscreteMeasure& mu, int k, const Vec& x0, double r,
                               const ReifenbergOptions& opt = {});

struct StratumOptions {
    QuadOptions quad{32, 32, 8, false, true};
    HomogeneityMode mode = HomogeneityMode::DensityGap;
};

struct StratumSample {
    std::vector<Vec> points;
    double spacing = 0.0;
    size_t checked = 0;
    size_t undetermined = 0;
    int levels = 0;
};

// Lattice search for S^k_{eps,r} in B_R(x0): members of the lattice
// x0 + h Z^n are refined to h/2 through their 3^n neighbours until h = r.
// A lattice point at spacing h is tested with r_min = h.
StratumSample detect_stratum(const Field& u, int k, double eps, double r, const Vec& x0, double R,
                             const StratumOptions& opt = {});

enum class BallLabel { Good, Bad, TerminalR, EnergyDrop };
const char* ball_label_name(BallLabel label);

struct BallNode {
    Vec center;
    double radius = 0.0;
    BallLabel label = BallLabel::Good;
    int depth = 0;
    double energy = 0.0;       // E, for balls that were refined
    std::vector<Vec> pinch;    // F_delta
    int span = -1;
    AffineSubspace plane;      // spanned subspace for good balls
    bool center_check = false;  // vartheta_{radius/20}(center) > E - xi at the parent
    bool off_plane = false;    // added to cover stratum points outside the tube
    std::vector<size_t> stratum_points;  // indices into CoverTree::stratum
    std::vector<BallNode> children;
};

struct CoverParams {
    int k = 0;
    double eps = 1.0;
    double r = 1.0 / 64;
    double R = 1.0;
    double rho = 1.0 / 128;
    double delta = -1.0;  // default eps/4
    double xi = -1.0;     // default eps/4
    Vec x0;
    int samples_per_orthant = 200;  // E is sampled on this many * 2^n points
    QuadOptions quad{32, 32, 8, false, true};
};

struct CoverTree {
    CoverParams params;
    std::vector<Vec> stratum;
    std::vector<BallNode> roots;
    size_t leaves = 0;
    size_t terminal_r = 0;
    double leaf_tally = 0.0;  // sum over leaves of radius^k
    int max_depth = 0;
};

// If stratum is null, detect_stratum(u, k, eps, r, x0, R) supplies the sample.
CoverTree build_cover(const Field& u, const CoverParams& params, const std::vector<Vec>* stratum = nullptr);

// Every leaf, depth first.
std::vector<const BallNode*> cover_leaves(const CoverTree& tree);

// Pairwise disjointness of the 1/10 shrinks of every sibling set.
bool siblings_disjoint(const CoverTree& tree);

// Every stratum point in B_R(x0) lies in some leaf ball.
bool stratum_covered(const CoverTree& tree);

struct Box {
    Vec lo, hi;
};

// Lebesgue measure of B_r(S) inside the box by voxel counting.
double tube_volume(const std::vector<Vec>& S, double r, const Box& box, int voxels_per_r = 8);

// (2r)^{k-n} tube_volume.
double minkowski_content(const std::vector<Vec>& S, double r, int k, const Box& box, int voxels_per_r = 8);

struct TailOptions {
    Vec center;           // empty means the origin
    double radius = 1.0;  // the region is B_radius(center)
    int max_depth = 24;   // analytic refinement cap
    double cells_per_scale = 4.0;
};

struct TailResult {
    std::vector<double> lambdas;
    std::vector<double> measures;
    std::vector<double> unresolved;  // volume decided by a centre sample only
    double exponent = 0.0;           // log-log slope over the upper half
    double residual = 0.0;           // rms of the fit
    int fit_points = 0;
};

TailResult tail_distribution(const Field& u, int j, const std::vector<double>& lambdas,
                             const TailOptions& opt = {});

}  // namespace strata
