#include "strata/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <random>

#include "strata/parallel.hpp"

namespace strata {

GradientMoment gradient_moment(const Field& u, const Vec& x, double r, const QuadOptions& opt) {
    const int n = u.dim();
    if (static_cast<int>(x.size()) != n) fail(ErrorKind::DimensionMismatch, "point dimension");
    if (!u.contains_ball(x, r)) fail(ErrorKind::OutOfDomain, "ball leaves the field domain");
    const double norm_r = std::pow(r, u.params().alpha_p() - n);
    GradientMoment gm;
    gm.matrix.assign(n * n, 0.0);
    if (u.kind() == FieldKind::Zero) return gm;

    if (u.kind() == FieldKind::PowerLaw) {
        // Du lies in the normal space and the ball is symmetric about the axis
        // through x normal to the singular plane, so two integrals fix M.
        const PowerLawData& pw = u.power();
        const int d = n - pw.m();
        Vec w = sub(x, pw.center);
        Vec bhat(n, 0.0);
        for (const Vec& nv : pw.normal) {
            double c = dot(w, nv);
            for (int a = 0; a < n; ++a) bhat[a] += c * nv[a];
        }
        double bn = norm(bhat);
        bool centred = bn <= 1e-13 * r;
        if (!centred)
            for (double& c : bhat) c /= bn;
        BallIntegral spec{x, r, {Weight::Ball, Weight::Ball}, true};
        auto res = integrate_ball(u, spec,
                                  [&](const double*, double, const double* g, double* out) {
                                      out[0] = dot(g, g, n);
                                      double t = centred ? 0.0 : dot(g, bhat.data(), n);
                                      out[1] = t * t;
                                  },
                                  opt);
        double tr = norm_r * res[0].value, tr_tol = norm_r * res[0].tol;
        double a = norm_r * res[1].value, a_tol = norm_r * res[1].tol;
        if (centred) {
            a = tr / d;
            a_tol = tr_tol / d;
        }
        double rest = (tr - a) / (d - 1);
        for (const Vec& nv : pw.normal)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) gm.matrix[i * n + j] += rest * nv[i] * nv[j];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) gm.matrix[i * n + j] += (a - rest) * bhat[i] * bhat[j];
        gm.tol = a_tol + (tr_tol + a_tol) / std::sqrt(static_cast<double>(d - 1));
        return gm;
    }

    const int comps = n * (n + 1) / 2;
    BallIntegral spec{x, r, std::vector<Weight>(comps, Weight::Ball), false};
    auto res = integrate_ball(u, spec,
                              [&](const double*, double, const double* g, double* out) {
                                  int c = 0;
                                  for (int i = 0; i < n; ++i)
                                      for (int j = i; j < n; ++j) out[c++] = g[i] * g[j];
                              },
                              opt);
    int c = 0;
    double tol2 = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j, ++c) {
            double v = norm_r * res[c].value, t = norm_r * res[c].tol;
            gm.matrix[i * n + j] = gm.matrix[j * n + i] = v;
            tol2 += (i == j ? 1.0 : 2.0) * t * t;
        }
    gm.tol = std::sqrt(tol2);
    return gm;
}

Deficit invariance_deficit(const Field& u, const std::vector<Vec>& frame, const Vec& x, double r,
                           const QuadOptions& opt) {
    const int n = u.dim();
    for (const Vec& v : frame)
        if (static_cast<int>(v.size()) != n) fail(ErrorKind::DimensionMismatch, "frame vector dimension");
    GradientMoment gm = gradient_moment(u, x, r, opt);
    Deficit d;
    d.frame = frame;
    for (const Vec& v : frame) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) d.value += v[i] * gm.matrix[i * n + j] * v[j];
        d.tol += dot(v, v) * gm.tol;
    }
    return d;
}

double ScaleProbe::min_deficit(int k) const {
    const int n = static_cast<int>(eigenvalues.size());
    double s = 0.0;
    for (int i = n - k; i < n; ++i) s += std::max(eigenvalues[i], 0.0);
    return s;
}

SymmetryProbe ScaleProbe::probe(int k, double eps) const {
    const int n = static_cast<int>(eigenvalues.size());
    if (k < 0 || k > n) fail(ErrorKind::InvalidArgument, "k out of range");
    SymmetryProbe p;
    p.x = x;
    p.r = r;
    p.k = k;
    p.homogeneity_deficit = gap;
    p.homogeneity_tol = gap_tol;
    p.invariance_deficit = min_deficit(k);
    p.invariance_tol = k * moment_tol;
    for (int i = n - k; i < n; ++i) p.best_frame.push_back(eigenvectors[i]);
    p.verdict = gap < eps && p.invariance_deficit < eps;
    return p;
}

Deficit min_invariance_deficit(const Field& u, const Vec& x, double r, int k, const QuadOptions& opt) {
    const int n = u.dim();
    if (k < 1 || k > n) fail(ErrorKind::InvalidArgument, "k must lie in [1, n]");
    GradientMoment gm = gradient_moment(u, x, r, opt);
    SymmetricEigen e = symmetric_eigen(gm.matrix, n);
    Deficit d;
    for (int i = n - k; i < n; ++i) {
        d.value += std::max(e.values[i], 0.0);
        d.frame.push_back(e.vectors[i]);
    }
    d.tol = k * gm.tol;
    return d;
}

double probe_reach(double r, HomogeneityMode mode) {
    // vartheta at 2r integrates out to sqrt(10) * 2r.
    return mode == HomogeneityMode::DensityGap ? 2.0 * std::sqrt(10.0) * r : 8.0 * r;
}

ScaleProbe scale_probe(const Field& u, const Vec& x, double r, const QuadOptions& opt, HomogeneityMode mode) {
    if (!u.contains_ball(x, probe_reach(r, mode)))
        fail(ErrorKind::OutOfDomain, "probe ball leaves the field domain");
    ScaleProbe sp;
    sp.x = x;
    sp.r = r;
    QuadValue h = mode == HomogeneityMode::DensityGap ? density_gap(u, x, r, opt) : radial_deficit(u, x, r, opt);
    sp.gap = h.value;
    sp.gap_tol = h.tol;
    GradientMoment gm = gradient_moment(u, x, r, opt);
    SymmetricEigen e = symmetric_eigen(gm.matrix, u.dim());
    sp.eigenvalues = e.values;
    sp.eigenvectors = e.vectors;
    sp.moment_tol = gm.tol;
    return sp;
}

SymmetryProbe hsv_symmetric(const Field& u, const Vec& x, double r, int k, double eps, const QuadOptions& opt,
                            HomogeneityMode mode) {
    if (k < 0 || k > u.dim()) fail(ErrorKind::InvalidArgument, "k out of range");
    return scale_probe(u, x, r, opt, mode).probe(k, eps);
}

std::vector<double> dyadic_scales(double r_min) {
    if (!(r_min > 0.0)) fail(ErrorKind::InvalidArgument, "r_min must be positive");
    std::vector<double> s;
    for (double r = r_min; r < 1.0; r *= 2.0) s.push_back(r);
    if (s.empty()) fail(ErrorKind::InvalidArgument, "no dyadic scale below 1");
    return s;
}

Membership stratum_membership(const Field& u, const Vec& x, int k, double eps, double r_min,
                              const QuadOptions& opt, HomogeneityMode mode, int first_scale) {
    const int n = u.dim();
    if (k < 0 || k > n) fail(ErrorKind::InvalidArgument, "k out of range");
    std::vector<double> scales = dyadic_scales(r_min);
    const int count = static_cast<int>(scales.size());
    if (first_scale < 0 || first_scale >= count) first_scale = 0;
    Membership m;
    if (k == n) {
        m.member = true;
        return m;
    }
    for (int t = 0; t < count; ++t) {
        int j = t == 0 ? first_scale : (t <= first_scale ? t - 1 : t);
        double s = scales[j];
        if (!u.contains_ball(x, probe_reach(s, mode))) {
            ++m.scales_skipped;
            continue;
        }
        ++m.scales_tested;
        if (hsv_symmetric(u, x, s, k + 1, eps, opt, mode).verdict) {
            m.exit_scale = j;
            return m;
        }
    }
    if (4 * m.scales_skipped > static_cast<int>(scales.size())) {
        m.undetermined = true;
        return m;
    }
    m.member = true;
    return m;
}

namespace {

// Sample nodes in the closed unit ball: centre plus shells along fixed directions.
const std::vector<Vec>& unit_ball_nodes(int n) {
    static std::vector<std::vector<Vec>> cache(kMaxDim + 1);
    static std::once_flag flags[kMaxDim + 1];
    std::call_once(flags[n], [n] {
        std::vector<Vec> dirs;
        for (int a = 0; a < n; ++a)
            for (double s : {-1.0, 1.0}) {
                Vec e(n, 0.0);
                e[a] = s;
                dirs.push_back(e);
            }
        std::mt19937_64 rng(12345);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int i = 0; i < 64; ++i) {
            Vec v(n);
            for (double& c : v) c = g(rng);
            dirs.push_back(scale(v, 1.0 / norm(v)));
        }
        std::vector<Vec> nodes{Vec(n, 0.0)};
        for (double f : {0.25, 0.5, 0.75, 1.0})
            for (const Vec& d : dirs) nodes.push_back(scale(d, f));
        cache[n] = std::move(nodes);
    });
    return cache[n];
}

double bisect_scale(const std::function<bool(double)>& ok) {
    if (ok(1.0)) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace

double regularity_scale(const Field& u, const Vec& x, int j) {
    const int n = u.dim();
    if (static_cast<int>(x.size()) != n) fail(ErrorKind::DimensionMismatch, "point dimension");
    if (j < 0) fail(ErrorKind::InvalidArgument, "order must be nonnegative");
    if (u.kind() == FieldKind::Grid && j > 2)
        fail(ErrorKind::UnsupportedOrder, "grid fields support orders up to 2");
    const double al = u.params().alpha();
    if (u.kind() == FieldKind::Zero) return 1.0;

    if (u.kind() == FieldKind::PowerLaw) {
        // |D^i v| = C_i |Pz|^{-alpha-i}; the sup over B_r(x) sits at the point nearest the plane.
        double d = u.dist_to_singular(x.data());
        if (d <= 0.0) return 0.0;
        const PowerLawData& pw = u.power();
        Vec unit = add(pw.center, pw.normal[0]);
        std::vector<double> C;
        for (int i = 0; i <= j; ++i) C.push_back(u.derivative_norm(unit, i));
        return bisect_scale([&](double r) {
            if (r >= d) return false;
            double s = 0.0;
            for (int i = 0; i <= j; ++i) s += std::pow(r, i) * C[i] * std::pow(d - r, -al - i);
            return s <= std::pow(r, -al);
        });
    }

    if (!u.contains_ball(x, 0.0)) fail(ErrorKind::OutOfDomain, "point outside the field domain");
    const std::vector<Vec>& nodes = unit_ball_nodes(n);
    return bisect_scale([&](double r) {
        double sup = 0.0;
        Vec y(n);
        for (const Vec& z : nodes) {
            for (int a = 0; a < n; ++a) y[a] = x[a] + r * z[a];
            if (!u.contains_ball(y, 0.0)) continue;
            double s = 0.0;
            for (int i = 0; i <= j; ++i) s += std::pow(r, i) * u.derivative_norm(y, i);
            sup = std::max(sup, s);
        }
        return sup <= std::pow(r, -al);
    });
}

int knp(int n, double p) {
    ProblemParams pp = ProblemParams::make(n, p);
    double ap = pp.alpha_p();
    double nearest = std::round(ap);
    if (std::abs(ap - nearest) <= 1e-9) return n - static_cast<int>(nearest) + 1;
    return n - static_cast<int>(std::floor(ap));
}

StrataReport strata_report(const Field& u, const std::vector<Vec>& points, double eps, double r_min,
                           const QuadOptions& opt, HomogeneityMode mode) {
    const int n = u.dim();
    StrataReport rep;
    rep.eps = eps;
    rep.r_min = r_min;
    rep.scales = dyadic_scales(r_min);
    rep.points.resize(points.size());
    parallel_for(points.size(), [&](size_t i) {
        PointStrata& ps = rep.points[i];
        ps.x = points[i];
        if (static_cast<int>(ps.x.size()) != n) fail(ErrorKind::DimensionMismatch, "sample point dimension");
        int skipped = 0;
        for (double s : rep.scales) {
            if (!u.contains_ball(ps.x, probe_reach(s, mode))) {
                ScaleProbe none;
                none.x = ps.x;
                none.r = -1.0;
                ps.scales.push_back(none);
                ++skipped;
                continue;
            }
            ps.scales.push_back(scale_probe(u, ps.x, s, opt, mode));
        }
        ps.undetermined = 4 * skipped > static_cast<int>(rep.scales.size());
        ps.member.assign(n + 1, 0);
        for (int k = 0; k <= n; ++k) {
            bool member = true;
            if (k < n)
                for (const ScaleProbe& sp : ps.scales)
                    if (sp.r > 0 && sp.probe(k + 1, eps).verdict) member = false;
            ps.member[k] = member;
        }
        if (!ps.undetermined)
            for (int k = 0; k <= n; ++k)
                if (ps.member[k]) {
                    ps.stratum = k;
                    break;
                }
        bool inside = u.kind() != FieldKind::Grid || u.contains_ball(ps.x, 0.0);
        ps.regularity = inside ? regularity_scale(u, ps.x, 0) : 0.0;
    });
    return rep;
}

}  // namespace strata
