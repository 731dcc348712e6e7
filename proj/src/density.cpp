#include "strata/density.hpp"

#include <array>
#include <cstdio>
#include <sstream>

namespace strata {

PhiValue cutoff_phi(double t) {
    if (t < 0.0) fail(ErrorKind::NegativeArgument, "cutoff argument must be nonnegative");
    if (t <= 8.0) return {8.75 - t, -1.0};
    if (t >= 9.5) return {0.0, 0.0};
    double s = (9.5 - t) / 1.5;
    double S = s * s * s * (s * (6.0 * s - 15.0) + 10.0);
    double area = s * s * s * s * (s * (s - 3.0) + 2.5);
    return {1.5 * area, -S};
}

double cutoff_phi_second(double t) {
    if (t < 0.0) fail(ErrorKind::NegativeArgument, "cutoff argument must be nonnegative");
    if (t <= 8.0 || t >= 9.5) return 0.0;
    double s = (9.5 - t) / 1.5;
    double dS = 30.0 * s * s * (s - 1.0) * (s - 1.0);
    return dS / 1.5;
}

namespace {

double grad2(const double* g, int n) { return dot(g, g, n); }

bool on_singular_plane(const Field& u, const Vec& x, double r) {
    return u.kind() == FieldKind::PowerLaw && u.dist_to_singular(x.data()) <= 1e-13 * r;
}

// int_{B_r} |P z|^{-a_p} over a ball centred on the singular plane.
double centered_power_integral(const Field& u, double r) {
    int n = u.dim(), m = u.power().m(), d = n - m;
    double a = d - u.params().alpha_p();
    double beta = std::beta(0.5 * a, 0.5 * m + 1.0);
    return sphere_area(d) * ball_volume(m) * std::pow(r, a + m) * 0.5 * beta;
}

}  // namespace

QuadValue theta(const Field& u, const Vec& x, double r, const QuadOptions& opt) {
    const ProblemParams& pp = u.params();
    const int n = u.dim();
    const double norm_r = std::pow(r, pp.alpha_p() - n);
    if (on_singular_plane(u, x, r)) {
        const double c = u.power().c, al = pp.alpha();
        double coef = 0.5 * (pp.p - 1.0) * c * c * al * al +
                      (pp.p - 1.0) / (pp.p + 1.0) * std::pow(std::abs(c), pp.p + 1.0);
        double v = norm_r * coef * centered_power_integral(u, r);
        return {v, 1e-15 * std::abs(v), std::abs(v)};
    }
    const double p = pp.p;
    BallIntegral spec{x, r, {Weight::Ball}, true};
    auto res = integrate_ball(u, spec,
                              [&](const double*, double uv, const double* g, double* out) {
                                  out[0] = 0.5 * (p - 1.0) * grad2(g, n) +
                                           (p - 1.0) / (p + 1.0) * std::pow(std::abs(uv), p + 1.0);
                              },
                              opt);
    return {norm_r * res[0].value, norm_r * res[0].tol, norm_r * res[0].scale};
}

QuadValue vartheta(const Field& u, const Vec& x, double r, const QuadOptions& opt) {
    const ProblemParams& pp = u.params();
    const int n = u.dim();
    const double p = pp.p;
    BallIntegral spec{x, r, {Weight::Phi, Weight::PhiPrime}, true};
    auto res = integrate_ball(u, spec,
                              [&](const double*, double uv, const double* g, double* out) {
                                  out[0] = 0.5 * grad2(g, n) -
                                           std::pow(std::abs(uv), p + 1.0) / (p + 1.0);
                                  out[1] = uv * uv;
                              },
                              opt);
    const double a = std::pow(r, pp.alpha_p() - n);
    const double b = 2.0 * std::pow(r, pp.alpha_p() - n - 2.0) / (p - 1.0);
    return {a * res[0].value - b * res[1].value, a * res[0].tol + b * res[1].tol,
            a * res[0].scale + b * res[1].scale};
}

QuadValue density_gap(const Field& u, const Vec& x, double r, const QuadOptions& opt) {
    QuadValue hi = vartheta(u, x, 2.0 * r, opt);
    QuadValue lo = vartheta(u, x, r, opt);
    double tol = hi.tol + lo.tol;
    // Roundoff floor for the difference of two nearly equal sums.
    tol = std::max(tol, 1e-11 * (std::abs(hi.value) + std::abs(lo.value)));
    return {hi.value - lo.value, tol, hi.scale + lo.scale};
}

QuadValue radial_deficit(const Field& u, const Vec& x, double s, const QuadOptions& opt) {
    const ProblemParams& pp = u.params();
    const int n = u.dim();
    const double al = pp.alpha();
    BallIntegral spec{x, 8.0 * s, {Weight::Ball}, true};
    auto res = integrate_ball(u, spec,
                              [&](const double* y, double uv, const double* g, double* out) {
                                  double t = al * uv;
                                  for (int a = 0; a < n; ++a) t += (y[a] - x[a]) * g[a];
                                  out[0] = t * t;
                              },
                              opt);
    const double c = std::pow(s, pp.alpha_p() - n - 2.0);
    return {c * res[0].value, c * res[0].tol, c * res[0].scale};
}

namespace {

struct Bump {
    double psi = 0.0;
    std::array<double, kMaxDim> grad{};
};

Bump bump_at(const double* y, const Vec& c, double rho, int n) {
    Bump b;
    double t = 0.0;
    for (int a = 0; a < n; ++a) t += (y[a] - c[a]) * (y[a] - c[a]);
    t /= rho * rho;
    if (t >= 1.0) return b;
    double om = 1.0 - t;
    double om4 = om * om * om * om;
    b.psi = om4 * om;
    double dpsi = -5.0 * om4;
    for (int a = 0; a < n; ++a) b.grad[a] = dpsi * 2.0 * (y[a] - c[a]) / (rho * rho);
    return b;
}

}  // namespace

QuadValue stationarity_residual(const Field& u, const VectorTestField& Y, const QuadOptions& opt) {
    const int n = u.dim();
    const double p = u.params().p;
    if (static_cast<int>(Y.center.size()) != n) fail(ErrorKind::DimensionMismatch, "test field centre");
    Vec A = Y.matrix.empty() ? Vec(n * n, 0.0) : Y.matrix;
    Vec shift = Y.shift.empty() ? Vec(n, 0.0) : Y.shift;
    if (static_cast<int>(A.size()) != n * n || static_cast<int>(shift.size()) != n)
        fail(ErrorKind::DimensionMismatch, "test field coefficients");
    double trA = 0.0;
    for (int a = 0; a < n; ++a) trA += A[a * n + a];
    BallIntegral spec{Y.center, Y.radius, {Weight::Ball, Weight::Ball}, false};
    auto res = integrate_ball(u, spec,
                              [&](const double* y, double uv, const double* g, double* out) {
                                  Bump b = bump_at(y, Y.center, Y.radius, n);
                                  std::array<double, kMaxDim> V{};
                                  for (int i = 0; i < n; ++i) {
                                      double s = shift[i];
                                      for (int j = 0; j < n; ++j) s += A[i * n + j] * (y[j] - Y.center[j]);
                                      V[i] = s;
                                  }
                                  double divY = b.psi * trA + dot(V.data(), b.grad.data(), n);
                                  double gAg = 0.0;
                                  for (int i = 0; i < n; ++i)
                                      for (int j = 0; j < n; ++j) gAg += g[i] * A[i * n + j] * g[j];
                                  double DYgg = b.psi * gAg + dot(V.data(), g, n) * dot(b.grad.data(), g, n);
                                  double e = 0.5 * grad2(g, n) - std::pow(std::abs(uv), p + 1.0) / (p + 1.0);
                                  out[0] = e * divY - DYgg;
                                  out[1] = std::abs(e * divY) + std::abs(DYgg);
                              },
                              opt);
    return {res[0].value, res[0].tol, res[1].value};
}

QuadValue weak_residual(const Field& u, const ScalarTestFunction& phi, const QuadOptions& opt) {
    const int n = u.dim();
    const double p = u.params().p;
    if (static_cast<int>(phi.center.size()) != n) fail(ErrorKind::DimensionMismatch, "test function centre");
    Vec slope = phi.slope.empty() ? Vec(n, 0.0) : phi.slope;
    BallIntegral spec{phi.center, phi.radius, {Weight::Ball, Weight::Ball}, false};
    auto res = integrate_ball(u, spec,
                              [&](const double* y, double uv, const double* g, double* out) {
                                  Bump b = bump_at(y, phi.center, phi.radius, n);
                                  double L = phi.amp;
                                  for (int a = 0; a < n; ++a) L += slope[a] * (y[a] - phi.center[a]);
                                  double gdp = 0.0;
                                  for (int a = 0; a < n; ++a) gdp += g[a] * (b.psi * slope[a] + L * b.grad[a]);
                                  double src = std::pow(std::abs(uv), p - 1.0) * uv * b.psi * L;
                                  out[0] = gdp - src;
                                  out[1] = std::abs(gdp) + std::abs(src);
                              },
                              opt);
    return {res[0].value, res[0].tol, res[1].value};
}

DensityScan density_scan(const Field& u, const Vec& x, const std::vector<double>& radii,
                         const QuadOptions& opt) {
    DensityScan scan;
    scan.x = x;
    scan.radii = radii;
    scan.rule = u.is_analytic() ? "gauss-legendre-product" : "grid-midpoint";
    scan.radial_nodes = opt.radial;
    scan.angular_nodes = opt.axial;
    for (size_t i = 0; i < radii.size(); ++i) {
        if (i > 0 && !(radii[i] > radii[i - 1]))
            fail(ErrorKind::InvalidArgument, "scan radii must be increasing");
        double r = radii[i];
        scan.theta.push_back(theta(u, x, r, opt).value);
        QuadValue lo = vartheta(u, x, r, opt);
        QuadValue hi = vartheta(u, x, 2.0 * r, opt);
        scan.vartheta.push_back(lo.value);
        scan.gap.push_back(hi.value - lo.value);
        scan.tol.push_back(std::max(lo.tol + hi.tol, 1e-11 * (std::abs(lo.value) + std::abs(hi.value))));
    }
    return scan;
}

std::string density_scan_csv(const DensityScan& scan) {
    std::ostringstream os;
    os << "r,theta,vartheta,W,tol\n";
    char buf[256];
    for (size_t i = 0; i < scan.radii.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", scan.radii[i],
                      scan.theta[i], scan.vartheta[i], scan.gap[i], scan.tol[i]);
        os << buf;
    }
    return os.str();
}

}  // namespace strata
