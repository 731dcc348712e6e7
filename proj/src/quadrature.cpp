#include "strata/quadrature.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <mutex>

#include "strata/density.hpp"

namespace strata {

const std::vector<std::pair<double, double>>& gauss_legendre01(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<std::vector<std::pair<double, double>>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return *it->second;
    auto rule = std::make_unique<std::vector<std::pair<double, double>>>(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        if (n == 1) p0 = 1.0;
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        (*rule)[n - 1 - i] = {0.5 * (x + 1.0), 0.5 * w};
    }
    auto& ref = *rule;
    cache.emplace(n, std::move(rule));
    return ref;
}

namespace {

SphereRule build_sphere(int dim, int nodes) {
    SphereRule rule;
    rule.dim = dim;
    if (dim == 1) {
        rule.points = {1.0, -1.0};
        rule.weights = {1.0, 1.0};
        return rule;
    }
    if (dim == 2) {
        int count = 2 * nodes;
        for (int k = 0; k < count; ++k) {
            double phi = 2.0 * kPi * (k + 0.5) / count;
            rule.points.push_back(std::cos(phi));
            rule.points.push_back(std::sin(phi));
            rule.weights.push_back(2.0 * kPi / count);
        }
        return rule;
    }
    SphereRule lower = build_sphere(dim - 1, nodes);
    const auto& gl = gauss_legendre01(nodes);
    for (const auto& [t, w] : gl) {
        double th = kPi * t;
        double wt = kPi * w * std::pow(std::sin(th), dim - 2);
        for (size_t j = 0; j < lower.size(); ++j) {
            rule.points.push_back(std::cos(th));
            for (int a = 0; a < dim - 1; ++a)
                rule.points.push_back(std::sin(th) * lower.points[j * (dim - 1) + a]);
            rule.weights.push_back(wt * lower.weights[j]);
        }
    }
    return rule;
}

double support_factor(const std::vector<Weight>& ws) {
    for (Weight w : ws)
        if (w != Weight::Ball) return std::sqrt(9.5);
    return 1.0;
}

bool uses_cutoff(const std::vector<Weight>& ws) { return support_factor(ws) > 1.0; }

inline double weight_value(Weight w, double tau) {
    switch (w) {
        case Weight::Ball: return tau < 1.0 ? 1.0 : 0.0;
        case Weight::Phi: return cutoff_phi(tau).value;
        case Weight::PhiPrime: return cutoff_phi(tau).derivative;
    }
    return 0.0;
}

// Map tau in [0,1] onto [a,b] with clustering at both ends.
inline void smooth_map(double a, double b, double t, double w, double& x, double& dx) {
    x = a + (b - a) * t * t * (3.0 - 2.0 * t);
    dx = (b - a) * 6.0 * t * (1.0 - t) * w;
}

// Map onto [0,L] with node clustering x = L t^q at a singular left end.
inline void power_map(double L, double q, double t, double w, double& x, double& dx) {
    x = L * std::pow(t, q);
    dx = q * L * std::pow(t, q - 1.0) * w;
}

// Visit radial nodes over consecutive pieces [brk[i], brk[i+1]].
template <class Body>
void radial_nodes(const double* brk, int count, bool singular_first, double qpow, int nodes,
                  Body&& body) {
    const auto& gl = gauss_legendre01(nodes);
    for (int piece = 0; piece + 1 < count; ++piece) {
        double a = brk[piece], b = brk[piece + 1];
        if (!(b > a)) continue;
        for (const auto& [t, w] : gl) {
            double x, dx;
            if (piece == 0 && singular_first && a == 0.0)
                power_map(b, qpow, t, w, x, dx);
            else
                smooth_map(a, b, t, w, x, dx);
            body(x, dx);
        }
    }
}

struct Accum {
    std::vector<double> value, absval;
    explicit Accum(size_t k) : value(k, 0.0), absval(k, 0.0) {}
};

struct RunConfig {
    int radial, axial, angular;
};

// Marginal of a radial weight over the m invariant directions:
// W(q) = int_{R^m} w((|t|^2 + q) / r^2) dt.
void marginal_weights(const std::vector<Weight>& ws, int m, double r, double Rs, double q,
                      double* W) {
    const size_t K = ws.size();
    if (m == 0) {
        double tau = q / (r * r);
        for (size_t j = 0; j < K; ++j) W[j] = weight_value(ws[j], tau);
        return;
    }
    double h2 = Rs * Rs - q;
    if (h2 <= 0.0) {
        std::fill(W, W + K, 0.0);
        return;
    }
    double area = sphere_area(m);
    double vol = ball_volume(m);
    double brk[3];
    int nb = 0;
    brk[nb++] = 0.0;
    double s8 = 8.0 * r * r - q;
    if (s8 > 0.0 && s8 < h2) brk[nb++] = std::sqrt(s8);
    brk[nb++] = std::sqrt(h2);
    const auto& gl = gauss_legendre01(12);
    for (size_t j = 0; j < K; ++j) {
        if (ws[j] == Weight::Ball) {
            double rem = r * r - q;
            W[j] = rem > 0.0 ? vol * std::pow(rem, 0.5 * m) : 0.0;
            continue;
        }
        double acc = 0.0;
        for (int piece = 0; piece + 1 < nb; ++piece) {
            double a = brk[piece], b = brk[piece + 1];
            for (const auto& [t, w] : gl) {
                double s = a + (b - a) * t;
                double tau = (s * s + q) / (r * r);
                acc += (b - a) * w * weight_value(ws[j], tau) * std::pow(s, m - 1);
            }
        }
        W[j] = area * acc;
    }
}

// Geometry of a power-law field relative to the ball centre x.
struct SingularFrame {
    int n = 0, m = 0, d = 0;
    Vec foot;                 // projection of x onto the singular plane
    double bn = 0.0;          // distance from x to the plane
    std::vector<Vec> nbasis;  // orthonormal normal basis, nbasis[0] points from foot to x
    std::vector<Vec> frame;
};

SingularFrame singular_frame(const Field& u, const Vec& x) {
    const PowerLawData& pw = u.power();
    SingularFrame g;
    g.n = u.dim();
    g.m = pw.m();
    g.d = g.n - g.m;
    g.frame = pw.frame;
    Vec w = sub(x, pw.center);
    Vec off(g.n, 0.0);
    for (const Vec& nv : pw.normal) {
        double c = dot(w, nv);
        for (int a = 0; a < g.n; ++a) off[a] += c * nv[a];
    }
    g.bn = norm(off);
    g.foot = sub(x, off);
    std::vector<Vec> cand;
    if (g.bn > 0.0) cand.push_back(scale(off, 1.0 / g.bn));
    for (const Vec& nv : pw.normal) cand.push_back(nv);
    std::vector<Vec> basis;
    for (Vec& c : cand) {
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& b : basis) {
                double s = dot(c, b);
                for (int a = 0; a < g.n; ++a) c[a] -= s * b[a];
            }
        double nn = norm(c);
        if (nn < 1e-8) continue;
        basis.push_back(scale(c, 1.0 / nn));
        if (static_cast<int>(basis.size()) == g.d) break;
    }
    g.nbasis = basis;
    return g;
}

double singular_power(const Field& u) {
    double e = (u.dim() - u.power().m()) - u.params().alpha_p();
    double q = std::ceil(3.0 / std::max(e, 1e-3));
    return std::clamp(q, 1.0, 12.0);
}

void collect_splits(const BallIntegral& spec, double Rs, std::vector<double>& splits) {
    splits.clear();
    if (uses_cutoff(spec.weights)) {
        double s8 = std::sqrt(8.0) * spec.r;
        if (s8 < Rs) splits.push_back(s8);
    }
}

// Pole at the foot point: rho breakpoints along a ray whose direction makes
// cos(theta) = ct with the foot-to-x axis.
int pole_breaks(double bn, double ct, double Rs, const std::vector<double>& splits, double* brk) {
    double beta = bn * ct;
    int count = 0;
    brk[count++] = 0.0;
    for (double s : splits) {
        if (s > bn) brk[count++] = beta + std::sqrt(std::max(0.0, beta * beta - bn * bn + s * s));
    }
    brk[count++] = beta + std::sqrt(std::max(0.0, beta * beta - bn * bn + Rs * Rs));
    return count;
}

void run_axial(const Field& u, const BallIntegral& spec, const Integrand& f, const RunConfig& rc,
               Accum& acc) {
    const size_t K = spec.weights.size();
    const double r = spec.r;
    const double Rs = r * support_factor(spec.weights);
    SingularFrame g = singular_frame(u, spec.x);
    const int n = g.n, d = g.d;
    std::vector<double> splits;
    collect_splits(spec, Rs, splits);
    const bool pole_foot = g.bn < Rs;
    const double qpow = singular_power(u);
    const Vec& B = g.nbasis[0];
    const Vec& E = g.nbasis[1];
    const double sarea = sphere_area(d - 1);
    std::vector<double> out(K), W(K);
    std::array<double, kMaxDim> y{}, grad{};
    const auto& glt = gauss_legendre01(rc.axial);
    double brk[8];
    for (const auto& [tt, wt] : glt) {
        double th = kPi * tt;
        double ct = std::cos(th), st = std::sin(th);
        double wth = kPi * wt * sarea * std::pow(st, d - 2);
        int nb;
        if (pole_foot) {
            nb = pole_breaks(g.bn, ct, Rs, splits, brk);
        } else {
            nb = 0;
            brk[nb++] = 0.0;
            for (double s : splits) brk[nb++] = s;
            brk[nb++] = Rs;
        }
        radial_nodes(brk, nb, pole_foot, qpow, rc.radial, [&](double rho, double drho) {
            double z1 = (pole_foot ? 0.0 : g.bn) + rho * ct;
            double z2 = rho * st;
            double q = (z1 - g.bn) * (z1 - g.bn) + z2 * z2;
            marginal_weights(spec.weights, g.m, r, Rs, q, W.data());
            bool any = false;
            for (size_t j = 0; j < K; ++j) any = any || W[j] != 0.0;
            if (!any || rho <= 0.0) return;
            for (int a = 0; a < n; ++a) y[a] = g.foot[a] + z1 * B[a] + z2 * E[a];
            double uv = u.value_grad(y.data(), grad.data());
            f(y.data(), uv, grad.data(), out.data());
            double vol = wth * drho * std::pow(rho, d - 1);
            for (size_t j = 0; j < K; ++j) {
                double c = out[j] * W[j] * vol;
                acc.value[j] += c;
                acc.absval[j] += std::abs(c);
            }
        });
    }
}

void run_adapted(const Field& u, const BallIntegral& spec, const Integrand& f, const RunConfig& rc,
                 Accum& acc) {
    const size_t K = spec.weights.size();
    const double r = spec.r;
    const double Rs = r * support_factor(spec.weights);
    SingularFrame g = singular_frame(u, spec.x);
    const int n = g.n, d = g.d, m = g.m;
    std::vector<double> splits;
    collect_splits(spec, Rs, splits);
    const double qpow = singular_power(u);
    const SphereRule& nsph = sphere_rule(d, rc.angular);
    const SphereRule* tsph = m > 0 ? &sphere_rule(m, rc.angular) : nullptr;
    std::vector<double> out(K);
    std::array<double, kMaxDim> y{}, grad{}, zdir{};
    double brk[8], tbrk[8];
    const int tnodes = std::max(4, rc.radial / 2);
    for (size_t k = 0; k < nsph.size(); ++k) {
        const double* om = &nsph.points[k * d];
        for (int a = 0; a < n; ++a) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) s += om[i] * g.nbasis[i][a];
            zdir[a] = s;
        }
        int nb = pole_breaks(g.bn, om[0], Rs, splits, brk);
        radial_nodes(brk, nb, true, qpow, rc.radial, [&](double rho, double drho) {
            if (rho <= 0.0) return;
            double q = rho * rho - 2.0 * rho * g.bn * om[0] + g.bn * g.bn;
            double base_vol = nsph.weights[k] * drho * std::pow(rho, d - 1);
            if (m == 0) {
                for (int a = 0; a < n; ++a) y[a] = g.foot[a] + rho * zdir[a];
                double uv = u.value_grad(y.data(), grad.data());
                f(y.data(), uv, grad.data(), out.data());
                double tau = q / (r * r);
                for (size_t j = 0; j < K; ++j) {
                    double c = out[j] * weight_value(spec.weights[j], tau) * base_vol;
                    acc.value[j] += c;
                    acc.absval[j] += std::abs(c);
                }
                return;
            }
            double h2 = Rs * Rs - q;
            if (h2 <= 0.0) return;
            int tb = 0;
            tbrk[tb++] = 0.0;
            for (double s : splits)
                if (s * s > q && s * s < Rs * Rs) tbrk[tb++] = std::sqrt(s * s - q);
            tbrk[tb++] = std::sqrt(h2);
            for (size_t tk = 0; tk < tsph->size(); ++tk) {
                const double* td = &tsph->points[tk * m];
                radial_nodes(tbrk, tb, false, 1.0, tnodes, [&](double s, double ds) {
                    for (int a = 0; a < n; ++a) {
                        double v = g.foot[a] + rho * zdir[a];
                        for (int i = 0; i < m; ++i) v += s * td[i] * g.frame[i][a];
                        y[a] = v;
                    }
                    double uv = u.value_grad(y.data(), grad.data());
                    f(y.data(), uv, grad.data(), out.data());
                    double tau = (q + s * s) / (r * r);
                    double vol = base_vol * tsph->weights[tk] * ds * std::pow(s, m - 1);
                    for (size_t j = 0; j < K; ++j) {
                        double c = out[j] * weight_value(spec.weights[j], tau) * vol;
                        acc.value[j] += c;
                        acc.absval[j] += std::abs(c);
                    }
                });
            }
        });
    }
}

void run_centered(const Field& u, const BallIntegral& spec, const Integrand& f, const RunConfig& rc,
                  const std::vector<Vec>& basis, Accum& acc) {
    const size_t K = spec.weights.size();
    const int n = u.dim();
    const double r = spec.r;
    const double Rs = r * support_factor(spec.weights);
    std::vector<double> splits;
    collect_splits(spec, Rs, splits);
    double brk[8];
    int nb = 0;
    brk[nb++] = 0.0;
    for (double s : splits) brk[nb++] = s;
    brk[nb++] = Rs;
    const SphereRule& sph = sphere_rule(n, rc.angular);
    std::vector<double> out(K);
    std::array<double, kMaxDim> y{}, grad{}, dir{};
    for (size_t k = 0; k < sph.size(); ++k) {
        const double* om = &sph.points[k * n];
        for (int a = 0; a < n; ++a) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += om[i] * basis[i][a];
            dir[a] = s;
        }
        radial_nodes(brk, nb, false, 1.0, rc.radial, [&](double rho, double drho) {
            for (int a = 0; a < n; ++a) y[a] = spec.x[a] + rho * dir[a];
            double uv = u.value_grad(y.data(), grad.data());
            f(y.data(), uv, grad.data(), out.data());
            double tau = rho * rho / (r * r);
            double vol = sph.weights[k] * drho * std::pow(rho, n - 1);
            for (size_t j = 0; j < K; ++j) {
                double c = out[j] * weight_value(spec.weights[j], tau) * vol;
                acc.value[j] += c;
                acc.absval[j] += std::abs(c);
            }
        });
    }
}

void run_analytic(const Field& u, const BallIntegral& spec, const Integrand& f, const RunConfig& rc,
                  Accum& acc) {
    const int n = u.dim();
    const double Rs = spec.r * support_factor(spec.weights);
    std::vector<Vec> basis;
    if (u.kind() == FieldKind::PowerLaw) {
        SingularFrame g = singular_frame(u, spec.x);
        if (spec.axial && g.d >= 2) {
            run_axial(u, spec, f, rc, acc);
            return;
        }
        if (g.bn < Rs) {
            run_adapted(u, spec, f, rc, acc);
            return;
        }
        // Orient the polar axis toward the singular plane.
        basis.push_back(scale(g.nbasis[0], -1.0));
    }
    std::vector<Vec> rest = orthonormal_complement(basis, n);
    basis.insert(basis.end(), rest.begin(), rest.end());
    run_centered(u, spec, f, rc, basis, acc);
}

struct GridRun {
    Accum fine, coarse;
    size_t ball_cells = 0;
    explicit GridRun(size_t k) : fine(k), coarse(k) {}
};

void run_grid(const Field& u, const BallIntegral& spec, const Integrand& f, const QuadOptions& opt,
              GridRun& run) {
    const GridData& g = u.grid_data();
    const int n = u.dim();
    const size_t K = spec.weights.size();
    const double r = spec.r;
    const double Rs = r * support_factor(spec.weights);
    const double h = g.spacing;
    auto st = g.strides();
    std::vector<int> lo(n), hi(n), I(n);
    for (int a = 0; a < n; ++a) {
        lo[a] = std::max(1, static_cast<int>(std::ceil((spec.x[a] - Rs - g.origin[a]) / h - 0.5)));
        hi[a] = std::min(g.shape[a] - 2,
                         static_cast<int>(std::floor((spec.x[a] + Rs - g.origin[a]) / h - 0.5)));
        if (lo[a] > hi[a]) return;
    }
    std::vector<double> out(K);
    std::array<double, kMaxDim> y{}, grad{};
    const double cell_vol = std::pow(h, n);
    I = lo;
    while (true) {
        double d2 = 0.0;
        size_t flat = 0;
        bool even = true;
        for (int a = 0; a < n; ++a) {
            y[a] = g.origin[a] + (I[a] + 0.5) * h;
            double dd = y[a] - spec.x[a];
            d2 += dd * dd;
            flat += static_cast<size_t>(I[a]) * st[a];
            even = even && (I[a] % 2 == 0);
        }
        if (d2 < Rs * Rs) {
            bool touches_cap = g.capped(flat);
            for (int a = 0; a < n && !touches_cap; ++a)
                touches_cap = g.capped(flat + st[a]) || g.capped(flat - st[a]);
            if (d2 < r * r) ++run.ball_cells;
            if (touches_cap) {
                if (!opt.skip_capped)
                    fail(ErrorKind::NonFiniteIntegrand, "integration region contains a capped cell");
            } else {
                double uv = g.at(flat);
                for (int a = 0; a < n; ++a) grad[a] = (g.at(flat + st[a]) - g.at(flat - st[a])) / (2.0 * h);
                f(y.data(), uv, grad.data(), out.data());
                double tau = d2 / (r * r);
                for (size_t j = 0; j < K; ++j) {
                    double c = out[j] * weight_value(spec.weights[j], tau) * cell_vol;
                    run.fine.value[j] += c;
                    run.fine.absval[j] += std::abs(c);
                    if (even) run.coarse.value[j] += c * std::ldexp(1.0, n);
                }
            }
        }
        int a = n - 1;
        while (a >= 0 && ++I[a] > hi[a]) {
            I[a] = lo[a];
            --a;
        }
        if (a < 0) break;
    }
}

}  // namespace

const SphereRule& sphere_rule(int dim, int nodes) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<SphereRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(dim, nodes);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
    auto rule = std::make_unique<SphereRule>(build_sphere(dim, nodes));
    auto& ref = *rule;
    cache.emplace(key, std::move(rule));
    return ref;
}

std::vector<QuadValue> integrate_ball(const Field& u, const BallIntegral& spec, const Integrand& f,
                                      const QuadOptions& opt) {
    const size_t K = spec.weights.size();
    if (static_cast<int>(spec.x.size()) != u.dim())
        fail(ErrorKind::DimensionMismatch, "ball centre has wrong dimension");
    if (!(spec.r > 0.0)) fail(ErrorKind::InvalidArgument, "radius must be positive");
    const double Rs = spec.r * support_factor(spec.weights);
    if (!u.contains_ball(spec.x, Rs)) fail(ErrorKind::OutOfDomain, "integration ball leaves the field domain");
    std::vector<QuadValue> res(K);
    if (u.kind() == FieldKind::Grid) {
        GridRun run(K);
        run_grid(u, spec, f, opt, run);
        if (spec.min_cells > 0 && run.ball_cells < static_cast<size_t>(spec.min_cells))
            fail(ErrorKind::BallTooSmall, "ball holds fewer than the minimum number of grid cells");
        for (size_t j = 0; j < K; ++j) {
            res[j].value = run.fine.value[j];
            res[j].scale = run.fine.absval[j];
            res[j].tol = opt.tolerance ? std::abs(run.fine.value[j] - run.coarse.value[j]) : 0.0;
        }
        return res;
    }
    RunConfig fine{opt.radial, opt.axial, opt.angular};
    Accum a(K);
    run_analytic(u, spec, f, fine, a);
    for (size_t j = 0; j < K; ++j) {
        res[j].value = a.value[j];
        res[j].scale = a.absval[j];
    }
    if (opt.tolerance) {
        RunConfig coarse{std::max(2, opt.radial / 2), std::max(2, opt.axial / 2),
                         std::max(2, opt.angular / 2)};
        Accum c(K);
        run_analytic(u, spec, f, coarse, c);
        for (size_t j = 0; j < K; ++j)
            res[j].tol = std::max(std::abs(a.value[j] - c.value[j]), 1e-12 * a.absval[j]);
    }
    return res;
}

}  // namespace strata
