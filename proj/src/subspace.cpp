#include "strata/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <random>

#include "strata/quadrature.hpp"

namespace strata {

void DiscreteMeasure::validate() const {
    if (points.size() != weights.size())
        fail(ErrorKind::InvalidArgument, "points and weights differ in length");
    int n = dim();
    for (size_t i = 0; i < points.size(); ++i) {
        if (static_cast<int>(points[i].size()) != n)
            fail(ErrorKind::DimensionMismatch, "measure points have mixed dimensions");
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
            fail(ErrorKind::InvalidArgument, "weights must be finite and nonnegative");
    }
}

SymmetricEigen symmetric_eigen(const Vec& a_in, int n) {
    Vec a = a_in;
    Vec v(n * n, 0.0);
    for (int i = 0; i < n; ++i) v[i * n + i] = 1.0;
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += std::abs(a[i * n + i]);
    auto off = [&] {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) s += a[i * n + j] * a[i * n + j];
        return std::sqrt(s);
    };
    SymmetricEigen out;
    const double target = 1e-13 * trace;
    while (out.sweeps < 100 && off() > target) {
        ++out.sweeps;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a[p * n + q];
                if (apq == 0.0) continue;
                double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = v[k * n + p], vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a[i * n + i] > a[j * n + j]; });
    for (int idx : order) {
        out.values.push_back(a[idx * n + idx]);
        Vec col(n);
        for (int k = 0; k < n; ++k) col[k] = v[k * n + idx];
        for (int k = 0; k < n; ++k) {
            if (std::abs(col[k]) > 1e-14) {
                if (col[k] < 0) for (double& c : col) c = -c;
                break;
            }
        }
        out.vectors.push_back(std::move(col));
    }
    return out;
}

MomentSpectrum moment_spectrum(const DiscreteMeasure& mu, const Vec& x, double r) {
    mu.validate();
    const int n = static_cast<int>(x.size());
    if (mu.size() > 0 && mu.dim() != n) fail(ErrorKind::DimensionMismatch, "measure and point dimensions differ");
    MomentSpectrum ms;
    ms.x_cm.assign(n, 0.0);
    std::vector<size_t> inside;
    for (size_t j = 0; j < mu.size(); ++j) {
        if (mu.weights[j] > 0.0 && dist2(mu.points[j].data(), x.data(), n) < r * r) {
            inside.push_back(j);
            ms.mass += mu.weights[j];
            for (int a = 0; a < n; ++a) ms.x_cm[a] += mu.weights[j] * mu.points[j][a];
        }
    }
    if (!(ms.mass > 0.0)) fail(ErrorKind::EmptyRestriction, "no mass in the ball");
    for (double& c : ms.x_cm) c /= ms.mass;
    ms.moment.assign(n * n, 0.0);
    Vec w(n);
    for (size_t j : inside) {
        for (int a = 0; a < n; ++a) w[a] = mu.points[j][a] - ms.x_cm[a];
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) ms.moment[a * n + b] += mu.weights[j] * w[a] * w[b];
    }
    SymmetricEigen e = symmetric_eigen(ms.moment, n);
    ms.values = e.values;
    ms.vectors = e.vectors;
    return ms;
}

Displacement displacement(const DiscreteMeasure& mu, const Vec& x, double r, int k) {
    const int n = static_cast<int>(x.size());
    if (k < 0 || k > n) fail(ErrorKind::InvalidArgument, "k out of range");
    MomentSpectrum ms = moment_spectrum(mu, x, r);
    Displacement d;
    double tail = 0.0;
    for (int i = k; i < n; ++i) tail += std::max(ms.values[i], 0.0);
    d.value = k == n ? 0.0 : std::pow(r, -k - 2.0) * tail;
    d.minimizer.base = ms.x_cm;
    d.minimizer.frame.assign(ms.vectors.begin(), ms.vectors.begin() + k);
    return d;
}

namespace {

struct Restricted {
    std::vector<Vec> pts;
    Vec w;
    Vec x_cm;
};

Restricted restrict_to(const DiscreteMeasure& mu, const Vec& x, double r) {
    Restricted out;
    const int n = static_cast<int>(x.size());
    double mass = 0.0;
    out.x_cm.assign(n, 0.0);
    for (size_t j = 0; j < mu.size(); ++j) {
        if (mu.weights[j] > 0.0 && dist2(mu.points[j].data(), x.data(), n) < r * r) {
            out.pts.push_back(mu.points[j]);
            out.w.push_back(mu.weights[j]);
            mass += mu.weights[j];
            for (int a = 0; a < n; ++a) out.x_cm[a] += mu.weights[j] * mu.points[j][a];
        }
    }
    if (!(mass > 0.0)) fail(ErrorKind::EmptyRestriction, "no mass in the ball");
    for (double& c : out.x_cm) c /= mass;
    return out;
}

double sum_dist2(const Restricted& m, const Vec& base, const std::vector<Vec>& frame) {
    double s = 0.0;
    const int n = static_cast<int>(base.size());
    Vec w(n);
    for (size_t j = 0; j < m.pts.size(); ++j) {
        for (int a = 0; a < n; ++a) w[a] = m.pts[j][a] - base[a];
        double d2 = dot(w, w);
        for (const Vec& f : frame) {
            double t = dot(w, f);
            d2 -= t * t;
        }
        s += m.w[j] * std::max(d2, 0.0);
    }
    return s;
}

// Directions on a half circle (n=2) or hemisphere (n=3).
std::vector<Vec> make_direction_grid(int n) {
    std::vector<Vec> dirs;
    if (n == 2) {
        for (int i = 0; i < 720; ++i) {
            double t = kPi * i / 720.0;
            dirs.push_back({std::cos(t), std::sin(t)});
        }
    } else if (n == 3) {
        const int nt = 90;
        for (int i = 0; i <= nt; ++i) {
            double th = 0.5 * kPi * i / nt;
            int np = std::max(1, static_cast<int>(std::round(4 * nt * std::sin(th))));
            for (int j = 0; j < np; ++j) {
                double ph = 2.0 * kPi * j / np;
                dirs.push_back({std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)});
            }
        }
    }
    return dirs;
}

const std::vector<Vec>& direction_grid(int n) {
    static const std::vector<Vec> g2 = make_direction_grid(2), g3 = make_direction_grid(3), none;
    return n == 2 ? g2 : n == 3 ? g3 : none;
}

}  // namespace

double displacement_bruteforce(const DiscreteMeasure& mu, const Vec& x, double r, int k, int trials,
                               std::uint64_t seed) {
    mu.validate();
    const int n = static_cast<int>(x.size());
    if (k < 0 || k > n) fail(ErrorKind::InvalidArgument, "k out of range");
    Restricted m = restrict_to(mu, x, r);
    if (k == n) return 0.0;
    const double norm_r = std::pow(r, -k - 2.0);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<Vec> bases{m.x_cm};
    for (int i = 0; i < 8; ++i) {
        Vec b = m.x_cm;
        for (double& c : b) c += 1e-3 * r * gauss(rng);
        bases.push_back(b);
    }

    double best = std::numeric_limits<double>::infinity();
    std::vector<Vec> best_frame;
    // x_cm is optimal for every frame; perturbed bases are tried on the winner.
    auto consider = [&](const std::vector<Vec>& frame) {
        double v = sum_dist2(m, m.x_cm, frame);
        if (v < best) {
            best = v;
            best_frame = frame;
        }
    };
    auto try_bases = [&] {
        for (const Vec& b : bases) best = std::min(best, sum_dist2(m, b, best_frame));
    };
    if (k == 0) {
        consider({});
        try_bases();
        return norm_r * best;
    }
    for (int t = 0; t < trials; ++t) {
        std::vector<Vec> frame(k, Vec(n));
        for (Vec& f : frame)
            for (double& c : f) c = gauss(rng);
        if (gram_schmidt(frame)) consider(frame);
    }
    if (n <= 3) {
        for (const Vec& d : direction_grid(n)) {
            if (k == 1) consider({d});
            else if (k == n - 1) consider(orthonormal_complement({d}, n));
        }
    }
    // Polish: small random rotations of the best frame, shrinking the step.
    for (double step = 0.2; step > 1e-8; step *= 0.5) {
        for (int t = 0; t < 30; ++t) {
            std::vector<Vec> frame = best_frame;
            for (Vec& f : frame)
                for (double& c : f) c += step * gauss(rng);
            if (gram_schmidt(frame)) consider(frame);
        }
    }
    try_bases();
    return norm_r * best;
}

double subspace_distance(const AffineSubspace& V, const AffineSubspace& W) {
    const int n = static_cast<int>(V.base.size());
    if (static_cast<int>(W.base.size()) != n) fail(ErrorKind::DimensionMismatch, "ambient dimensions differ");
    if (V.k() != W.k()) fail(ErrorKind::DimensionMismatch, "subspace dimensions differ");
    const int k = V.k();
    auto project_out = [&](const Vec& y) {
        Vec z = y;
        for (const Vec& f : V.frame) {
            double t = dot(y, f);
            for (int a = 0; a < n; ++a) z[a] -= t * f[a];
        }
        return z;
    };
    double angles2 = 0.0;
    if (k > 0) {
        // G = W^T P_V W and H = W^T (I - P_V) W share eigenvectors; read
        // cos^2 from G and sin^2 from H so small angles keep their precision.
        std::vector<Vec> perp(k);
        for (int i = 0; i < k; ++i) perp[i] = project_out(W.frame[i]);
        Vec G(k * k), H(k * k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                H[i * k + j] = dot(perp[i], perp[j]);
                G[i * k + j] = dot(W.frame[i], W.frame[j]) - H[i * k + j];
            }
        SymmetricEigen e = symmetric_eigen(G, k);
        for (int i = 0; i < k; ++i) {
            const Vec& q = e.vectors[i];
            double s2 = 0.0, c2 = 0.0;
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b) {
                    s2 += q[a] * H[a * k + b] * q[b];
                    c2 += q[a] * G[a * k + b] * q[b];
                }
            double ang = std::atan2(std::sqrt(std::max(s2, 0.0)), std::sqrt(std::max(c2, 0.0)));
            angles2 += ang * ang;
        }
    }
    return std::sqrt(angles2) + norm(project_out(sub(W.base, V.base)));
}

namespace {

struct BumpFamily {
    std::vector<Vec> centers;
    Vec scales;
};

const BumpFamily& bump_family(int n, int count) {
    static std::mutex mtx;
    static std::map<std::pair<int, int>, BumpFamily> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(n, count);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    BumpFamily fam;
    fam.centers = halton_ball(n, count);
    for (int i = 1; i <= count; ++i) {
        int level = static_cast<int>(std::floor(std::log2(static_cast<double>(i))));
        fam.scales.push_back(std::ldexp(1.0, -level));
    }
    return cache.emplace(key, std::move(fam)).first->second;
}

double cubic_bump(double t2) { return t2 < 1.0 ? (1.0 - t2) * (1.0 - t2) * (1.0 - t2) : 0.0; }

// f_i at the rescaled point z = (y - x)/r.
double bump_eval(const BumpFamily& fam, int i, const double* z, int n) {
    double env = cubic_bump(dot(z, z, n));
    if (env == 0.0) return 0.0;
    double s = fam.scales[i];
    for (int a = 0; a < n; ++a) {
        double t = (z[a] - fam.centers[i][a]) / s;
        env *= cubic_bump(t * t);
        if (env == 0.0) return 0.0;
    }
    return env;
}

Vec bump_moments(const BumpFamily& fam, int count, const DiscreteMeasure& mu, const Vec& x, double r) {
    const int n = static_cast<int>(x.size());
    Vec out(count, 0.0);
    Vec z(n);
    for (size_t j = 0; j < mu.size(); ++j) {
        if (dist2(mu.points[j].data(), x.data(), n) >= r * r) continue;
        for (int a = 0; a < n; ++a) z[a] = (mu.points[j][a] - x[a]) / r;
        for (int i = 0; i < count; ++i) out[i] += mu.weights[j] * bump_eval(fam, i, z.data(), n);
    }
    return out;
}

}  // namespace

double measure_distance(const DiscreteMeasure& mu, const DiscreteMeasure& eta, const Vec& x, double r,
                        int bumps) {
    mu.validate();
    eta.validate();
    const int n = static_cast<int>(x.size());
    if ((mu.size() && mu.dim() != n) || (eta.size() && eta.dim() != n))
        fail(ErrorKind::DimensionMismatch, "measure and point dimensions differ");
    if (bumps < 1) fail(ErrorKind::InvalidArgument, "bump count must be positive");
    const BumpFamily& fam = bump_family(n, bumps);
    Vec a = bump_moments(fam, bumps, mu, x, r);
    Vec b = bump_moments(fam, bumps, eta, x, r);
    double s = 0.0;
    for (int i = 0; i < bumps; ++i) {
        double d = std::abs(a[i] - b[i]);
        s += std::ldexp(1.0, -(i + 1)) * d / (1.0 + d);
    }
    return s;
}

double pair_distance(const Field& u, const DiscreteMeasure& mu, const Field& v, const DiscreteMeasure& eta,
                     const Vec& x, double r, int bumps) {
    if (u.dim() != v.dim() || static_cast<int>(x.size()) != u.dim())
        fail(ErrorKind::DimensionMismatch, "field dimensions differ");
    if (!u.contains_ball(x, r) || !v.contains_ball(x, r))
        fail(ErrorKind::OutOfDomain, "ball leaves a field domain");
    const int n = u.dim();
    // Integrate on the field whose singular set or grid shapes the rule.
    bool swap = !(u.has_singular_set() || !u.is_analytic()) && (v.has_singular_set() || !v.is_analytic());
    const Field& drive = swap ? v : u;
    const Field& other = swap ? u : v;
    QuadOptions opt;
    opt.tolerance = false;
    BallIntegral spec{x, r, {Weight::Ball}, false};
    auto res = integrate_ball(drive, spec,
                              [&](const double* y, double, const double*, double* out) {
                                  // same evaluation path on both sides so (u,mu) vs itself is exactly 0
                                  double d = drive.value(y) - other.value(y);
                                  out[0] = d * d;
                              },
                              opt);
    const double l2 = std::pow(r, u.params().alpha_p() - n - 2.0) * res[0].value;
    return l2 + measure_distance(mu, eta, x, r, bumps);
}

}  // namespace strata
