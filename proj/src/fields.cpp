#include "strata/fields.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <sstream>

namespace strata {

ProblemParams ProblemParams::make(int n, double p) {
    if (n < 3) fail(ErrorKind::SupercriticalityViolated, "dimension must be at least 3");
    double crit = static_cast<double>(n + 2) / static_cast<double>(n - 2);
    if (!(p > crit)) {
        std::ostringstream os;
        os << "p=" << p << " is not supercritical for n=" << n << " (need p > " << crit << ")";
        fail(ErrorKind::SupercriticalityViolated, os.str());
    }
    return ProblemParams{n, p};
}

size_t GridData::size() const {
    size_t s = 1;
    for (int d : shape) s *= static_cast<size_t>(d);
    return s;
}

std::vector<size_t> GridData::strides() const {
    std::vector<size_t> st(shape.size(), 1);
    for (int a = static_cast<int>(shape.size()) - 2; a >= 0; --a)
        st[a] = st[a + 1] * static_cast<size_t>(shape[a + 1]);
    return st;
}

std::vector<int> GridData::capped_cells() const {
    std::vector<int> out;
    for (size_t i = 0; i < capped_mask->size(); ++i)
        if ((*capped_mask)[i]) out.push_back(static_cast<int>(i));
    return out;
}

namespace {

void check_point(const Vec& v, int n, const char* what) {
    if (static_cast<int>(v.size()) != n)
        fail(ErrorKind::DimensionMismatch, std::string(what) + " has wrong dimension");
}

void check_frame(const std::vector<Vec>& frame, int n) {
    for (const Vec& f : frame) {
        if (static_cast<int>(f.size()) != n) fail(ErrorKind::BadFrame, "frame vector has wrong dimension");
    }
    for (size_t i = 0; i < frame.size(); ++i) {
        for (size_t j = i; j < frame.size(); ++j) {
            double d = dot(frame[i], frame[j]) - (i == j ? 1.0 : 0.0);
            if (std::abs(d) > 1e-10) fail(ErrorKind::BadFrame, "frame is not orthonormal");
        }
    }
    if (static_cast<int>(frame.size()) > n) fail(ErrorKind::BadFrame, "frame has more than n vectors");
}

// Sum over matchings of derivative positions into pairs (P entries) and
// singletons (z entries): the n-th derivative of g(|Pw|^2).
double matching_sum(const int* idx, int len, uint32_t used, int blocks, const double* z,
                    const double* P, int n, const double* gd) {
    int pos = 0;
    while (pos < len && (used & (1u << pos))) ++pos;
    if (pos == len) return std::ldexp(gd[blocks], blocks);
    uint32_t u1 = used | (1u << pos);
    double s = z[idx[pos]] * matching_sum(idx, len, u1, blocks + 1, z, P, n, gd);
    for (int q = pos + 1; q < len; ++q) {
        if (u1 & (1u << q)) continue;
        double pv = P[idx[pos] * n + idx[q]];
        if (pv == 0.0) continue;
        s += pv * matching_sum(idx, len, u1 | (1u << q), blocks + 1, z, P, n, gd);
    }
    return s;
}

// Frobenius norm of D^order of L(w) g(|Pw|^2) with L affine (L0 + a.w).
double radial_tensor_norm(int n, int order, const double* z, const double* P, const double* gd,
                          double L0, const double* a) {
    if (order == 0) return std::abs(L0 * gd[0]);
    std::vector<int> idx(order, 0);
    std::vector<int> sub(order);
    double total = 0.0;
    while (true) {
        double e = L0 * matching_sum(idx.data(), order, 0u, 0, z, P, n, gd);
        if (a != nullptr) {
            for (int k = 0; k < order; ++k) {
                int t = 0;
                for (int j = 0; j < order; ++j)
                    if (j != k) sub[t++] = idx[j];
                e += a[idx[k]] * matching_sum(sub.data(), order - 1, 0u, 0, z, P, n, gd);
            }
        }
        total += e * e;
        int pos = order - 1;
        while (pos >= 0 && ++idx[pos] == n) {
            idx[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    return std::sqrt(total);
}

struct GridLocator {
    std::array<int, kMaxDim> base{};
    std::array<double, kMaxDim> frac{};
};

// Index-space position of y relative to cell centres.
GridLocator locate(const GridData& g, const double* y, int n) {
    GridLocator loc;
    for (int a = 0; a < n; ++a) {
        double xi = (y[a] - g.origin[a]) / g.spacing - 0.5;
        double fl = std::floor(xi);
        double t = xi - fl;
        int i = static_cast<int>(fl);
        if (t < 1e-12) t = 0.0;
        if (t > 1.0 - 1e-12) {
            t = 0.0;
            i += 1;
        }
        loc.base[a] = i;
        loc.frac[a] = t;
    }
    return loc;
}

// Central-difference gradient at a cell; requires a full stencil.
void cell_gradient(const GridData& g, const std::vector<size_t>& st, const int* I, int n,
                   double* grad) {
    size_t flat = 0;
    for (int a = 0; a < n; ++a) flat += static_cast<size_t>(I[a]) * st[a];
    for (int a = 0; a < n; ++a)
        grad[a] = (g.at(flat + st[a]) - g.at(flat - st[a])) / (2.0 * g.spacing);
}

void cell_hessian(const GridData& g, const std::vector<size_t>& st, const int* I, int n,
                  double* H) {
    size_t flat = 0;
    for (int a = 0; a < n; ++a) flat += static_cast<size_t>(I[a]) * st[a];
    double h2 = g.spacing * g.spacing;
    for (int a = 0; a < n; ++a) {
        H[a * n + a] = (g.at(flat + st[a]) - 2.0 * g.at(flat) + g.at(flat - st[a])) / h2;
        for (int b = a + 1; b < n; ++b) {
            double v = (g.at(flat + st[a] + st[b]) - g.at(flat + st[a] - st[b]) -
                        g.at(flat - st[a] + st[b]) + g.at(flat - st[a] - st[b])) /
                       (4.0 * h2);
            H[a * n + b] = v;
            H[b * n + a] = v;
        }
    }
}

// Multilinear interpolation of a per-cell quantity of width `width`.
// `margin` is the number of cells needed on each side of a corner.
template <class F>
void grid_interpolate(const GridData& g, const double* y, int n, int margin, int width, F cell_fn,
                      double* out) {
    GridLocator loc = locate(g, y, n);
    std::fill(out, out + width, 0.0);
    std::array<int, kMaxDim> I{};
    std::vector<double> tmp(width);
    int corners = 1 << n;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        bool skip = false;
        for (int a = 0; a < n; ++a) {
            int bit = (c >> a) & 1;
            if (bit && loc.frac[a] == 0.0) {
                skip = true;
                break;
            }
            w *= bit ? loc.frac[a] : 1.0 - loc.frac[a];
            I[a] = loc.base[a] + bit;
        }
        if (skip) continue;
        for (int a = 0; a < n; ++a) {
            if (I[a] < margin || I[a] > g.shape[a] - 1 - margin)
                fail(ErrorKind::OutOfDomain, "evaluation point outside the grid interior");
        }
        if (w == 0.0) continue;
        cell_fn(I.data(), tmp.data());
        for (int k = 0; k < width; ++k) out[k] += w * tmp[k];
    }
}

}  // namespace

Field Field::zero(const ProblemParams& params) {
    Field f;
    f.params_ = params;
    f.kind_ = FieldKind::Zero;
    return f;
}

Field Field::power_law(const ProblemParams& params, double c, const Vec& center,
                       const std::vector<Vec>& frame) {
    check_point(center, params.n, "center");
    check_frame(frame, params.n);
    Field f;
    f.params_ = params;
    f.kind_ = FieldKind::PowerLaw;
    f.power_.c = c;
    f.power_.center = center;
    f.power_.frame = frame;
    f.power_.normal = orthonormal_complement(frame, params.n);
    return f;
}

Field Field::affine_bump(const ProblemParams& params, double amp, const Vec& slope,
                         const Vec& center, double width) {
    check_point(center, params.n, "center");
    check_point(slope, params.n, "slope");
    if (!(width > 0.0)) fail(ErrorKind::InvalidArgument, "bump width must be positive");
    Field f;
    f.params_ = params;
    f.kind_ = FieldKind::AffineBump;
    f.bump_ = BumpData{amp, slope, center, width};
    return f;
}

Field Field::grid(const ProblemParams& params, const Vec& origin, double spacing,
                  const std::vector<int>& shape, std::vector<double> values,
                  const std::vector<int>& capped_cells) {
    check_point(origin, params.n, "origin");
    if (static_cast<int>(shape.size()) != params.n)
        fail(ErrorKind::DimensionMismatch, "grid shape has wrong dimension");
    if (!(spacing > 0.0)) fail(ErrorKind::InvalidArgument, "grid spacing must be positive");
    size_t total = 1;
    for (int s : shape) {
        if (s < 3) fail(ErrorKind::InvalidArgument, "grid shape entries must be at least 3");
        total *= static_cast<size_t>(s);
    }
    if (values.size() != total)
        fail(ErrorKind::InvalidArgument, "grid values length does not match shape");
    auto mask = std::make_shared<std::vector<char>>(total, 0);
    for (int c : capped_cells) {
        if (c < 0 || static_cast<size_t>(c) >= total)
            fail(ErrorKind::InvalidArgument, "capped cell index out of range");
        (*mask)[c] = 1;
    }
    Field f;
    f.params_ = params;
    f.kind_ = FieldKind::Grid;
    f.grid_.origin = origin;
    f.grid_.spacing = spacing;
    f.grid_.shape = shape;
    f.grid_.values = std::make_shared<const std::vector<double>>(std::move(values));
    f.grid_.capped_mask = mask;
    return f;
}

double Field::value(const double* y) const {
    const int n = params_.n;
    switch (kind_) {
        case FieldKind::Zero: return 0.0;
        case FieldKind::PowerLaw: {
            double s = dist_to_singular(y);
            return power_.c * std::pow(s * s, -0.5 * params_.alpha());
        }
        case FieldKind::AffineBump: {
            double r2 = 0.0, lin = bump_.amp;
            for (int a = 0; a < n; ++a) {
                double w = y[a] - bump_.center[a];
                r2 += w * w;
                lin += bump_.slope[a] * w;
            }
            return lin * std::exp(-r2 / (bump_.width * bump_.width));
        }
        case FieldKind::Grid: {
            double out = 0.0;
            const GridData& g = grid_;
            auto st = g.strides();
            grid_interpolate(g, y, n, 0, 1,
                             [&](const int* I, double* o) {
                                 size_t flat = 0;
                                 for (int a = 0; a < n; ++a) flat += static_cast<size_t>(I[a]) * st[a];
                                 o[0] = g.at(flat);
                             },
                             &out);
            return out;
        }
    }
    return 0.0;
}

double Field::value_grad(const double* y, double* grad) const {
    const int n = params_.n;
    switch (kind_) {
        case FieldKind::Zero:
            std::fill(grad, grad + n, 0.0);
            return 0.0;
        case FieldKind::PowerLaw: {
            std::array<double, kMaxDim> z{};
            for (int a = 0; a < n; ++a) z[a] = y[a] - power_.center[a];
            for (const Vec& f : power_.frame) {
                double c = dot(z.data(), f.data(), n);
                for (int a = 0; a < n; ++a) z[a] -= c * f[a];
            }
            double s = dot(z.data(), z.data(), n);
            double al = params_.alpha();
            double u = power_.c * std::pow(s, -0.5 * al);
            double g = -al * u / s;
            for (int a = 0; a < n; ++a) grad[a] = g * z[a];
            return u;
        }
        case FieldKind::AffineBump: {
            double r2 = 0.0, lin = bump_.amp;
            double w2 = bump_.width * bump_.width;
            for (int a = 0; a < n; ++a) {
                double w = y[a] - bump_.center[a];
                r2 += w * w;
                lin += bump_.slope[a] * w;
            }
            double G = std::exp(-r2 / w2);
            for (int a = 0; a < n; ++a)
                grad[a] = G * (bump_.slope[a] - 2.0 * lin * (y[a] - bump_.center[a]) / w2);
            return lin * G;
        }
        case FieldKind::Grid: {
            const GridData& g = grid_;
            auto st = g.strides();
            std::vector<double> out(n + 1);
            grid_interpolate(g, y, n, 1, n + 1,
                             [&](const int* I, double* o) {
                                 size_t flat = 0;
                                 for (int a = 0; a < n; ++a) flat += static_cast<size_t>(I[a]) * st[a];
                                 o[0] = g.at(flat);
                                 cell_gradient(g, st, I, n, o + 1);
                             },
                             out.data());
            std::copy(out.begin() + 1, out.end(), grad);
            return out[0];
        }
    }
    return 0.0;
}

Vec Field::gradient(const Vec& y) const {
    Vec g(params_.n);
    value_grad(y.data(), g.data());
    return g;
}

Vec Field::hessian(const Vec& y) const {
    const int n = params_.n;
    Vec H(n * n, 0.0);
    switch (kind_) {
        case FieldKind::Zero: break;
        case FieldKind::PowerLaw: {
            Vec z(n);
            for (int a = 0; a < n; ++a) z[a] = y[a] - power_.center[a];
            for (const Vec& f : power_.frame) {
                double c = dot(z, f);
                for (int a = 0; a < n; ++a) z[a] -= c * f[a];
            }
            double s = dot(z, z);
            double al = params_.alpha();
            double pref = al * power_.c * std::pow(s, -0.5 * al - 1.0);
            for (int a = 0; a < n; ++a) {
                for (int b = 0; b < n; ++b) {
                    double P = (a == b) ? 1.0 : 0.0;
                    for (const Vec& f : power_.frame) P -= f[a] * f[b];
                    H[a * n + b] = pref * ((al + 2.0) * z[a] * z[b] / s - P);
                }
            }
            break;
        }
        case FieldKind::AffineBump: {
            double w2 = bump_.width * bump_.width;
            Vec w(n);
            double r2 = 0.0, lin = bump_.amp;
            for (int a = 0; a < n; ++a) {
                w[a] = y[a] - bump_.center[a];
                r2 += w[a] * w[a];
                lin += bump_.slope[a] * w[a];
            }
            double G = std::exp(-r2 / w2);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    double v = -2.0 * bump_.slope[i] * w[j] / w2 - 2.0 * bump_.slope[j] * w[i] / w2 +
                               4.0 * lin * w[i] * w[j] / (w2 * w2);
                    if (i == j) v -= 2.0 * lin / w2;
                    H[i * n + j] = G * v;
                }
            }
            break;
        }
        case FieldKind::Grid: {
            const GridData& g = grid_;
            auto st = g.strides();
            grid_interpolate(g, y.data(), n, 1, n * n,
                             [&](const int* I, double* o) { cell_hessian(g, st, I, n, o); },
                             H.data());
            break;
        }
    }
    return H;
}

double Field::derivative_norm(const Vec& y, int order) const {
    const int n = params_.n;
    if (order < 0) fail(ErrorKind::InvalidArgument, "derivative order must be nonnegative");
    switch (kind_) {
        case FieldKind::Zero: return 0.0;
        case FieldKind::Grid: {
            if (order == 0) return std::abs(value(y));
            if (order == 1) return norm(gradient(y));
            if (order == 2) return norm(hessian(y));
            fail(ErrorKind::UnsupportedOrder, "grid fields support derivative orders up to 2");
        }
        case FieldKind::PowerLaw: {
            Vec z(n), P(n * n, 0.0);
            for (int a = 0; a < n; ++a) z[a] = y[a] - power_.center[a];
            for (const Vec& f : power_.frame) {
                double c = dot(z, f);
                for (int a = 0; a < n; ++a) z[a] -= c * f[a];
            }
            for (int a = 0; a < n; ++a) {
                for (int b = 0; b < n; ++b) {
                    double v = (a == b) ? 1.0 : 0.0;
                    for (const Vec& f : power_.frame) v -= f[a] * f[b];
                    P[a * n + b] = v;
                }
            }
            double s = dot(z, z);
            Vec gd(order + 1);
            double e = -0.5 * params_.alpha();
            double coef = power_.c;
            for (int k = 0; k <= order; ++k) {
                gd[k] = coef * std::pow(s, e - k);
                coef *= (e - k);
            }
            return radial_tensor_norm(n, order, z.data(), P.data(), gd.data(), 1.0, nullptr);
        }
        case FieldKind::AffineBump: {
            Vec w(n), P(n * n, 0.0);
            double lin = bump_.amp;
            for (int a = 0; a < n; ++a) {
                w[a] = y[a] - bump_.center[a];
                lin += bump_.slope[a] * w[a];
                P[a * n + a] = 1.0;
            }
            double w2 = bump_.width * bump_.width;
            double G = std::exp(-dot(w, w) / w2);
            Vec gd(order + 1);
            for (int k = 0; k <= order; ++k) gd[k] = std::pow(-1.0 / w2, k) * G;
            return radial_tensor_norm(n, order, w.data(), P.data(), gd.data(), lin,
                                      bump_.slope.data());
        }
    }
    return 0.0;
}

double Field::dist_to_singular(const double* y) const {
    if (kind_ != FieldKind::PowerLaw) return std::numeric_limits<double>::infinity();
    const int n = params_.n;
    std::array<double, kMaxDim> z{};
    for (int a = 0; a < n; ++a) z[a] = y[a] - power_.center[a];
    for (const Vec& f : power_.frame) {
        double c = dot(z.data(), f.data(), n);
        for (int a = 0; a < n; ++a) z[a] -= c * f[a];
    }
    return std::sqrt(dot(z.data(), z.data(), n));
}

bool Field::contains_ball(const Vec& x, double r) const {
    if (kind_ != FieldKind::Grid) return true;
    const GridData& g = grid_;
    for (int a = 0; a < params_.n; ++a) {
        double lo = g.origin[a] + g.spacing;
        double hi = g.origin[a] + (g.shape[a] - 1) * g.spacing;
        if (x[a] - r < lo - 1e-12 * g.spacing || x[a] + r > hi + 1e-12 * g.spacing) return false;
    }
    return true;
}

Field Field::regridded(const Vec& origin, double spacing, double amplitude) const {
    Field out = *this;
    out.grid_.origin = origin;
    out.grid_.spacing = spacing;
    out.grid_.amplitude = amplitude;
    return out;
}

double singular_constant(int n, double p, int m) {
    double al = 2.0 / (p - 1.0);
    double base = al * (n - m - 2 - al);
    return std::pow(base, 1.0 / (p - 1.0));
}

Field make_singular_solution(int n, double p, int m, const Vec& center,
                             const std::vector<Vec>& frame) {
    ProblemParams params = ProblemParams::make(n, p);
    if (m < 0 || m >= n) fail(ErrorKind::BadFrame, "invariant-direction count out of range");
    if (static_cast<int>(frame.size()) != m) fail(ErrorKind::BadFrame, "frame must contain m vectors");
    check_frame(frame, n);
    double al = params.alpha();
    if (!(params.alpha_p() < n - m) || !(n - m - 2 - al > 0.0)) {
        std::ostringstream os;
        os << "alpha_p=" << params.alpha_p() << " >= n-m=" << (n - m);
        fail(ErrorKind::EnergyNonIntegrable, os.str());
    }
    return Field::power_law(params, singular_constant(n, p, m), center, frame);
}

Field blow_up(const Field& u, const Vec& x, double r) {
    const int n = u.dim();
    check_point(x, n, "blow-up center");
    if (!(r > 0.0)) fail(ErrorKind::InvalidArgument, "blow-up scale must be positive");
    double amp = std::pow(r, u.params().alpha());
    switch (u.kind()) {
        case FieldKind::Zero: return u;
        case FieldKind::PowerLaw: {
            const PowerLawData& pw = u.power();
            Vec c(n);
            for (int a = 0; a < n; ++a) c[a] = (pw.center[a] - x[a]) / r;
            return Field::power_law(u.params(), pw.c, c, pw.frame);
        }
        case FieldKind::AffineBump: {
            const BumpData& b = u.bump();
            Vec c(n);
            for (int a = 0; a < n; ++a) c[a] = (b.center[a] - x[a]) / r;
            return Field::affine_bump(u.params(), amp * b.amp, scale(b.slope, amp * r), c,
                                      b.width / r);
        }
        case FieldKind::Grid: {
            const GridData& g = u.grid_data();
            for (int a = 0; a < n; ++a) {
                double lo = g.origin[a], hi = g.origin[a] + g.shape[a] * g.spacing;
                if (x[a] - r < lo || x[a] + r > hi)
                    fail(ErrorKind::OutOfDomain, "blow-up ball leaves the grid box");
            }
            Vec o(n);
            for (int a = 0; a < n; ++a) o[a] = (g.origin[a] - x[a]) / r;
            return u.regridded(o, g.spacing / r, g.amplitude * amp);
        }
    }
    return u;
}

Field sample_to_grid(const Field& u, const Vec& origin, double side, double h) {
    const int n = u.dim();
    check_point(origin, n, "origin");
    if (!(h > 0.0) || !(side > 0.0)) fail(ErrorKind::InvalidArgument, "spacing and side must be positive");
    if (!u.is_analytic()) fail(ErrorKind::InvalidArgument, "sample_to_grid expects an analytic field");
    double cells = side / h;
    int count = static_cast<int>(std::llround(cells));
    if (std::abs(cells - count) > 1e-9 * std::max(1.0, cells))
        fail(ErrorKind::InvalidArgument, "side must be an integer multiple of the spacing");
    std::vector<int> shape(n, count);
    size_t total = 1;
    for (int a = 0; a < n; ++a) total *= static_cast<size_t>(count);
    std::vector<double> values(total);
    std::vector<int> capped;
    double cap = 0.0;
    if (u.kind() == FieldKind::PowerLaw)
        cap = u.power().c * std::pow(0.5 * h, -u.params().alpha());
    Vec y(n);
    std::vector<int> I(n, 0);
    for (size_t flat = 0; flat < total; ++flat) {
        for (int a = 0; a < n; ++a) y[a] = origin[a] + (I[a] + 0.5) * h;
        if (u.has_singular_set() && u.dist_to_singular(y.data()) <= 0.5 * h) {
            values[flat] = cap;
            capped.push_back(static_cast<int>(flat));
        } else {
            values[flat] = u.value(y);
        }
        for (int a = n - 1; a >= 0; --a) {
            if (++I[a] < count) break;
            I[a] = 0;
        }
    }
    return Field::grid(u.params(), origin, h, shape, std::move(values), capped);
}

double pde_residual(const Field& u, const Vec& y) {
    const int n = u.dim();
    Vec H = u.hessian(y);
    double lap = 0.0;
    for (int a = 0; a < n; ++a) lap += H[a * n + a];
    double v = u.value(y);
    return -lap - std::pow(std::abs(v), u.params().p - 1.0) * v;
}

}  // namespace strata
