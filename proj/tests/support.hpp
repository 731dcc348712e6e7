#pragma once

// Reference helpers for the tests. Nothing here calls into the library's
// quadrature or cutoff code, so they can act as oracles.

#include <cmath>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace ref {

constexpr double pi = 3.14159265358979323846;

// Gauss-Legendre nodes and weights on [0,1] by Newton on P_n.
inline std::vector<std::pair<double, double>> gauss01(int n) {
    std::vector<std::pair<double, double>> out(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = {0.5 * (1.0 - x), 0.5 * w};
    }
    return out;
}

// Composite Gauss rule for f on [a,b], pieces x nodes.
inline double integrate(const std::function<double(double)>& f, double a, double b, int pieces = 16,
                        int nodes = 20) {
    static thread_local std::vector<std::pair<double, double>> g;
    if (static_cast<int>(g.size()) != nodes) g = gauss01(nodes);
    double h = (b - a) / pieces, s = 0.0;
    for (int k = 0; k < pieces; ++k)
        for (auto [x, w] : g) s += w * h * f(a + h * (k + x));
    return s;
}

// int_0^b f(x) dx for f with an integrable power singularity at 0, through
// x = b s^10 so the integrand is smooth in s.
inline double integrate_singular0(const std::function<double(double)>& f, double b, int pieces = 16,
                                  int nodes = 20) {
    return integrate(
        [&](double s) {
            if (s <= 0.0) return 0.0;
            double x = b * std::pow(s, 10);
            return f(x) * 10.0 * b * std::pow(s, 9);
        },
        0.0, 1.0, pieces, nodes);
}

// Area of S^{d-1}.
inline double sphere(int d) { return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d); }
inline double ball(int d) { return std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

// The cutoff written out independently: -phi' is 1 on [0,8], a smoothstep
// of (9.5 - t)/1.5 on the ramp, 0 after.
inline double phi(double t) {
    if (t >= 9.5) return 0.0;
    if (t <= 8.0) return 8.75 - t;
    double s = (9.5 - t) / 1.5;
    // 1.5 * int_0^s (6x^5 - 15x^4 + 10x^3) dx
    return 1.5 * (std::pow(s, 6) - 3.0 * std::pow(s, 5) + 2.5 * std::pow(s, 4));
}
inline double dphi(double t) {
    if (t >= 9.5) return 0.0;
    if (t <= 8.0) return -1.0;
    double s = (9.5 - t) / 1.5;
    return -(s * s * s * (6.0 * s * s - 15.0 * s + 10.0));
}

inline double c0(int n, double p, int m) {
    double a = 2.0 / (p - 1.0);
    return std::pow(a * (n - m - 2 - a), 1.0 / (p - 1.0));
}

// vartheta of c|Pz|^{-a} at a point of its singular plane, radius r. The
// integral over R^n = R^{n-m} x R^m is written in (rho, t) with rho = |Pz|
// and t the axial coordinates (polar in R^m when m >= 1).
inline double vartheta_on_plane(int n, double p, int m, double c, double r) {
    double a = 2.0 / (p - 1.0), ap = 2.0 * (p + 1.0) / (p - 1.0);
    double A = c * c * a * a / 2.0 - std::pow(c, p + 1.0) / (p + 1.0);
    double B = -2.0 / (p - 1.0) * c * c;
    int b = n - m;
    double R2 = 9.5;  // |z|^2 / r^2 support in scaled variables
    // scaled: z = r w, the r powers cancel: result independent of r
    (void)r;
    auto inner = [&](double rho2, double t2) {
        double tau = rho2 + t2;
        return A * std::pow(rho2, -0.5 * ap) * phi(tau) + B * std::pow(rho2, -a) * dphi(tau);
    };
    double Rmax = std::sqrt(R2);
    const double Rk = std::sqrt(8.0);  // phi changes formula at tau = 8
    if (m == 0) {
        auto f = [&](double rho) { return std::pow(rho, b - 1) * inner(rho * rho, 0.0); };
        return sphere(b) * (integrate_singular0(f, Rk, 32, 24) + integrate(f, Rk, Rmax, 16, 24));
    }
    auto f = [&](double rho) {
        double tmax = std::sqrt(std::max(0.0, R2 - rho * rho));
        double tk = rho * rho < 8.0 ? std::sqrt(8.0 - rho * rho) : 0.0;
        auto g = [&](double t) { return std::pow(t, m - 1) * inner(rho * rho, t * t); };
        double s = integrate(g, 0.0, tk, 8, 20) + integrate(g, tk, tmax, 8, 20);
        return std::pow(rho, b - 1) * s;
    };
    return sphere(b) * sphere(m) * (integrate_singular0(f, Rk, 32, 24) + integrate(f, Rk, Rmax, 16, 24));
}

inline std::vector<double> random_in_ball(std::mt19937_64& rng, int n, double R) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (;;) {
        std::vector<double> y(n);
        double s = 0.0;
        for (double& c : y) {
            c = U(rng);
            s += c * c;
        }
        if (s < 1.0) {
            for (double& c : y) c *= R;
            return y;
        }
    }
}

}  // namespace ref
