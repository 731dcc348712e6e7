#include "strata/common.hpp"

#include <algorithm>

namespace strata {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::SupercriticalityViolated: return "SupercriticalityViolated";
        case ErrorKind::EnergyNonIntegrable: return "EnergyNonIntegrable";
        case ErrorKind::BadFrame: return "BadFrame";
        case ErrorKind::OutOfDomain: return "OutOfDomain";
        case ErrorKind::NegativeArgument: return "NegativeArgument";
        case ErrorKind::NonFiniteIntegrand: return "NonFiniteIntegrand";
        case ErrorKind::BallTooSmall: return "BallTooSmall";
        case ErrorKind::EmptyRestriction: return "EmptyRestriction";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::UnsupportedOrder: return "UnsupportedOrder";
        case ErrorKind::OverlappingBalls: return "OverlappingBalls";
        case ErrorKind::NonTermination: return "NonTermination";
        case ErrorKind::ResolutionTooCoarse: return "ResolutionTooCoarse";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

bool is_numerical_guard(ErrorKind kind) {
    return kind == ErrorKind::NonTermination || kind == ErrorKind::ResolutionTooCoarse;
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

double dot(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double dot(const Vec& a, const Vec& b) { return dot(a.data(), b.data(), static_cast<int>(a.size())); }

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

double dist2(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double dist(const Vec& a, const Vec& b) {
    return std::sqrt(dist2(a.data(), b.data(), static_cast<int>(a.size())));
}

Vec sub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Vec add(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Vec scale(const Vec& a, double s) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
    return r;
}

double ball_volume(int d) { return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

double sphere_area(int d) { return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d); }

bool gram_schmidt(std::vector<Vec>& vecs, double tol) {
    for (size_t i = 0; i < vecs.size(); ++i) {
        double n0 = norm(vecs[i]);
        for (int pass = 0; pass < 2; ++pass) {
            for (size_t j = 0; j < i; ++j) {
                double c = dot(vecs[i], vecs[j]);
                for (size_t a = 0; a < vecs[i].size(); ++a) vecs[i][a] -= c * vecs[j][a];
            }
        }
        double nn = norm(vecs[i]);
        if (nn <= tol * std::max(1.0, n0)) return false;
        for (double& v : vecs[i]) v /= nn;
    }
    return true;
}

std::vector<Vec> orthonormal_complement(const std::vector<Vec>& frame, int n) {
    std::vector<Vec> basis = frame;
    std::vector<Vec> out;
    for (int e = 0; e < n && static_cast<int>(basis.size()) < n; ++e) {
        Vec cand(n, 0.0);
        cand[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vec& b : basis) {
                double c = dot(cand, b);
                for (int a = 0; a < n; ++a) cand[a] -= c * b[a];
            }
        }
        double nn = norm(cand);
        if (nn < 1e-6) continue;
        for (double& v : cand) v /= nn;
        basis.push_back(cand);
        out.push_back(cand);
    }
    return out;
}

double radical_inverse(long index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * (index % base);
        index /= base;
    }
    return r;
}

std::vector<Vec> halton_ball(int n, int count) {
    static const int primes[kMaxDim] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    if (n < 1 || n > kMaxDim) fail(ErrorKind::DimensionMismatch, "unsupported dimension");
    std::vector<Vec> out;
    Vec c(n);
    for (long h = 1; static_cast<int>(out.size()) < count; ++h) {
        for (int a = 0; a < n; ++a) c[a] = 2.0 * radical_inverse(h, primes[a]) - 1.0;
        if (dot(c, c) < 1.0) out.push_back(c);
    }
    return out;
}

}  // namespace strata
