#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace strata {

using Vec = std::vector<double>;

constexpr int kMaxDim = 16;
constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
    SupercriticalityViolated,
    EnergyNonIntegrable,
    BadFrame,
    OutOfDomain,
    NegativeArgument,
    NonFiniteIntegrand,
    BallTooSmall,
    EmptyRestriction,
    DimensionMismatch,
    UnsupportedOrder,
    OverlappingBalls,
    NonTermination,
    ResolutionTooCoarse,
    InvalidArgument,
};

const char* error_kind_name(ErrorKind kind);

// Numerical guards are reported separately from plain validation failures.
bool is_numerical_guard(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

// Small dense vector helpers; dimensions here never exceed kMaxDim.
double dot(const double* a, const double* b, int n);
double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
double dist(const Vec& a, const Vec& b);
double dist2(const double* a, const double* b, int n);
Vec sub(const Vec& a, const Vec& b);
Vec add(const Vec& a, const Vec& b);
Vec scale(const Vec& a, double s);

// Unit ball volume and unit sphere area in R^d.
double ball_volume(int d);
double sphere_area(int d);  // area of S^{d-1}

// Orthonormalize `vecs` in place (modified Gram-Schmidt). Returns false if a
// vector is numerically dependent on its predecessors.
bool gram_schmidt(std::vector<Vec>& vecs, double tol = 1e-12);

// Extend an orthonormal family in R^n to an orthonormal basis of its
// orthogonal complement.
std::vector<Vec> orthonormal_complement(const std::vector<Vec>& frame, int n);

// Halton radical inverse of index in the given base.
double radical_inverse(long index, int base);

// First `count` Halton points of [-1,1]^n that fall inside the open unit ball.
std::vector<Vec> halton_ball(int n, int count);

}  // namespace strata
