#pragma once

#include <span>
#include <string>
#include <vector>

#include "toda/errors.hpp"

namespace toda {

enum class Boundary {
    OpenEnd,   // x_0 = +inf, x_{N+1} = -inf: boundary gap terms are suppressed to 0
    Periodic,  // indices mod N: x_{N+1} = x_1
};

std::string to_string(Boundary b);

/// Particle count, boundary condition and solver tolerances shared by all modules.
struct TodaConfig {
    int n = 1;
    Boundary boundary = Boundary::OpenEnd;
    double tol_newton = 1e-12;
    int max_newton_iters = 50;

    void validate() const;  // throws std::invalid_argument
};

/// Phase-space point of the N-particle lattice: log-positions x and momenta p.
struct LatticeState {
    std::vector<double> x;
    std::vector<double> p;

    int n() const { return static_cast<int>(x.size()); }
};

/// Real 2x2 matrix; carries the transfer/evolution/monodromy matrices.
struct Matrix2 {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;

    static Matrix2 identity() { return {1, 0, 0, 1}; }

    double det() const { return a11 * a22 - a12 * a21; }
    double trace() const { return a11 + a22; }

    friend Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
        return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
                a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
    }
};

/// Largest entrywise |a - b|.
double max_abs_diff(const Matrix2& a, const Matrix2& b);

/// e^{x_{k+1} - x_k} with the boundary convention folded in.
///
/// k is 1-based. Every boundary rule in the library funnels through here:
///   OpenEnd:  k = N gives 0 (x_{N+1} = -inf), k = 0 gives 0 (x_0 = +inf);
///   Periodic: indices mod N, so k = 0 and k = N both give e^{x_1 - x_N}.
/// k = 0 is the mirror gap e^{x_k - x_{k-1}} seen from particle k = 1.
double gap_exp(std::span<const double> x, int k, const TodaConfig& cfg);

/// Throws std::invalid_argument unless s has cfg.n finite entries in both x and p.
void validate_state(const LatticeState& s, const TodaConfig& cfg);

}  // namespace toda
