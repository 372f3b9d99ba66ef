#include "toda/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace toda {

std::string to_string(Boundary b) {
    return b == Boundary::OpenEnd ? "open" : "periodic";
}

void TodaConfig::validate() const {
    if (n < 1) throw std::invalid_argument("TodaConfig: n must be >= 1");
    if (!(tol_newton > 0)) throw std::invalid_argument("TodaConfig: tol_newton must be > 0");
    if (max_newton_iters < 1)
        throw std::invalid_argument("TodaConfig: max_newton_iters must be >= 1");
}

double max_abs_diff(const Matrix2& a, const Matrix2& b) {
    return std::max({std::abs(a.a11 - b.a11), std::abs(a.a12 - b.a12),
                     std::abs(a.a21 - b.a21), std::abs(a.a22 - b.a22)});
}

double gap_exp(std::span<const double> x, int k, const TodaConfig& cfg) {
    const int n = static_cast<int>(x.size());
    if (k < 0 || k > n)
        throw std::invalid_argument("gap_exp: index k = " + std::to_string(k) +
                                    " outside 0..N = " + std::to_string(n));
    if (cfg.boundary == Boundary::OpenEnd) {
        if (k == 0 || k == n) return 0.0;
        return std::exp(x[k] - x[k - 1]);  // x is 0-based storage, k is 1-based
    }
    const int i = ((k - 1) % n + n) % n;         // particle k, 0-based
    const int j = (i + 1) % n;                   // right neighbour
    return std::exp(x[j] - x[i]);
}

void validate_state(const LatticeState& s, const TodaConfig& cfg) {
    if (static_cast<int>(s.x.size()) != cfg.n || static_cast<int>(s.p.size()) != cfg.n)
        throw std::invalid_argument(
            "state length mismatch: |x| = " + std::to_string(s.x.size()) +
            ", |p| = " + std::to_string(s.p.size()) + ", expected N = " + std::to_string(cfg.n));
    for (int k = 1; k <= cfg.n; ++k) {
        if (!std::isfinite(s.x[k - 1]))
            throw std::invalid_argument("non-finite x_" + std::to_string(k));
        if (!std::isfinite(s.p[k - 1]))
            throw std::invalid_argument("non-finite p_" + std::to_string(k));
    }
}

}  // namespace toda
