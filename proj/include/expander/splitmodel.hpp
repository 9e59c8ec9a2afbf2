#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "expander/logspace.hpp"

namespace expander {

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Dyadic split census
// ---------------------------------------------------------------------------

// One level of the dyadic splitting of an s-set: 2^j disjoint children of
// cardinality large_size or small_size = large_size - 1.
struct SplitLevel {
    int level = 0;
    long long large_size = 0;   // ceil(s / 2^j)
    long long small_size = 0;   // large_size - 1
    long long large_count = 0;  // children of cardinality large_size
    long long small_count = 0;  // children of cardinality small_size
};

inline int split_levels(long long s) {
    if (s < 2) throw std::invalid_argument("split_levels: s must be >= 2");
    int levels = 0;
    long long v = 1;
    while (v < s) { v *= 2; ++levels; }
    return levels;  // ceil(log2 s)
}

// Census of level j: large_count = s - 2^j * ceil(s/2^j) + 2^j.
inline SplitLevel split_census(long long s, int j) {
    if (s < 2) throw std::invalid_argument("split_census: s must be >= 2");
    const int max_level = split_levels(s) - 1;
    if (j < 0 || j > max_level) throw std::invalid_argument("split_census: level out of range");
    const long long two_j = 1LL << j;
    SplitLevel lvl;
    lvl.level = j;
    lvl.large_size = (s + two_j - 1) / two_j;
    lvl.small_size = lvl.large_size - 1;
    lvl.large_count = s - two_j * lvl.large_size + two_j;
    lvl.small_count = two_j - lvl.large_count;
    return lvl;
}

// ---------------------------------------------------------------------------
// Entropy and the large-deviation exponent
// ---------------------------------------------------------------------------

// Shannon entropy in nats, with the 0 log 0 = 0 convention.
inline double shannon_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("shannon_entropy: p outside [0,1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

// Arguments of psi_n / pi: x = |B1 u B2|, y = |B1|, z = |B2| on a ground set
// of size n. Real-valued because the constrained chain solver produces real
// cardinalities.
struct PsiArgs {
    double n = 0, x = 0, y = 0, z = 0;

    PsiArgs(double n_, double x_, double y_, double z_) : n(n_), x(x_), y(y_), z(z_) {
        if (!(n > 0)) throw std::invalid_argument("PsiArgs: n must be positive");
        if (!(y >= 0 && z >= 0 && x >= 0)) throw std::invalid_argument("PsiArgs: negative cardinality");
        const double slack = 1e-9 * n;
        if (x < std::max(y, z) - slack || x > std::min(y + z, n) + slack)
            throw std::invalid_argument("PsiArgs: need max(y,z) <= x <= min(y+z, n)");
    }
};

namespace detail {
inline double clamp01(double p) { return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p); }
}

// psi_n(x,y,z) = y H((x-z)/y) + (n-y) H((x-y)/(n-y)) - n H(z/n).
// Terms with a zero prefactor are 0.
inline double psi_n(const PsiArgs& a) {
    double v = 0.0;
    if (a.y > 0) v += a.y * shannon_entropy(detail::clamp01((a.x - a.z) / a.y));
    if (a.n - a.y > 0) v += (a.n - a.y) * shannon_entropy(detail::clamp01((a.x - a.y) / (a.n - a.y)));
    v -= a.n * shannon_entropy(detail::clamp01(a.z / a.n));
    return v;
}

// ---------------------------------------------------------------------------
// Polynomial factor of the large-deviation bound (four cases)
// ---------------------------------------------------------------------------

// pi(x,y,z) with P_n(x,y,z) <= pi(x,y,z) exp(psi_n(x,y,z)).
// Case dispatch is exact on integer arguments, relative 1e-12 otherwise.
// (y,z) are canonicalized to y >= z; P_n is symmetric in them.
// A vanishing case denominator (x = n, or y + z = n in the x=y+z case)
// yields +infinity: the bound is vacuous there.
inline double pi_poly(const PsiArgs& a) {
    const double n = a.n, x = a.x;
    double y = a.y, z = a.z;
    if (!(n > 0)) throw std::invalid_argument("pi_poly: degenerate n");
    if (y < z) std::swap(y, z);

    const double tol = 1e-12;
    auto near = [tol](double u, double v) {
        return std::abs(u - v) <= tol * std::max({1.0, std::abs(u), std::abs(v)});
    };
    const double c54 = 5.0 / 4.0;
    const double inf = std::numeric_limits<double>::infinity();

    if (near(x, y) && near(y, z)) {
        // x = y = z
        return c54 * c54 * std::sqrt(2.0 * kPi * z * (n - z) / n);
    }
    if (near(x, y)) {
        // x = y > z
        return c54 * c54 * c54 * std::sqrt(y * (n - z) / (n * (y - z)));
    }
    if (near(x, y + z)) {
        // x = y + z
        const double den = n * (n - y - z);
        if (den <= 0) return inf;
        return c54 * c54 * c54 * std::sqrt((n - y) * (n - z) / den);
    }
    // {y,z} < x < y+z
    const double den = 2.0 * kPi * n * (y + z - x) * (x - y) * (x - z) * (n - x);
    if (den <= 0) return inf;
    const double num = y * z * (n - y) * (n - z);
    return c54 * c54 * c54 * c54 * std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// Exact two-set intersection probability
// ---------------------------------------------------------------------------

// P_n(b, b1, b2) = C(b1, b1+b2-b) C(n-b1, b-b1) / C(n, b2):
// probability that two independent uniform subsets of [n], of sizes b1 and
// b2, have a union of size exactly b. Computed in log space.
inline double intersect_prob(long long n, long long b, long long b1, long long b2) {
    if (n < 0 || b1 < 0 || b2 < 0) throw std::invalid_argument("intersect_prob: negative size");
    if (b1 > n || b2 > n) throw std::invalid_argument("intersect_prob: subset larger than ground set");
    if (b < std::max(b1, b2) || b > b1 + b2)
        throw std::invalid_argument("intersect_prob: b outside [max(b1,b2), b1+b2]");
    if (b > n) return 0.0;  // impossible but inside the declared range
    const double lp = log_choose(b1, b1 + b2 - b) + log_choose(n - b1, b - b1) - log_choose(n, b2);
    return std::isinf(lp) ? 0.0 : std::exp(lp);
}

// ---------------------------------------------------------------------------
// Stirling bracket on binomial coefficients
// ---------------------------------------------------------------------------

struct StirlingBounds {
    double lower = 0;
    double upper = 0;
};

// (16/25) (2 pi p(1-p) N)^(-1/2) e^{N H(p)} <= C(N, Np) <= (5/4) (same).
inline StirlingBounds stirling_bounds(long long N, double p) {
    if (N <= 0) throw std::invalid_argument("stirling_bounds: N must be positive");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("stirling_bounds: p must be in (0,1)");
    const double Np = p * static_cast<double>(N);
    if (std::abs(Np - std::llround(Np)) > 1e-9)
        throw std::invalid_argument("stirling_bounds: Np must be an integer");
    const double base = std::exp(static_cast<double>(N) * shannon_entropy(p)) /
                        std::sqrt(2.0 * kPi * p * (1.0 - p) * static_cast<double>(N));
    return {16.0 / 25.0 * base, 5.0 / 4.0 * base};
}

}  // namespace expander
