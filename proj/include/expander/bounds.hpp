#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "expander/splitmodel.hpp"

namespace expander {

// ---------------------------------------------------------------------------
// Neighbor chains a_1 = d, a_2, a_4, ..., a_{2^(L-1)}, a_s
// ---------------------------------------------------------------------------

// Cardinalities of the set of neighbors along the dyadic chain. Entry j holds
// the value at index 2^j for j < levels(), and the s-indexed top entry at
// j = levels(). s may be real: the phase module root-finds over k = rho * n.
struct NeighborChain {
    double n = 0;
    double d = 0;
    double s = 0;
    std::vector<double> values;

    int levels() const { return static_cast<int>(values.size()) - 1; }

    double index_of(int j) const {
        return j < levels() ? static_cast<double>(1ULL << j) : s;
    }

    double top() const { return values.back(); }
};

inline int chain_levels(double s) {
    if (!(s >= 2.0)) throw std::invalid_argument("chain_levels: s must be >= 2");
    int levels = 0;
    double v = 1.0;
    while (v < s) { v *= 2.0; ++levels; }
    return levels;  // ceil(log2 s), exact for integral s
}

// n (1 - (1 - d/n)^s): closed form of the expected-value recurrence
// a_{2i} = a_i (2 - a_i / n) started from a_1 = d.
inline double expected_neighbors(double n, double d, double s) {
    if (!(n > 0) || !(d >= 1)) throw std::invalid_argument("expected_neighbors: need n > 0, d >= 1");
    if (d > n) throw std::invalid_argument("expected_neighbors: d > n");
    if (!(s >= 1)) throw std::invalid_argument("expected_neighbors: s must be >= 1");
    return -n * std::expm1(s * std::log1p(-d / n));
}

inline NeighborChain expected_chain(double n, double d, double s) {
    const int levels = chain_levels(s);
    NeighborChain chain{n, d, s, {}};
    chain.values.resize(levels + 1);
    for (int j = 0; j < levels; ++j)
        chain.values[j] = expected_neighbors(n, d, static_cast<double>(1ULL << j));
    chain.values[levels] = expected_neighbors(n, d, s);
    return chain;
}

namespace detail {

// Chain cubic rearranged for forward propagation:
// a_{4i} = a_{2i} ((a_{2i} - a_i)^2 + a_i^2) / a_i^2.
inline double chain_step(double a_i, double a_2i) {
    const double diff = a_2i - a_i;
    return a_2i * (diff * diff + a_i * a_i) / (a_i * a_i);
}

// Shoot the chain forward from a trial a_2. Returns the top value, or +inf
// if propagation leaves [d, n] (infeasible trial, counts as "too large" for
// the bisection).
inline double shoot_top(double n, double d, int levels, double a2, std::vector<double>& values) {
    values.resize(levels + 1);
    values[0] = d;
    values[1] = a2;
    for (int j = 2; j <= levels; ++j) {
        values[j] = chain_step(values[j - 2], values[j - 1]);
        if (!(values[j] <= n * (1.0 + 1e-12)))
            return std::numeric_limits<double>::infinity();
    }
    return values[levels];
}

}  // namespace detail

// Solve the constrained cubic system for a fixed top value: a_1 = d, top
// entry = a_s, every interior triple satisfying
// a_{2i}^3 - 2 a_i a_{2i}^2 + 2 a_i^2 a_{2i} - a_i^2 a_{4i} = 0
// (the critical-point condition of the weighted psi-sum at fixed top).
// Shooting + bisection on a_2; the top of the propagated chain is strictly
// increasing in a_2, so the solution is unique.
inline NeighborChain solve_constrained_chain(double n, double d, double s, double a_s) {
    const int levels = chain_levels(s);
    if (d > n) throw std::invalid_argument("solve_constrained_chain: d > n");
    const double a_max = std::min(d * s, n);
    if (a_s < d * (1.0 - 1e-12))
        throw std::domain_error("solve_constrained_chain: a_s < d is infeasible");
    if (a_s > a_max * (1.0 + 1e-12))
        throw std::domain_error("solve_constrained_chain: a_s > min(ds, n), no chain brackets it");

    NeighborChain chain{n, d, s, {}};
    const double tol = 1e-10 * a_s;

    if (a_s <= d * (1.0 + 1e-15)) {  // full-collision chain
        chain.values.assign(levels + 1, d);
        return chain;
    }

    double lo = d;
    double hi = std::min(2.0 * d, n);
    std::vector<double> scratch;
    if (detail::shoot_top(n, d, levels, hi, scratch) <= a_s) {
        lo = hi;  // a_s at (or within tolerance of) the disjoint top
    }
    for (int iter = 0; iter < 200 && hi - lo > 0; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double top = detail::shoot_top(n, d, levels, mid, scratch);
        if (std::abs(top - a_s) <= tol) { lo = hi = mid; break; }
        (top < a_s ? lo : hi) = mid;
    }
    const double top = detail::shoot_top(n, d, levels, 0.5 * (lo + hi), chain.values);
    if (std::isinf(top) || std::abs(top - a_s) > 1e3 * tol)
        throw std::domain_error("solve_constrained_chain: bisection failed to converge");
    chain.values[levels] = a_s;
    return chain;
}

// ---------------------------------------------------------------------------
// Tail bound on |A_s|: exponent and polynomial prefactor
// ---------------------------------------------------------------------------

// Psi(a_s, ..., a_1) = (1/n) [ sum_{i=2^j, j<L} (s/2i) psi_n(a_{2i}, a_i, a_i)
//                              + 3 s log(5d) ],
// the a_{2i} of the top term being the chain's s-indexed entry.
inline double big_psi(double n, double d, double s, const NeighborChain& chain) {
    if (chain.n != n || chain.d != d || chain.s != s)
        throw std::invalid_argument("big_psi: chain does not match (n, d, s)");
    if (chain.levels() != chain_levels(s))
        throw std::invalid_argument("big_psi: chain has wrong number of levels");
    double sum = 0.0;
    for (int j = 0; j < chain.levels(); ++j) {
        const double weight = s / (2.0 * static_cast<double>(1ULL << j));
        sum += weight * psi_n(PsiArgs(n, chain.values[j + 1], chain.values[j], chain.values[j]));
    }
    sum += 3.0 * s * std::log(5.0 * d);
    return sum / n;
}

// p_max(s, d) = 2 / (25 sqrt(2 pi s^3 d^3))
inline double p_max(double s, double d) {
    if (!(s >= 1) || !(d >= 1)) throw std::invalid_argument("p_max: need s, d >= 1");
    return 2.0 / (25.0 * std::sqrt(2.0 * kPi * s * s * s * d * d * d));
}

// Prob(|A_s| <= a_s) < p_max(s, d) exp(n Psi). Uses the constrained chain for
// a_s below its expected value and the expected chain otherwise. The result
// may exceed 1 (vacuous but valid); it is returned unclipped.
inline double tail_bound(double n, double d, double s, double a_s) {
    const double a_hat = expected_neighbors(n, d, s);
    const NeighborChain chain =
        a_s < a_hat ? solve_constrained_chain(n, d, s, a_s) : expected_chain(n, d, s);
    return p_max(s, d) * std::exp(n * big_psi(n, d, s, chain));
}

// ---------------------------------------------------------------------------
// RIP-1 failure bound and the union-bound exponent
// ---------------------------------------------------------------------------

struct ExpanderParams {
    double k = 0;        // sparsity / set size
    double n = 0;        // rows
    double N = 0;        // columns
    double d = 0;        // left degree
    double epsilon = 0;  // expansion deficit, in (0, 1/2)

    ExpanderParams(double k_, double n_, double N_, double d_, double eps_)
        : k(k_), n(n_), N(N_), d(d_), epsilon(eps_) {
        if (!(epsilon > 0.0 && epsilon < 0.5))
            throw std::invalid_argument("ExpanderParams: epsilon must be in (0, 1/2)");
        if (!(d >= 1) || d > n) throw std::invalid_argument("ExpanderParams: need 1 <= d <= n");
        if (!(k >= 1) || k > N) throw std::invalid_argument("ExpanderParams: need 1 <= k <= N");
    }
};

// Bound on Prob(||A_S x||_1 <= (1 - 2 eps) d ||x||_1) for one s-set:
// tail_bound evaluated at a_s = (1 - eps) d s.
inline double rip1_tail_bound(const ExpanderParams& params, double s) {
    const double a_s = (1.0 - params.epsilon) * params.d * s;
    return tail_bound(params.n, params.d, s, a_s);
}

// Psi_net(k, n, N; d, eps) = H(k/N) + (n/N) Psi(k, d, eps), the exponent of
// the union bound over all sets of size <= k (dominant term s = k).
inline double psi_net(const ExpanderParams& params) {
    const double k = params.k, n = params.n, N = params.N, d = params.d;
    if (k > N / 2.0)
        throw std::domain_error("psi_net: requires k <= N/2 (entropy monotonicity regime)");
    const double a_s = (1.0 - params.epsilon) * d * k;
    const double a_hat = expected_neighbors(n, d, k);
    const NeighborChain chain =
        a_s < a_hat ? solve_constrained_chain(n, d, k, a_s) : expected_chain(n, d, k);
    return shannon_entropy(k / N) + (n / N) * big_psi(n, d, k, chain);
}

// p'_max(N, k, d) = 1 / (16 pi k sqrt(d^3 (1 - k/N)))
inline double p_prime_max(double N, double k, double d) {
    if (!(k >= 1) || k >= N) throw std::invalid_argument("p_prime_max: need 1 <= k < N");
    return 1.0 / (16.0 * kPi * k * std::sqrt(d * d * d * (1.0 - k / N)));
}

}  // namespace expander
