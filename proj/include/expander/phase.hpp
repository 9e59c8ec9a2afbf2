#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "expander/bounds.hpp"

namespace expander {

// ---------------------------------------------------------------------------
// Phase-transition roots: largest rho = k/n with a vanishing exponent
// ---------------------------------------------------------------------------

enum class RootStatus {
    Ok,
    AllNegative,  // exponent < 0 across the bracket: rho = 1 boundary marker
    AllPositive   // exponent > 0 across the bracket: rho = 0 marker
};

struct RhoRoot {
    double rho = 0;
    double residual = 0;  // exponent value at the returned root (Ok only)
    RootStatus status = RootStatus::Ok;
};

namespace detail {

// Largest zero crossing of f on [lo, hi]. The net exponent is strictly
// increasing in k/n at the transition, but the dyadic chain's
// level count makes it piecewise in k with downward jumps at powers of two,
// so the bracket is located by a fine downward scan before bisecting. A
// sign change that turns out to be a jump (no residual-zero point) is
// skipped and the scan resumes below it.
inline RhoRoot scan_bisect_rho(const std::function<double(double)>& f, double lo, double hi) {
    constexpr int kScanPoints = 4096;
    constexpr double kResidualTol = 1e-10;
    double f_hi = f(hi);
    if (f_hi < 0.0) return {1.0, f_hi, RootStatus::AllNegative};

    const double log_lo = std::log(lo), log_hi = std::log(hi);
    double upper = hi;
    int i = kScanPoints - 1;
    while (i >= 0) {
        // next scan point (descending) where f < 0
        double x = lo, fx = 0.0;
        for (; i >= 0; --i) {
            x = i == 0 ? lo : std::exp(log_lo + (log_hi - log_lo) * i / kScanPoints);
            fx = f(x);
            if (fx < 0.0) break;
            upper = x;
        }
        if (i < 0 || fx >= 0.0) return {0.0, f(lo), RootStatus::AllPositive};

        double a = x, b = upper;
        for (int iter = 0; iter < 200 && b - a > 0; ++iter) {
            const double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) break;
            (f(mid) < 0.0 ? a : b) = mid;
        }
        const double root = 0.5 * (a + b);
        const double residual = f(root);
        if (std::abs(residual) < kResidualTol) return {root, residual, RootStatus::Ok};
        // crossing was a discontinuity; keep scanning below it
        upper = a;
        --i;
    }
    return {0.0, f(lo), RootStatus::AllPositive};
}

}  // namespace detail

// Largest rho in (0, 1) with H(k/N) + (n/N) Psi(k, d, eps) = 0 at k = rho n,
// N = n / delta, k treated continuously. Bracket caps keep k >= 2,
// (1 - eps) d k <= n (solver feasibility) and k <= N/2 (psi_net regime).
inline RhoRoot rho_exp(double delta, double d, double epsilon, double n) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("rho_exp: delta outside (0,1)");
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw std::invalid_argument("rho_exp: epsilon outside (0,1/2)");
    if (!(n >= 4)) throw std::invalid_argument("rho_exp: n too small");
    const double N = n / delta;
    const double lo = 2.0 / n;
    const double hi = std::min({1.0, 1.0 / ((1.0 - epsilon) * d), 0.5 / delta}) * (1.0 - 1e-9);
    if (hi <= lo) throw std::invalid_argument("rho_exp: empty bracket, n too small for this delta");
    auto f = [&](double rho) { return psi_net(ExpanderParams(rho * n, n, N, d, epsilon)); };
    return detail::scan_bisect_rho(f, lo, hi);
}

// Baseline collision-count exponent:
// H(k/N) + (dk/N) H(eps) + (eps d k / N) log(dk/n), i.e. in (rho, delta)
// variables H(rho delta) + d rho delta H(eps) + eps d rho delta log(d rho).
inline double psi_net_bi(double rho, double delta, double d, double epsilon) {
    return shannon_entropy(rho * delta) + d * rho * delta * shannon_entropy(epsilon) +
           epsilon * d * rho * delta * std::log(d * rho);
}

// Largest rho zeroing the baseline exponent, kept for side-by-side
// comparison with the dyadic-splitting curve.
inline RhoRoot rho_exp_bi(double delta, double d, double epsilon, double n) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("rho_exp_bi: delta outside (0,1)");
    if (!(epsilon > 0.0 && epsilon < 0.5))
        throw std::invalid_argument("rho_exp_bi: epsilon outside (0,1/2)");
    if (!(n >= 4)) throw std::invalid_argument("rho_exp_bi: n too small");
    const double lo = 2.0 / n;
    const double hi = std::min(1.0, 0.5 / delta) * (1.0 - 1e-9);
    if (hi <= lo) throw std::invalid_argument("rho_exp_bi: empty bracket");
    auto f = [&](double rho) { return psi_net_bi(rho, delta, d, epsilon); };
    return detail::scan_bisect_rho(f, lo, hi);
}

// ---------------------------------------------------------------------------
// Algorithm guarantee curves
// ---------------------------------------------------------------------------

enum class Algorithm { L1, Ssmp, Er };

inline double algorithm_epsilon(Algorithm alg) {
    switch (alg) {
        case Algorithm::L1: return 1.0 / 6.0;
        case Algorithm::Ssmp: return 1.0 / 16.0;
        case Algorithm::Er: return 1.0 / 4.0;
    }
    throw std::invalid_argument("algorithm_epsilon: unknown algorithm");
}

// rho^alg(delta; d) = rho^exp at the algorithm's guarantee threshold
// (1/6 for l1, 1/16 for SSMP, 1/4 for ER).
inline RhoRoot rho_alg(double delta, double d, double n, Algorithm alg) {
    return rho_exp(delta, d, algorithm_epsilon(alg), n);
}

// ---------------------------------------------------------------------------
// Curve driver
// ---------------------------------------------------------------------------

enum class CurveKind { Exp, Bi, AlgL1, AlgSsmp, AlgEr };

inline std::string curve_kind_name(CurveKind k) {
    switch (k) {
        case CurveKind::Exp: return "exp";
        case CurveKind::Bi: return "bi";
        case CurveKind::AlgL1: return "l1";
        case CurveKind::AlgSsmp: return "ssmp";
        case CurveKind::AlgEr: return "er";
    }
    return "?";
}

struct PhaseCurve {
    CurveKind kind = CurveKind::Exp;
    double d = 0;
    double epsilon = 0;  // effective epsilon (threshold value for alg kinds)
    double n = 0;
    std::vector<double> delta;
    std::vector<double> rho;
    std::vector<double> residual;
    std::vector<RootStatus> status;
};

// Evaluate one curve over a strictly increasing delta grid. Grid points are
// independent; with threads > 1 they are computed in parallel and merged in
// grid order, so the output is identical for any thread count. Per-point
// no-root markers are recorded, not fatal.
inline PhaseCurve phase_curve(std::span<const double> delta_grid, double d, double epsilon,
                              double n, CurveKind kind, int threads = 1) {
    for (std::size_t i = 0; i + 1 < delta_grid.size(); ++i)
        if (!(delta_grid[i] < delta_grid[i + 1]))
            throw std::invalid_argument("phase_curve: delta grid must be strictly increasing");
    double eps = epsilon;
    if (kind == CurveKind::AlgL1) eps = algorithm_epsilon(Algorithm::L1);
    if (kind == CurveKind::AlgSsmp) eps = algorithm_epsilon(Algorithm::Ssmp);
    if (kind == CurveKind::AlgEr) eps = algorithm_epsilon(Algorithm::Er);

    PhaseCurve curve;
    curve.kind = kind;
    curve.d = d;
    curve.epsilon = eps;
    curve.n = n;
    curve.delta.assign(delta_grid.begin(), delta_grid.end());
    const std::size_t m = curve.delta.size();
    curve.rho.resize(m);
    curve.residual.resize(m);
    curve.status.resize(m);

    auto eval_range = [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            const RhoRoot r = kind == CurveKind::Bi ? rho_exp_bi(curve.delta[i], d, eps, n)
                                                    : rho_exp(curve.delta[i], d, eps, n);
            curve.rho[i] = r.rho;
            curve.residual[i] = r.residual;
            curve.status[i] = r.status;
        }
    };

    if (threads <= 1 || m <= 1) {
        eval_range(0, m);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (m + threads - 1) / threads;
        for (int w = 0; w < threads; ++w) {
            const std::size_t i0 = static_cast<std::size_t>(w) * chunk;
            const std::size_t i1 = std::min(m, i0 + chunk);
            if (i0 >= i1) break;
            pool.emplace_back(eval_range, i0, i1);
        }
        for (auto& th : pool) th.join();
    }
    return curve;
}

}  // namespace expander
