#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "expander/matrices.hpp"

namespace expander {

// ---------------------------------------------------------------------------
// Problems and results
// ---------------------------------------------------------------------------

struct RecoveryProblem {
    SparseBinaryMatrix matrix;
    std::vector<double> y;  // measurements, length n
    int k = 1;              // target sparsity
    double eta = 0.0;       // noise magnitude ||e||_1

    RecoveryProblem(SparseBinaryMatrix m, std::vector<double> y_, int k_, double eta_ = 0.0)
        : matrix(std::move(m)), y(std::move(y_)), k(k_), eta(eta_) {
        if (y.size() != static_cast<std::size_t>(matrix.rows()))
            throw std::invalid_argument("RecoveryProblem: y length != n");
        if (k < 1) throw std::invalid_argument("RecoveryProblem: k must be >= 1");
        if (eta < 0.0) throw std::invalid_argument("RecoveryProblem: eta must be >= 0");
    }
};

struct RecoveryResult {
    std::vector<double> estimate;  // length N, at most k nonzeros
    int iterations = 0;
    bool converged = false;
    double residual_l1 = 0.0;
};

namespace detail {

inline double l1_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

inline bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Gaps and hard thresholding
// ---------------------------------------------------------------------------

// g = y - A x_hat
inline std::vector<double> gaps(const SparseBinaryMatrix& m, std::span<const double> x_hat,
                                std::span<const double> y) {
    if (y.size() != static_cast<std::size_t>(m.rows()))
        throw std::invalid_argument("gaps: y length != n");
    std::vector<double> g(y.begin(), y.end());
    for (int j = 0; j < m.cols(); ++j) {
        if (x_hat[j] == 0.0) continue;
        const auto r = m.column_rows(j);
        const auto v = m.column_values(j);
        for (std::size_t t = 0; t < r.size(); ++t) g[r[t]] -= static_cast<double>(v[t]) * x_hat[j];
    }
    return g;
}

// H_k: keep the k largest-magnitude entries, zero the rest; ties broken by
// lowest index.
inline std::vector<double> hard_threshold(std::span<const double> x, int k) {
    if (k < 0) throw std::invalid_argument("hard_threshold: k must be >= 0");
    std::vector<double> out(x.begin(), x.end());
    if (k >= static_cast<int>(x.size())) return out;
    std::vector<int> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return std::abs(x[a]) > std::abs(x[b]); });
    for (std::size_t i = k; i < order.size(); ++i) out[order[i]] = 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// SSMP inner minimizer
// ---------------------------------------------------------------------------

struct BestIncrement {
    double z = 0.0;
    double new_residual_l1 = 0.0;
};

// Minimize ||residual - z * column||_1 over z. With +-1 column values this is
// the (weighted) median of {residual_row * value_row} over the column's rows;
// the returned residual norm is exact.
inline BestIncrement best_increment(const SparseBinaryMatrix& m, int column,
                                    std::span<const double> residual, double residual_l1) {
    const auto rows = m.column_rows(column);
    const auto vals = m.column_values(column);
    std::vector<double> v(rows.size());
    for (std::size_t t = 0; t < rows.size(); ++t)
        v[t] = residual[rows[t]] * static_cast<double>(vals[t]);
    std::sort(v.begin(), v.end());
    const double z = v[(v.size() - 1) / 2];
    double delta = 0.0;
    for (double u : v) delta += std::abs(u - z) - std::abs(u);
    return {z, residual_l1 + delta};
}

inline BestIncrement best_increment(const SparseBinaryMatrix& m, int column,
                                    std::span<const double> residual) {
    return best_increment(m, column, residual, detail::l1_norm(residual));
}

// ---------------------------------------------------------------------------
// Expander Recovery (Algorithm 2)
// ---------------------------------------------------------------------------

// ER: repeat at most 2k times; stop when y = A x_hat; otherwise elect the
// lowest-index variable node whose most frequent nonzero gap value covers at
// least (1 - 2 eps) d of its measurements and add that gap to the node.
// For SSE columns the per-measurement values A_ij g_i are compared, which on
// SE matrices is the plain gap. A stall (no qualifying node) terminates with
// converged = false.
inline RecoveryResult er_recover(const RecoveryProblem& problem, double eps = 0.25) {
    if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("er_recover: eps outside (0, 1/2)");
    const SparseBinaryMatrix& A = problem.matrix;
    const int N = A.cols();
    const int k = problem.k;
    const double y_l1 = detail::l1_norm(problem.y);
    const double conv_tol = 1e-12 * std::max(1.0, y_l1);
    const double need = (1.0 - 2.0 * eps) * A.degree() - 1e-9;

    std::vector<double> x(N, 0.0);
    std::vector<double> g(problem.y.begin(), problem.y.end());
    int iterations = 0;
    bool converged = y_l1 <= conv_tol;
    std::vector<double> vals;

    while (!converged && iterations < 2 * k) {
        int best_j = -1;
        double best_g = 0.0;
        for (int j = 0; j < N && best_j < 0; ++j) {
            const auto rows = A.column_rows(j);
            const auto cvals = A.column_values(j);
            vals.clear();
            for (std::size_t t = 0; t < rows.size(); ++t)
                vals.push_back(g[rows[t]] * static_cast<double>(cvals[t]));
            std::sort(vals.begin(), vals.end());
            // Longest run of (nearly) identical nonzero values.
            std::size_t t = 0;
            while (t < vals.size()) {
                std::size_t u = t + 1;
                while (u < vals.size() && detail::nearly_equal(vals[u], vals[t])) ++u;
                if (vals[t] != 0.0 && static_cast<double>(u - t) >= need) {
                    best_j = j;
                    best_g = vals[t];
                    break;
                }
                t = u;
            }
        }
        if (best_j < 0) break;  // stall
        x[best_j] += best_g;
        const auto rows = A.column_rows(best_j);
        const auto cvals = A.column_values(best_j);
        for (std::size_t t = 0; t < rows.size(); ++t)
            g[rows[t]] -= static_cast<double>(cvals[t]) * best_g;
        ++iterations;
        converged = detail::l1_norm(g) <= conv_tol;
    }

    RecoveryResult result;
    result.estimate = hard_threshold(x, k);
    const std::vector<double> final_gap = gaps(A, result.estimate, problem.y);
    result.residual_l1 = detail::l1_norm(final_gap);
    result.converged = result.residual_l1 <= conv_tol;
    result.iterations = iterations;
    return result;
}

// ---------------------------------------------------------------------------
// Sequential Sparse Matching Pursuit (Algorithm 1)
// ---------------------------------------------------------------------------

// SSMP: T outer iterations of (c - 1) k sequential single-coordinate updates,
// each the exact 1-D l1 minimizer over all N coordinates (greatest decrease
// wins, lowest index on ties), followed by hard thresholding to k terms.
// T = 0 selects max(1, ceil(log(||y||_1 / max(eta, 1e-12)))): a logarithmic
// schedule driven by the observable ||y||_1 in place of the unknown ||x||_1.
inline RecoveryResult ssmp_recover(const RecoveryProblem& problem, int c = 2, int T = 0) {
    if (c < 2) throw std::invalid_argument("ssmp_recover: c must be >= 2");
    if (T < 0) throw std::invalid_argument("ssmp_recover: T must be >= 0 (0 = auto)");
    const SparseBinaryMatrix& A = problem.matrix;
    const int N = A.cols();
    const int k = problem.k;
    const double y_l1 = detail::l1_norm(problem.y);
    const double conv_tol = 1e-14 * std::max(1.0, y_l1);
    if (T == 0)
        T = std::max(1, static_cast<int>(
                            std::ceil(std::log(std::max(y_l1, 1e-12) / std::max(problem.eta, 1e-12)))));

    std::vector<double> x(N, 0.0);
    std::vector<double> r(problem.y.begin(), problem.y.end());
    double r_l1 = y_l1;
    int outer_used = 0;
    bool stalled = false;

    for (int outer = 0; outer < T && !stalled && r_l1 > conv_tol; ++outer) {
        ++outer_used;
        const long long inner_steps = static_cast<long long>(c - 1) * k;
        for (long long step = 0; step < inner_steps; ++step) {
            int best_j = -1;
            double best_z = 0.0, best_l1 = r_l1;
            for (int j = 0; j < N; ++j) {
                const BestIncrement bi = best_increment(A, j, r, r_l1);
                if (bi.new_residual_l1 < best_l1 - 1e-15 * std::max(1.0, r_l1)) {
                    best_j = j;
                    best_z = bi.z;
                    best_l1 = bi.new_residual_l1;
                }
            }
            if (best_j < 0) { stalled = true; break; }  // no strict decrease
            x[best_j] += best_z;
            const auto rows = A.column_rows(best_j);
            const auto vals = A.column_values(best_j);
            for (std::size_t t = 0; t < rows.size(); ++t)
                r[rows[t]] -= static_cast<double>(vals[t]) * best_z;
            r_l1 = best_l1;
            if (r_l1 <= conv_tol) break;
        }
        x = hard_threshold(x, k);
        const std::vector<double> Ax = A.multiply(x);
        for (int i = 0; i < A.rows(); ++i) r[i] = problem.y[i] - Ax[i];
        r_l1 = detail::l1_norm(r);
    }

    RecoveryResult result;
    result.estimate = hard_threshold(x, k);
    result.iterations = outer_used;
    result.residual_l1 = r_l1;
    result.converged = r_l1 <= std::max(conv_tol, problem.eta);
    return result;
}

}  // namespace expander
