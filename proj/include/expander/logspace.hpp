#pragma once

#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace expander {

namespace detail {

// Precomputed log-factorial table, built once and read concurrently.
// C(n,d) overflows double for paper-scale n, so all combinatorial mass is
// kept in log space until the boundary.
inline const std::vector<double>& log_factorial_table() {
    static std::vector<double> table;
    static std::once_flag once;
    std::call_once(once, [] {
        constexpr std::size_t cap = 1u << 16;
        table.resize(cap + 1);
        table[0] = 0.0;
        for (std::size_t k = 1; k <= cap; ++k)
            table[k] = table[k - 1] + std::log(static_cast<double>(k));
    });
    return table;
}

}  // namespace detail

inline double log_factorial(long long k) {
    if (k < 0) throw std::invalid_argument("log_factorial: negative argument");
    const auto& t = detail::log_factorial_table();
    if (static_cast<std::size_t>(k) < t.size()) return t[static_cast<std::size_t>(k)];
    return std::lgamma(static_cast<double>(k) + 1.0);
}

// log C(n, k); -inf when the coefficient is zero (k outside [0, n]).
inline double log_choose(long long n, long long k) {
    if (n < 0) throw std::invalid_argument("log_choose: negative n");
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

}  // namespace expander
