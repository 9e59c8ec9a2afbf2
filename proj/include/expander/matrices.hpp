#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "expander/bounds.hpp"
#include "expander/logspace.hpp"
#include "expander/rng.hpp"

namespace expander {

// ---------------------------------------------------------------------------
// SE / SSE matrices
// ---------------------------------------------------------------------------

enum class SupportModel {
    WithoutReplacement,  // column support is a uniform d-subset
    WithReplacement      // abstract's wording: d draws with replacement, duplicates collapse
};

// n x N column-sparse matrix with d nonzeros per column, valued 1 (SE) or
// +-1 (SSE). Column supports are drawn uniformly and independently; storage
// is column-major support lists (sorted row, value). Under WithReplacement a
// column may hold fewer than d distinct rows; that mode is excluded from the
// acceptance runs.
class SparseBinaryMatrix {
public:
    SparseBinaryMatrix() = default;

    SparseBinaryMatrix(int n, int N, int d, bool signed_values, std::uint64_t seed,
                       std::vector<std::uint32_t> col_ptr, std::vector<std::uint32_t> rows,
                       std::vector<std::int8_t> values)
        : n_(n), N_(N), d_(d), signed_(signed_values), seed_(seed),
          col_ptr_(std::move(col_ptr)), rows_(std::move(rows)), values_(std::move(values)) {
        if (col_ptr_.size() != static_cast<std::size_t>(N_) + 1 || col_ptr_.front() != 0 ||
            col_ptr_.back() != rows_.size() || values_.size() != rows_.size())
            throw std::invalid_argument("SparseBinaryMatrix: storage size mismatch");
    }

    int rows() const { return n_; }
    int cols() const { return N_; }
    int degree() const { return d_; }
    bool is_signed() const { return signed_; }
    std::uint64_t seed() const { return seed_; }

    std::span<const std::uint32_t> column_rows(int j) const {
        check_column(j);
        return {rows_.data() + col_ptr_[j], rows_.data() + col_ptr_[j + 1]};
    }

    std::span<const std::int8_t> column_values(int j) const {
        check_column(j);
        return {values_.data() + col_ptr_[j], values_.data() + col_ptr_[j + 1]};
    }

    // y = A x by column-sparse accumulation.
    std::vector<double> multiply(std::span<const double> x) const {
        if (x.size() != static_cast<std::size_t>(N_))
            throw std::invalid_argument("multiply: x has wrong length");
        std::vector<double> y(n_, 0.0);
        for (int j = 0; j < N_; ++j) {
            if (x[j] == 0.0) continue;
            const auto r = column_rows(j);
            const auto v = column_values(j);
            for (std::size_t t = 0; t < r.size(); ++t) y[r[t]] += static_cast<double>(v[t]) * x[j];
        }
        return y;
    }

private:
    void check_column(int j) const {
        if (j < 0 || j >= N_) throw std::out_of_range("SparseBinaryMatrix: column out of range");
    }

    int n_ = 0, N_ = 0, d_ = 0;
    bool signed_ = false;
    std::uint64_t seed_ = 0;
    std::vector<std::uint32_t> col_ptr_;
    std::vector<std::uint32_t> rows_;
    std::vector<std::int8_t> values_;
};

namespace detail {

// Floyd's algorithm: uniform d-subset of [0, n), O(d) draws.
inline void sample_support(int n, int d, SplitMix64& rng, std::vector<std::uint32_t>& out) {
    out.clear();
    for (int j = n - d; j < n; ++j) {
        const auto t = static_cast<std::uint32_t>(rng.uniform_below(static_cast<std::uint64_t>(j)));
        if (std::find(out.begin(), out.end(), t) != out.end())
            out.push_back(static_cast<std::uint32_t>(j));
        else
            out.push_back(t);
    }
    std::sort(out.begin(), out.end());
}

inline void sample_support_with_replacement(int n, int d, SplitMix64& rng,
                                            std::vector<std::uint32_t>& out) {
    out.clear();
    for (int t = 0; t < d; ++t)
        out.push_back(static_cast<std::uint32_t>(rng.uniform_below(static_cast<std::uint64_t>(n - 1))));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

}  // namespace detail

// Draw an SE/SSE matrix. Identical (n, N, d, signed, seed, model) give
// bit-identical matrices; column c consumes the derived stream (seed, 0, c).
inline SparseBinaryMatrix generate(int n, int N, int d, bool signed_values, std::uint64_t seed,
                                   SupportModel model = SupportModel::WithoutReplacement) {
    if (n <= 0 || N <= 0 || d <= 0) throw std::invalid_argument("generate: n, N, d must be positive");
    if (d > n) throw std::invalid_argument("generate: d > n");
    std::vector<std::uint32_t> col_ptr(1, 0);
    std::vector<std::uint32_t> rows;
    rows.reserve(static_cast<std::size_t>(N) * d);
    std::vector<std::int8_t> values;
    values.reserve(rows.capacity());
    std::vector<std::uint32_t> support;
    for (int j = 0; j < N; ++j) {
        SplitMix64 rng = derive_stream(seed, 0, static_cast<std::uint64_t>(j));
        if (model == SupportModel::WithoutReplacement)
            detail::sample_support(n, d, rng, support);
        else
            detail::sample_support_with_replacement(n, d, rng, support);
        for (auto r : support) {
            rows.push_back(r);
            values.push_back(signed_values ? (rng.next() & 1 ? std::int8_t{1} : std::int8_t{-1})
                                           : std::int8_t{1});
        }
        col_ptr.push_back(static_cast<std::uint32_t>(rows.size()));
    }
    return SparseBinaryMatrix(n, N, d, signed_values, seed, std::move(col_ptr), std::move(rows),
                              std::move(values));
}

// ---------------------------------------------------------------------------
// Neighbor sets and expansion
// ---------------------------------------------------------------------------

// |A_S|: number of rows with at least one nonzero among the columns in S.
inline int neighbor_count(const SparseBinaryMatrix& m, std::span<const int> S) {
    std::vector<std::uint8_t> hit(m.rows(), 0);
    int count = 0;
    for (int j : S) {
        for (auto r : m.column_rows(j)) {
            if (!hit[r]) { hit[r] = 1; ++count; }
        }
    }
    return count;
}

// |A_S| / |S|
inline double expansion(const SparseBinaryMatrix& m, std::span<const int> S) {
    if (S.empty()) throw std::invalid_argument("expansion: S must be nonempty");
    return static_cast<double>(neighbor_count(m, S)) / static_cast<double>(S.size());
}

// Exhaustive (k, d, eps)-expander check: every column set X with |X| <= k has
// |Gamma(X)| >= (1 - eps) d |X| (the at-least reading of the expansion
// requirement). Enumeration guard: N <= 24.
inline bool is_expander_on(const SparseBinaryMatrix& m, int k, double eps) {
    if (m.cols() > 24) throw std::invalid_argument("is_expander_on: N > 24 enumeration guard");
    if (k < 1 || k > m.cols()) throw std::invalid_argument("is_expander_on: k out of range");
    if (eps < 0.0) throw std::invalid_argument("is_expander_on: eps must be nonnegative");
    const int blocks = (m.rows() + 63) / 64;
    std::vector<std::uint64_t> masks(static_cast<std::size_t>(m.cols()) * blocks, 0);
    for (int j = 0; j < m.cols(); ++j)
        for (auto r : m.column_rows(j))
            masks[static_cast<std::size_t>(j) * blocks + r / 64] |= 1ULL << (r % 64);

    std::vector<std::uint64_t> acc(static_cast<std::size_t>(k + 1) * blocks, 0);
    std::vector<int> pick(k + 1, 0);

    // Depth-first combinations with running unions.
    int depth = 1;
    pick[1] = 0;
    while (depth >= 1) {
        if (pick[depth] >= m.cols()) {
            --depth;
            if (depth >= 1) ++pick[depth];
            continue;
        }
        const std::uint64_t* prev = &acc[static_cast<std::size_t>(depth - 1) * blocks];
        std::uint64_t* cur = &acc[static_cast<std::size_t>(depth) * blocks];
        const std::uint64_t* col = &masks[static_cast<std::size_t>(pick[depth]) * blocks];
        int count = 0;
        for (int b = 0; b < blocks; ++b) {
            cur[b] = prev[b] | col[b];
            count += std::popcount(cur[b]);
        }
        if (count + 1e-9 < (1.0 - eps) * m.degree() * depth) return false;
        if (depth < k) {
            pick[depth + 1] = pick[depth] + 1;
            ++depth;
        } else {
            ++pick[depth];
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Monte-Carlo ensemble statistics
// ---------------------------------------------------------------------------

struct EnsembleStats {
    std::vector<int> k;             // set sizes, ascending
    std::vector<long long> trials;  // per-k trial count
    std::vector<double> mean;       // mean |A_k|
    std::vector<double> stddev;     // sample standard deviation
    std::vector<int> min;
    std::vector<int> max;
    std::vector<double> expected;   // a_hat_k
    std::vector<double> rel_error;  // |mean - a_hat_k| / a_hat_k
    std::uint64_t seed = 0;
};

// Per-trial, per-k cardinalities |A_k| over fresh matrices. Trial t draws its
// columns from streams (derive_seed(seed, t), 0, c), so trials are
// independent matrices and may run in parallel; aggregation order is fixed
// regardless of thread count.
inline EnsembleStats monte_carlo_neighbors(int n, int d, std::span<const int> k_grid,
                                           long long trials, std::uint64_t seed, int threads = 1) {
    if (n <= 0 || d <= 0 || d > n) throw std::invalid_argument("monte_carlo_neighbors: bad n, d");
    if (trials < 1) throw std::invalid_argument("monte_carlo_neighbors: trials must be >= 1");
    if (k_grid.empty()) throw std::invalid_argument("monte_carlo_neighbors: empty k grid");
    std::vector<int> ks(k_grid.begin(), k_grid.end());
    if (!std::is_sorted(ks.begin(), ks.end()) || ks.front() < 1)
        throw std::invalid_argument("monte_carlo_neighbors: k grid must be ascending and positive");
    if (ks.back() > n) throw std::invalid_argument("monte_carlo_neighbors: max k exceeds n");
    const int k_max = ks.back();
    const std::size_t nk = ks.size();

    std::vector<int> counts(static_cast<std::size_t>(trials) * nk);
    auto run_trials = [&](long long t0, long long t1) {
        std::vector<std::uint8_t> hit(n);
        std::vector<std::uint32_t> support;
        for (long long t = t0; t < t1; ++t) {
            std::fill(hit.begin(), hit.end(), 0);
            const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
            int covered = 0;
            std::size_t gi = 0;
            for (int c = 0; c < k_max; ++c) {
                SplitMix64 rng = derive_stream(trial_seed, 0, static_cast<std::uint64_t>(c));
                detail::sample_support(n, d, rng, support);
                for (auto r : support) {
                    if (!hit[r]) { hit[r] = 1; ++covered; }
                }
                while (gi < nk && ks[gi] == c + 1) {
                    counts[static_cast<std::size_t>(t) * nk + gi] = covered;
                    ++gi;
                }
            }
        }
    };

    if (threads <= 1) {
        run_trials(0, trials);
    } else {
        std::vector<std::thread> pool;
        const long long chunk = (trials + threads - 1) / threads;
        for (int w = 0; w < threads; ++w) {
            const long long t0 = w * chunk;
            const long long t1 = std::min<long long>(trials, t0 + chunk);
            if (t0 >= t1) break;
            pool.emplace_back(run_trials, t0, t1);
        }
        for (auto& th : pool) th.join();
    }

    EnsembleStats stats;
    stats.seed = seed;
    stats.k = ks;
    for (std::size_t gi = 0; gi < nk; ++gi) {
        double sum = 0.0, comp = 0.0;
        int lo = counts[gi], hi = counts[gi];
        for (long long t = 0; t < trials; ++t) {
            const int v = counts[static_cast<std::size_t>(t) * nk + gi];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            const double y = static_cast<double>(v) - comp;  // Kahan accumulation
            const double s = sum + y;
            comp = (s - sum) - y;
            sum = s;
        }
        const double mean = sum / static_cast<double>(trials);
        double ss = 0.0;
        for (long long t = 0; t < trials; ++t) {
            const double dev = static_cast<double>(counts[static_cast<std::size_t>(t) * nk + gi]) - mean;
            ss += dev * dev;
        }
        const double var = trials > 1 ? ss / static_cast<double>(trials - 1) : 0.0;
        const double expected = expected_neighbors(n, d, ks[gi]);
        stats.trials.push_back(trials);
        stats.mean.push_back(mean);
        stats.stddev.push_back(std::sqrt(var));
        stats.min.push_back(lo);
        stats.max.push_back(hi);
        stats.expected.push_back(expected);
        stats.rel_error.push_back(std::abs(mean - expected) / expected);
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Exact |A_s| distribution (sequential DP over two-set union probabilities)
// ---------------------------------------------------------------------------

struct UnionPmf {
    int min_size = 0;       // d
    std::vector<double> p;  // p[b - min_size] = Prob(|A_s| = b)

    double prob(int b) const {
        const int i = b - min_size;
        return (i >= 0 && i < static_cast<int>(p.size())) ? p[i] : 0.0;
    }

    int max_size() const { return min_size + static_cast<int>(p.size()) - 1; }

    double mean() const {
        double m = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) m += (min_size + static_cast<double>(i)) * p[i];
        return m;
    }

    double tail_leq(int b) const {  // Prob(|A_s| <= b)
        double t = 0.0;
        for (int v = min_size; v <= std::min(b, max_size()); ++v) t += prob(v);
        return t;
    }
};

// Exact pmf of |A_s| for s independent uniform d-subsets of [n], by iterating
// p_{t+1}(b') = sum_b p_t(b) C(n-b, b'-b) C(b, d-(b'-b)) / C(n, d).
// Guards n <= 64, s <= 16 keep the DP well inside double precision.
inline UnionPmf exact_union_distribution(int n, int d, int s) {
    if (n < 1 || n > 64) throw std::invalid_argument("exact_union_distribution: need 1 <= n <= 64");
    if (s < 1 || s > 16) throw std::invalid_argument("exact_union_distribution: need 1 <= s <= 16");
    if (d < 1 || d > n) throw std::invalid_argument("exact_union_distribution: need 1 <= d <= n");
    const int b_max = std::min(n, d * s);
    std::vector<double> p(b_max + 1, 0.0), next(b_max + 1, 0.0);
    p[d] = 1.0;
    const double log_cnd = log_choose(n, d);
    for (int t = 1; t < s; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int b = d; b <= std::min(b_max, d * t); ++b) {
            if (p[b] == 0.0) continue;
            for (int add = std::max(0, d - b); add <= std::min({d, n - b, b_max - b}); ++add) {
                const double lw = log_choose(n - b, add) + log_choose(b, d - add) - log_cnd;
                next[b + add] += p[b] * std::exp(lw);
            }
        }
        std::swap(p, next);
    }
    UnionPmf pmf;
    pmf.min_size = d;
    pmf.p.assign(p.begin() + d, p.end());
    return pmf;
}

// ---------------------------------------------------------------------------
// Empirical RIP-1 ratio
// ---------------------------------------------------------------------------

// ||A x||_1 / (d ||x||_1), in (0, 1]. Equals 1 exactly when no collisions
// cancel (SE with nonnegative x, or disjoint supports).
inline double rip1_ratio(const SparseBinaryMatrix& m, std::span<const double> x) {
    double x_norm = 0.0;
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument("rip1_ratio: non-finite entry");
        x_norm += std::abs(v);
    }
    if (x_norm == 0.0) throw std::invalid_argument("rip1_ratio: zero vector");
    const std::vector<double> y = m.multiply(x);
    double y_norm = 0.0;
    for (double v : y) y_norm += std::abs(v);
    return y_norm / (m.degree() * x_norm);
}

// ---------------------------------------------------------------------------
// Plain-text matrix format (bit-exact round trip)
// ---------------------------------------------------------------------------

// Line 1: "n N d signed seed"; then one line per column: "row:value,...".
inline void write_matrix(std::ostream& os, const SparseBinaryMatrix& m) {
    os << m.rows() << ' ' << m.cols() << ' ' << m.degree() << ' ' << (m.is_signed() ? 1 : 0)
       << ' ' << m.seed() << '\n';
    for (int j = 0; j < m.cols(); ++j) {
        const auto r = m.column_rows(j);
        const auto v = m.column_values(j);
        for (std::size_t t = 0; t < r.size(); ++t) {
            if (t) os << ',';
            os << r[t] << ':' << static_cast<int>(v[t]);
        }
        os << '\n';
    }
}

inline SparseBinaryMatrix read_matrix(std::istream& is) {
    int n = 0, N = 0, d = 0, signed_flag = 0;
    std::uint64_t seed = 0;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_matrix: missing header line");
    {
        std::istringstream hs(line);
        if (!(hs >> n >> N >> d >> signed_flag >> seed))
            throw std::runtime_error("read_matrix: bad header line");
    }
    if (n <= 0 || N <= 0 || d <= 0 || d > n) throw std::runtime_error("read_matrix: bad dimensions");
    std::vector<std::uint32_t> col_ptr(1, 0);
    std::vector<std::uint32_t> rows;
    std::vector<std::int8_t> values;
    rows.reserve(static_cast<std::size_t>(N) * d);
    values.reserve(rows.capacity());
    for (int j = 0; j < N; ++j) {
        if (!std::getline(is, line)) throw std::runtime_error("read_matrix: truncated column data");
        std::istringstream ls(line);
        std::string entry;
        while (std::getline(ls, entry, ',')) {
            long long r = 0;
            int v = 0;
            char sep = 0;
            std::istringstream es(entry);
            if (!(es >> r >> sep >> v) || sep != ':')
                throw std::runtime_error("read_matrix: bad entry");
            if (r < 0 || r >= n || (v != 1 && v != -1))
                throw std::runtime_error("read_matrix: entry out of range");
            if (rows.size() > col_ptr.back() && static_cast<std::uint32_t>(r) <= rows.back())
                throw std::runtime_error("read_matrix: column rows not strictly ascending");
            rows.push_back(static_cast<std::uint32_t>(r));
            values.push_back(static_cast<std::int8_t>(v));
        }
        if (col_ptr.back() == rows.size()) throw std::runtime_error("read_matrix: empty column");
        col_ptr.push_back(static_cast<std::uint32_t>(rows.size()));
    }
    return SparseBinaryMatrix(n, N, d, signed_flag != 0, seed, std::move(col_ptr), std::move(rows),
                              std::move(values));
}

inline void save_matrix(const std::string& path, const SparseBinaryMatrix& m) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_matrix: cannot open " + path);
    write_matrix(os, m);
}

inline SparseBinaryMatrix load_matrix(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_matrix: cannot open " + path);
    return read_matrix(is);
}

}  // namespace expander
