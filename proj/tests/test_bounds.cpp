#include "expander/bounds.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "expander/matrices.hpp"
#include "expander/phase.hpp"
#include "oracles.hpp"

using namespace expander;

namespace {

// Independent Monte-Carlo estimate of E|A_s| using std::mt19937_64 and
// rejection-sampled supports (a different code path from the library RNG).
double mc_expected_neighbors(int n, int d, int s, int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> row(0, n - 1);
    std::vector<std::uint8_t> hit(n);
    double total = 0.0;
    for (int t = 0; t < trials; ++t) {
        std::fill(hit.begin(), hit.end(), 0);
        int covered = 0;
        for (int c = 0; c < s; ++c) {
            int placed = 0;
            std::vector<std::uint8_t> incol(n, 0);
            while (placed < d) {
                const int r = row(rng);
                if (incol[r]) continue;
                incol[r] = 1;
                ++placed;
                if (!hit[r]) { hit[r] = 1; ++covered; }
            }
        }
        total += covered;
    }
    return total / trials;
}

double cubic_residual(double a_i, double a_2i, double a_4i) {
    return a_2i * a_2i * a_2i - 2.0 * a_i * a_2i * a_2i + 2.0 * a_i * a_i * a_2i -
           a_i * a_i * a_4i;
}

}  // namespace

TEST(ExpectedNeighbors, ClosedFormExamples) {
    EXPECT_DOUBLE_EQ(expected_neighbors(4, 2, 1), 2.0);
    EXPECT_DOUBLE_EQ(expected_neighbors(4, 2, 2), 3.0);
    EXPECT_THROW(expected_neighbors(8, 9, 4), std::invalid_argument);
}

TEST(ExpectedNeighbors, MatchesIndependentMonteCarlo) {
    const double closed = expected_neighbors(1024, 8, 64);
    EXPECT_NEAR(closed, 404.2, 0.15);
    const double mc = mc_expected_neighbors(1024, 8, 64, 500, 99);
    EXPECT_NEAR(mc, closed, 1e-3 * closed * 3);  // within ~3x the MC standard error
}

TEST(ExpectedNeighbors, RecurrenceIdentity) {
    for (double n = 16; n <= 1048576.0; n *= 4)
        for (double d = 1; d <= 64 && d <= n; d *= 2)
            for (double i = 1; i <= 4096; i *= 2) {
                const double a_i = expected_neighbors(n, d, i);
                const double a_2i = expected_neighbors(n, d, 2 * i);
                EXPECT_LE(std::abs(a_2i - a_i * (2.0 - a_i / n)), 1e-12 * n);
            }
}

TEST(ExpectedChain, WorkedExample) {
    const NeighborChain c = expected_chain(4, 2, 4);
    ASSERT_EQ(c.values.size(), 3u);
    EXPECT_DOUBLE_EQ(c.values[0], 2.0);
    EXPECT_DOUBLE_EQ(c.values[1], 3.0);
    EXPECT_DOUBLE_EQ(c.values[2], 3.75);
}

TEST(ExpectedChain, TwelveLevelsAtPaperScale) {
    const NeighborChain c = expected_chain(1048576.0, 8, 2048);
    EXPECT_EQ(c.values.size(), 12u);
    EXPECT_DOUBLE_EQ(c.top(), expected_neighbors(1048576.0, 8, 2048));
    EXPECT_DOUBLE_EQ(c.values[0], 8.0);
}

TEST(ConstrainedChain, DisjointTopGivesLinearChain) {
    for (double s : {4.0, 8.0, 16.0, 64.0}) {  // powers of two: a_i = d*i exactly
        const NeighborChain c = solve_constrained_chain(1024, 8, s, 8.0 * s);
        for (int j = 0; j <= c.levels(); ++j)
            EXPECT_NEAR(c.values[j], 8.0 * c.index_of(j), 1e-9 * 8.0 * s) << "s=" << s;
    }
}

TEST(ConstrainedChain, ExpectedTopReproducesExpectedChain) {
    // exact agreement at power-of-two s, where every chain step is a true
    // doubling; for other s the solved chain is the maximizer of the weighted
    // psi-sum at that top, which the closed-form profile is not
    for (double s : {4.0, 16.0, 256.0, 2048.0}) {
        const double n = 65536.0, d = 8.0;
        const double a_hat = expected_neighbors(n, d, s);
        const NeighborChain solved = solve_constrained_chain(n, d, s, a_hat);
        const NeighborChain expect = expected_chain(n, d, s);
        for (int j = 0; j <= solved.levels(); ++j)
            EXPECT_NEAR(solved.values[j], expect.values[j], 1e-9 * expect.values[j]) << s;
    }
    const double n = 65536.0, d = 8.0, s = 100.0;
    const double a_hat = expected_neighbors(n, d, s);
    const NeighborChain solved = solve_constrained_chain(n, d, s, a_hat);
    EXPECT_NEAR(solved.top(), a_hat, 1e-9 * a_hat);
    EXPECT_GE(big_psi(n, d, s, solved), big_psi(n, d, s, expected_chain(n, d, s)));
}

TEST(ConstrainedChain, CubicResidualsAndMonotonicity) {
    const double n = 1048576.0, d = 8.0, s = 2048.0;
    const double a_hat = expected_neighbors(n, d, s);
    for (double frac : {0.3, 0.5, 0.8, 0.95}) {
        const NeighborChain c = solve_constrained_chain(n, d, s, frac * a_hat);
        EXPECT_NEAR(c.top(), frac * a_hat, 1e-9 * a_hat);
        for (int j = 2; j <= c.levels(); ++j) {
            EXPECT_LE(std::abs(cubic_residual(c.values[j - 2], c.values[j - 1], c.values[j])),
                      1e-9 * n * n * n);
            EXPECT_GE(c.values[j], c.values[j - 1] - 1e-9);
        }
        EXPECT_GE(c.values[0], d - 1e-12);
        EXPECT_LE(c.top(), n);
    }
}

// Forward propagation's top value is strictly increasing in the free a_2,
// which is what makes the shooting bisection well posed.
TEST(ConstrainedChain, ShootingMonotonicity) {
    const double n = 4096, d = 4;
    std::vector<double> scratch;
    double prev = 0.0;
    for (double a2 = d + 0.05; a2 <= 2 * d; a2 += 0.05) {
        const double top = detail::shoot_top(n, d, 6, a2, scratch);
        EXPECT_GT(top, prev);
        prev = top;
    }
}

TEST(ConstrainedChain, RejectsInfeasibleTops) {
    EXPECT_THROW(solve_constrained_chain(1024, 8, 16, 7.0), std::domain_error);    // below d
    EXPECT_THROW(solve_constrained_chain(1024, 8, 16, 129.0), std::domain_error);  // above ds
    EXPECT_THROW(solve_constrained_chain(64, 8, 16, 65.0), std::domain_error);     // above n
}

TEST(BigPsi, WorkedExample) {
    const NeighborChain c = solve_constrained_chain(4, 1, 2, 2.0);
    const double psi_211 = 1.0 * oracles::entropy_nats(1.0) +
                           3.0 * oracles::entropy_nats(1.0 / 3.0) -
                           4.0 * oracles::entropy_nats(1.0 / 4.0);
    const double expected = (psi_211 + 6.0 * std::log(5.0)) / 4.0;
    EXPECT_NEAR(big_psi(4, 1, 2, c), expected, 1e-12);
    EXPECT_NEAR(big_psi(4, 1, 2, c), 2.3292, 1e-4);
}

TEST(BigPsi, IndependentSumAtPaperScale) {
    // recompute the weighted sum from the chain values directly
    const double n = 1048576.0, d = 8.0, s = 2048.0;
    const NeighborChain c = solve_constrained_chain(n, d, s, 0.75 * d * s);
    double sum = 0.0;
    for (int j = 0; j < c.levels(); ++j) {
        const double x = c.values[j + 1], y = c.values[j];
        const double term = y * oracles::entropy_nats((x - y) / y) +
                            (n - y) * oracles::entropy_nats((x - y) / (n - y)) -
                            n * oracles::entropy_nats(y / n);
        sum += s / (2.0 * static_cast<double>(1ULL << j)) * term;
    }
    sum += 3.0 * s * std::log(5.0 * d);
    EXPECT_NEAR(big_psi(n, d, s, c), sum / n, 1e-10 * std::abs(sum / n) + 1e-15);
}

TEST(BigPsi, RejectsMismatchedChain) {
    const NeighborChain c = expected_chain(64, 4, 8);
    EXPECT_THROW(big_psi(128, 4, 8, c), std::invalid_argument);
    EXPECT_THROW(big_psi(64, 4, 16, c), std::invalid_argument);
}

TEST(PMax, WorkedExamples) {
    EXPECT_NEAR(p_max(1, 1), 2.0 / (25.0 * std::sqrt(2.0 * kPi)), 1e-15);
    EXPECT_NEAR(p_max(1, 1), 0.0319154, 1e-7);
    EXPECT_NEAR(p_max(4, 1), p_max(1, 1) / 8.0, 1e-15);
    EXPECT_NEAR(p_max(100, 8), 2.0 / (25.0 * std::sqrt(2.0 * kPi * 1e6 * 512.0)), 1e-18);
    EXPECT_NEAR(p_max(100, 8), 1.411e-6, 2e-9);
    EXPECT_GT(p_max(10, 3), p_max(11, 3));
    EXPECT_GT(p_max(10, 3), p_max(10, 4));
}

TEST(TailBound, DominatesEmpiricalFrequencyAtExpectedValue) {
    const double n = 1024, d = 8, s = 16;
    const double a_hat = expected_neighbors(n, d, s);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> row(0, 1023);
    int hits = 0;
    const int trials = 10000;
    std::vector<std::uint8_t> seen(1024);
    for (int t = 0; t < trials; ++t) {
        std::fill(seen.begin(), seen.end(), 0);
        int covered = 0;
        for (int c = 0; c < 16; ++c) {
            int placed = 0;
            std::vector<std::uint8_t> incol(1024, 0);
            while (placed < 8) {
                const int r = row(rng);
                if (incol[r]) continue;
                incol[r] = 1;
                ++placed;
                if (!seen[r]) { seen[r] = 1; ++covered; }
            }
        }
        if (covered <= a_hat) ++hits;
    }
    const double freq = static_cast<double>(hits) / trials;
    EXPECT_GT(tail_bound(n, d, s, a_hat), freq);
}

TEST(TailBound, DecreasesBelowTheExpectedValue) {
    const double n = 1024, d = 8, s = 16;
    const double a_hat = expected_neighbors(n, d, s);
    EXPECT_LT(tail_bound(n, d, s, 0.8 * a_hat), tail_bound(n, d, s, a_hat));
}

TEST(TailBound, DominatesExactTailOnTinyInstance) {
    const UnionPmf pmf = exact_union_distribution(16, 2, 4);
    EXPECT_GE(tail_bound(16, 2, 4, 6.0), pmf.tail_leq(6));
}

TEST(Rip1TailBound, EpsilonToZeroRecoversDisjointTop) {
    // a_s -> ds as eps -> 0; at a_s = ds the solver's chain is the linear one
    const ExpanderParams params(16, 1024, 4096, 8, 1e-9);
    const double b = rip1_tail_bound(params, 16);
    EXPECT_GT(b, 0.0);
    const NeighborChain c = solve_constrained_chain(1024, 8, 16, 128.0);
    for (int j = 0; j <= c.levels(); ++j)
        EXPECT_NEAR(c.values[j], 8.0 * c.index_of(j), 1e-6);
}

TEST(Rip1TailBound, FinitePositiveAndIncreasingInS) {
    const ExpanderParams params(16, 1024, 4096, 8, 1.0 / 6.0);
    double prev = 0.0;
    for (double s : {4.0, 8.0, 16.0, 32.0}) {
        const double b = rip1_tail_bound(params, s);
        EXPECT_GT(b, 0.0);
        EXPECT_GT(b, prev);
        prev = b;
    }
}

TEST(PsiNet, RegimeAndSignExamples) {
    EXPECT_THROW(psi_net(ExpanderParams(2049, 1024, 4096, 8, 0.25)), std::domain_error);
    // (k=256, n=1024, N=4096, d=8, eps=1/4): failure regime, exponent positive
    EXPECT_GT(psi_net(ExpanderParams(256, 1024, 4096, 8, 0.25)), 0.0);
}

// Below the phase transition the per-set log bound is negative:
// n Psi + log p_max < 0 under the root of the net exponent.
TEST(PsiNet, LogBoundNegativeBelowTransition) {
    const double n = 1048576.0, d = 8.0, eps = 0.25, delta = 0.5;
    const RhoRoot root = rho_exp(delta, d, eps, n);
    ASSERT_EQ(root.status, RootStatus::Ok);
    const double k = 0.5 * root.rho * n;
    const double log_bound =
        std::log(p_max(k, d)) +
        n * big_psi(n, d, k, solve_constrained_chain(n, d, k, (1 - eps) * d * k));
    EXPECT_LT(log_bound, 0.0);
}

TEST(PsiNet, DecreasingInEpsilon) {
    double prev = 1e300;
    for (double eps : {0.05, 0.1, 0.2, 0.3, 0.4}) {
        const double v = psi_net(ExpanderParams(64, 4096, 16384, 8, eps));
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(PPrimeMax, WorkedExamples) {
    EXPECT_NEAR(p_prime_max(4096, 256, 8),
                1.0 / (16.0 * kPi * 256.0 * std::sqrt(512.0 * (1.0 - 256.0 / 4096.0))), 1e-15);
    EXPECT_NEAR(p_prime_max(2 * 300, 300, 1), 1.0 / (16.0 * kPi * 300.0 * std::sqrt(0.5)), 1e-15);
    EXPECT_GT(p_prime_max(4096, 256, 8), p_prime_max(4096, 257, 8));
    EXPECT_GT(p_prime_max(4096, 256, 8), p_prime_max(4096, 256, 9));
    EXPECT_THROW(p_prime_max(100, 100, 4), std::invalid_argument);
}
