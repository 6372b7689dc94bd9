#include "cavbec/oracle.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace cavbec;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> grid(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

}  // namespace

TEST(Oracle, QubitClosedForm) {
    // Singular values |cos Omega t| and |sin Omega t| give log2(1 + |sin 2 Omega t|).
    for (double wt : grid(0, kPi, 97)) {
        const double want = std::log2(1.0 + std::abs(std::sin(2 * wt)));
        EXPECT_NEAR(pure_state_negativity(ideal_evolve(1, wt)), want, 1e-12) << wt;
    }
}

TEST(Oracle, StateIsNormalizedWithBinomialMagnitudes) {
    for (int N : {1, 4, 8}) {
        const auto s = ideal_evolve(N, 0.731, true, 0.2);
        EXPECT_NEAR(s.coeffs.squaredNorm(), 1.0, 1e-13);
        EXPECT_NEAR(std::norm(s.coeffs(1, 0)), binomial(N, 1) * std::pow(4.0, -N), 1e-15);
    }
    EXPECT_THROW(ideal_evolve(0, 0.1), std::invalid_argument);
}

TEST(Oracle, ProductStateAtZeroAndHalfPi) {
    for (int N = 1; N <= 10; ++N) {
        EXPECT_NEAR(pure_state_negativity(ideal_evolve(N, 0.0)), 0.0, 1e-12) << N;
        EXPECT_NEAR(pure_state_negativity(ideal_evolve(N, kPi / 2)), 0.0, 1e-9) << N;
        EXPECT_NEAR(pure_state_negativity(ideal_evolve(N, kPi)), 0.0, 1e-9) << N;
    }
}

TEST(Oracle, SymmetricAboutQuarterPi) {
    for (int N : {2, 3, 7}) {
        for (double t : grid(0.01, 0.7, 23))
            EXPECT_NEAR(pure_state_negativity(ideal_evolve(N, kPi / 4 - t)),
                        pure_state_negativity(ideal_evolve(N, kPi / 4 + t)), 1e-9);
    }
}

TEST(Oracle, LocalTermsDoNotChangeEntanglement) {
    for (int N : {2, 5}) {
        for (double wt : {0.1, 0.4, 1.2}) {
            const double E = pure_state_negativity(ideal_evolve(N, wt));
            EXPECT_NEAR(pure_state_negativity(ideal_evolve(N, wt, true, 0.9)), E, 1e-10);
        }
    }
}

TEST(Oracle, MaximallyEntangledForQubitsAtCnotTime) {
    const auto ct = characteristic_times(1);
    EXPECT_NEAR(pure_state_negativity(ideal_evolve(1, ct.cnot_time)), 1.0, 1e-12);
    EXPECT_NEAR(characteristic_times(8).cnot_time, kPi / 32, 1e-15);
    EXPECT_NEAR(characteristic_times(8).macro_time, 0.25, 1e-15);
    EXPECT_NEAR(characteristic_times(4).macro_time_loose, 0.5, 1e-15);
}

TEST(Oracle, CrevassesForLargerN) {
    const auto ts = grid(0, kPi / 2, 2001);
    const auto E8 = crevasse_curve(8, ts);
    EXPECT_GE(count_local_minima(E8), 3);
    const auto E1 = crevasse_curve(1, ts);
    EXPECT_EQ(count_local_minima(E1), 0);
    // early growth saturates the maximum scale near the macroscopic time
    const double emax = max_entanglement(8);
    EXPECT_GT(pure_state_negativity(ideal_evolve(8, characteristic_times(8).macro_time)) / emax, 0.5);
}

TEST(Oracle, CountLocalMinima) {
    EXPECT_EQ(count_local_minima({3, 1, 3, 0, 0, 2, 1}), 2);
    EXPECT_EQ(count_local_minima({1, 2, 3}), 0);
    EXPECT_EQ(count_local_minima({}), 0);
}

TEST(Oracle, RescaleFitRecoversKnownFactor) {
    const auto ts = grid(0, 0.8, 81);
    for (double f : {0.75, 1.0, 1.37}) {
        std::vector<double> E;
        for (double t : ts) E.push_back(pure_state_negativity(ideal_evolve(4, f * t)));
        const auto fit = fit_time_rescale(4, ts, E);
        EXPECT_NEAR(fit.factor, f, 1e-6);
        EXPECT_LT(fit.max_abs_dev, 1e-6);
    }
    EXPECT_THROW(fit_time_rescale(4, ts, {1.0}), std::invalid_argument);
}
