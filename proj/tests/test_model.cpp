#include "cavbec/entanglement.hpp"
#include "cavbec/model.hpp"
#include "cavbec/oracle.hpp"

#include "reference.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace cavbec;

TEST(Hamiltonian, MatchesKroneckerConstruction) {
    for (int N : {1, 2, 3}) {
        ModelParams p;
        p.g = 0.7, p.G = 1.3, p.delta_c = 4.0, p.delta_l = 9.0;
        const BasisTable t({N, 1, 1});
        const auto sys = ref::build(N, p.g, p.G, p.delta_c, p.delta_l, 0, 0);
        EXPECT_LT((Eigen::MatrixXcd(hamiltonian_total(p, t)) - sys.H).norm(), 1e-13) << "N=" << N;
    }
}

TEST(Hamiltonian, HermitianAndSplitsIntoParts) {
    ModelParams p;
    const BasisTable t({3, 1, 1});
    const Eigen::MatrixXcd H(hamiltonian_total(p, t));
    EXPECT_LT((H - H.adjoint()).norm(), 1e-14);
    const Eigen::MatrixXcd parts = Eigen::MatrixXcd(hamiltonian_cavity(p, t)) + Eigen::MatrixXcd(hamiltonian_laser(p, t));
    EXPECT_LT((H - parts).norm(), 1e-14);
}

TEST(Hamiltonian, ConservesAtomsOutsideLevelA) {
    // H never touches the a-level, so k_i + n_i is a good quantum number.
    ModelParams p;
    const BasisTable t({4, 1, 1});
    const SparseOperator H = hamiltonian_total(p, t);
    for (Eigen::Index r = 0; r < H.outerSize(); ++r)
        for (SparseOperator::InnerIterator it(H, r); it; ++it) {
            const auto& a = t[it.row()];
            const auto& b = t[it.col()];
            EXPECT_EQ(a.k1 + a.n1, b.k1 + b.n1);
            EXPECT_EQ(a.k2 + a.n2, b.k2 + b.n2);
        }
}

TEST(EffectiveParams, FormulasAndConventions) {
    ModelParams p;
    p.g = 1, p.G = 1, p.delta_c = 10, p.delta_l = 20;
    const auto e = effective_params(p, 1);
    EXPECT_DOUBLE_EQ(e.omega_big, 1.0 / 8000.0);
    EXPECT_DOUBLE_EQ(e.omega, 1.0 / 40.0 + 1.0 / 4000.0);
    const auto lit = effective_params(p, 1, RateConvention::adiabatic_literal);
    EXPECT_DOUBLE_EQ(lit.omega_big, 2.0 * e.omega_big);
    p.delta_c = 0;
    EXPECT_THROW(effective_params(p, 1), std::invalid_argument);
}

TEST(EffectiveParams, ExactQubitDynamicsPeaksAtQuarterPeriod) {
    // Exact unitary evolution of the full N=1 model: with the entangling rate
    // taken as the S1 S2 coefficient, the Bell point sits at Omega t = pi/4.
    ModelParams p;
    p.delta_c = 10, p.delta_l = 20;
    const BasisTable t({1, 1, 1});
    const Eigen::MatrixXcd H(hamiltonian_total(p, t));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(t.dim());
    for (int k1 = 0; k1 <= 1; ++k1)
        for (int k2 = 0; k2 <= 1; ++k2) psi0(t.index({k1, 0, k2, 0, 0})) = 0.5;
    const double Om = effective_params(p, 1).omega_big;
    auto E_at = [&](double wt) {
        const double time = wt / Om;
        const Eigen::VectorXcd ph = (es.eigenvalues() * std::complex<double>(0, -time)).array().exp();
        const Eigen::VectorXcd psi = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint() * psi0;
        return log_negativity(partial_trace_ground(psi * psi.adjoint(), t));
    };
    EXPECT_GT(E_at(std::numbers::pi / 4), 0.98);
    EXPECT_LT(E_at(std::numbers::pi / 2), 0.05);
    EXPECT_LT(E_at(std::numbers::pi / 4 * 0.5), E_at(std::numbers::pi / 4));
}

TEST(FiberMode, DarkCombination) {
    const auto m = fiber_common_mode(0.3, 2.0);
    EXPECT_NEAR(m.vector(0), 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(m.vector(1), 0.0, 1e-12);
    EXPECT_NEAR(m.vector(2), -1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(m.energy, 2.0, 1e-12);
    EXPECT_THROW(fiber_common_mode(0.0, 1.0), std::invalid_argument);
}

TEST(EffectiveHamiltonian, DiagonalEntries) {
    const EffectiveParams e{0.3, 0.05};
    const int N = 3;
    const Eigen::VectorXd d = effective_hamiltonian(e, N);
    for (int k1 = 0; k1 <= N; ++k1)
        for (int k2 = 0; k2 <= N; ++k2) {
            const double s1 = N - 2 * k1, s2 = N - 2 * k2;
            const double want = 0.3 * (s1 + s2) - 0.05 * s1 * s2 - 0.025 * (s1 * s1 + s2 * s2);
            EXPECT_NEAR(d(k1 * (N + 1) + k2), want, 1e-14);
        }
}

TEST(Detuning, Strategies) {
    EXPECT_DOUBLE_EQ(detuning_strategy(DetuningStrategy::constant, 8, 15), 15);
    EXPECT_DOUBLE_EQ(detuning_strategy(DetuningStrategy::sqrt, 4, 15), 30);
    EXPECT_DOUBLE_EQ(detuning_strategy(DetuningStrategy::linear, 8, 5), 40);
    EXPECT_EQ(parse_detuning_strategy("sqrt"), DetuningStrategy::sqrt);
    EXPECT_THROW(parse_detuning_strategy("cubic"), std::invalid_argument);
    EXPECT_THROW(detuning_strategy(DetuningStrategy::sqrt, 0, 15), std::invalid_argument);
}

TEST(AcStark, ExactShiftMatchesFullDiagonalization) {
    // k atoms shared between b and e with no cutoff on e: (k+1)-dimensional ladder.
    const double g = 1.0, dl = 7.0;
    for (int k = 1; k <= 6; ++k) {
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(k + 1, k + 1);
        for (int n = 0; n <= k; ++n) {
            H(n, n) = dl * n;
            if (n < k) H(n + 1, n) = H(n, n + 1) = g * std::sqrt(double(k - n)) * std::sqrt(double(n + 1));
        }
        const double e0 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues()(0);
        EXPECT_NEAR(ac_stark_exact(k, g, dl), e0, 1e-12) << k;
        Eigen::Matrix2d T;
        T << 0, g * std::sqrt(double(k)), g * std::sqrt(double(k)), dl;
        EXPECT_NEAR(ac_stark_truncated(k, g, dl), Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(T).eigenvalues()(0), 1e-12);
    }
    EXPECT_DOUBLE_EQ(ac_stark_exact(1, g, dl), ac_stark_truncated(1, g, dl));
}

TEST(AcStark, TruncationIsNotLinearInK) {
    const double g = 1.0, dl = 10.0;
    const double second = ac_stark_truncated(2, g, dl) - 2 * ac_stark_truncated(1, g, dl) + ac_stark_truncated(0, g, dl);
    EXPECT_GT(second, 0.0);
    EXPECT_NEAR(ac_stark_exact(2, g, dl) - 2 * ac_stark_exact(1, g, dl) + ac_stark_exact(0, g, dl), 0.0, 1e-12);
    // leading curvature 2 g^4 / dl^3 is what the spurious (S^z)^2 coefficient encodes (k = (N - S^z)/2)
    EXPECT_NEAR(second, 2 * g * g * g * g / (dl * dl * dl), 5e-4);
}

TEST(Squeezing, ResonantParametersCancel) {
    ModelParams p;
    p.delta_c = 10, p.delta_l = 10;
    const auto sp = spurious_squeeze_coeffs(p.g, p.delta_l);
    EXPECT_NEAR(effective_squeeze_coeff(p, 8) + sp.quadratic, 0.0, 1e-15);
    p.delta_c = 2, p.delta_l = 20;
    const auto sp5 = spurious_squeeze_coeffs(p.g, p.delta_l);
    EXPECT_GT(std::abs(effective_squeeze_coeff(p, 8)), 5 * sp5.quadratic);
}
