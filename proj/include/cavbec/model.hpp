// model.hpp: coherent Hamiltonians of the two-BEC cavity scheme and closed-form effective quantities
//
// Units: hbar = 1, energies and rates in units of the laser coupling g unless stated otherwise.

#pragma once

#include "cavbec/fockspace.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace cavbec {

struct ModelParams {
    double g{1.0};        // laser coupling
    double G{1.0};        // atom-cavity coupling
    double delta_c{10.0}; // cavity detuning
    double delta_l{20.0}; // laser detuning
    double gamma_s{0.0};  // spontaneous emission rate
    double gamma_c{0.0};  // cavity decay rate

    void validate() const {
        if (!(g > 0)) throw std::invalid_argument("ModelParams: g must be > 0");
        if (!(G > 0)) throw std::invalid_argument("ModelParams: G must be > 0");
        if (gamma_s < 0) throw std::invalid_argument("ModelParams: gamma_s must be >= 0");
        if (gamma_c < 0) throw std::invalid_argument("ModelParams: gamma_c must be >= 0");
    }
};

struct EffectiveParams {
    double omega{0.0};      // single-spin rotation rate
    double omega_big{0.0};  // entangling rate of the S^z S^z term
};

/// Which coefficient convention to use for the effective rates.
///  standard: the rates that multiply S^z_1 S^z_2 in the effective Hamiltonian.
///  adiabatic_literal: reads the fourth-order coefficient of the adiabatic
///  elimination literally, which doubles the entangling rate and the N-dependent
///  rotation term.
enum class RateConvention { standard, adiabatic_literal };

inline EffectiveParams effective_params(const ModelParams& p, int N,
                                        RateConvention conv = RateConvention::standard) {
    if (p.delta_c == 0.0 || p.delta_l == 0.0)
        throw std::invalid_argument("effective_params: detunings must be non-zero");
    const double mult = conv == RateConvention::adiabatic_literal ? 2.0 : 1.0;
    const double g2 = p.g * p.g, G2 = p.G * p.G, dl2 = p.delta_l * p.delta_l;
    EffectiveParams e;
    e.omega_big = mult * G2 * g2 / (2.0 * p.delta_c * dl2);
    e.omega = g2 / (2.0 * p.delta_l) + mult * G2 * g2 * N / (p.delta_c * dl2);
    return e;
}

/// H_c = delta_c c^dag c + sum_i G (e_i^dag b_i c + h.c.)
inline SparseOperator hamiltonian_cavity(const ModelParams& p, const BasisTable& table) {
    const SparseOperator c = mode_operator(Mode::c, table);
    SparseOperator H = p.delta_c * SparseOperator(c.adjoint() * c);
    for (int bec = 1; bec <= 2; ++bec) {
        const SparseOperator absorb = transfer_operator(bec, Level::b, Level::e, table) * c;
        H += p.G * absorb;
        H += p.G * SparseOperator(absorb.adjoint());
    }
    H.prune(cplx(0.0));
    H.makeCompressed();
    return H;
}

/// H_l = sum_i g (e_i^dag b_i + h.c.) + delta_l e_i^dag e_i
inline SparseOperator hamiltonian_laser(const ModelParams& p, const BasisTable& table) {
    SparseOperator H(table.dim(), table.dim());
    for (int bec = 1; bec <= 2; ++bec) {
        const SparseOperator up = transfer_operator(bec, Level::b, Level::e, table);
        H += p.g * up;
        H += p.g * SparseOperator(up.adjoint());
        H += p.delta_l * transfer_operator(bec, Level::e, Level::e, table);
    }
    H.prune(cplx(0.0));
    H.makeCompressed();
    return H;
}

inline SparseOperator hamiltonian_total(const ModelParams& p, const BasisTable& table) {
    SparseOperator H = hamiltonian_cavity(p, table);
    H += hamiltonian_laser(p, table);
    H.makeCompressed();
    return H;
}

// ---------------------------- fiber common mode ----------------------------

struct CommonMode {
    Eigen::Vector3d vector;  // amplitudes over (p1, p, p2)
    double energy{0.0};
};

/// One-excitation matrix of the fiber Hamiltonian over (p1, p, p2).
inline Eigen::Matrix3d fiber_matrix(double nu, double omega_f) {
    Eigen::Matrix3d M = omega_f * Eigen::Matrix3d::Identity();
    M(0, 1) = M(1, 0) = nu;
    M(1, 2) = M(2, 1) = nu;
    return M;
}

/// Dark eigenmode (p1 - p2)/sqrt(2) of the fiber Hamiltonian; it never populates the fiber mode.
inline CommonMode fiber_common_mode(double nu, double omega_f) {
    if (nu == 0.0) throw std::invalid_argument("fiber_common_mode: coupling nu must be non-zero");
    const Eigen::Matrix3d M = fiber_matrix(nu, omega_f);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < 3; ++i)
        if (std::abs(es.eigenvectors()(1, i)) < std::abs(es.eigenvectors()(1, best))) best = i;
    CommonMode m;
    m.vector = es.eigenvectors().col(best);
    if (m.vector(0) < 0) m.vector = -m.vector;
    m.energy = es.eigenvalues()(best);
    const double residual = (M * m.vector - m.energy * m.vector).norm();
    if (residual > 1e-12 * std::max(1.0, M.norm()))
        throw std::runtime_error("fiber_common_mode: eigenpair residual too large");
    return m;
}

// ------------------------- effective Hamiltonian ---------------------------

/// Diagonal of omega (S1+S2) - Omega [S1 S2 + S1^2/2 + S2^2/2] over (k1, k2), index k1*(N+1)+k2.
inline Eigen::VectorXd effective_hamiltonian(const EffectiveParams& e, int N) {
    Eigen::VectorXd d((N + 1) * (N + 1));
    for (int k1 = 0; k1 <= N; ++k1)
        for (int k2 = 0; k2 <= N; ++k2) {
            const double m1 = N - 2 * k1, m2 = N - 2 * k2;
            d(k1 * (N + 1) + k2) = e.omega * (m1 + m2) - e.omega_big * (m1 * m2 + 0.5 * m1 * m1 + 0.5 * m2 * m2);
        }
    return d;
}

inline Eigen::VectorXd effective_hamiltonian(const ModelParams& p, int N) {
    return effective_hamiltonian(effective_params(p, N), N);
}

// --------------------------- detuning strategies ---------------------------

enum class DetuningStrategy { constant, sqrt, linear };

inline DetuningStrategy parse_detuning_strategy(std::string_view s) {
    if (s == "constant") return DetuningStrategy::constant;
    if (s == "sqrt") return DetuningStrategy::sqrt;
    if (s == "linear") return DetuningStrategy::linear;
    throw std::invalid_argument("unknown detuning strategy '" + std::string(s) + "'");
}

inline std::string to_string(DetuningStrategy s) {
    switch (s) {
        case DetuningStrategy::constant: return "constant";
        case DetuningStrategy::sqrt: return "sqrt";
        case DetuningStrategy::linear: return "linear";
    }
    return "?";
}

/// Laser detuning for N atoms: base, base*sqrt(N) or base*N.
inline double detuning_strategy(DetuningStrategy s, int N, double base) {
    if (N < 1) throw std::invalid_argument("detuning_strategy: N must be >= 1");
    switch (s) {
        case DetuningStrategy::constant: return base;
        case DetuningStrategy::sqrt: return base * std::sqrt(double(N));
        case DetuningStrategy::linear: return base * N;
    }
    throw std::invalid_argument("detuning_strategy: bad strategy");
}

// ----------------------------- ac Stark shifts -----------------------------

/// Exact laser-induced shift of a state with k atoms in b.
inline double ac_stark_exact(int k, double g, double delta_l) {
    if (k < 0) throw std::invalid_argument("ac_stark_exact: k must be >= 0");
    return 0.5 * k * (delta_l - std::sqrt(delta_l * delta_l + 4.0 * g * g));
}

/// Ground-state shift when at most one atom may sit in e (the n <= 1 cutoff).
inline double ac_stark_truncated(int k, double g, double delta_l) {
    if (k < 0) throw std::invalid_argument("ac_stark_truncated: k must be >= 0");
    return 0.5 * (delta_l - std::sqrt(delta_l * delta_l + 4.0 * g * g * k));
}

struct SqueezeCoefficients {
    double linear{0.0};     // coefficient of (S1 + S2)
    double quadratic{0.0};  // coefficient of (S1^2 + S2^2)
};

/// Leading terms of the truncation-induced spin Hamiltonian.
inline SqueezeCoefficients spurious_squeeze_coeffs(double g, double delta_l) {
    if (delta_l == 0.0) throw std::invalid_argument("spurious_squeeze_coeffs: delta_l must be non-zero");
    const double g2 = g * g;
    return {g2 / (2.0 * delta_l), g2 * g2 / (4.0 * delta_l * delta_l * delta_l)};
}

/// Coefficient of (S1^2 + S2^2) in the effective Hamiltonian (negative for positive detunings).
inline double effective_squeeze_coeff(const ModelParams& p, int N) {
    return -0.5 * effective_params(p, N).omega_big;
}

}  // namespace cavbec
