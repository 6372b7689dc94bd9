// qdist.hpp: partial Husimi Q-distributions of BEC 1 conditioned on number states of BEC 2
//
// Bloch parameterization: alpha = cos(theta/2), beta = e^{i phi} sin(theta/2), theta measured
// from the a-pole. Q_k2(theta, phi) = (N+1)/(4 pi) <<alpha,beta| <k2| rho |k2> |alpha,beta>>.

#pragma once

#include "cavbec/entanglement.hpp"
#include "cavbec/model.hpp"
#include "cavbec/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cavbec {

struct SpinCoherentState {
    cplx alpha{1.0};
    cplx beta{0.0};
    int N{1};

    static SpinCoherentState from_angles(double theta, double phi, int N) {
        return {std::cos(0.5 * theta), std::polar(std::sin(0.5 * theta), phi), N};
    }
};

/// Amplitudes sqrt(C(N,k)) alpha^{N-k} beta^k over k = atoms in b.
inline Eigen::VectorXcd spin_coherent_vector(cplx alpha, cplx beta, int N) {
    if (N < 1) throw std::invalid_argument("spin_coherent_vector: N must be >= 1");
    const double n2 = std::norm(alpha) + std::norm(beta);
    if (std::abs(n2 - 1.0) > 1e-12) throw std::invalid_argument("spin_coherent_vector: |alpha|^2 + |beta|^2 must be 1");
    Eigen::VectorXcd v(N + 1);
    for (int k = 0; k <= N; ++k) {
        // integer powers keep alpha = 0 or beta = 0 exact
        cplx a = 1.0, b = 1.0;
        for (int i = 0; i < N - k; ++i) a *= alpha;
        for (int i = 0; i < k; ++i) b *= beta;
        v(k) = std::sqrt(binomial(N, k)) * a * b;
    }
    return v;
}

inline Eigen::VectorXcd spin_coherent_vector(const SpinCoherentState& s) {
    return spin_coherent_vector(s.alpha, s.beta, s.N);
}

/// <k2| rho |k2> as an (N+1)x(N+1) operator on BEC 1 (not normalized).
inline Eigen::MatrixXcd conditional_block(const GroundDensityMatrix& g, int k2) {
    if (k2 < 0 || k2 > g.N) throw std::out_of_range("conditional_block: k2 = " + std::to_string(k2) + " outside [0, N]");
    const int D = g.N + 1;
    Eigen::MatrixXcd M(D, D);
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) M(a, b) = g.rho(a * D + k2, b * D + k2);
    return M;
}

inline double partial_q(const GroundDensityMatrix& g, int k2, double theta, double phi) {
    const Eigen::MatrixXcd M = conditional_block(g, k2);
    const Eigen::VectorXcd v = spin_coherent_vector(SpinCoherentState::from_angles(theta, phi, g.N));
    const double val = (v.adjoint() * M * v)(0, 0).real();
    return (g.N + 1) / (4.0 * std::numbers::pi) * val;
}

/// Probability of finding BEC 2 in |k2>, the exact value of the integral of Q_k2.
inline double k2_weight(const GroundDensityMatrix& g, int k2) { return conditional_block(g, k2).trace().real(); }

struct QGrid {
    int N{1};
    std::vector<double> theta;  // [0, pi], poles included
    std::vector<double> phi;    // [0, 2 pi), periodic
    std::vector<std::vector<double>> values;  // values[k2][it * phi.size() + ip]

    double at(int k2, std::size_t it, std::size_t ip) const { return values[k2][it * phi.size() + ip]; }

    /// Trapezoid in theta with sin(theta) weights, rectangle (exact for trig polynomials) in phi.
    double integral(int k2) const {
        const double dth = theta.size() > 1 ? theta[1] - theta[0] : 0.0;
        const double dph = 2.0 * std::numbers::pi / static_cast<double>(phi.size());
        double s = 0.0;
        for (std::size_t it = 0; it < theta.size(); ++it) {
            const double w = (it == 0 || it + 1 == theta.size() ? 0.5 : 1.0) * std::sin(theta[it]);
            double row = 0.0;
            for (std::size_t ip = 0; ip < phi.size(); ++ip) row += at(k2, it, ip);
            s += w * row;
        }
        return s * dth * dph;
    }

    double total_integral() const {
        double s = 0.0;
        for (int k2 = 0; k2 <= N; ++k2) s += integral(k2);
        return s;
    }

    /// Grid cell (theta index, phi index) of the maximum of Q_k2.
    std::pair<std::size_t, std::size_t> peak(int k2) const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < values[k2].size(); ++i)
            if (values[k2][i] > values[k2][best]) best = i;
        return {best / phi.size(), best % phi.size()};
    }

    void write_csv(std::ostream& os, int k2) const {
        os << "theta,phi,Q\n";
        char buf[128];
        for (std::size_t it = 0; it < theta.size(); ++it)
            for (std::size_t ip = 0; ip < phi.size(); ++ip) {
                std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", theta[it], phi[ip], at(k2, it, ip));
                os << buf;
            }
    }
};

inline QGrid q_grid(const GroundDensityMatrix& g, int resolution_theta = 64, int resolution_phi = 128) {
    if (resolution_theta < 2 || resolution_phi < 2) throw std::invalid_argument("q_grid: resolutions must be >= 2");
    const int N = g.N;
    const double pi = std::numbers::pi;
    QGrid grid;
    grid.N = N;
    for (int i = 0; i < resolution_theta; ++i) grid.theta.push_back(pi * i / (resolution_theta - 1));
    for (int j = 0; j < resolution_phi; ++j) grid.phi.push_back(2.0 * pi * j / resolution_phi);

    std::vector<Eigen::MatrixXcd> blocks;
    for (int k2 = 0; k2 <= N; ++k2) blocks.push_back(conditional_block(g, k2));
    grid.values.assign(N + 1, std::vector<double>(grid.theta.size() * grid.phi.size()));
    const double pref = (N + 1) / (4.0 * pi);
    for (std::size_t it = 0; it < grid.theta.size(); ++it)
        for (std::size_t ip = 0; ip < grid.phi.size(); ++ip) {
            const Eigen::VectorXcd v =
                spin_coherent_vector(SpinCoherentState::from_angles(grid.theta[it], grid.phi[ip], N));
            for (int k2 = 0; k2 <= N; ++k2)
                grid.values[k2][it * grid.phi.size() + ip] = pref * v.dot(blocks[k2] * v).real();
        }
    return grid;
}

/// e^{-i angle S^z} applied to one BEC of a ground density matrix. On a coherent
/// state this adds 2*angle to phi, since S^z = N - 2k.
inline GroundDensityMatrix rotate_sz(const GroundDensityMatrix& g, double angle, int bec = 1) {
    if (bec != 1 && bec != 2) throw std::invalid_argument("rotate_sz: bec must be 1 or 2");
    const int D = g.N + 1;
    Eigen::VectorXcd u(D * D);
    for (int k1 = 0; k1 < D; ++k1)
        for (int k2 = 0; k2 < D; ++k2) {
            const int k = bec == 1 ? k1 : k2;
            u(k1 * D + k2) = std::polar(1.0, -angle * (g.N - 2 * k));
        }
    GroundDensityMatrix out = g;
    out.rho = u.asDiagonal() * g.rho * u.conjugate().asDiagonal();
    return out;
}

// ---------------------------- squeezing diagnostics -------------------------

struct SqueezingDiagnostics {
    double expected{0.0};         // coefficient of (S1^2 + S2^2) in the effective Hamiltonian
    double spurious{0.0};         // truncation-induced (S^z)^2 coefficient
    double spurious_linear{0.0};  // truncation-induced S^z coefficient
    double net{0.0};              // expected + spurious
};

inline SqueezingDiagnostics squeezing_diagnostics(const ModelParams& p, int N) {
    const SqueezeCoefficients sp = spurious_squeeze_coeffs(p.g, p.delta_l);
    SqueezingDiagnostics d;
    d.expected = effective_squeeze_coeff(p, N);
    d.spurious = sp.quadratic;
    d.spurious_linear = sp.linear;
    d.net = d.expected + d.spurious;
    return d;
}

}  // namespace cavbec
