// entanglement.hpp: ground-manifold reduction and logarithmic negativity between the two BECs

#pragma once

#include "cavbec/fockspace.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace cavbec {

using DensityMatrix = Eigen::MatrixXcd;

/// Reduced state over (k1, k2) after tracing out e-levels and the photon.
struct GroundDensityMatrix {
    int N{1};
    Eigen::MatrixXcd rho;  // (N+1)^2 square, index k1*(N+1)+k2

    Eigen::Index dim() const noexcept { return rho.rows(); }
    cplx operator()(int k1, int k2, int k1p, int k2p) const {
        return rho(k1 * (N + 1) + k2, k1p * (N + 1) + k2p);
    }
};

/// Sums the (n1, n2, l)-diagonal blocks of rho. Coherences between different
/// (n1, n2, l) sectors drop out.
inline GroundDensityMatrix partial_trace_ground(const DensityMatrix& rho, const BasisTable& table) {
    if (rho.rows() != table.dim() || rho.cols() != table.dim())
        throw std::invalid_argument("partial_trace_ground: dimension mismatch");
    const int N = table.N();
    std::map<std::tuple<int, int, int>, std::vector<Eigen::Index>> sectors;
    for (Eigen::Index i = 0; i < table.dim(); ++i) {
        const auto& s = table[static_cast<std::size_t>(i)];
        sectors[{s.n1, s.n2, s.l}].push_back(i);
    }
    GroundDensityMatrix out{N, Eigen::MatrixXcd::Zero(table.ground_dim(), table.ground_dim())};
    for (const auto& [key, idx] : sectors) {
        for (Eigen::Index j : idx) {
            const auto& sj = table[static_cast<std::size_t>(j)];
            const Eigen::Index gj = table.ground_index(sj.k1, sj.k2);
            for (Eigen::Index i : idx) {
                const auto& si = table[static_cast<std::size_t>(i)];
                out.rho(table.ground_index(si.k1, si.k2), gj) += rho(i, j);
            }
        }
    }
    return out;
}

/// Partial transpose on subsystem 1 (default) or 2:
/// ((k1,k2),(k1',k2')) -> ((k1',k2),(k1,k2')) for subsystem 1.
inline Eigen::MatrixXcd partial_transpose(const GroundDensityMatrix& g, int subsystem = 1) {
    if (subsystem != 1 && subsystem != 2) throw std::invalid_argument("partial_transpose: subsystem must be 1 or 2");
    const int D = g.N + 1;
    if (g.rho.rows() != D * D || g.rho.cols() != D * D)
        throw std::invalid_argument("partial_transpose: matrix is not (N+1)^2 square");
    Eigen::MatrixXcd out(D * D, D * D);
    for (int k1 = 0; k1 < D; ++k1)
        for (int k2 = 0; k2 < D; ++k2)
            for (int k1p = 0; k1p < D; ++k1p)
                for (int k2p = 0; k2p < D; ++k2p) {
                    const cplx v = g.rho(k1 * D + k2, k1p * D + k2p);
                    if (subsystem == 1)
                        out(k1p * D + k2, k1 * D + k2p) = v;
                    else
                        out(k1 * D + k2p, k1p * D + k2) = v;
                }
    return out;
}

// ------------------------- Hermitian eigensolver ---------------------------

struct HermitianEigensystem {
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;  // columns; empty when not requested
    int sweeps{0};
};

inline double max_abs(const Eigen::MatrixXcd& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

/// Cyclic complex Jacobi. Each rotation removes the phase of a_pq and then
/// applies a real Jacobi rotation to the resulting real symmetric 2x2 block.
inline HermitianEigensystem hermitian_eigensystem(const Eigen::MatrixXcd& M, bool want_vectors = true) {
    if (M.rows() != M.cols()) throw std::invalid_argument("hermitian_eigensystem: matrix must be square");
    const Eigen::Index n = M.rows();
    const double scale = std::max(1.0, max_abs(M));
    if (max_abs(M - M.adjoint()) > 1e-10 * scale)
        throw std::invalid_argument("hermitian_eigensystem: matrix is not Hermitian");

    Eigen::MatrixXcd A = 0.5 * (M + M.adjoint());
    HermitianEigensystem out;
    if (want_vectors) out.vectors = Eigen::MatrixXcd::Identity(n, n);

    auto off_norm = [&] {
        double s = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                if (i != j) s += std::norm(A(i, j));
        return std::sqrt(s);
    };
    const double fro = std::max(A.norm(), std::numeric_limits<double>::min());

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        if (off_norm() <= 1e-15 * fro) break;
        out.sweeps = sweep + 1;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const cplx apq = A(p, q);
                const double mag = std::abs(apq);
                if (mag <= 1e-300) continue;
                const cplx ph = apq / mag;
                const double app = A(p, p).real(), aqq = A(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // U = [[ph c, ph s], [-s, c]] on (p, q); A <- U^dag A U
                const cplx upp = ph * c, upq = ph * s;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const cplx akp = A(k, p), akq = A(k, q);
                    A(k, p) = akp * upp - akq * s;
                    A(k, q) = akp * upq + akq * c;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const cplx apk = A(p, k), aqk = A(q, k);
                    A(p, k) = std::conj(upp) * apk - s * aqk;
                    A(q, k) = std::conj(upq) * apk + c * aqk;
                }
                A(p, q) = A(q, p) = 0.0;
                A(p, p) = A(p, p).real();
                A(q, q) = A(q, q).real();
                if (want_vectors) {
                    auto& V = out.vectors;
                    for (Eigen::Index k = 0; k < n; ++k) {
                        const cplx vkp = V(k, p), vkq = V(k, q);
                        V(k, p) = vkp * upp - vkq * s;
                        V(k, q) = vkp * upq + vkq * c;
                    }
                }
            }
        }
    }
    out.values = A.diagonal().real();
    return out;
}

inline Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& M) {
    return hermitian_eigensystem(M, false).values;
}

// ---------------------------- negativity -----------------------------------

/// E = log2 || rho^{T} ||_1 with the transpose taken on `subsystem`.
/// The input is not renormalized; leaked population lowers the trace norm.
inline double log_negativity(const GroundDensityMatrix& g, int subsystem = 1) {
    const Eigen::VectorXd ev = hermitian_eigenvalues(partial_transpose(g, subsystem));
    const double norm1 = ev.cwiseAbs().sum();
    return std::max(0.0, std::log2(norm1));
}

inline double max_entanglement(int N) {
    if (N < 1) throw std::invalid_argument("max_entanglement: N must be >= 1");
    return std::log2(double(N) + 1.0);
}

/// Normalized entanglement deficit of the scheme relative to the ideal interaction.
inline double delta_E(double E_ideal, double E_scheme, int N) {
    const double em = max_entanglement(N);
    return E_ideal / em - E_scheme / em;
}

/// The maximally correlated state sum_k |k>|k> / sqrt(N+1), as a ground density matrix.
inline GroundDensityMatrix maximally_entangled_state(int N) {
    const int D = N + 1;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(D * D);
    for (int k = 0; k < D; ++k) psi(k * D + k) = 1.0 / std::sqrt(double(D));
    return {N, psi * psi.adjoint()};
}

}  // namespace cavbec
