// dynamics.hpp: Lindblad master equation for the two-BEC cavity system, integrated with backward Euler
//
//   d rho/dt = -i [H_c + H_l, rho] + (Gs/2) sum_i (D[F_ai] + D[F_bi]) rho + (Gc/2) D[c] rho
//   D[o] rho = 2 o rho o^dag - o^dag o rho - rho o^dag o
//
// Each implicit step  rho' - dt L(rho') = rho  is solved matrix-free. L is split into
//   L0(X) = -i (Heff X - X Heff^dag),   Heff = H - (i/2) sum_k rate_k F_k^dag F_k
//   J(X)  = sum_k rate_k F_k X F_k^dag
// (I - dt L0) is inverted exactly in the eigenbasis of Heff, which is block diagonal
// (H conserves k_i + n_i per BEC), and the jump part is handled by fixed-point
// iteration X <- (I - dt L0)^{-1} (rho + dt J(X)). The residual of an iterate is
// dt (J(X_prev) - J(X)), so convergence is checked without extra work.

#pragma once

#include "cavbec/entanglement.hpp"
#include "cavbec/fockspace.hpp"
#include "cavbec/model.hpp"
#include "cavbec/oracle.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cavbec {

/// Thrown when the integrator cannot deliver a trustworthy state.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct IntegratorConfig {
    double dt{0.02};
    double tolerance{1e-10};  // Frobenius norm of the implicit-step residual
    int max_iterations{50};
    bool renormalize_trace{false};

    void validate() const {
        if (!(dt > 0)) throw std::invalid_argument("IntegratorConfig: dt must be > 0");
        if (!(tolerance > 0)) throw std::invalid_argument("IntegratorConfig: tolerance must be > 0");
        if (max_iterations < 1) throw std::invalid_argument("IntegratorConfig: max_iterations must be >= 1");
    }
};

struct CollapseChannel {
    std::string label;
    double rate{0.0};
    SparseOperator op;
};

/// Decay channels with their rates: F_a and F_b of each BEC at gamma_s, c at gamma_c.
/// Channels with zero rate are omitted.
inline std::vector<CollapseChannel> master_equation_channels(const ModelParams& p, const BasisTable& table) {
    std::vector<CollapseChannel> out;
    if (p.gamma_s > 0) {
        out.push_back({"Fa1", p.gamma_s, collapse_operator(Channel::Fa1, table)});
        out.push_back({"Fb1", p.gamma_s, collapse_operator(Channel::Fb1, table)});
        out.push_back({"Fa2", p.gamma_s, collapse_operator(Channel::Fa2, table)});
        out.push_back({"Fb2", p.gamma_s, collapse_operator(Channel::Fb2, table)});
    }
    if (p.gamma_c > 0) out.push_back({"c", p.gamma_c, collapse_operator(Channel::c, table)});
    return out;
}

/// D[o] rho = 2 o rho o^dag - o^dag o rho - rho o^dag o
inline DensityMatrix dissipator(const SparseOperator& o, const DensityMatrix& rho) {
    if (o.rows() != rho.rows() || o.cols() != rho.cols() || rho.rows() != rho.cols())
        throw std::invalid_argument("dissipator: dimension mismatch");
    const DensityMatrix orho = o * rho;
    const SparseOperator odag = o.adjoint();
    const SparseOperator odo = odag * o;
    DensityMatrix out = 2.0 * (orho * odag);
    out -= odo * rho;
    out -= rho * odo;
    return out;
}

inline DensityMatrix lindblad_rhs(const DensityMatrix& rho, const SparseOperator& H,
                                  const std::vector<CollapseChannel>& channels) {
    if (H.rows() != rho.rows() || rho.rows() != rho.cols()) throw std::invalid_argument("lindblad_rhs: dimension mismatch");
    const cplx I(0.0, 1.0);
    DensityMatrix out = -I * (H * rho);
    out += I * (rho * H);
    for (const auto& ch : channels) {
        if (ch.op.rows() != rho.rows()) throw std::invalid_argument("lindblad_rhs: collapse operator dimension mismatch");
        out += (0.5 * ch.rate) * dissipator(ch.op, rho);
    }
    return out;
}

inline DensityMatrix lindblad_rhs(const DensityMatrix& rho, const ModelParams& p, const BasisTable& table) {
    return lindblad_rhs(rho, hamiltonian_total(p, table), master_equation_channels(p, table));
}

// ------------------------------ diagnostics --------------------------------

inline double hermiticity_error(const DensityMatrix& rho) { return max_abs(rho - rho.adjoint()); }

inline double min_eigenvalue(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline double purity(const DensityMatrix& rho) { return (rho * rho).trace().real(); }

// ------------------------------- initial state -----------------------------

/// |1/sqrt2, 1/sqrt2>>_1 |1/sqrt2, 1/sqrt2>>_2 with no excitations and no photons.
inline DensityMatrix initial_state(const BasisTable& table) {
    const int N = table.N();
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(table.dim());
    const double norm = std::pow(2.0, -double(N));
    for (int k1 = 0; k1 <= N; ++k1)
        for (int k2 = 0; k2 <= N; ++k2)
            psi(table.index({k1, 0, k2, 0, 0})) = std::sqrt(binomial(N, k1) * binomial(N, k2)) * norm;
    return psi * psi.adjoint();
}

inline DensityMatrix initial_state(int N, const BasisTable& table) {
    if (N != table.N()) throw std::invalid_argument("initial_state: N does not match the basis");
    return initial_state(table);
}

// ------------------------------- integrator --------------------------------

struct StepStats {
    int iterations{0};
    double residual{0.0};
};

class BackwardEulerSolver {
public:
    BackwardEulerSolver(const SparseOperator& H, std::vector<CollapseChannel> channels, const IntegratorConfig& cfg)
        : cfg_(cfg), dim_(H.rows()) {
        cfg_.validate();
        if (H.rows() != H.cols()) throw std::invalid_argument("BackwardEulerSolver: H must be square");
        for (auto& ch : channels) {
            if (ch.op.rows() != dim_ || ch.op.cols() != dim_)
                throw std::invalid_argument("BackwardEulerSolver: collapse operator dimension mismatch");
            if (ch.rate > 0) channels_.push_back(std::move(ch));
        }
        coherent_ = channels_.empty();
        build(H);
        state_ = Eigen::MatrixXcd::Zero(dim_, dim_);
    }

    Eigen::Index dim() const noexcept { return dim_; }
    const IntegratorConfig& config() const noexcept { return cfg_; }
    bool coherent_only() const noexcept { return coherent_; }
    std::size_t block_count() const noexcept { return offsets_.size(); }
    std::size_t largest_block() const noexcept {
        return sizes_.empty() ? 0 : static_cast<std::size_t>(*std::max_element(sizes_.begin(), sizes_.end()));
    }
    const StepStats& last_stats() const noexcept { return stats_; }

    void load(const DensityMatrix& rho) {
        if (rho.rows() != dim_ || rho.cols() != dim_) throw std::invalid_argument("BackwardEulerSolver: state dimension mismatch");
        Eigen::MatrixXcd p = permute_in(rho);
        state_ = coherent_ ? to_eigen(p) : std::move(p);
        hist_count_ = 0;
    }

    DensityMatrix state() const { return permute_out(coherent_ ? from_eigen(state_) : state_); }

    double trace() const { return state_.trace().real(); }

    /// Advances the loaded state by n backward Euler steps.
    void advance(long n) {
        if (n <= 0) return;
        if (coherent_) {
            // Without jumps each step multiplies eigenbasis entries by Q, so n steps are Q^n.
            if (n != cached_power_) {
                power_ = Q_.unaryExpr([n](const cplx& q) { return std::pow(q, static_cast<double>(n)); });
                cached_power_ = n;
            }
            state_.array() *= power_.array();
            stats_ = {0, 0.0};
            return;
        }
        for (long i = 0; i < n; ++i) dissipative_step();
    }

    void renormalize() {
        const double tr = trace();
        if (tr <= 0) throw NumericalFailure("BackwardEulerSolver: non-positive trace");
        state_ /= tr;
        hist_count_ = 0;
    }

    /// One step from rho, returned in the original basis ordering.
    DensityMatrix step(const DensityMatrix& rho) {
        load(rho);
        advance(1);
        return state();
    }

    /// || next - dt L(next) - prev ||_F evaluated directly from the sparse operators.
    double residual(const DensityMatrix& next, const DensityMatrix& prev, const SparseOperator& H) const {
        return (next - cfg_.dt * lindblad_rhs(next, H, channels_) - prev).norm();
    }

private:
    void build(const SparseOperator& H) {
        // Heff = H - (i/2) sum rate F^dag F
        SparseOperator heff = H;
        for (const auto& ch : channels_) {
            const SparseOperator fdf = SparseOperator(ch.op.adjoint()) * ch.op;
            heff -= cplx(0.0, 0.5 * ch.rate) * fdf;
        }
        heff.makeCompressed();

        // Connected components of the Heff sparsity graph give the diagonal blocks.
        std::vector<Eigen::Index> parent(static_cast<std::size_t>(dim_));
        std::iota(parent.begin(), parent.end(), Eigen::Index{0});
        auto find = [&](Eigen::Index x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (Eigen::Index r = 0; r < heff.outerSize(); ++r)
            for (SparseOperator::InnerIterator it(heff, r); it; ++it) {
                if (std::abs(it.value()) == 0.0) continue;
                const auto a = find(it.row()), b = find(it.col());
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
        std::vector<std::vector<Eigen::Index>> comps;
        std::vector<Eigen::Index> comp_of(static_cast<std::size_t>(dim_), -1);
        for (Eigen::Index i = 0; i < dim_; ++i) {
            const auto root = find(i);
            if (comp_of[root] < 0) {
                comp_of[root] = static_cast<Eigen::Index>(comps.size());
                comps.emplace_back();
            }
            comps[comp_of[root]].push_back(i);
        }

        perm_.clear();
        for (const auto& c : comps) {
            offsets_.push_back(static_cast<Eigen::Index>(perm_.size()));
            sizes_.push_back(static_cast<Eigen::Index>(c.size()));
            perm_.insert(perm_.end(), c.begin(), c.end());
        }
        inv_perm_.assign(perm_.size(), 0);
        for (std::size_t i = 0; i < perm_.size(); ++i) inv_perm_[perm_[i]] = static_cast<Eigen::Index>(i);

        const Eigen::MatrixXcd dense_heff = Eigen::MatrixXcd(heff);
        Eigen::VectorXcd eig(dim_);
        for (std::size_t b = 0; b < comps.size(); ++b) {
            const auto& idx = comps[b];
            const auto s = static_cast<Eigen::Index>(idx.size());
            Eigen::MatrixXcd blk(s, s);
            for (Eigen::Index i = 0; i < s; ++i)
                for (Eigen::Index j = 0; j < s; ++j) blk(i, j) = dense_heff(idx[i], idx[j]);
            Eigen::MatrixXcd V, Vinv;
            Eigen::VectorXcd d;
            if (coherent_) {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (blk + blk.adjoint()));
                V = es.eigenvectors();
                Vinv = V.adjoint();
                d = es.eigenvalues().cast<cplx>();
            } else {
                Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(blk);
                if (es.info() != Eigen::Success) throw NumericalFailure("BackwardEulerSolver: eigendecomposition failed");
                V = es.eigenvectors();
                Vinv = V.inverse();
                d = es.eigenvalues();
                const double cond = V.norm() * Vinv.norm();
                const double recon = (V * d.asDiagonal() * Vinv - blk).norm();
                if (!std::isfinite(cond) || cond > 1e8 || recon > 1e-9 * std::max(1.0, blk.norm()))
                    throw NumericalFailure("BackwardEulerSolver: effective Hamiltonian block is ill-conditioned");
            }
            eig.segment(offsets_[b], s) = d;
            fixed_index_.push_back(fixed_.size());
            if (s == 8) fixed_.push_back({V, Vinv, V.adjoint(), Vinv.adjoint()});
            V_adj_.push_back(V.adjoint());
            Vinv_adj_.push_back(Vinv.adjoint());
            V_.push_back(std::move(V));
            Vinv_.push_back(std::move(Vinv));
        }

        const double dt = cfg_.dt;
        Q_.resize(dim_, dim_);
        for (Eigen::Index j = 0; j < dim_; ++j)
            for (Eigen::Index i = 0; i < dim_; ++i)
                Q_(i, j) = 1.0 / (1.0 + cplx(0.0, dt) * (eig(i) - std::conj(eig(j))));

        for (const auto& ch : channels_) {
            JumpList f;
            f.rate = ch.rate;
            for (Eigen::Index r = 0; r < ch.op.outerSize(); ++r)
                for (SparseOperator::InnerIterator it(ch.op, r); it; ++it) {
                    if (it.value() == cplx(0.0)) continue;
                    f.rows.push_back(inv_perm_[it.row()]);
                    f.cols.push_back(inv_perm_[it.col()]);
                    f.vals.push_back(it.value());
                    f.rvals.push_back(it.value().real());
                    if (it.value().imag() != 0.0) f.real = false;
                }
            jumps_.push_back(std::move(f));
        }
    }

    Eigen::MatrixXcd permute_in(const DensityMatrix& rho) const {
        Eigen::MatrixXcd out(dim_, dim_);
        for (Eigen::Index j = 0; j < dim_; ++j)
            for (Eigen::Index i = 0; i < dim_; ++i) out(i, j) = rho(perm_[i], perm_[j]);
        return out;
    }

    DensityMatrix permute_out(const Eigen::MatrixXcd& x) const {
        DensityMatrix out(dim_, dim_);
        for (Eigen::Index j = 0; j < dim_; ++j)
            for (Eigen::Index i = 0; i < dim_; ++i) out(perm_[i], perm_[j]) = x(i, j);
        return out;
    }

    // out = blockdiag(B) * X
    void left_apply(const std::vector<Eigen::MatrixXcd>& B, const Eigen::MatrixXcd& X, Eigen::MatrixXcd& out) const {
        for (std::size_t b = 0; b < B.size(); ++b)
            out.middleRows(offsets_[b], sizes_[b]).noalias() = B[b] * X.middleRows(offsets_[b], sizes_[b]);
    }

    // out = X * blockdiag(B)^dag
    void right_apply_adjoint(const std::vector<Eigen::MatrixXcd>& B, const Eigen::MatrixXcd& X, Eigen::MatrixXcd& out) const {
        for (std::size_t b = 0; b < B.size(); ++b)
            out.middleCols(offsets_[b], sizes_[b]).noalias() = X.middleCols(offsets_[b], sizes_[b]) * B[b].adjoint();
    }

    Eigen::MatrixXcd to_eigen(const Eigen::MatrixXcd& X) const {
        Eigen::MatrixXcd t(dim_, dim_), out(dim_, dim_);
        left_apply(Vinv_, X, t);
        right_apply_adjoint(Vinv_, t, out);
        return out;
    }

    Eigen::MatrixXcd from_eigen(const Eigen::MatrixXcd& X) const {
        Eigen::MatrixXcd t(dim_, dim_), out(dim_, dim_);
        left_apply(V_, X, t);
        right_apply_adjoint(V_, t, out);
        return out;
    }

    // out <- (I - dt L0)^{-1} (A + c B). Tile (i, j) of the result only depends on
    // tile (i, j) of the input: V_i (Q_ij o (Vinv_i Z_ij Vinv_j^dag)) V_j^dag.
    // Hermiticity is preserved exactly, so only tiles with i <= j are computed
    // and the others are mirrored.
    template <class Tile>
    void solve_tiles(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd* B, double c, Eigen::MatrixXcd& out) const {
        const std::size_t nb = offsets_.size();
        Tile z, t, u;
        for (std::size_t j = 0; j < nb; ++j) {
            const auto oj = offsets_[j], sj = sizes_[j];
            for (std::size_t i = 0; i <= j; ++i) {
                const auto oi = offsets_[i], si = sizes_[i];
                if constexpr (Tile::MaxRowsAtCompileTime == 8) {
                    if (si == 8 && sj == 8) {
                        full_tile(A, B, c, i, j, out);
                        continue;
                    }
                }
                if (B) z = A.block(oi, oj, si, sj) + c * B->block(oi, oj, si, sj);
                else z = A.block(oi, oj, si, sj);
                t.noalias() = Vinv_[i].lazyProduct(z);
                u.noalias() = t.lazyProduct(Vinv_adj_[j]);
                u.array() *= Q_.block(oi, oj, si, sj).array();
                t.noalias() = V_[i].lazyProduct(u);
                u.noalias() = t.lazyProduct(V_adj_[j]);
                if (i == j) {
                    out.block(oi, oj, si, sj) = 0.5 * (u + u.adjoint());
                } else {
                    out.block(oi, oj, si, sj) = u;
                    out.block(oj, oi, sj, si) = u.adjoint();
                }
            }
        }
    }

    void full_tile(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd* B, double c, std::size_t i, std::size_t j,
                   Eigen::MatrixXcd& out) const {
        using M8 = Eigen::Matrix<cplx, 8, 8>;
        const auto oi = offsets_[i], oj = offsets_[j];
        M8 z, t, u;
        if (B) z = A.block<8, 8>(oi, oj) + c * B->block<8, 8>(oi, oj);
        else z = A.block<8, 8>(oi, oj);
        const auto& fi = fixed_[fixed_index_[i]];
        const auto& fj = fixed_[fixed_index_[j]];
        t.noalias() = fi.vinv.lazyProduct(z);
        u.noalias() = t.lazyProduct(fj.vinv_adj);
        u.array() *= Q_.block<8, 8>(oi, oj).array();
        t.noalias() = fi.v.lazyProduct(u);
        u.noalias() = t.lazyProduct(fj.v_adj);
        if (i == j) {
            out.block<8, 8>(oi, oj) = 0.5 * (u + u.adjoint());
        } else {
            out.block<8, 8>(oi, oj) = u;
            out.block<8, 8>(oj, oi) = u.adjoint();
        }
    }

    void solve_coherent(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd* B, double c, Eigen::MatrixXcd& out) const {
        using Small = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 8, 8>;
        out.resize(dim_, dim_);
        if (largest_block() <= 8) solve_tiles<Small>(A, B, c, out);
        else solve_tiles<Eigen::MatrixXcd>(A, B, c, out);
    }

    // out = sum_k rate_k F_k X F_k^dag, with every F_k stored as a list of non-zeros.
    void apply_jumps(const Eigen::MatrixXcd& X, Eigen::MatrixXcd& out) const {
        out.setZero(dim_, dim_);
        const Eigen::Index ld = dim_;
        for (const auto& f : jumps_) {
            const std::size_t nnz = f.rows.size();
            if (f.real) {
                // F has real entries: out(r_a, r_b) += rate v_a v_b X(c_a, c_b) on interleaved doubles
                const double* x = reinterpret_cast<const double*>(X.data());
                double* o = reinterpret_cast<double*>(out.data());
                for (std::size_t b = 0; b < nnz; ++b) {
                    const double w = f.rate * f.rvals[b];
                    const double* xc = x + 2 * f.cols[b] * ld;
                    double* oc = o + 2 * f.rows[b] * ld;
                    for (std::size_t a = 0; a < nnz; ++a) {
                        const double wa = w * f.rvals[a];
                        const auto ra = 2 * f.rows[a], ca = 2 * f.cols[a];
                        oc[ra] += wa * xc[ca];
                        oc[ra + 1] += wa * xc[ca + 1];
                    }
                }
            } else {
                const cplx* x = X.data();
                cplx* o = out.data();
                for (std::size_t b = 0; b < nnz; ++b) {
                    const cplx w = f.rate * std::conj(f.vals[b]);
                    const cplx* xc = x + f.cols[b] * ld;
                    cplx* oc = o + f.rows[b] * ld;
                    for (std::size_t a = 0; a < nnz; ++a) oc[f.rows[a]] += (w * f.vals[a]) * xc[f.cols[a]];
                }
            }
        }
    }

    static void combine(Eigen::MatrixXcd& out, const std::vector<Eigen::MatrixXcd>& h, int count) {
        // polynomial extrapolation through the last `count` equally spaced points
        switch (count) {
            case 1: out = h[0]; break;
            case 2: out = 2.0 * h[0] - h[1]; break;
            case 3: out = 3.0 * h[0] - 3.0 * h[1] + h[2]; break;
            case 4: out = 4.0 * h[0] - 6.0 * h[1] + 4.0 * h[2] - h[3]; break;
            default: out = 5.0 * h[0] - 10.0 * h[1] + 10.0 * h[2] - 5.0 * h[3] + h[4]; break;
        }
    }

    void dissipative_step() {
        const double dt = cfg_.dt;
        if (hist_count_ == 0) {
            hist_j_.assign(kHistory, Eigen::MatrixXcd());
            apply_jumps(state_, hist_j_[0]);
            hist_count_ = 1;
        }
        // The starting guess is a polynomial extrapolation of the last states. Only its
        // jump term enters the iteration and J is linear, so it is extrapolated directly.
        combine(jx_, hist_j_, hist_count_);
        stats_ = {0, 0.0};
        bool converged = false;
        for (int it = 1; it <= cfg_.max_iterations; ++it) {
            solve_coherent(state_, &jx_, dt, x_);
            apply_jumps(x_, jx_next_);
            const double res = dt * (jx_ - jx_next_).norm();
            jx_.swap(jx_next_);
            stats_ = {it, res};
            if (res <= cfg_.tolerance) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw NumericalFailure("backward Euler: fixed-point solve did not reach tolerance in " +
                                   std::to_string(cfg_.max_iterations) + " iterations (residual " +
                                   std::to_string(stats_.residual) + ")");
        std::rotate(hist_j_.rbegin(), hist_j_.rbegin() + 1, hist_j_.rend());
        hist_j_[0].swap(jx_);
        hist_count_ = std::min(hist_count_ + 1, kHistory);
        state_.swap(x_);
    }

    struct JumpList {
        double rate{0.0};
        std::vector<Eigen::Index> rows, cols;
        std::vector<cplx> vals;
        std::vector<double> rvals;
        bool real{true};
    };

    static constexpr int kHistory = 4;

    IntegratorConfig cfg_;
    Eigen::Index dim_{0};
    std::vector<CollapseChannel> channels_;
    bool coherent_{true};

    std::vector<Eigen::Index> perm_, inv_perm_, offsets_, sizes_;
    std::vector<Eigen::MatrixXcd> V_, Vinv_, V_adj_, Vinv_adj_;
    struct Fixed8 {
        Eigen::Matrix<cplx, 8, 8> v, vinv, v_adj, vinv_adj;
    };
    std::vector<Fixed8, Eigen::aligned_allocator<Fixed8>> fixed_;
    std::vector<std::size_t> fixed_index_;
    Eigen::MatrixXcd Q_;
    Eigen::MatrixXcd power_;
    long cached_power_{-1};

    std::vector<JumpList> jumps_;

    Eigen::MatrixXcd state_, x_, jx_, jx_next_;
    std::vector<Eigen::MatrixXcd> hist_j_;  // J of the latest states, newest first
    int hist_count_{0};
    StepStats stats_{};
};

/// Single implicit step from rho under the full master equation.
inline DensityMatrix backward_euler_step(const DensityMatrix& rho, const ModelParams& p, const BasisTable& table,
                                         const IntegratorConfig& cfg) {
    BackwardEulerSolver solver(hamiltonian_total(p, table), master_equation_channels(p, table), cfg);
    return solver.step(rho);
}

// ------------------------------- trajectories ------------------------------

struct TrajectoryRecord {
    int N{1};
    double omega_big{0.0};  // entangling rate used for the omega_t column
    std::vector<double> t, omega_t, E, E_norm, trace, excited_pop, photon_pop;

    std::size_t size() const noexcept { return t.size(); }

    void write_csv(std::ostream& os) const {
        os << "t,omega_t,E,E_norm,trace,excited_pop,photon_pop\n";
        char buf[256];
        for (std::size_t i = 0; i < t.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", t[i], omega_t[i], E[i],
                          E_norm[i], trace[i], excited_pop[i], photon_pop[i]);
            os << buf;
        }
    }
};

/// Called at every recorded step with (t, rho in the basis ordering).
using TrajectoryObserver = std::function<void(double, const DensityMatrix&)>;

/// Integrates from rho0 up to t_final (units 1/g) and records observables every
/// `record_every` steps plus at the final step.
inline TrajectoryRecord evolve(const DensityMatrix& rho0, double t_final, const IntegratorConfig& cfg,
                               const ModelParams& p, const BasisTable& table, long record_every,
                               const TrajectoryObserver& observer = {}) {
    cfg.validate();
    p.validate();
    if (t_final < 0) throw std::invalid_argument("evolve: t_final must be >= 0");
    if (record_every < 1) throw std::invalid_argument("evolve: record_every must be >= 1");

    BackwardEulerSolver solver(hamiltonian_total(p, table), master_equation_channels(p, table), cfg);
    solver.load(rho0);

    const int N = table.N();
    TrajectoryRecord rec;
    rec.N = N;
    rec.omega_big = (p.delta_c != 0.0 && p.delta_l != 0.0) ? effective_params(p, N).omega_big : 0.0;
    const double emax = max_entanglement(N);
    const Eigen::VectorXd nexc = excited_number_diagonal(table);
    const Eigen::VectorXd nph = photon_number_diagonal(table);

    auto record = [&](long step) {
        const DensityMatrix rho = solver.state();
        const double t = step * cfg.dt;
        const double E = log_negativity(partial_trace_ground(rho, table));
        rec.t.push_back(t);
        rec.omega_t.push_back(rec.omega_big * t);
        rec.E.push_back(E);
        rec.E_norm.push_back(E / emax);
        rec.trace.push_back(rho.trace().real());
        rec.excited_pop.push_back((rho.diagonal().real().array() * nexc.array()).sum());
        rec.photon_pop.push_back((rho.diagonal().real().array() * nph.array()).sum());
        if (observer) observer(t, rho);
    };

    const long n_steps = std::lround(t_final / cfg.dt);
    record(0);
    long done = 0;
    while (done < n_steps) {
        long chunk = std::min(record_every, n_steps - done);
        if (cfg.renormalize_trace && !solver.coherent_only()) {
            for (long i = 0; i < chunk; ++i) {
                solver.advance(1);
                solver.renormalize();
            }
        } else if (solver.coherent_only()) {
            solver.advance(chunk);
        } else {
            for (long i = 0; i < chunk; ++i) {
                solver.advance(1);
                if (std::abs(solver.trace() - 1.0) > 1e-3)
                    throw NumericalFailure("evolve: trace drifted beyond 1e-3 at t = " +
                                           std::to_string((done + i + 1) * cfg.dt) +
                                           " (truncation no longer adequate)");
            }
        }
        done += chunk;
        if (std::abs(solver.trace() - 1.0) > 1e-3)
            throw NumericalFailure("evolve: trace drifted beyond 1e-3 at t = " + std::to_string(done * cfg.dt));
        record(done);
    }
    return rec;
}

}  // namespace cavbec
