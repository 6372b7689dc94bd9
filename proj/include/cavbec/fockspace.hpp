// fockspace.hpp: truncated product Fock basis |k1 n1 k2 n2 l> and sparse mode operators
//
// Each BEC holds N atoms spread over three levels a, b, e. The basis stores the
// b-occupation k and the e-occupation n explicitly; the a-occupation N - k - n is
// implicit. The cavity mode c holds l photons.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cavbec {

using cplx = std::complex<double>;
using SparseOperator = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<cplx>;

struct TruncationSpec {
    int N{1};            // atoms per BEC
    int max_excited{1};  // cutoff on n_i
    int max_photons{1};  // cutoff on l

    void validate() const {
        if (N < 1) throw std::invalid_argument("TruncationSpec: N must be >= 1 (got " + std::to_string(N) + ")");
        if (max_excited < 0) throw std::invalid_argument("TruncationSpec: max_excited must be >= 0");
        if (max_photons < 0) throw std::invalid_argument("TruncationSpec: max_photons must be >= 0");
        if (max_excited > N) throw std::invalid_argument("TruncationSpec: max_excited must be <= N");
    }
};

struct BasisState {
    int k1{0}, n1{0}, k2{0}, n2{0}, l{0};

    // Member order gives the lexicographic (k1, n1, k2, n2, l) ordering.
    auto operator<=>(const BasisState&) const = default;

    int k(int bec) const { return bec == 1 ? k1 : k2; }
    int n(int bec) const { return bec == 1 ? n1 : n2; }
};

/// Ordered list of basis states with an O(1) inverse lookup.
class BasisTable {
public:
    BasisTable() = default;

    explicit BasisTable(const TruncationSpec& trunc) : trunc_(trunc) {
        trunc_.validate();
        const int N = trunc_.N;
        const int ne = trunc_.max_excited;
        const int np = trunc_.max_photons;
        lookup_.assign(static_cast<std::size_t>((N + 1) * (ne + 1) * (N + 1) * (ne + 1) * (np + 1)), -1);
        for (int k1 = 0; k1 <= N; ++k1)
            for (int n1 = 0; n1 <= ne; ++n1)
                for (int k2 = 0; k2 <= N; ++k2)
                    for (int n2 = 0; n2 <= ne; ++n2)
                        for (int l = 0; l <= np; ++l) {
                            if (k1 + n1 > N || k2 + n2 > N) continue;
                            BasisState s{k1, n1, k2, n2, l};
                            lookup_[slot(s)] = static_cast<int>(states_.size());
                            states_.push_back(s);
                        }
    }

    const TruncationSpec& truncation() const noexcept { return trunc_; }
    int N() const noexcept { return trunc_.N; }
    std::size_t size() const noexcept { return states_.size(); }
    Eigen::Index dim() const noexcept { return static_cast<Eigen::Index>(states_.size()); }
    const std::vector<BasisState>& states() const noexcept { return states_; }
    const BasisState& operator[](std::size_t i) const { return states_[i]; }

    bool contains(const BasisState& s) const noexcept { return find(s).has_value(); }

    std::optional<Eigen::Index> find(const BasisState& s) const noexcept {
        if (!in_range(s)) return std::nullopt;
        const int idx = lookup_[slot(s)];
        if (idx < 0) return std::nullopt;
        return idx;
    }

    Eigen::Index index(const BasisState& s) const {
        auto i = find(s);
        if (!i) throw std::out_of_range("BasisTable: state outside the truncated basis");
        return *i;
    }

    /// Index of (k1, k2) in the (N+1)^2 ground manifold.
    Eigen::Index ground_index(int k1, int k2) const noexcept { return k1 * (trunc_.N + 1) + k2; }
    Eigen::Index ground_dim() const noexcept { return (trunc_.N + 1) * (trunc_.N + 1); }

private:
    bool in_range(const BasisState& s) const noexcept {
        const int N = trunc_.N;
        return s.k1 >= 0 && s.k2 >= 0 && s.n1 >= 0 && s.n2 >= 0 && s.l >= 0 && s.k1 <= N && s.k2 <= N &&
               s.n1 <= trunc_.max_excited && s.n2 <= trunc_.max_excited && s.l <= trunc_.max_photons;
    }
    std::size_t slot(const BasisState& s) const noexcept {
        const int N = trunc_.N;
        const int ne = trunc_.max_excited;
        const int np = trunc_.max_photons;
        return static_cast<std::size_t>((((s.k1 * (ne + 1) + s.n1) * (N + 1) + s.k2) * (ne + 1) + s.n2) * (np + 1) + s.l);
    }

    TruncationSpec trunc_{};
    std::vector<BasisState> states_;
    std::vector<int> lookup_;
};

inline BasisTable build_basis(const TruncationSpec& trunc) { return BasisTable(trunc); }

/// Closed-form basis size: per-BEC count squared times photon levels.
inline std::size_t basis_size(const TruncationSpec& t) {
    std::size_t per = 0;
    for (int n = 0; n <= t.max_excited; ++n) per += static_cast<std::size_t>(t.N - n + 1);
    return per * per * static_cast<std::size_t>(t.max_photons + 1);
}

// ------------------------------ operators ----------------------------------

enum class Mode { a1, b1, e1, a2, b2, e2, c };
enum class Level { a, b, e };
enum class Channel { Fa1, Fb1, Fa2, Fb2, c };

inline Mode parse_mode(std::string_view s) {
    if (s == "a1") return Mode::a1;
    if (s == "b1") return Mode::b1;
    if (s == "e1") return Mode::e1;
    if (s == "a2") return Mode::a2;
    if (s == "b2") return Mode::b2;
    if (s == "e2") return Mode::e2;
    if (s == "c") return Mode::c;
    throw std::invalid_argument("unknown mode label '" + std::string(s) + "'");
}

inline Channel parse_channel(std::string_view s) {
    if (s == "Fa1") return Channel::Fa1;
    if (s == "Fb1") return Channel::Fb1;
    if (s == "Fa2") return Channel::Fa2;
    if (s == "Fb2") return Channel::Fb2;
    if (s == "c") return Channel::c;
    throw std::invalid_argument("unknown collapse operator label '" + std::string(s) + "'");
}

namespace detail {

inline int occupation(const BasisState& s, int bec, Level lv, int N) {
    const int k = s.k(bec), n = s.n(bec);
    switch (lv) {
        case Level::a: return N - k - n;
        case Level::b: return k;
        case Level::e: return n;
    }
    return 0;
}

inline void shift(BasisState& s, int bec, Level lv, int delta) {
    int& k = bec == 1 ? s.k1 : s.k2;
    int& n = bec == 1 ? s.n1 : s.n2;
    if (lv == Level::b) k += delta;
    if (lv == Level::e) n += delta;
    // the a-level is implicit: it absorbs whatever b and e give up
}

inline SparseOperator from_triplets(Eigen::Index dim, const std::vector<Triplet>& t) {
    SparseOperator op(dim, dim);
    op.setFromTriplets(t.begin(), t.end());
    op.makeCompressed();
    return op;
}

}  // namespace detail

/// Annihilation operator for one mode in the truncated basis.
///
/// b_i, e_i and c lower the explicit label (k_i, n_i, l) with amplitude
/// sqrt(occupation); the removed b/e atom returns to the implicit a-level, which
/// keeps the per-BEC atom number at N. The a-level annihilator would leave the
/// fixed-N space, so its projection onto the basis is the zero operator.
/// Atom-conserving bilinears such as a^dag e are built by transfer_operator.
inline SparseOperator mode_operator(Mode mode, const BasisTable& table) {
    std::vector<Triplet> t;
    const auto& states = table.states();
    for (std::size_t j = 0; j < states.size(); ++j) {
        BasisState to = states[j];
        int occ = 0;
        switch (mode) {
            case Mode::a1:
            case Mode::a2: continue;
            case Mode::b1: occ = to.k1--; break;
            case Mode::e1: occ = to.n1--; break;
            case Mode::b2: occ = to.k2--; break;
            case Mode::e2: occ = to.n2--; break;
            case Mode::c: occ = to.l--; break;
        }
        if (occ == 0) continue;
        if (auto i = table.find(to)) t.emplace_back(*i, static_cast<Eigen::Index>(j), std::sqrt(double(occ)));
    }
    return detail::from_triplets(table.dim(), t);
}

/// Moves one atom of BEC `bec` from level `from` to level `to`: the operator to^dag from.
/// Amplitude sqrt(n_from) sqrt(n_to + 1); targets outside the truncation are dropped.
inline SparseOperator transfer_operator(int bec, Level from, Level to, const BasisTable& table) {
    if (bec != 1 && bec != 2) throw std::invalid_argument("transfer_operator: bec must be 1 or 2");
    const int N = table.N();
    std::vector<Triplet> t;
    const auto& states = table.states();
    for (std::size_t j = 0; j < states.size(); ++j) {
        const BasisState& s = states[j];
        if (from == to) {
            const int occ = detail::occupation(s, bec, from, N);
            if (occ) t.emplace_back(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j), double(occ));
            continue;
        }
        const int nf = detail::occupation(s, bec, from, N);
        const int nt = detail::occupation(s, bec, to, N);
        if (nf == 0) continue;
        BasisState r = s;
        detail::shift(r, bec, from, -1);
        detail::shift(r, bec, to, +1);
        if (auto i = table.find(r))
            t.emplace_back(*i, static_cast<Eigen::Index>(j), std::sqrt(double(nf)) * std::sqrt(double(nt + 1)));
    }
    return detail::from_triplets(table.dim(), t);
}

/// Decay channels of the master equation: F_a = a^dag e, F_b = b^dag e, and the cavity mode c.
inline SparseOperator collapse_operator(Channel ch, const BasisTable& table) {
    switch (ch) {
        case Channel::Fa1: return transfer_operator(1, Level::e, Level::a, table);
        case Channel::Fb1: return transfer_operator(1, Level::e, Level::b, table);
        case Channel::Fa2: return transfer_operator(2, Level::e, Level::a, table);
        case Channel::Fb2: return transfer_operator(2, Level::e, Level::b, table);
        case Channel::c: return mode_operator(Mode::c, table);
    }
    throw std::invalid_argument("collapse_operator: bad channel");
}

/// S^z_i = a^dag a - b^dag b, diagonal with entries N - 2k_i - n_i.
inline SparseOperator spin_z_operator(int bec, const BasisTable& table) {
    if (bec != 1 && bec != 2) throw std::invalid_argument("spin_z_operator: bec must be 1 or 2");
    std::vector<Triplet> t;
    const int N = table.N();
    for (Eigen::Index j = 0; j < table.dim(); ++j) {
        const auto& s = table[static_cast<std::size_t>(j)];
        const int m = N - 2 * s.k(bec) - s.n(bec);
        if (m != 0) t.emplace_back(j, j, double(m));
    }
    return detail::from_triplets(table.dim(), t);
}

/// Diagonal of a number-like observable, handy for cheap expectation values.
inline Eigen::VectorXd excited_number_diagonal(const BasisTable& table) {
    Eigen::VectorXd d(table.dim());
    for (Eigen::Index j = 0; j < table.dim(); ++j) {
        const auto& s = table[static_cast<std::size_t>(j)];
        d(j) = s.n1 + s.n2;
    }
    return d;
}

inline Eigen::VectorXd photon_number_diagonal(const BasisTable& table) {
    Eigen::VectorXd d(table.dim());
    for (Eigen::Index j = 0; j < table.dim(); ++j) d(j) = table[static_cast<std::size_t>(j)].l;
    return d;
}

}  // namespace cavbec
