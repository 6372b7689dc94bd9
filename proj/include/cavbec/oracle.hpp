// oracle.hpp: closed-form S^z S^z evolution of the equatorial coherent product state
//
// The ideal state keeps the binomial amplitudes of the initial product state and
// only acquires phases, so everything here is exact up to rounding.

#pragma once

#include "cavbec/entanglement.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace cavbec {

/// Binomial coefficient as a double; exact for the N used here.
inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

struct PureGroundState {
    int N{1};
    Eigen::MatrixXcd coeffs;  // c[k1][k2]

    GroundDensityMatrix density() const {
        const int D = N + 1;
        Eigen::VectorXcd psi(D * D);
        for (int k1 = 0; k1 < D; ++k1)
            for (int k2 = 0; k2 < D; ++k2) psi(k1 * D + k2) = coeffs(k1, k2);
        return {N, psi * psi.adjoint()};
    }
};

/// exp(-i Omega t S1 S2) (optionally with the squeezing terms and a common rotation
/// omega t (S1 + S2)) applied to |1/sqrt2, 1/sqrt2>>_1 |1/sqrt2, 1/sqrt2>>_2.
/// `rotation` is the dimensionless omega*t.
inline PureGroundState ideal_evolve(int N, double omega_t, bool include_squeezing = false, double rotation = 0.0) {
    if (N < 1) throw std::invalid_argument("ideal_evolve: N must be >= 1");
    PureGroundState s{N, Eigen::MatrixXcd(N + 1, N + 1)};
    const double norm = std::pow(2.0, -double(N));
    for (int k1 = 0; k1 <= N; ++k1)
        for (int k2 = 0; k2 <= N; ++k2) {
            const double m1 = N - 2 * k1, m2 = N - 2 * k2;
            double phase = omega_t * m1 * m2;
            if (include_squeezing) phase += omega_t * 0.5 * (m1 * m1 + m2 * m2);
            phase += rotation * (m1 + m2);
            s.coeffs(k1, k2) = std::sqrt(binomial(N, k1) * binomial(N, k2)) * norm * std::polar(1.0, -phase);
        }
    return s;
}

/// E = 2 log2(sum of singular values of the coefficient matrix).
inline double pure_state_negativity(const PureGroundState& s) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s.coeffs);
    const double sum = svd.singularValues().sum();
    return std::max(0.0, 2.0 * std::log2(sum));
}

inline std::vector<double> crevasse_curve(int N, const std::vector<double>& omega_ts, bool include_squeezing = false) {
    std::vector<double> out;
    out.reserve(omega_ts.size());
    for (double t : omega_ts) out.push_back(pure_state_negativity(ideal_evolve(N, t, include_squeezing)));
    return out;
}

struct CharacteristicTimes {
    double cnot_time{0.0};   // pi / (4N)
    double macro_time{0.0};  // 1 / sqrt(2N)
    double macro_time_loose{0.0};  // 1 / sqrt(N), the order-of-magnitude form
};

inline CharacteristicTimes characteristic_times(int N) {
    if (N < 1) throw std::invalid_argument("characteristic_times: N must be >= 1");
    return {std::numbers::pi / (4.0 * N), 1.0 / std::sqrt(2.0 * N), 1.0 / std::sqrt(double(N))};
}

/// Number of strict interior local minima of a sampled curve (plateaus count once).
inline int count_local_minima(const std::vector<double>& v, double eps = 1e-12) {
    int count = 0;
    const std::size_t n = v.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        if (v[i] < v[i - 1] - eps) {
            std::size_t j = i;
            while (j + 1 < n && std::abs(v[j + 1] - v[i]) <= eps) ++j;
            if (j + 1 < n && v[j + 1] > v[i] + eps) ++count;
            i = j + 1;
        } else {
            ++i;
        }
    }
    return count;
}

// ------------------------- time-rescale fitting ----------------------------

struct RescaleFit {
    double factor{1.0};
    double sse{0.0};           // sum of squared E mismatch at the optimum
    double max_abs_dev{0.0};   // max_t |E_sim - E_oracle(factor * t)|
};

/// Fits one scalar s in [lo, hi] so that E_oracle(s * Omega t) best matches the
/// simulated curve in least squares. Dense scan followed by golden-section refinement.
inline RescaleFit fit_time_rescale(int N, const std::vector<double>& omega_ts, const std::vector<double>& E_sim,
                                   double lo = 0.5, double hi = 2.0, bool include_squeezing = false) {
    if (omega_ts.size() != E_sim.size()) throw std::invalid_argument("fit_time_rescale: size mismatch");
    if (!(lo > 0 && hi > lo)) throw std::invalid_argument("fit_time_rescale: bad factor range");
    auto sse = [&](double f) {
        double s = 0.0;
        for (std::size_t i = 0; i < omega_ts.size(); ++i) {
            const double d = E_sim[i] - pure_state_negativity(ideal_evolve(N, f * omega_ts[i], include_squeezing));
            s += d * d;
        }
        return s;
    };
    constexpr int kScan = 301;
    double best_f = lo, best = sse(lo);
    for (int i = 1; i < kScan; ++i) {
        const double f = lo + (hi - lo) * i / (kScan - 1);
        const double v = sse(f);
        if (v < best) best = v, best_f = f;
    }
    const double step = (hi - lo) / (kScan - 1);
    double a = std::max(lo, best_f - step), b = std::min(hi, best_f + step);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = sse(x1), f2 = sse(x2);
    for (int it = 0; it < 60 && b - a > 1e-10; ++it) {
        if (f1 < f2) {
            b = x2, x2 = x1, f2 = f1;
            x1 = b - phi * (b - a), f1 = sse(x1);
        } else {
            a = x1, x1 = x2, f1 = f2;
            x2 = a + phi * (b - a), f2 = sse(x2);
        }
    }
    const double fr = 0.5 * (a + b);
    const double vr = sse(fr);
    RescaleFit fit;
    if (vr <= best) fit.factor = fr, fit.sse = vr;
    else fit.factor = best_f, fit.sse = best;
    for (std::size_t i = 0; i < omega_ts.size(); ++i) {
        const double e = pure_state_negativity(ideal_evolve(N, fit.factor * omega_ts[i], include_squeezing));
        fit.max_abs_dev = std::max(fit.max_abs_dev, std::abs(E_sim[i] - e));
    }
    return fit;
}

}  // namespace cavbec
