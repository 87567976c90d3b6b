#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's numeric kernels.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

// Power spectrum |X_k|^2, k = 0..N/2, by direct summation in long double.
inline std::vector<long double> direct_power_spectrum(const std::vector<long double>& x) {
    const std::size_t n = x.size();
    // Angles 2*pi*j/n for j = (k*i) mod n, so every term uses an exactly reduced angle.
    std::vector<long double> c(n), s(n);
    const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
    for (std::size_t j = 0; j < n; ++j) {
        c[j] = std::cos(two_pi * static_cast<long double>(j) / static_cast<long double>(n));
        s[j] = std::sin(two_pi * static_cast<long double>(j) / static_cast<long double>(n));
    }
    std::vector<long double> out(n / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        long double re = 0.0L, im = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = (k * i) % n;
            re += x[i] * c[j];
            im -= x[i] * s[j];
        }
        out[k] = re * re + im * im;
    }
    return out;
}

inline long double mel(long double f) { return 2595.0L * std::log10(1.0L + f / 700.0L); }
inline long double inv_mel(long double m) { return 700.0L * (std::pow(10.0L, m / 2595.0L) - 1.0L); }

// Weight of triangular filter m (of n_filters spanning 0..Nyquist) at frequency f.
inline long double mel_weight(int m, int n_filters, long double f, long double nyquist) {
    const long double top = mel(nyquist);
    const long double lo = inv_mel(top * m / (n_filters + 1));
    const long double mid = inv_mel(top * (m + 1) / (n_filters + 1));
    const long double hi = inv_mel(top * (m + 2) / (n_filters + 1));
    if (f > lo && f < mid) return (f - lo) / (mid - lo);
    if (f >= mid && f < hi) return (hi - f) / (hi - mid);
    return 0.0L;
}

// Filter-bank energies of every 25 ms / 10 ms Hamming window (frames x n_filters).
inline std::vector<std::vector<long double>> mel_energies(const std::vector<double>& samples, int sample_rate,
                                                          int n_filters = 40) {
    const int window = static_cast<int>(std::lround(0.025 * sample_rate));
    const int hop = static_cast<int>(std::lround(0.010 * sample_rate));
    std::vector<std::vector<long double>> out;
    std::vector<std::vector<long double>> weights;
    const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
    for (std::size_t start = 0; start + window <= samples.size(); start += hop) {
        std::vector<long double> x(window);
        for (int i = 0; i < window; ++i) {
            const long double w = 0.54L - 0.46L * std::cos(two_pi * i / (window - 1));
            x[i] = w * samples[start + i];
        }
        const auto power = direct_power_spectrum(x);
        if (weights.empty()) {
            weights.assign(n_filters, std::vector<long double>(power.size()));
            for (int m = 0; m < n_filters; ++m) {
                for (std::size_t k = 0; k < power.size(); ++k) {
                    const long double f = static_cast<long double>(k) * sample_rate / window;
                    weights[m][k] = mel_weight(m, n_filters, f, sample_rate / 2.0L);
                }
            }
        }
        std::vector<long double> e(n_filters, 0.0L);
        for (int m = 0; m < n_filters; ++m) {
            for (std::size_t k = 0; k < power.size(); ++k) e[m] += weights[m][k] * power[k];
        }
        out.push_back(std::move(e));
    }
    return out;
}

// Central difference of a scalar function along every coordinate of x.
inline Eigen::VectorXd central_gradient(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                        double h) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        x[i] = xi + h;
        const double fp = f(x);
        x[i] = xi - h;
        const double fm = f(x);
        x[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace oracle
