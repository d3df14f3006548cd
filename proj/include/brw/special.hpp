#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace brw {

inline double log_binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
           std::lgamma(double(n - k) + 1.0);
}

inline double log_sum_exp(const std::vector<double>& xs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

// Regularized lower incomplete gamma P(a, x); series + continued fraction.
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    if (x == 0.0) return 0.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    // Lentz continued fraction for Q(a,x)
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    double q = std::exp(-x + a * std::log(x) - gln) * h;
    return 1.0 - q;
}

inline double chi_square_cdf(double x, double dof) { return gamma_p(dof / 2.0, x / 2.0); }

// CDF of the noncentral chi-square distribution with `dof` degrees of
// freedom and noncentrality lambda, via the Poisson mixture of central
// chi-square CDFs. Used for ball-truncated isotropic gaussian transforms.
inline double noncentral_chi_square_cdf(double x, double dof, double lambda) {
    if (x <= 0.0) return 0.0;
    if (lambda < 1e-14) return chi_square_cdf(x, dof);
    const double half = lambda / 2.0;
    // start near the mode of the Poisson weights
    long j0 = std::max<long>(0, long(half) - 1);
    double logw0 = -half + j0 * std::log(half) - std::lgamma(double(j0) + 1.0);
    double sum = 0.0;
    // sweep up
    double logw = logw0;
    for (long j = j0;; ++j) {
        double term = std::exp(logw) * chi_square_cdf(x, dof + 2.0 * j);
        sum += term;
        if (term < 1e-17 * (sum + 1e-300) && j > j0 + 4) break;
        if (j - j0 > 100000) break;
        logw += std::log(half) - std::log(double(j) + 1.0);
    }
    // sweep down
    logw = logw0;
    for (long j = j0 - 1; j >= 0; --j) {
        logw -= std::log(half) - std::log(double(j) + 1.0);
        double term = std::exp(logw) * chi_square_cdf(x, dof + 2.0 * j);
        sum += term;
        if (term < 1e-17 * (sum + 1e-300)) break;
    }
    return std::min(1.0, sum);
}

}  // namespace brw
