#pragma once

// Independent brute-force reference computations. These deliberately avoid
// the library's code paths: two-pass definitional formulas, O(n^2) rank
// counting, product-form geometric means. Test expectations come from here,
// never from the implementation under test.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace jqf::test::oracle {

inline double pearson_two_pass(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
        sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
        syy += (ys[i] - mean_y) * (ys[i] - mean_y);
    }
    return sxy / std::sqrt(sxx * syy);
}

// midrank by counting: 1 + #smaller + (#equal - 1) / 2, counting self as equal
inline std::vector<double> midranks_counting(std::span<const double> xs) {
    std::vector<double> ranks(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::size_t smaller = 0, equal = 0;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            if (xs[j] < xs[i]) ++smaller;
            if (xs[j] == xs[i]) ++equal;
        }
        ranks[i] = 1.0 + static_cast<double>(smaller) +
                   (static_cast<double>(equal) - 1.0) / 2.0;
    }
    return ranks;
}

inline double spearman_brute(std::span<const double> xs, std::span<const double> ys) {
    std::vector<double> rx = midranks_counting(xs);
    std::vector<double> ry = midranks_counting(ys);
    return pearson_two_pass(rx, ry);
}

// offset geometric mean via the raw product form; zero-free check only
inline double geometric_mean_offset_product(std::span<const long long> citations) {
    long double product = 1.0L;
    for (long long c : citations) product *= (1.0L + static_cast<long double>(c));
    return static_cast<double>(
        std::pow(product, 1.0L / static_cast<long double>(citations.size())) - 1.0L);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// internally studentized residuals of y ~ a + b*x, definitional formulas
inline std::vector<double> studentized_residuals(std::span<const double> xs,
                                                 std::span<const double> ys) {
    const std::size_t n = xs.size();
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
        sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
    }
    double slope = sxy / sxx;
    double intercept = mean_y - slope * mean_x;
    std::vector<double> residuals(n);
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        residuals[i] = ys[i] - (intercept + slope * xs[i]);
        rss += residuals[i] * residuals[i];
    }
    double s2 = rss / static_cast<double>(n - 2);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double leverage = 1.0 / static_cast<double>(n) +
                          (xs[i] - mean_x) * (xs[i] - mean_x) / sxx;
        out[i] = residuals[i] / std::sqrt(s2 * (1.0 - leverage));
    }
    return out;
}

} // namespace jqf::test::oracle
