#include "jqf/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jqf/errors.hpp"

namespace jqf {

namespace {

constexpr double kZ95 = 1.959964;

double clamp_r(double r) { return std::clamp(r, -1.0, 1.0); }

} // namespace

double journal_quality_factor(std::span<const double> scores) {
    if (scores.empty()) throw InputError("jqf: empty score list");
    long double sum = 0.0L;
    for (double s : scores) {
        if (!(s >= 1.0 && s <= 4.0)) {
            throw InputError("jqf: score " + std::to_string(s) + " outside [1,4]");
        }
        sum += s;
    }
    return static_cast<double>(sum / static_cast<long double>(scores.size()));
}

double journal_citation_rate(std::span<const long long> citations) {
    if (citations.empty()) throw InputError("jcr: empty citation list");
    long double acc = 0.0L;
    for (long long c : citations) {
        if (c < 0) throw InputError("jcr: negative citation count " + std::to_string(c));
        acc += std::log1p(static_cast<long double>(c));
    }
    long double mean = acc / static_cast<long double>(citations.size());
    return static_cast<double>(std::exp(mean) - 1.0L);
}

std::vector<double> rank_with_ties(std::span<const double> values) {
    if (values.empty()) throw InputError("rank_with_ties: empty input");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
        i = j + 1;
    }
    return ranks;
}

Correlation pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw InputError("pearson: length mismatch");
    if (xs.size() < 3) throw InputError("pearson: need at least 3 pairs");

    // one-pass co-moment update (the tests cross-check against a two-pass oracle)
    double mean_x = 0.0, mean_y = 0.0, m2x = 0.0, m2y = 0.0, cxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double n = static_cast<double>(i + 1);
        double dx = xs[i] - mean_x;
        double dy = ys[i] - mean_y;
        mean_x += dx / n;
        mean_y += dy / n;
        m2x += dx * (xs[i] - mean_x);
        m2y += dy * (ys[i] - mean_y);
        cxy += dx * (ys[i] - mean_y);
    }
    if (m2x <= 0.0 || m2y <= 0.0) {
        throw InputError("pearson: undefined correlation (constant input)");
    }

    Correlation corr;
    corr.method = CorrMethod::Pearson;
    corr.n = static_cast<int>(xs.size());
    corr.r = clamp_r(cxy / std::sqrt(m2x * m2y));
    if (corr.n >= 4) {
        corr.ci95 = fisher_ci95(corr.r, corr.n);
        corr.p = correlation_p_value(corr.r, corr.n);
    }
    return corr;
}

Correlation spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw InputError("spearman: length mismatch");
    if (xs.size() < 3) throw InputError("spearman: need at least 3 pairs");
    std::vector<double> rx = rank_with_ties(xs);
    std::vector<double> ry = rank_with_ties(ys);
    Correlation corr = pearson(rx, ry);
    corr.method = CorrMethod::Spearman;
    return corr;
}

std::pair<double, double> fisher_ci95(double r, int n) {
    if (n < 4) throw InputError("fisher_ci95: need n >= 4");
    if (r < -1.0 || r > 1.0) throw InputError("fisher_ci95: r outside [-1,1]");
    if (r == 1.0 || r == -1.0) return {r, r}; // degenerate: transform undefined
    double z = std::atanh(r);
    double half = kZ95 * std::sqrt(1.0 / (n - 3));
    return {clamp_r(std::tanh(z - half)), clamp_r(std::tanh(z + half))};
}

double correlation_p_value(double r, int n) {
    if (n < 4) throw InputError("correlation_p_value: need n >= 4");
    if (r < -1.0 || r > 1.0) throw InputError("correlation_p_value: r outside [-1,1]");
    if (r == 1.0 || r == -1.0) return 0.0;
    double z = std::atanh(r) * std::sqrt(static_cast<double>(n - 3));
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

std::optional<double> median_correlation(const std::array<std::optional<double>, 3>& values) {
    std::vector<double> present;
    for (const auto& v : values) {
        if (v) present.push_back(*v);
    }
    if (present.empty()) return std::nullopt;
    std::sort(present.begin(), present.end());
    if (present.size() == 1) return present[0];
    if (present.size() == 2) return (present[0] + present[1]) / 2.0;
    return present[1];
}

} // namespace jqf
