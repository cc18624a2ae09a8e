#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace jqf {

/// Arithmetic mean of quality scores; every score must lie in [1, 4].
/// This is the enforcement boundary: no out-of-range score can reach an
/// indicator.
double journal_quality_factor(std::span<const double> scores);

/// Geometric-mean citation rate in offset form, exp(mean(ln(1 + c))) - 1,
/// so zero-citation articles are admissible. Long-double accumulation keeps
/// the closed-form cases (all zeros, singleton, [0,3]) exact.
double journal_citation_rate(std::span<const long long> citations);

/// 1-based average ranks; tied values share the mean of their positions.
std::vector<double> rank_with_ties(std::span<const double> values);

enum class CorrMethod { Pearson, Spearman };

struct Correlation {
    CorrMethod method = CorrMethod::Pearson;
    double r = 0.0;
    int n = 0;
    std::optional<std::pair<double, double>> ci95; // absent when n < 4
    std::optional<double> p;                       // absent when n < 4
};

/// Sample Pearson correlation (one-pass co-moment accumulation), with Fisher
/// 95% CI and two-sided p when n >= 4. Throws InputError for length mismatch,
/// n < 3 or a constant input ("undefined correlation").
Correlation pearson(std::span<const double> xs, std::span<const double> ys);

/// Spearman rank correlation with mid-rank tie handling: exactly
/// pearson(rank_with_ties(xs), rank_with_ties(ys)).
Correlation spearman(std::span<const double> xs, std::span<const double> ys);

/// Fisher z interval: tanh(atanh(r) +- 1.959964 * sqrt(1/(n-3))), clamped to
/// [-1, 1]. Throws for n < 4; degenerates to [r, r] at |r| = 1.
std::pair<double, double> fisher_ci95(double r, int n);

/// Two-sided p for H0 r=0 from the Fisher z statistic atanh(r)*sqrt(n-3)
/// against the standard normal. Throws for n < 4; 0 at |r| = 1.
double correlation_p_value(double r, int n);

/// Median of the present values among the (FI, NO, PL) slots: three present ->
/// middle, two -> mean, one -> itself, none -> absent.
std::optional<double> median_correlation(const std::array<std::optional<double>, 3>& values);

struct JournalIndicators {
    std::string journal_key;
    double jqf = 0.0;
    double jcr = 0.0;
    int n_scored = 0;
    int n_articles = 0;
};

} // namespace jqf
