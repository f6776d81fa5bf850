#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace poissonloc {
namespace stats {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased
double median(std::vector<double> xs);        // copies and sorts

/// Two-sample Kolmogorov-Smirnov distance sup_x |F_a(x) - F_b(x)|; ties
/// across samples are handled by advancing both sides past equal values.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sample KS distance of `xs` against the uniform law on [0,1].
double ks_uniform01(std::vector<double> xs);

/// Asymptotic Kolmogorov survival function Q(x) = 2 sum (-1)^{k-1} e^{-2k^2x^2}.
double kolmogorov_sf(double x);

/// Regularized upper incomplete gamma Q(a, x) (series / continued fraction).
double gamma_q(double a, double x);

/// Chi-square survival function with k degrees of freedom.
double chi2_sf(double x, double k);

double poisson_pmf(long long k, double mean);

/// Pearson chi-square goodness-of-fit p-value of observed counts against a
/// Poisson law; tail bins are merged until every expected count is >= 5.
double poisson_gof_pvalue(std::span<const long long> counts, double mean);

/// Pearson correlation coefficient.
double correlation(std::span<const double> xs, std::span<const double> ys);

/// Numerically stable log(sum(exp(v))) accumulated in index order.
double log_sum_exp(std::span<const double> v);

}  // namespace stats
}  // namespace poissonloc
