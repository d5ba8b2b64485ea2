#pragma once

#include <span>
#include <vector>

#include "scefis/image.hpp"

namespace scefis {

/// Area overlap |s ∩ g| / |s ∪ g|. Two empty masks agree perfectly (1.0).
double jaccard(const BinaryMask& s, const BinaryMask& g);

struct ScoreSummary {
    double mean = 0.0;
    double sd = 0.0;  ///< sample standard deviation (n-1)
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t n = 0;
};

/// Mean, sample sd and the two-sided 95% Student-t confidence interval of the mean.
ScoreSummary summarize(std::span<const double> scores);

/// Upper quantile t such that P(T <= t) = p for Student t with `dof` degrees of freedom.
double student_t_quantile(double p, double dof);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    double dof = 0.0;
};

/**
 * Paired two-sided t-test on a[i] - b[i].
 *
 * All-zero differences give t = 0, p = 1. Constant nonzero differences have zero
 * spread; t is reported as +/-infinity and p as 0.
 */
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// Welch's unequal-variance two-sample t-test (two-sided).
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

// Small descriptive helpers shared across modules.
double mean_of(std::span<const double> v);
double median_of(std::span<const double> v);
/// Sample (n-1) standard deviation; 0 for n < 2.
double sample_sd(std::span<const double> v);

}  // namespace scefis
