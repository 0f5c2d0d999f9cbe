#pragma once

#include <span>

namespace groupnav::stats {

struct TTestResult {
    double t = 0.0;
    long df = 0;
    double p = 1.0;
    bool valid = true;  // false when the pooled variance is zero
};

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);  // n-1 denominator

// Student's pooled two-sample t-test, two-tailed.
// Requires at least two values per sample.
TTestResult pooled_t_test(std::span<const double> a, std::span<const double> b);

double log_gamma(double x);
double incomplete_beta(double a, double b, double x);  // regularized I_x(a,b)
double student_t_two_tailed_p(double t, double df);

}  // namespace groupnav::stats
