#pragma once

// Reference distributions used for p-values and critical values.

namespace panelecm {

double normal_cdf(double z);
/// P(|Z| >= |z|) for standard normal Z.
double normal_two_sided_p(double z);
double normal_quantile(double p);

double chi_square_cdf(double x, double df);
/// Upper tail P(X >= x).
double chi_square_sf(double x, double df);
/// Inverse CDF. Throws std::invalid_argument unless 0 < p < 1 and df >= 1.
double chi_square_quantile(double p, double df);

/// Two-sided p-value of a t statistic.
double student_t_two_sided_p(double t, double df);

/// Upper tail of the F distribution.
double f_sf(double f, double df1, double df2);

}  // namespace panelecm
