#pragma once

namespace cerm {

// Standard normal density.
double norm_pdf(double x);

// Standard normal CDF via the complementary error function.
// Measured absolute error < 3e-16 against a Gauss-Legendre quadrature oracle
// (see tests); handles +/-infinity.
double norm_cdf(double x);

// Inverse standard normal CDF, Wichura's AS 241 (PPND16) rational
// approximations, relative error ~1e-15 over (0,1).
// Returns -inf for p <= 0 and +inf for p >= 1 (sentinel convention used by
// the migration-threshold machinery).
double norm_quantile(double p);

// Bivariate standard normal CDF P(X <= x, Y <= y) with correlation rho.
// Evaluates the single-integral reduction
//   Phi2(x,y;rho) = int_{-inf}^{x} pdf(s) * Phi((y - rho*s)/sqrt(1-rho^2)) ds
// with adaptive Gauss-Legendre panels; |rho| == 1 falls back to the exact
// degenerate limits. Absolute error < 1e-12 for |rho| <= 0.9999.
double norm_cdf2(double x, double y, double rho);

} // namespace cerm
