// Closed forms for the jointly Gaussian helper setting with quadratic
// distortion:  X = Z + A,  Y = Z + A + B,  A, B, Z independent zero-mean
// Gaussians.  The helper rate ry degrades what the X-side description has to
// say; both minimum rates come out in closed form.  Rates are in bits and
// clamp at zero; unattainable targets produce an infinity sentinel rather
// than an error so callers can sweep distortion grids freely.

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tworate {

struct GaussianSourceSpec {
  double var_a = 0;   // sigma_A^2
  double var_b = 0;   // sigma_B^2
  double var_z = 0;   // sigma_Z^2

  void validate() const;   // variances finite and >= 0, var_a > 0
};

// Minimum rate for the Z side to reach E(Z - Zhat)^2 <= dz when the X side
// already knows X = Z + A:
//   max(0, 1/2 log2( var_a var_z / (dz (var_a + var_z)) )).
// dz = 0 returns infinity; dz at or above the conditional variance
// var_a var_z / (var_a + var_z) returns 0.
double rz_min(const GaussianSourceSpec& g, double dz);

// Minimum rate for the X side to reach E(X - Xhat)^2 <= dx at the Z side
// when the helper spent ry bits on describing A + B:
//   max(0, 1/2 log2( var_a * q / dx )),
//   q = (var_b + var_a 2^{-2 ry}) / (var_a + var_b).
// At ry = 0 the ratio q collapses to exactly 1 and the value is
// 1/2 log2(var_a / dx): a helper that says nothing leaves plain remote
// source coding against side information Z.
double rx_min(const GaussianSourceSpec& g, double ry, double dx);

// d rx_min / d ry where the rate is positive:
//   -var_a 2^{-2 ry} / (var_b + var_a 2^{-2 ry});
// at ry = 0 this is -var_a / (var_a + var_b), never steeper than slope -1.
double rx_min_slope(const GaussianSourceSpec& g, double ry);

// Variance of the noise D on a helper description V = A + B + Z + D whose
// binned rate is r_prime:  (var_a + var_b) / (2^{2 r_prime} - 1).
// r_prime = 0 returns infinity (a zero-rate description is pure noise);
// r_prime < 0 throws.
double helper_noise_from_rate(const GaussianSourceSpec& g, double r_prime);

// Covariance over named jointly Gaussian variables.  Must be symmetric and
// positive semidefinite (eigenvalues >= -1e-9 tolerated, clamped).
struct GaussianJoint {
  std::vector<std::string> names;
  Eigen::MatrixXd covariance;

  void validate() const;
  int index_of(const std::string& name) const;
  // Var(target | given...) via the Schur complement; singular conditioning
  // blocks go through the pseudo-inverse.
  double conditional_variance(const std::string& target,
                              const std::vector<std::string>& given) const;
};

// Rate to describe X within mean-square d when both ends see the variables
// `given` (decoder side information, encoder knows it too):
//   max(0, 1/2 log2( Var(X|given) / d )), d = 0 -> infinity.
double conditional_rate_distortion(const GaussianJoint& j, const std::string& target,
                                   const std::vector<std::string>& given, double d);

// Joint law of (x, v, z) when the helper description is V = A + B + Z + D
// with noise variance from helper_noise_from_rate(r_prime).  Feeding this to
// conditional_rate_distortion("x", {"v","z"}, dx) reproduces rx_min(ry=r_prime, dx).
GaussianJoint helper_description_joint(const GaussianSourceSpec& g, double r_prime);

// Steepest possible rate saving per helper bit at ry = 0, var_a/(var_a+var_b).
double helper_slope_bound(const GaussianSourceSpec& g);

}  // namespace tworate
