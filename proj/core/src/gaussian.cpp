#include "tworate/gaussian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace tworate {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPsdTol = 1e-9;

double clamped_half_log2(double num, double den) {
  if (den == 0.0) return num > 0.0 ? kInf : 0.0;
  const double r = 0.5 * std::log2(num / den);
  return r > 0.0 ? r : 0.0;
}

}  // namespace

void GaussianSourceSpec::validate() const {
  if (!std::isfinite(var_a) || !std::isfinite(var_b) || !std::isfinite(var_z))
    throw std::invalid_argument("variances must be finite");
  if (var_a <= 0.0)
    throw std::invalid_argument("var_a must be positive");
  if (var_b < 0.0 || var_z < 0.0)
    throw std::invalid_argument("variances must be >= 0");
}

double rz_min(const GaussianSourceSpec& g, double dz) {
  g.validate();
  if (!(dz >= 0.0)) throw std::invalid_argument("dz must be >= 0");
  if (dz == 0.0) return g.var_z > 0.0 ? kInf : 0.0;
  return clamped_half_log2(g.var_a * g.var_z, dz * (g.var_a + g.var_z));
}

double rx_min(const GaussianSourceSpec& g, double ry, double dx) {
  g.validate();
  if (!(ry >= 0.0)) throw std::invalid_argument("ry must be >= 0");
  if (!(dx >= 0.0)) throw std::invalid_argument("dx must be >= 0");
  if (dx == 0.0) return kInf;
  // ratio == 1.0 exactly at ry = 0, so the helper-free case collapses to
  // 0.5 log2(var_a / dx) with no round-off.
  const double shrink = g.var_b + g.var_a * std::exp2(-2.0 * ry);
  const double ratio = shrink / (g.var_a + g.var_b);
  return clamped_half_log2(g.var_a * ratio, dx);
}

double rx_min_slope(const GaussianSourceSpec& g, double ry) {
  g.validate();
  if (!(ry >= 0.0)) throw std::invalid_argument("ry must be >= 0");
  const double t = g.var_a * std::exp2(-2.0 * ry);
  return -t / (g.var_b + t);
}

double helper_noise_from_rate(const GaussianSourceSpec& g, double r_prime) {
  g.validate();
  if (!(r_prime >= 0.0)) throw std::invalid_argument("r_prime must be >= 0");
  if (r_prime == 0.0) return kInf;
  return (g.var_a + g.var_b) / (std::exp2(2.0 * r_prime) - 1.0);
}

double helper_slope_bound(const GaussianSourceSpec& g) {
  g.validate();
  return g.var_a / (g.var_a + g.var_b);
}

// ------------------------------------------------------------ GaussianJoint

void GaussianJoint::validate() const {
  const auto n = static_cast<Eigen::Index>(names.size());
  if (n == 0) throw std::invalid_argument("covariance needs at least one variable");
  if (covariance.rows() != n || covariance.cols() != n)
    throw std::invalid_argument(fmt::format("covariance is {}x{}, expected {}x{}",
                                            covariance.rows(), covariance.cols(), n, n));
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) throw std::invalid_argument("empty variable name");
    for (std::size_t j = i + 1; j < names.size(); ++j)
      if (names[i] == names[j])
        throw std::invalid_argument(fmt::format("duplicate variable '{}'", names[i]));
  }
  if (!covariance.isApprox(covariance.transpose(), 1e-9))
    throw std::invalid_argument("covariance must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance);
  if (es.eigenvalues().minCoeff() < -kPsdTol)
    throw std::invalid_argument(fmt::format("covariance is not positive semidefinite (min eigenvalue {})",
                                            es.eigenvalues().minCoeff()));
}

int GaussianJoint::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw std::invalid_argument(fmt::format("no variable named '{}'", name));
}

double GaussianJoint::conditional_variance(const std::string& target,
                                           const std::vector<std::string>& given) const {
  validate();
  const int t = index_of(target);
  std::vector<int> g;
  for (const auto& name : given) {
    const int i = index_of(name);
    if (i == t) throw std::invalid_argument("cannot condition a variable on itself");
    for (int other : g)
      if (other == i) throw std::invalid_argument("duplicate conditioning variable");
    g.push_back(i);
  }
  const double var_t = covariance(t, t);
  if (g.empty()) return var_t;

  const auto k = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd S(k, k);
  Eigen::VectorXd c(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    c(i) = covariance(t, g[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < k; ++j)
      S(i, j) = covariance(g[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(j)]);
  }
  // Schur complement with a pseudo-inverse so degenerate side information
  // (e.g. duplicated or deterministic variables) is handled.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(S);
  const double v = var_t - c.dot(cod.pseudoInverse() * c);
  return v > 0.0 ? v : 0.0;
}

double conditional_rate_distortion(const GaussianJoint& j, const std::string& target,
                                   const std::vector<std::string>& given, double d) {
  if (!(d >= 0.0)) throw std::invalid_argument("distortion target must be >= 0");
  const double v = j.conditional_variance(target, given);
  if (d == 0.0) return v > 0.0 ? kInf : 0.0;
  return clamped_half_log2(v, d);
}

GaussianJoint helper_description_joint(const GaussianSourceSpec& g, double r_prime) {
  const double var_d = helper_noise_from_rate(g, r_prime);   // validates
  if (!std::isfinite(var_d))
    throw std::invalid_argument("helper_description_joint needs r_prime > 0");
  // X = Z + A, V = Z + A + B + D, Z; A, B, Z, D independent.
  GaussianJoint j;
  j.names = {"x", "v", "z"};
  j.covariance.resize(3, 3);
  const double vx = g.var_z + g.var_a;
  j.covariance << vx, vx, g.var_z,
                  vx, vx + g.var_b + var_d, g.var_z,
                  g.var_z, g.var_z, g.var_z;
  j.validate();
  return j;
}

}  // namespace tworate
