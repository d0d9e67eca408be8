#include "twinboot/theory.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "twinboot/problems.hpp"

namespace twinboot {

double sigma_true_gaussian(double sigma_data, std::size_t m) {
  if (sigma_data < 0.0) {
    throw std::invalid_argument("sigma_true_gaussian: sigma_data must be >= 0");
  }
  if (m < 1) {
    throw std::invalid_argument("sigma_true_gaussian: M must be >= 1");
  }
  return sigma_data / std::sqrt(static_cast<double>(m));
}

CurvatureCorrection curvature_correction(double basin_distance,
                                         double sigma_well) {
  if (!(sigma_well > 0.0)) {
    throw std::invalid_argument("curvature_correction: sigma_well must be > 0");
  }
  const double s2 = sigma_well * sigma_well;
  const double eps = std::exp(-basin_distance * basin_distance / (2.0 * s2));
  CurvatureCorrection out;
  out.epsilon = eps;
  out.lambda_perp = (1.0 + eps) / s2;
  out.lambda_par =
      (1.0 + eps) / s2 - eps * basin_distance * basin_distance / (s2 * s2);
  if (out.lambda_par <= 0.0) {
    throw std::domain_error(
        "curvature_correction: wells merging (lambda_par <= 0) at d=" +
        std::to_string(basin_distance) + ", sigma_well=" +
        std::to_string(sigma_well));
  }
  out.s_bw = std::sqrt(0.5 * (1.0 / out.lambda_perp + 1.0 / out.lambda_par));
  return out;
}

double sigma_theory_two_basin(double basin_distance, double sigma_well,
                              double sigma_data, std::size_t m) {
  const CurvatureCorrection c = curvature_correction(basin_distance, sigma_well);
  return c.s_bw * sigma_true_gaussian(sigma_data, m);
}

double two_sample_estimator_variance(double tau_sq) {
  if (tau_sq < 0.0) {
    throw std::invalid_argument("estimator variance: tau^2 must be >= 0");
  }
  return 2.0 * tau_sq * tau_sq;
}

double b_sample_estimator_variance(double tau_sq, std::size_t b) {
  if (b < 2) {
    throw std::invalid_argument("B-sample estimator variance: B must be >= 2");
  }
  return 2.0 * tau_sq * tau_sq / static_cast<double>(b - 1);
}

double grouped_estimator_variance(double tau_sq, std::size_t d) {
  if (d < 1) {
    throw std::invalid_argument("grouped estimator variance: D must be >= 1");
  }
  return 2.0 * tau_sq * tau_sq / static_cast<double>(d);
}

namespace {

std::array<double, 2> well_centers_mu1(double d) { return {-0.5 * d, 0.0}; }
std::array<double, 2> well_centers_mu2(double d) { return {0.5 * d, 0.0}; }

}  // namespace

HessianEigen numerical_hessian_eigen(std::array<double, 2> at,
                                     double basin_distance, double sigma_well,
                                     double h) {
  const auto mu1 = well_centers_mu1(basin_distance);
  const auto mu2 = well_centers_mu2(basin_distance);
  auto grad = [&](double x, double y) {
    const double w[2] = {x, y};
    return two_basin_potential_grad(w, mu1, mu2, sigma_well);
  };
  // H[i][j] = d g_i / d x_j, symmetrized.
  const auto gxp = grad(at[0] + h, at[1]);
  const auto gxm = grad(at[0] - h, at[1]);
  const auto gyp = grad(at[0], at[1] + h);
  const auto gym = grad(at[0], at[1] - h);
  const double hxx = (gxp[0] - gxm[0]) / (2.0 * h);
  const double hyy = (gyp[1] - gym[1]) / (2.0 * h);
  const double hxy =
      0.5 * ((gyp[0] - gym[0]) / (2.0 * h) + (gxp[1] - gxm[1]) / (2.0 * h));
  // eigenvalues of [[hxx, hxy], [hxy, hyy]]
  const double tr = hxx + hyy;
  const double disc = std::sqrt(0.25 * (hxx - hyy) * (hxx - hyy) + hxy * hxy);
  HessianEigen out;
  out.lambda_min = 0.5 * tr - disc;
  out.lambda_max = 0.5 * tr + disc;
  if (out.lambda_min <= 0.0 || out.lambda_max <= 0.0) {
    throw std::domain_error(
        "numerical_hessian_eigen: non-positive curvature at the given point");
  }
  out.s_bw = std::sqrt(0.5 * (1.0 / out.lambda_min + 1.0 / out.lambda_max));
  return out;
}

std::array<double, 2> locate_two_basin_minimum(std::array<double, 2> start,
                                               double basin_distance,
                                               double sigma_well) {
  const auto mu1 = well_centers_mu1(basin_distance);
  const auto mu2 = well_centers_mu2(basin_distance);
  std::array<double, 2> w = start;
  const double lr = 0.1 * sigma_well * sigma_well;
  for (int iter = 0; iter < 200000; ++iter) {
    const auto g = two_basin_potential_grad(w, mu1, mu2, sigma_well);
    w[0] -= lr * g[0];
    w[1] -= lr * g[1];
    if (g[0] * g[0] + g[1] * g[1] < 1e-28) break;
  }
  return w;
}

}  // namespace twinboot
