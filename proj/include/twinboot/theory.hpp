#ifndef TWINBOOT_THEORY_HPP
#define TWINBOOT_THEORY_HPP

#include <array>
#include <cstddef>

namespace twinboot {

/// Reference parameter uncertainty for Gaussian mean estimation:
/// sigma_true(M) = sigma_data / sqrt(M).
double sigma_true_gaussian(double sigma_data, std::size_t m);

/// Curvature quantities of the symmetric two-well potential at a basin
/// center, and the resulting rescale factor S for the single-well reference.
struct CurvatureCorrection {
  double epsilon;      // exp(-d^2 / (2 sigma^2))
  double lambda_perp;  // curvature orthogonal to the basin axis
  double lambda_par;   // curvature along the basin axis
  double s_bw;         // sqrt(0.5 (1/lambda_perp + 1/lambda_par))
};

/// Closed forms evaluated at the basin center. Throws std::invalid_argument
/// for sigma_well <= 0 and std::domain_error if lambda_par <= 0.
CurvatureCorrection curvature_correction(double basin_distance,
                                         double sigma_well);

/// Curvature-corrected two-basin reference:
/// sigma_theory = S(bw) * sigma_data / sqrt(M).
double sigma_theory_two_basin(double basin_distance, double sigma_well,
                              double sigma_data, std::size_t m);

/// Closed-form estimator variances for true per-parameter variance tau^2.
double two_sample_estimator_variance(double tau_sq);             // 2 tau^4
double b_sample_estimator_variance(double tau_sq, std::size_t b);  // 2 tau^4/(B-1)
double grouped_estimator_variance(double tau_sq, std::size_t d);   // 2 tau^4/D

/// Independent numerical oracle: finite-difference Hessian (central
/// differences of the analytic two-well gradient, h = 1e-5) eigen-decomposed
/// at an arbitrary point.
struct HessianEigen {
  double lambda_min;
  double lambda_max;
  double s_bw;  // sqrt(0.5 (1/lambda_min + 1/lambda_max))
};

HessianEigen numerical_hessian_eigen(std::array<double, 2> at,
                                     double basin_distance, double sigma_well,
                                     double h = 1e-5);

/// Gradient-descent location of the minimum of the noiseless two-well
/// potential starting from the given point.
std::array<double, 2> locate_two_basin_minimum(std::array<double, 2> start,
                                               double basin_distance,
                                               double sigma_well);

}  // namespace twinboot

#endif
