#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "eventgrad/objectives.hpp"
#include "eventgrad/trigger.hpp"

namespace eventgrad {

/// Constants entering the convergence-bound evaluators. f0_minus_fstar is
/// f(0) - f*; f* is exact for least squares and user-supplied otherwise.
struct BoundInputs {
  double gamma = 0;
  double L = 1;
  double sigma = 0;
  double varsigma = 0;
  double rho = 0;
  int n = 1;
  int K = 1;
  double f0_minus_fstar = 0;
  ThresholdSchedule schedule;

  /// C2 = 1 - 36 gamma^2 n L^2 / (1 - sqrt(rho))^2; must be > 0 for the
  /// bound to apply.
  double c2() const;
};

/// Full right-hand side of the convergence bound. Throws when C2 <= 0
/// ("step size too large for spectral gap").
double theorem1_rhs(const BoundInputs& in);

/// Independent second transcription of the same expression; the two are
/// cross-asserted in tests (transcription of long formulas is the dominant
/// error source).
double theorem1_rhs_alt(const BoundInputs& in);

struct CorollaryConditions {
  bool k_noise_mix = false;  // K large vs sigma/varsigma mixing terms
  bool k_spectral = false;   // K >= 72 L^2 n^2 / (sigma^2 (1-sqrt(rho))^2)
  bool k_stepsize = false;   // K >= (sqrt(n)(L+1) / (2 rho L^2 sqrt(n)+sigma))^2
  bool all() const { return k_noise_mix && k_spectral && k_stepsize; }
};

struct CorollaryReport {
  double rhs = 0;
  double gamma_rule = 0;  // 1 / (2 rho L^2 sqrt(K) + sigma sqrt(K/n))
  CorollaryConditions conditions;
};

/// Bound under the corollary step-size rule; inapplicability of the
/// K-largeness conditions is reported, not thrown.
CorollaryReport corollary1_rhs(const BoundInputs& in);
double corollary1_rhs_alt(const BoundInputs& in);

/// ||a+b||^2 <= 2||a||^2 + 2||b||^2 (always true; used as a randomized
/// property test).
bool norm_inequality_check(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct EstimatedConstants {
  double L = 0;
  double sigma = 0;     // sqrt of the max empirical minibatch-gradient variance
  double varsigma = 0;  // sqrt of the max cross-PE gradient variance
  double f0 = 0;
  double fstar = 0;
  bool L_exact = false;
  bool fstar_exact = false;
};

/// Empirical estimates of the smoothness and variance constants: L from the
/// Hessian for least squares (exact) or a finite-difference probe over
/// sampled point pairs; sigma^2 and varsigma^2 from sampled points.
EstimatedConstants estimate_constants(const ObjectiveSet& objectives, int samples,
                                      std::uint64_t seed);

}  // namespace eventgrad
