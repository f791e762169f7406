#include "eventgrad/analysis.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace eventgrad {

double BoundInputs::c2() const {
  const double q = (1.0 - std::sqrt(rho)) * (1.0 - std::sqrt(rho));
  return 1.0 - 36.0 * gamma * gamma * n * L * L / q;
}

namespace {

void check_bound_inputs(const BoundInputs& in) {
  if (in.rho < 0 || in.rho >= 1) throw std::invalid_argument("rho must be in [0,1)");
  if (in.gamma < 0) throw std::invalid_argument("gamma must be >= 0");
  if (in.K < 1) throw std::invalid_argument("K must be >= 1");
  if (in.n < 1) throw std::invalid_argument("n must be >= 1");
  if (in.f0_minus_fstar < 0) throw std::invalid_argument("f0_minus_fstar must be >= 0");
}

}  // namespace

double theorem1_rhs(const BoundInputs& in) {
  check_bound_inputs(in);
  const double C2 = in.c2();
  if (C2 <= 0) throw std::invalid_argument("step size too large for spectral gap");

  const double sqrt_rho = std::sqrt(in.rho);
  const double one_minus_sqrt_rho_sq = (1.0 - sqrt_rho) * (1.0 - sqrt_rho);
  const double G = schedule_sum_G(in.schedule, in.K - 1);
  const double Ghalf = schedule_sum_Ghalf(in.schedule, in.K - 1);

  const double term_init = in.f0_minus_fstar / in.K;
  const double term_noise = in.gamma * in.gamma * in.L * in.sigma * in.sigma / (2.0 * in.n);
  const double coef_G =
      12.0 * std::pow(in.gamma, 3) * in.n * in.L * in.L * (2.0 * in.L * in.L + 1.0) / C2 +
      (3.0 * in.gamma * in.L * in.L + in.L + 1.0) / (2.0 * in.K) +
      72.0 * std::pow(in.gamma, 3) * std::pow(in.L, 4) / (in.K * C2 * one_minus_sqrt_rho_sq);
  const double term_G = coef_G * G;
  const double term_Ghalf = in.gamma * in.rho * in.L * in.L * Ghalf * Ghalf / C2;
  const double term_sigma =
      2.0 * in.n * std::pow(in.gamma, 3) * in.sigma * in.sigma * in.L * in.L /
      (C2 * (1.0 - in.rho));
  const double term_varsigma =
      18.0 * in.n * std::pow(in.gamma, 3) * in.varsigma * in.varsigma * in.L * in.L /
      (C2 * one_minus_sqrt_rho_sq);

  return term_init + term_noise + term_G + term_Ghalf + term_sigma + term_varsigma;
}

double theorem1_rhs_alt(const BoundInputs& in) {
  check_bound_inputs(in);
  const double C2 = in.c2();
  if (C2 <= 0) throw std::invalid_argument("step size too large for spectral gap");

  const double s = std::sqrt(in.rho);
  const double q = (1.0 - s) * (1.0 - s);
  const double L2 = in.L * in.L;
  const double g3 = in.gamma * in.gamma * in.gamma;
  const double K = static_cast<double>(in.K);
  const double G = schedule_sum_G(in.schedule, in.K - 1);
  const double Ghalf = schedule_sum_Ghalf(in.schedule, in.K - 1);

  double rhs = in.f0_minus_fstar / K;
  rhs += 0.5 * in.gamma * in.gamma * in.L * in.sigma * in.sigma / in.n;
  rhs += G * ((g3 * L2 / C2) * (12.0 * in.n * (2.0 * L2 + 1.0) + 72.0 * L2 / (K * q)) +
              (3.0 * in.gamma * L2 + in.L + 1.0) / (2.0 * K));
  rhs += (in.gamma * in.rho * L2 / C2) * (Ghalf * Ghalf);
  rhs += (g3 * L2 * in.n / C2) *
         (2.0 * in.sigma * in.sigma / (1.0 - in.rho) + 18.0 * in.varsigma * in.varsigma / q);
  return rhs;
}

CorollaryReport corollary1_rhs(const BoundInputs& in) {
  check_bound_inputs(in);
  const double sqrt_rho = std::sqrt(in.rho);
  const double q = (1.0 - sqrt_rho) * (1.0 - sqrt_rho);
  const double L2 = in.L * in.L;
  const double K = static_cast<double>(in.K);
  const double G = schedule_sum_G(in.schedule, in.K - 1);
  const double Ghalf = schedule_sum_Ghalf(in.schedule, in.K - 1);

  CorollaryReport report;
  report.gamma_rule = 1.0 / (2.0 * in.rho * L2 * std::sqrt(K) + in.sigma * std::sqrt(K / in.n));

  double rhs = (2.0 * in.f0_minus_fstar + in.L) * (1.0 / K + 1.0 / std::sqrt(K * in.n));
  if (G > 0.0) {
    const double C3 = q * (2.0 * L2 + 1.0) / (6.0 * in.rho * L2);
    const double C4 = (7.0 * L2 + in.L + 1.0) / 2.0;
    rhs += (2.0 * C3 / std::sqrt(K) + 2.0 * C4 / K) * G;
  }
  if (Ghalf > 0.0) rhs += (2.0 / std::sqrt(K)) * Ghalf * Ghalf;
  report.rhs = rhs;

  const double s2 = in.sigma * in.sigma, s3 = s2 * in.sigma;
  const double v2 = in.varsigma * in.varsigma;
  const double n = static_cast<double>(in.n);
  const double bound1 = (4.0 * n * n * n * L2 / (s3 * (in.f0_minus_fstar + in.L / 2.0))) *
                        (s2 / (1.0 - in.rho) + 9.0 * v2 / q);
  const double bound2 = 72.0 * L2 * n * n / (s2 * q);
  const double denom3 = 2.0 * in.rho * L2 * std::sqrt(n) + in.sigma;
  const double bound3 = std::pow(std::sqrt(n) * (in.L + 1.0) / denom3, 2);
  report.conditions.k_noise_mix = K >= bound1;
  report.conditions.k_spectral = K >= bound2;
  report.conditions.k_stepsize = K >= bound3;
  return report;
}

double corollary1_rhs_alt(const BoundInputs& in) {
  check_bound_inputs(in);
  const double s = std::sqrt(in.rho);
  const double q = (1.0 - s) * (1.0 - s);
  const double L2 = in.L * in.L;
  const double K = static_cast<double>(in.K);
  const double sqrtK = std::sqrt(K);
  const double G = schedule_sum_G(in.schedule, in.K - 1);
  const double Ghalf = schedule_sum_Ghalf(in.schedule, in.K - 1);

  double rhs = (2.0 * in.f0_minus_fstar + in.L) / K +
               (2.0 * in.f0_minus_fstar + in.L) / (sqrtK * std::sqrt(static_cast<double>(in.n)));
  if (G > 0.0) {
    rhs += G * 2.0 * (q * (2.0 * L2 + 1.0) / (6.0 * in.rho * L2)) / sqrtK;
    rhs += G * (7.0 * L2 + in.L + 1.0) / K;
  }
  if (Ghalf > 0.0) rhs += 2.0 * Ghalf * Ghalf / sqrtK;
  return rhs;
}

bool norm_inequality_check(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw std::invalid_argument("norm_inequality_check: dim mismatch");
  return (a + b).squaredNorm() <= 2.0 * a.squaredNorm() + 2.0 * b.squaredNorm();
}

EstimatedConstants estimate_constants(const ObjectiveSet& objectives, int samples,
                                      std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  EstimatedConstants out;
  const int n = objectives.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto random_point = [&]() {
    ModelState m = objectives.zero_model();
    for (auto& b : m.blocks)
      for (Eigen::Index j = 0; j < b.size(); ++j) b.values(j) = gauss(rng);
    return m;
  };

  // L: exact Hessian eigenvalue when every local offers one, otherwise a
  // finite-difference Lipschitz probe over sampled point pairs.
  bool all_exact = true;
  double L = 0;
  for (int i = 0; i < n; ++i) {
    auto exact = objectives.local(i).exact_lipschitz();
    if (!exact) {
      all_exact = false;
      break;
    }
    L = std::max(L, *exact);
  }
  if (!all_exact) {
    L = 0;
    for (int s = 0; s < samples; ++s) {
      const ModelState x = random_point();
      const ModelState y = random_point();
      ModelState diff = x;
      diff.axpy(-1.0, y);
      const double dist = std::sqrt(diff.squared_norm());
      if (dist == 0) continue;
      for (int i = 0; i < n; ++i) {
        ModelState gd = objectives.local(i).full_gradient(x);
        gd.axpy(-1.0, objectives.local(i).full_gradient(y));
        L = std::max(L, std::sqrt(gd.squared_norm()) / dist);
      }
    }
  }
  out.L = L;
  out.L_exact = all_exact;

  // sigma^2: max over sampled points and PEs of the empirical variance of
  // the mini-batch gradient around the full gradient.
  // varsigma^2: max over points of the cross-PE gradient variance.
  constexpr int kMinibatchDraws = 32;
  double sigma_sq = 0, varsigma_sq = 0;
  for (int s = 0; s < samples; ++s) {
    const ModelState x = random_point();
    std::vector<ModelState> local_grads;
    local_grads.reserve(n);
    for (int i = 0; i < n; ++i)
      local_grads.push_back(objectives.local(i).full_gradient(x));

    for (int i = 0; i < n; ++i) {
      const bool full_batch =
          objectives.local(i).batch_size() >= objectives.local(i).shard().size();
      if (full_batch) continue;  // no sampling noise
      double acc = 0;
      for (int m = 0; m < kMinibatchDraws; ++m) {
        ModelState g = objectives.local(i).stochastic_gradient(x, rng);
        g.axpy(-1.0, local_grads[i]);
        acc += g.squared_norm();
      }
      sigma_sq = std::max(sigma_sq, acc / kMinibatchDraws);
    }

    ModelState mean = local_grads[0];
    for (int i = 1; i < n; ++i) mean.axpy(1.0, local_grads[i]);
    mean.scale(1.0 / n);
    double acc = 0;
    for (int i = 0; i < n; ++i) {
      ModelState d = local_grads[i];
      d.axpy(-1.0, mean);
      acc += d.squared_norm();
    }
    varsigma_sq = std::max(varsigma_sq, acc / n);
  }
  out.sigma = std::sqrt(sigma_sq);
  out.varsigma = std::sqrt(varsigma_sq);

  out.f0 = objectives.global_loss(objectives.zero_model());
  if (auto fstar = objectives.exact_optimum()) {
    out.fstar = *fstar;
    out.fstar_exact = true;
  } else {
    out.fstar = 0.0;  // cross-entropy is bounded below by 0
  }
  return out;
}

}  // namespace eventgrad
