#pragma once

// Frozen one-dimensional posteriors. Each case pairs the library's analytic
// update with the posterior moments of the unnormalized joint density built
// from raw pmfs and densities, integrated numerically.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "nbrgds/conditionals.hpp"
#include "oracles.hpp"

namespace conjugacy {

struct Case {
  std::string name;
  double analytic_mean = 0.0;
  double analytic_variance = 0.0;
  oracle::Moments numeric;
};

inline Case gamma_case(const std::string& name, const nbrgds::GammaParams& p,
                       const std::function<double(double)>& log_f) {
  return {name, p.mean(), p.variance(), oracle::positive_moments(log_f, p.mean())};
}

inline Case beta_case(const std::string& name, std::array<double, 2> prior,
                      std::array<nbrgds::Count, 2> counts) {
  std::array<double, 2> post{};
  nbrgds::dirichlet_conditional(prior, counts, post);
  const double a = post[0], b = post[1];
  auto log_f = [=](double x) {
    return oracle::beta_log_pdf(x, prior[0], prior[1]) + counts[0] * std::log(x) +
           counts[1] * std::log1p(-x);
  };
  return {name, a / (a + b), a * b / ((a + b) * (a + b) * (a + b + 1.0)),
          oracle::unit_moments(log_f, a / (a + b))};
}

inline std::vector<Case> all_cases() {
  using namespace oracle;
  std::vector<Case> cases;

  {  // theta: chain prior, tokens, and a next-step NB count with its tables
    const double eps = 1.0, tau = 1.3, psi = 1.5, a = 0.7;
    const int h = 2, n = 3, h_next = 4, l = 2;
    const auto p = nbrgds::theta_conditional(eps, h, n, l, tau, a, tau * std::log1p(1.0 / psi));
    cases.push_back(gamma_case("theta", p, [=](double x) {
      return gamma_log_pdf(x, eps + h, tau) + poisson_log_pmf(n, a * x) +
             nb_log_pmf(h_next, tau * x, psi) + crt_log_pmf(l, h_next, tau * x);
    }));
  }
  {  // lambda
    const double eps_l = 1.0, beta = 0.8, expo = 2.1, tau = 1.1, psi = 0.7;
    const int K = 2, g = 1, n = 4, h_next = 5, l = 3;
    const auto p = nbrgds::lambda_conditional(eps_l, K, g, n, l, beta, expo,
                                              tau * std::log1p(1.0 / psi));
    cases.push_back(gamma_case("lambda", p, [=](double x) {
      return gamma_log_pdf(x, eps_l / K + g, beta) + poisson_log_pmf(n, expo * x) +
             nb_log_pmf(h_next, tau * x, psi) + crt_log_pmf(l, h_next, tau * x);
    }));
  }
  {  // gamma
    const double eps0 = 0.1;
    const std::array<int, 3> g{0, 2, 1};
    const auto p = nbrgds::gamma_conditional(eps0, 3);
    cases.push_back(gamma_case("gamma", p, [=](double x) {
      double s = gamma_log_pdf(x, eps0, eps0);
      for (int gk : g) s += poisson_log_pmf(gk, x / 3.0);
      return s;
    }));
  }
  {  // beta
    const double eps0 = 0.1, eps_l = 1.0;
    const std::array<int, 2> g{0, 1};
    const std::array<double, 2> lam{1.2, 0.4};
    const auto p = nbrgds::beta_conditional(eps0, 0.5 + 1.5, 1.6);
    cases.push_back(gamma_case("beta", p, [=](double x) {
      double s = gamma_log_pdf(x, eps0, eps0);
      for (int k = 0; k < 2; ++k) s += gamma_log_pdf(lam[k], eps_l / 2.0 + g[k], x);
      return s;
    }));
  }
  {  // delta
    const auto p = nbrgds::delta_conditional(1.0, 10, 4.0);
    cases.push_back(gamma_case("delta", p, [](double x) {
      return gamma_log_pdf(x, 1.0, 1.0) + poisson_log_pmf(4, 1.5 * x) + poisson_log_pmf(6, 2.5 * x);
    }));
  }
  cases.push_back(beta_case("phi_column", {0.5, 0.5}, {3, 1}));
  cases.push_back(beta_case("pi_column", {0.7, 1.6}, {2, 5}));
  {  // d: Dirichlet-multinomial column with a beta auxiliary and CRT tables
    const double eps0 = 1.0, other = 0.8, q = 0.4;
    const int L_d = 3, L_other = 2, N = 5, t = 2;
    const auto p = nbrgds::d_conditional(eps0, t, -std::log(q));
    cases.push_back(gamma_case("d", p, [=](double x) {
      const double alpha = x + other;
      const double dirmult = std::lgamma(alpha) - std::lgamma(alpha + N) + std::lgamma(x + L_d) -
                             std::lgamma(x) + std::lgamma(other + L_other) - std::lgamma(other);
      return gamma_log_pdf(x, eps0, eps0) + dirmult + beta_log_pdf(q, alpha, N) +
             crt_log_pmf(t, L_d, x);
    }));
  }
  return cases;
}

}  // namespace conjugacy
