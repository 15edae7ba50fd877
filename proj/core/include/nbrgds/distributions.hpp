#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "nbrgds/errors.hpp"
#include "nbrgds/rng.hpp"
#include "nbrgds/types.hpp"

namespace nbrgds {

/// Negative-binomial law with shape `r` and gamma fraction `f = psi / (1 + psi)`:
///
///   p(h) = Gamma(r + h) / (h! Gamma(r)) * f^r * (1 - f)^h
///
/// so that E[h] = r / psi and Var[h] = r (1 + psi) / psi^2. This is the law
/// of h ~ Poisson(g), g ~ Gamma(r, rate = psi).
struct NbParams {
  double shape = 0.0;
  double gamma_fraction = 0.5;

  static NbParams from_psi(double shape, double psi);

  double psi() const { return gamma_fraction / (1.0 - gamma_fraction); }
  double mean() const { return shape / psi(); }
  double variance() const {
    const double p = psi();
    return shape * (1.0 + p) / (p * p);
  }
  double log_pmf(Count h) const;
  void validate() const;
};

// -- samplers --------------------------------------------------------------

/// Gamma(shape, rate) in shape-rate convention. shape == 0 returns exactly 0.
double sample_gamma(double shape, double rate, RngStream& rng);

/// log of a Gamma(shape, 1) draw; finite even when the draw underflows.
/// Requires shape > 0.
double sample_log_gamma_unit(double shape, RngStream& rng);

double sample_beta(double a, double b, RngStream& rng);

/// Dirichlet draw. Entries with zero concentration are exactly zero; at least
/// one concentration must be positive (StructuralError otherwise).
void sample_dirichlet(std::span<const double> concentration, RngStream& rng,
                      std::span<double> out);

Count sample_poisson(double mean, RngStream& rng);
Count sample_binomial(Count n, double p, RngStream& rng);
Count sample_negative_binomial(const NbParams& params, RngStream& rng);

/// Chinese restaurant table count: sum_{i=1..L} Bernoulli(a / (a + i - 1)).
/// Exact for L <= 10^4, normal approximation with continuity correction above.
Count sample_crt(Count customers, double concentration, RngStream& rng);

/// Bessel(order, arg): p(h) proportional to (z/2)^(2h+v) / (h! Gamma(h+v+1)).
Count sample_bessel(double order, double arg, RngStream& rng);

/// Poisson(rate) conditioned on the draw being >= 1.
Count sample_truncated_poisson(double rate, RngStream& rng);

/// Splits `total` over cells with probabilities proportional to `weights`.
void sample_multinomial_thinning(Count total, std::span<const double> weights,
                                 RngStream& rng, std::span<Count> out);
std::vector<Count> sample_multinomial_thinning(Count total,
                                               std::span<const double> weights,
                                               RngStream& rng);

// -- densities -------------------------------------------------------------

double gamma_log_density(double x, double shape, double rate);
double poisson_log_pmf(Count n, double rate);

/// Log density of RG1(a, b, c): the Poisson(b) mixture of Gamma(a + h, c).
double rg1_log_density(double x, double a, double b, double c);

// -- discrete unimodal sampling -------------------------------------------

namespace detail {

inline constexpr double kTailTolerance = 1e-12;

/// Inverse-CDF draw from a log-concave pmf on {lo, lo+1, ...} described by
/// its successive term ratio `ratio_up(n) = w(n+1) / w(n)` (nonincreasing in
/// n). The pmf is enumerated outward from its mode and truncated once the
/// remaining tail mass bound drops below kTailTolerance of the running total.
template <class RatioUp>
Count sample_unimodal(Count lo, Count mode_guess, RatioUp&& ratio_up,
                      RngStream& rng) {
  Count mode = mode_guess < lo ? lo : mode_guess;
  while (ratio_up(mode) > 1.0) ++mode;
  while (mode > lo && ratio_up(mode - 1) < 1.0) --mode;

  thread_local std::vector<double> left;
  thread_local std::vector<double> right;
  left.clear();
  right.clear();

  double total = 1.0;
  double w = 1.0;
  for (Count n = mode;; ++n) {
    const double r = ratio_up(n);
    w *= r;
    if (!(w > 0.0)) break;
    right.push_back(w);
    total += w;
    if (r < 1.0 && w * r / (1.0 - r) < 0.5 * kTailTolerance * total) break;
  }
  w = 1.0;
  for (Count n = mode; n > lo; --n) {
    const double r = ratio_up(n - 1);
    w /= r;
    if (!(w > 0.0) || !std::isfinite(w)) break;
    left.push_back(w);
    total += w;
    const double next = ratio_up(n - 2 < lo ? lo : n - 2);
    if (n - 1 > lo && next > 1.0 &&
        w / next / (1.0 - 1.0 / next) < 0.5 * kTailTolerance * total)
      break;
  }

  double u = rng.uniform() * total;
  for (std::size_t i = left.size(); i-- > 0;) {
    u -= left[i];
    if (u < 0.0) return mode - static_cast<Count>(i) - 1;
  }
  u -= 1.0;
  if (u < 0.0) return mode;
  for (std::size_t i = 0; i < right.size(); ++i) {
    u -= right[i];
    if (u < 0.0) return mode + static_cast<Count>(i) + 1;
  }
  return mode + static_cast<Count>(right.size());
}

}  // namespace detail

}  // namespace nbrgds
