#include "nbrgds/distributions.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace nbrgds {

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x))
    throw ParameterError(std::string(what) + " must be finite, got " +
                         std::to_string(x));
}

// Marsaglia & Tsang (2000); valid for shape >= 1.
double gamma_unit_mt(double shape, RngStream& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_positive();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

// Hormann's PTRS transformed rejection, mean >= 10.
Count poisson_ptrs(double mu, RngStream& rng) {
  const double smu = std::sqrt(mu);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mu = std::log(mu);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform_positive();
    const double us = 0.5 - std::fabs(u);
    const double kd = std::floor((2.0 * a / us + b) * u + mu + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<Count>(kd);
    if (kd < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mu + kd * log_mu - std::lgamma(kd + 1.0))
      return static_cast<Count>(kd);
  }
}

}  // namespace

NbParams NbParams::from_psi(double shape, double psi) {
  if (!(psi > 0.0) || !std::isfinite(psi))
    throw ParameterError("negative binomial psi must be positive and finite");
  return NbParams{shape, psi / (1.0 + psi)};
}

void NbParams::validate() const {
  require_finite(shape, "negative binomial shape");
  if (shape < 0.0) throw ParameterError("negative binomial shape must be >= 0");
  if (!(gamma_fraction > 0.0 && gamma_fraction < 1.0))
    throw ParameterError("negative binomial gamma_fraction must lie in (0,1)");
}

double NbParams::log_pmf(Count h) const {
  validate();
  if (h < 0) return -std::numeric_limits<double>::infinity();
  if (shape == 0.0) return h == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double hd = static_cast<double>(h);
  return std::lgamma(shape + hd) - std::lgamma(hd + 1.0) - std::lgamma(shape) +
         shape * std::log(gamma_fraction) + hd * std::log1p(-gamma_fraction);
}

double sample_log_gamma_unit(double shape, RngStream& rng) {
  if (!(shape > 0.0)) throw ParameterError("log-gamma draw needs shape > 0");
  if (shape >= 1.0) return std::log(gamma_unit_mt(shape, rng));
  // Gamma(a) = Gamma(a + 1) * U^(1/a)
  return std::log(gamma_unit_mt(shape + 1.0, rng)) +
         std::log(rng.uniform_positive()) / shape;
}

double sample_gamma(double shape, double rate, RngStream& rng) {
  require_finite(shape, "gamma shape");
  require_finite(rate, "gamma rate");
  if (shape < 0.0) throw ParameterError("gamma shape must be >= 0, got " + std::to_string(shape));
  if (!(rate > 0.0)) throw ParameterError("gamma rate must be > 0");
  if (shape == 0.0) return 0.0;
  if (shape >= 1.0) return gamma_unit_mt(shape, rng) / rate;
  return std::exp(sample_log_gamma_unit(shape, rng)) / rate;
}

double sample_beta(double a, double b, RngStream& rng) {
  require_finite(a, "beta a");
  require_finite(b, "beta b");
  if (a < 0.0 || b < 0.0 || (a == 0.0 && b == 0.0))
    throw ParameterError("beta parameters must be >= 0 and not both zero");
  if (a == 0.0) return 0.0;
  if (b == 0.0) return 1.0;
  const double la = sample_log_gamma_unit(a, rng);
  const double lb = sample_log_gamma_unit(b, rng);
  return 1.0 / (1.0 + std::exp(lb - la));
}

void sample_dirichlet(std::span<const double> concentration, RngStream& rng,
                      std::span<double> out) {
  if (out.size() != concentration.size())
    throw ParameterError("dirichlet output size mismatch");
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < concentration.size(); ++i) {
    const double a = concentration[i];
    require_finite(a, "dirichlet concentration");
    if (a < 0.0) throw ParameterError("dirichlet concentration must be >= 0");
    if (a == 0.0) {
      out[i] = -std::numeric_limits<double>::infinity();
      continue;
    }
    out[i] = sample_log_gamma_unit(a, rng);
    max_log = std::max(max_log, out[i]);
  }
  if (!std::isfinite(max_log))
    throw StructuralError("dirichlet column has no positive concentration");
  double total = 0.0;
  for (double& x : out) {
    x = std::exp(x - max_log);
    total += x;
  }
  for (double& x : out) x /= total;
}

Count sample_poisson(double mean, RngStream& rng) {
  require_finite(mean, "poisson mean");
  if (mean < 0.0) throw ParameterError("poisson mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean > 1e18) throw NumericalError("poisson mean " + std::to_string(mean) +
                                        " exceeds the count range");
  if (mean >= 10.0) return poisson_ptrs(mean, rng);
  double p = std::exp(-mean);
  double cdf = p;
  const double u = rng.uniform();
  Count k = 0;
  while (u > cdf && k < 1000) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

Count sample_binomial(Count n, double p, RngStream& rng) {
  if (n < 0) throw ParameterError("binomial trials must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("binomial p outside [0,1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  return std::binomial_distribution<Count>(n, p)(rng);
}

Count sample_negative_binomial(const NbParams& params, RngStream& rng) {
  params.validate();
  if (params.shape == 0.0) return 0;
  return sample_poisson(sample_gamma(params.shape, params.psi(), rng), rng);
}

Count sample_crt(Count customers, double concentration, RngStream& rng) {
  if (customers < 0) throw ParameterError("CRT customer count must be >= 0");
  if (customers == 0) return 0;
  if (std::isnan(concentration) || !(concentration > 0.0))
    throw ParameterError("CRT concentration must be > 0 when customers > 0");
  if (std::isinf(concentration)) return customers;

  constexpr Count kExactLimit = 10000;
  if (customers <= kExactLimit) {
    Count tables = 0;
    for (Count i = 0; i < customers; ++i) {
      if (rng.uniform() * (concentration + static_cast<double>(i)) < concentration)
        ++tables;
    }
    return tables;
  }
  double mean = 0.0;
  double var = 0.0;
  for (Count i = 0; i < customers; ++i) {
    const double p = concentration / (concentration + static_cast<double>(i));
    mean += p;
    var += p * (1.0 - p);
  }
  const double draw = std::floor(mean + std::sqrt(var) * rng.normal() + 0.5);
  return std::clamp(static_cast<Count>(draw), Count{1}, customers);
}

Count sample_bessel(double order, double arg, RngStream& rng) {
  require_finite(order, "bessel order");
  require_finite(arg, "bessel argument");
  if (order < -1.0) throw ParameterError("bessel order must be >= -1");
  if (arg < 0.0) throw ParameterError("bessel argument must be >= 0");
  const bool shifted = order == -1.0;
  if (arg == 0.0) {
    if (shifted) throw ParameterError("bessel order -1 needs a positive argument");
    return 0;
  }
  const double x = 0.25 * arg * arg;
  const Count lo = shifted ? 1 : 0;
  const double root = 0.5 * (std::sqrt(order * order + 4.0 * x) - (order + 2.0));
  const Count guess = root > 0.0 ? static_cast<Count>(root) : 0;
  auto ratio_up = [x, order](Count h) {
    const double hd = static_cast<double>(h);
    return x / ((hd + 1.0) * (hd + order + 1.0));
  };
  return detail::sample_unimodal(lo, guess, ratio_up, rng);
}

Count sample_truncated_poisson(double rate, RngStream& rng) {
  require_finite(rate, "truncated poisson rate");
  if (!(rate > 0.0)) throw ParameterError("truncated poisson rate must be > 0");
  if (rate >= 1.0) {
    for (;;) {
      const Count k = sample_poisson(rate, rng);
      if (k >= 1) return k;
    }
  }
  double p = rate / std::expm1(rate);
  double cdf = p;
  const double u = rng.uniform();
  Count k = 1;
  while (u > cdf && k < 1000) {
    ++k;
    p *= rate / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

void sample_multinomial_thinning(Count total, std::span<const double> weights,
                                 RngStream& rng, std::span<Count> out) {
  if (out.size() != weights.size())
    throw ParameterError("multinomial output size mismatch");
  if (total < 0) throw ParameterError("multinomial total must be >= 0");
  std::fill(out.begin(), out.end(), Count{0});
  if (total == 0) return;

  const std::size_t n = weights.size();
  double sum = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ParameterError("multinomial weights must be finite and >= 0");
    sum += w;
  }
  if (!(sum > 0.0))
    throw ParameterError("allocation error: all multinomial weights are zero");

  // Per-token categorical draws when cheap, conditional binomials otherwise.
  if (static_cast<std::size_t>(total) <= 2 * n) {
    for (Count i = 0; i < total; ++i) {
      double u = rng.uniform() * sum;
      std::size_t j = 0;
      for (; j + 1 < n; ++j) {
        u -= weights[j];
        if (u < 0.0 && weights[j] > 0.0) break;
      }
      while (weights[j] == 0.0) --j;  // rounding landed past the last positive
      ++out[j];
    }
    return;
  }

  thread_local std::vector<double> suffix;
  suffix.assign(n + 1, 0.0);
  for (std::size_t j = n; j-- > 0;) suffix[j] = suffix[j + 1] + weights[j];
  Count remaining = total;
  for (std::size_t j = 0; j < n && remaining > 0; ++j) {
    if (weights[j] == 0.0) continue;
    const double p = std::min(1.0, weights[j] / suffix[j]);
    const Count x = (suffix[j + 1] == 0.0) ? remaining : sample_binomial(remaining, p, rng);
    out[j] = x;
    remaining -= x;
  }
}

std::vector<Count> sample_multinomial_thinning(Count total,
                                               std::span<const double> weights,
                                               RngStream& rng) {
  std::vector<Count> out(weights.size());
  sample_multinomial_thinning(total, weights, rng, out);
  return out;
}

double gamma_log_density(double x, double shape, double rate) {
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  if (shape == 0.0) return x == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (x == 0.0) {
    if (shape < 1.0) return std::numeric_limits<double>::infinity();
    if (shape > 1.0) return -std::numeric_limits<double>::infinity();
    return std::log(rate);
  }
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) -
         rate * x;
}

double poisson_log_pmf(Count n, double rate) {
  if (n < 0) return -std::numeric_limits<double>::infinity();
  if (rate == 0.0) return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  return nd * std::log(rate) - rate - std::lgamma(nd + 1.0);
}

double rg1_log_density(double x, double a, double b, double c) {
  require_finite(x, "rg1 x");
  require_finite(a, "rg1 a");
  require_finite(b, "rg1 b");
  require_finite(c, "rg1 c");
  if (!(x > 0.0)) throw ParameterError("rg1 density needs x > 0");
  if (a < 0.0 || b < 0.0 || !(c > 0.0))
    throw ParameterError("rg1 needs a >= 0, b >= 0, c > 0");
  if (b == 0.0) return gamma_log_density(x, a, c);

  // sum_h exp(h log(bcx) - lgamma(h+1) - lgamma(a+h)), h >= h0
  const double y = b * c * x;
  const double log_y = std::log(y);
  const double prefix = -b - c * x + a * std::log(c) + (a - 1.0) * std::log(x);

  // large arguments: the series is y^((1-a)/2) I_{a-1}(2 sqrt(y)); use the
  // asymptotic expansion of I instead of walking ~sqrt(y) terms
  const double z = 2.0 * std::sqrt(y);
  const double nu = a - 1.0;
  if (z > 1000.0 && nu * nu < 0.01 * z) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 30; ++k) {
      const double odd = 2.0 * k - 1.0;
      term *= -(mu - odd * odd) / (k * 8.0 * z);
      sum += term;
      if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
    }
    return prefix + 0.5 * (1.0 - a) * log_y + z - 0.5 * std::log(2.0 * std::numbers::pi * z) +
           std::log(sum);
  }

  const Count h0 = a == 0.0 ? 1 : 0;
  auto log_term = [&](Count h) {
    const double hd = static_cast<double>(h);
    return hd * log_y - std::lgamma(hd + 1.0) - std::lgamma(a + hd);
  };
  auto ratio_up = [&](Count h) {
    const double hd = static_cast<double>(h);
    return y / ((hd + 1.0) * (a + hd));
  };
  const double root = 0.5 * (std::sqrt((a - 1.0) * (a - 1.0) + 4.0 * y) - (a + 1.0));
  Count mode = std::max<Count>(h0, root > 0.0 ? static_cast<Count>(root) : 0);
  while (ratio_up(mode) > 1.0) ++mode;
  while (mode > h0 && ratio_up(mode - 1) < 1.0) --mode;

  constexpr double kRelTol = 1e-15;
  double sum = 1.0;
  double w = 1.0;
  for (Count h = mode;; ++h) {
    w *= ratio_up(h);
    sum += w;
    if (w < kRelTol * sum) break;
  }
  w = 1.0;
  for (Count h = mode; h > h0; --h) {
    w /= ratio_up(h - 1);
    sum += w;
    if (w < kRelTol * sum) break;
  }
  return prefix + log_term(mode) + std::log(sum);
}

}  // namespace nbrgds
