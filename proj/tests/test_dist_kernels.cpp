#include <doctest.h>

#include <cmath>
#include <numeric>
#include <thread>
#include <vector>

#include "nbrgds/distributions.hpp"
#include "nbrgds/parallel.hpp"
#include "nbrgds/rng.hpp"
#include "oracles.hpp"

using namespace nbrgds;

namespace {

template <class F>
std::vector<double> draws(int n, F&& f) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (auto& x : xs) x = static_cast<double>(f());
  return xs;
}

}  // namespace

TEST_SUITE("dist_kernels") {

TEST_CASE("rng streams are reproducible and split deterministically") {
  RngStream a(42, 3), b(42, 3), c(42, 4);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  RngStream a2(42, 3);
  CHECK(a2() != c());
  CHECK(RngStream(7).split("phi")() == RngStream(7).split("phi")());
  CHECK(RngStream(7).split("phi")() != RngStream(7).split("psi")());
  CHECK(RngStream(7).split(1)() != RngStream(7).split(2)());
}

TEST_CASE("split streams are independent of thread count") {
  const RngStream root(99);
  auto run = [&](int workers) {
    std::vector<double> out(64);
    parallel_for(out.size(), workers, [&](std::size_t i) {
      RngStream r = root.split(i);
      out[i] = sample_gamma(2.0, 1.0, r);
    });
    return out;
  };
  CHECK(run(1) == run(4));
}

TEST_CASE("gamma sampler") {
  RngStream rng(1);
  CHECK(sample_gamma(0.0, 1.0, rng) == 0.0);
  const auto s = oracle::summarize(draws(1000000, [&] { return sample_gamma(5.0, 2.0, rng); }));
  CHECK(s.mean == doctest::Approx(2.5).epsilon(0.004));
  const auto h = oracle::summarize(draws(1000000, [&] { return sample_gamma(0.5, 1.0, rng); }));
  CHECK(std::fabs(h.variance - 0.5) < 0.01);
  CHECK_THROWS_AS(sample_gamma(-1.0, 1.0, rng), ParameterError);
  CHECK_THROWS_AS(sample_gamma(1.0, 0.0, rng), ParameterError);
  CHECK_THROWS_AS(sample_gamma(NAN, 1.0, rng), ParameterError);
}

TEST_CASE("negative binomial convention and moments") {
  RngStream rng(2);
  const auto p = NbParams::from_psi(5.0, 1.0);
  const auto s = oracle::summarize(draws(1000000, [&] { return sample_negative_binomial(p, rng); }));
  CHECK(std::fabs(s.mean - 5.0) < 0.05);
  CHECK(std::fabs(s.variance - 10.0) < 0.2);
  CHECK(sample_negative_binomial(NbParams::from_psi(0.0, 2.0), rng) == 0);
  const auto far = oracle::summarize(
      draws(10000, [&] { return sample_negative_binomial(NbParams::from_psi(3.0, 1e6), rng); }));
  CHECK(far.mean < 0.01);
}

TEST_CASE("negative binomial pmf matches the gamma-Poisson mixture") {
  for (double psi : {0.5, 1.0, 3.0}) {
    RngStream rng(static_cast<std::uint64_t>(psi * 100));
    const auto p = NbParams::from_psi(5.0, psi);
    const int n = 1000000;
    std::vector<double> hist(200, 0.0);
    for (int i = 0; i < n; ++i) {
      const Count h = sample_negative_binomial(p, rng);
      if (h < 200) hist[static_cast<std::size_t>(h)] += 1.0 / n;
    }
    double tv = 0.0, mass = 0.0;
    for (int h = 0; h < 200; ++h) {
      const double pmf = std::exp(oracle::nb_log_pmf(h, 5.0, psi));
      CHECK(p.log_pmf(h) == doctest::Approx(oracle::nb_log_pmf(h, 5.0, psi)).epsilon(1e-12));
      tv += std::fabs(pmf - hist[h]);
      mass += pmf;
    }
    tv = 0.5 * (tv + (1.0 - mass));
    CHECK(tv < 0.005);
  }
}

TEST_CASE("CRT sampler") {
  RngStream rng(3);
  CHECK(sample_crt(0, 7.0, rng) == 0);
  const auto s = oracle::summarize(draws(1000000, [&] { return sample_crt(3, 1.0, rng); }));
  double expected = 0.0;
  for (int l = 0; l <= 3; ++l) expected += l * std::exp(oracle::crt_log_pmf(l, 3, 1.0));
  CHECK(expected == doctest::Approx(1.0 + 0.5 + 1.0 / 3.0));
  CHECK(std::fabs(s.mean - expected) < 0.01);
  for (int i = 0; i < 100; ++i) CHECK(sample_crt(5, 1e9, rng) == 5);
  CHECK_THROWS_AS(sample_crt(3, 0.0, rng), ParameterError);
  for (int i = 0; i < 2000; ++i) {
    const Count L = static_cast<Count>(rng.uniform_index(30000));
    const double a = std::exp(8.0 * rng.uniform() - 4.0);
    const Count l = sample_crt(L, a, rng);
    CHECK((L > 0 ? 1 : 0) <= l);
    CHECK(l <= L);
  }
}

TEST_CASE("Bessel sampler") {
  RngStream rng(4);
  CHECK(sample_bessel(0.0, 0.0, rng) == 0);
  const auto pmf = oracle::bessel_pmf(0.0, 2.0, 60);
  double mean = 0.0;
  for (std::size_t h = 0; h < pmf.size(); ++h) mean += h * pmf[h];
  CHECK(mean == doctest::Approx(0.6977).epsilon(1e-4));
  const auto s = oracle::summarize(draws(1000000, [&] { return sample_bessel(0.0, 2.0, rng); }));
  CHECK(std::fabs(s.mean - mean) < 0.01);
  for (int i = 0; i < 10000; ++i) CHECK(sample_bessel(-1.0, 1.0, rng) >= 1);
  CHECK_THROWS_AS(sample_bessel(-1.5, 1.0, rng), ParameterError);
}

TEST_CASE("Bessel pmf matches series") {
  for (double order : {-1.0, 0.0, 2.0})
    for (double z : {0.5, 2.0, 10.0}) {
      const auto pmf = oracle::bessel_pmf(order, z, 200);
      CHECK(std::accumulate(pmf.begin(), pmf.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-10));
      RngStream rng(static_cast<std::uint64_t>(100 * z + order + 5));
      const int n = 200000;
      std::vector<double> hist(pmf.size(), 0.0);
      for (int i = 0; i < n; ++i) {
        const Count h = sample_bessel(order, z, rng);
        if (h < static_cast<Count>(hist.size())) hist[static_cast<std::size_t>(h)] += 1.0 / n;
      }
      double tv = 0.0;
      for (std::size_t h = 0; h < pmf.size(); ++h) tv += 0.5 * std::fabs(pmf[h] - hist[h]);
      CHECK(tv < 0.01);
    }
}

TEST_CASE("Poisson means beyond the count range are rejected") {
  RngStream rng(3);
  CHECK(sample_poisson(1e15, rng) > 0);
  CHECK_THROWS_AS(sample_poisson(1e30, rng), NumericalError);
  CHECK_THROWS_AS(sample_poisson(-1.0, rng), ParameterError);
}

TEST_CASE("truncated Poisson") {
  RngStream rng(5);
  const auto s = oracle::summarize(draws(1000000, [&] { return sample_truncated_poisson(1.0, rng); }));
  CHECK(std::fabs(s.mean - 1.0 / (1.0 - std::exp(-1.0))) < 0.01);
  int ones = 0;
  for (int i = 0; i < 10000; ++i) ones += sample_truncated_poisson(1e-6, rng) == 1;
  CHECK(ones == 10000);
  for (int i = 0; i < 10000; ++i) CHECK(sample_truncated_poisson(0.3, rng) >= 1);
  CHECK_THROWS_AS(sample_truncated_poisson(0.0, rng), ParameterError);
}

TEST_CASE("multinomial thinning") {
  RngStream rng(6);
  const std::vector<double> w10{1.0, 0.0};
  auto out = sample_multinomial_thinning(10, w10, rng);
  CHECK(out == std::vector<Count>{10, 0});
  const std::vector<double> w3{0.2, 0.5, 0.3};
  CHECK(sample_multinomial_thinning(0, w3, rng) == std::vector<Count>{0, 0, 0});
  const std::vector<double> w13{1.0, 3.0};
  out = sample_multinomial_thinning(1000000, w13, rng);
  CHECK(std::fabs(static_cast<double>(out[1]) - 750000.0) < 1500.0);
  for (int i = 0; i < 1000; ++i) {
    const Count total = static_cast<Count>(rng.uniform_index(500));
    std::vector<double> w(1 + rng.uniform_index(6));
    for (auto& x : w) x = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
    w[0] += 1e-3;
    const auto o = sample_multinomial_thinning(total, w, rng);
    CHECK(std::accumulate(o.begin(), o.end(), Count{0}) == total);
    for (std::size_t j = 0; j < w.size(); ++j)
      if (w[j] == 0.0) CHECK(o[j] == 0);
  }
  const std::vector<double> zeros{0.0, 0.0};
  CHECK_THROWS(sample_multinomial_thinning(3, zeros, rng));
}

TEST_CASE("RG1 density") {
  CHECK(rg1_log_density(1.7, 2.0, 0.0, 1.5) ==
        doctest::Approx(oracle::gamma_log_pdf(1.7, 2.0, 1.5)).epsilon(1e-12));
  // e^-2 sum_h 1 / (h!)^2
  double series = 0.0, term = 1.0;
  for (int h = 0; h < 40; ++h) {
    if (h > 0) term /= static_cast<double>(h) * h;
    series += term;
  }
  CHECK(rg1_log_density(1.0, 1.0, 1.0, 1.0) == doctest::Approx(-2.0 + std::log(series)).epsilon(1e-10));
  CHECK(rg1_log_density(1.0, 1.0, 1.0, 1.0) == doctest::Approx(-1.1760).epsilon(1e-4));
  boost::math::quadrature::exp_sinh<double> q;
  const double integral = q.integrate([](double x) { return std::exp(rg1_log_density(x, 2.0, 3.0, 1.0)); },
                                      0.0, std::numeric_limits<double>::infinity(), 1e-12);
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
  // series and large-argument branches agree where they meet (2 sqrt(bcx) = 1000)
  const double below = rg1_log_density(250000.0 * (1 - 1e-12), 2.0, 1.0, 1.0);
  const double above = rg1_log_density(250000.0 * (1 + 1e-12), 2.0, 1.0, 1.0);
  CHECK(above == doctest::Approx(below).epsilon(1e-11));
}

TEST_CASE("Dirichlet sampler keeps zero entries and the simplex") {
  RngStream rng(7);
  const std::vector<double> conc{0.0, 0.3, 2.0, 0.0};
  std::vector<double> out(4);
  for (int i = 0; i < 1000; ++i) {
    sample_dirichlet(conc, rng, out);
    CHECK(out[0] == 0.0);
    CHECK(out[3] == 0.0);
    CHECK(std::fabs(std::accumulate(out.begin(), out.end(), 0.0) - 1.0) < 1e-9);
  }
  const std::vector<double> none{0.0, 0.0};
  std::vector<double> out2(2);
  CHECK_THROWS_AS(sample_dirichlet(none, rng, out2), StructuralError);
}

}  // TEST_SUITE
