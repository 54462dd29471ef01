#include <doctest.h>

#include <cmath>

#include "pm/analysis.hpp"
#include "pm/error.hpp"
#include "pm/simulate.hpp"

using namespace pm;

TEST_CASE("weight catalog") {
  auto c = constant_weight();
  auto w = symmetric_power_weight(0.3);
  for (int i = 1; i < 10000; ++i) {
    double s = i / 10000.0;
    CHECK(c.rho(s) == 1.0);
    CHECK(w.rho(s) >= 1.0);
  }
  CHECK(w.rho(0.25) == doctest::Approx(w.rho(0.75)));
}

TEST_CASE("lipschitz operators") {
  auto dbl = [](double x) { return 2.0 * x; };
  CHECK(lipschitz_global(dbl, 0.1, 0.7) == doctest::Approx(2.0));
  CHECK(lipschitz_local(dbl, 0.4) == doctest::Approx(2.0));
  CHECK_THROWS_AS(lipschitz_global(dbl, 0.3, 0.3), Error);

  // BSC inverse-kernel branch slope 1/(2(1-p)) below the posterior break
  auto bsc = make_bsc_pair(0.2);
  auto om = [&](double s) { return omega_normalized(*bsc, s, 0.3); };
  CHECK(lipschitz_global(om, 0.1, 0.5) == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(lipschitz_local(om, 0.3) == doctest::Approx(0.625).epsilon(1e-9));

  // AWGN x-space inverse kernel is linear with slope 1/sqrt(1+snr)
  auto awgn = make_awgn_pair(3.0, 1.0);
  auto omx = [&](double x) { return omega_original(*awgn, x, 0.7); };
  CHECK(lipschitz_global(omx, -0.3, 1.1) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("r_dagger") {
  auto c = constant_weight();

  // BSC constant weight: sup_s E D_s = (1/(2p) + 1/(2(1-p)))/2 = 1.5625
  auto bsc = r_dagger(*make_bsc_pair(0.2), c);
  CHECK(bsc.finite);
  CHECK(bsc.value_bits == doctest::Approx(-std::log2(1.5625)).epsilon(1e-9));

  // AWGN in normalized space: the sup diverges toward the boundary
  auto div = r_dagger(*make_awgn_pair(3.0, 1.0), c, 128, 256);
  CHECK_FALSE(div.finite);

  // original-space chain: linear kernel, constant slope
  auto aw = r_dagger(*make_awgn_pair(3.0, 1.0), c, 128, 256, KernelSpace::original);
  CHECK(aw.finite);
  CHECK(aw.value_bits == doctest::Approx(1.0).epsilon(1e-6));

  // uniform pair: E D = E f_Y(Y) = 2/3
  auto un = r_dagger(*make_uniform_pair(), c, 256, 1024, KernelSpace::original);
  CHECK(un.finite);
  CHECK(un.value_bits == doctest::Approx(-std::log2(2.0 / 3.0)).epsilon(1e-3));
}

TEST_CASE("shaping validation") {
  auto uni = make_uniform_pair();
  auto ex = make_exponential_pair();
  CHECK_NOTHROW(validate_shaping(identity_shaping(*uni), *uni));
  CHECK_NOTHROW(validate_shaping(sqrt_inv_shaping(), *ex));

  // cos on (0,1) is monotone but the shaped density blows up at the edge
  ShapingFunction bad;
  bad.rho = [](double s) { return std::cos(s); };
  bad.inv = [](double t) { return std::acos(t); };
  bad.deriv = [](double s) { return -std::sin(s); };
  bad.lo = 0.0;
  bad.hi = 1.0;
  bad.label = "cos";
  CHECK_THROWS_AS(validate_shaping(bad, *uni), Error);
}

TEST_CASE("r_star on the zoo") {
  auto uni = make_uniform_pair();
  auto ex = make_exponential_pair();

  auto ru = r_star(*uni, identity_shaping(*uni));
  CHECK(ru.monotone_ok);
  CHECK(ru.value_bits == doctest::Approx(0.72134752).epsilon(0.015));

  auto re = r_star(*ex, identity_shaping(*ex));
  CHECK(re.value_bits == doctest::Approx(-0.60996).epsilon(0.04));
  CHECK(re.value_bits < 0.0);

  auto r2 = r_star(*ex, sqrt_inv_shaping());
  CHECK(r2.value_bits == doctest::Approx(0.30498).epsilon(0.04));
  CHECK(r2.monotone_ok);

  CHECK_THROWS_AS(r_star(*make_bsc_pair(0.2), identity_shaping(*uni)), Error);
}

TEST_CASE("r_star_separable closed forms") {
  auto awgn = make_awgn_pair(3.0, 1.0);
  auto id_a = identity_shaping(*awgn);
  auto sa = r_star_separable(*awgn, id_a, [](double s) { return s; },
                             [](double) { return 0.5; });
  CHECK(sa.value_bits == doctest::Approx(1.0).epsilon(1e-6));

  auto uni = make_uniform_pair();
  auto su = r_star_separable(*uni, identity_shaping(*uni), [](double s) { return s; },
                             [](double y) { return y <= 1.0 ? y : 2.0 - y; });
  CHECK(su.value_bits == doctest::Approx(0.72134752).epsilon(1e-3));

  auto ex = make_exponential_pair();
  auto se = r_star_separable(
      *ex, sqrt_inv_shaping(),
      [](double s) { return 1.0 / std::sqrt(1.0 - std::exp(-1.0 / (s * s))); },
      [](double y) { return 1.0 / std::sqrt(y); });
  CHECK(se.value_bits == doctest::Approx(0.30498).epsilon(0.04));

  // wrong factorization must be rejected
  CHECK_THROWS_AS(r_star_separable(*uni, identity_shaping(*uni), [](double s) { return s; },
                                   [](double) { return 1.0; }),
                  Error);
}

TEST_CASE("r_star agrees with the separable closed form") {
  auto awgn = make_awgn_pair(3.0, 1.0);
  auto id_a = identity_shaping(*awgn);
  auto grid = r_star(*awgn, id_a);
  auto closed = r_star_separable(*awgn, id_a, [](double s) { return s; },
                                 [](double) { return 0.5; });
  CHECK(std::abs(grid.value_bits - closed.value_bits) < 0.01);
}

TEST_CASE("tail_function") {
  auto u = uniform_dist(0.0, 1.0);
  CHECK(tail_function(*u, 0.0) == 1.0);
  CHECK(tail_function(*u, 0.25) == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(tail_function(*u, 1.5) == 0.0);
  CHECK_THROWS_AS(tail_function(*u, -0.1), Error);

  // Gaussian: window centers at the mode, T = 2(1 - F(ell/2))
  auto g = gaussian_dist(0.0, 3.0);
  for (double ell : {0.5, 2.0, 5.0}) {
    double ref = 2.0 * (1.0 - g->cdf(ell / 2.0));
    CHECK(tail_function(*g, ell) == doctest::Approx(ref).epsilon(1e-6));
  }

  // nonincreasing in ell
  double prev = 1.0;
  for (double ell = 0.1; ell < 6.0; ell += 0.3) {
    double t = tail_function(*g, ell);
    CHECK(t <= prev + 1e-12);
    prev = t;
  }

  // shaped exponential: T(ell) <= ell^-2
  auto shaped = shape_distribution(exponential_dist(1.0), sqrt_inv_shaping());
  for (double ell : {2.0, 4.0, 8.0}) CHECK(tail_function(*shaped, ell) <= 1.0 / (ell * ell) + 1e-9);
}

TEST_CASE("target_error_schedule") {
  auto awgn = make_awgn_pair(3.0, 1.0);
  auto rep = r_star_separable(*awgn, identity_shaping(*awgn), [](double s) { return s; },
                              [](double) { return 0.5; });
  auto g = gaussian_dist(0.0, 3.0);
  CHECK_THROWS_AS(target_error_schedule(1.5, rep, *g, 10, 0.1), Error);
  CHECK_THROWS_AS(target_error_schedule(0.5, rep, *g, 10, 1.0), Error);

  // double-exponential trend: doubling n more than doubles -log2 delta_n
  double b6 = -std::log2(target_error_schedule(0.5, rep, *g, 6, 0.1));
  double b8 = -std::log2(target_error_schedule(0.5, rep, *g, 8, 0.1));
  double b10 = -std::log2(target_error_schedule(0.5, rep, *g, 10, 0.1));
  CHECK(b8 > 2.0 * b6 * 0.9);
  CHECK(b10 > 2.0 * b8 * 0.9);
  CHECK(b10 > b8);
  CHECK(b8 > b6);

  // exponential pair with the square-root shaping, zero margin:
  // -(1/n) log2 delta_n -> 2 (R* - R)
  auto ex = make_exponential_pair();
  auto rep2 = r_star_separable(
      *ex, sqrt_inv_shaping(),
      [](double s) { return 1.0 / std::sqrt(1.0 - std::exp(-1.0 / (s * s))); },
      [](double y) { return 1.0 / std::sqrt(y); });
  auto shaped = shape_distribution(exponential_dist(1.0), sqrt_inv_shaping());
  int n = 200;
  double delta = target_error_schedule(0.2, rep2, *shaped, n, 0.0);
  CHECK(-std::log2(delta) / n == doctest::Approx(2.0 * (rep2.value_bits - 0.2)).epsilon(0.05));
}

TEST_CASE("schedule-driven decoding on the zero-error pair") {
  auto uni = make_uniform_pair();
  auto rep = r_star_separable(*uni, identity_shaping(*uni), [](double s) { return s; },
                              [](double y) { return y <= 1.0 ? y : 2.0 - y; });
  double rate = 0.5 * rep.value_bits;
  double delta = target_error_schedule(rate, rep, *uni->input, 40, 0.1);
  CHECK(delta == 0.0);  // bounded support: the schedule hits exact zero error
  int below = 0;
  const int trials = 40;
  for (int i = 0; i < trials; ++i) {
    auto t = run_session(uni, std::nullopt, std::nullopt, 40, 8000 + i, 0);
    auto d = decode_variable_rate(t, delta);
    CHECK(d.contains_message);
    if (d.rate < rate) ++below;
  }
  CHECK(below <= 2);
}

TEST_CASE("psi diagnostic") {
  auto bsc = make_bsc_pair(0.2);
  auto c = constant_weight();
  CHECK(psi_diagnostic(*bsc, c, 0.1, 0.9, 0.5) == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(std::isinf(psi_diagnostic(*bsc, c, 0.1, 0.9, 1.0)));
}

TEST_CASE("threshold report serialization") {
  auto uni = make_uniform_pair();
  auto rep = r_star(*uni, identity_shaping(*uni), {1.0, 0.5, 0.25}, 64, 128);
  std::string text = rep.serialize();
  CHECK(text.find("kind r_star") != std::string::npos);
  CHECK(text.find("value_bits") != std::string::npos);
  CHECK(text.find("q_schedule 1 0.5 0.25") != std::string::npos);
}
