#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "test_util.hpp"
#include "tcm/data.hpp"
#include "tcm/inequality.hpp"

using namespace tcm;
using namespace tcm::ineq;

namespace {

SpectralField mode(const Grid& g, std::array<int, 3> k, double amp = 1.0) {
  SpectralField f(g);
  f.set_mode(k, cplx(amp, 0.0));
  return f;
}

VectorField const_vector(const Grid& g, double c) {
  std::vector<SpectralField> comps;
  for (int i = 0; i < g.dim(); ++i) comps.push_back(mode(g, {0, 0, 0}, c));
  return VectorField(std::move(comps));
}

// Block norms constant in time on [0, T], nonzero only at block j0.
lp::NormSeries single_block_series(int blocks, int j0, double value, double T) {
  lp::NormSeries s;
  for (int i = 0; i <= 10; ++i) {
    std::vector<double> b(blocks, 0.0);
    b[j0 + 1] = value;
    s.push(T * i / 10.0, b);
  }
  return s;
}

OsgoodProblem linear_phi_problem(double c, double phi0, double phi1, Modulus mu, int samples = 41) {
  OsgoodProblem p;
  p.c = c;
  p.modulus = mu;
  for (int i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / (samples - 1);
    p.times.push_back(t);
    p.phi.push_back(phi0 + (phi1 - phi0) * t);
  }
  return p;
}

}  // namespace

TEST(TripleProduct, DisjointFrequenciesGiveZero) {
  Grid g(2, 32);
  lp::DyadicPartition part(g);
  // v . grad u lives at |k| <= 2, w far away
  VectorField u(std::vector<SpectralField>{mode(g, {0, 1, 0}), SpectralField(g)});
  VectorField v(std::vector<SpectralField>{mode(g, {1, 0, 0}), mode(g, {0, 1, 0})});
  VectorField w(std::vector<SpectralField>{mode(g, {9, 0, 0}), mode(g, {0, 9, 0})});
  for (int j = -1; j <= part.j_max(); ++j) {
    auto c = check_triple_product(TripleVariant::Transport, u, v, w, j, part);
    EXPECT_LT(c.lhs, 1e-14) << j;
  }
}

TEST(TripleProduct, PartsNonnegativeAndShapeConsistent) {
  Grid g(2, 16);
  lp::DyadicPartition part(g);
  std::mt19937_64 rng(3);
  VectorField u = model::leray_project(tcm::testing::random_vector(g, rng, 1.0));
  VectorField v = tcm::testing::random_vector(g, rng, 1.5);
  VectorField w = tcm::testing::random_vector(g, rng, 0.7);
  for (auto variant : {TripleVariant::Transport, TripleVariant::Commutator, TripleVariant::Product}) {
    for (int j = -1; j <= part.j_max(); ++j) {
      auto c = check_triple_product(variant, u, v, w, j, part);
      for (double p : c.rhs_parts) EXPECT_GE(p, 0.0);
      EXPECT_GE(c.lhs, 0.0);
      if (!c.skipped) EXPECT_TRUE(std::isfinite(c.ratio()));
    }
  }
}

TEST(TripleProduct, CommutatorTestNormIsV) {
  Grid g(2, 16);
  lp::DyadicPartition part(g);
  std::mt19937_64 rng(5);
  VectorField u = model::leray_project(tcm::testing::random_vector(g, rng, 1.0));
  VectorField v = tcm::testing::random_vector(g, rng, 1.0);
  const auto V = lp::block_norms(v, part);
  for (int j = 0; j <= part.j_max(); ++j) {
    auto c = check_triple_product(TripleVariant::Commutator, u, v, v, j, part);
    const double sum = c.rhs_parts[0] + c.rhs_parts[1] + c.rhs_parts[2];
    EXPECT_NEAR(c.rhs_shape, V[j + 1] * sum, 1e-14 * (1 + c.rhs_shape));
  }
}

TEST(TripleProduct, CommutatorRejectsDivergentField) {
  Grid g(2, 16);
  lp::DyadicPartition part(g);
  VectorField u(std::vector<SpectralField>{mode(g, {1, 0, 0}), SpectralField(g)});
  EXPECT_THROW(check_triple_product(TripleVariant::Commutator, u, u, u, 0, part),
               std::invalid_argument);
  EXPECT_THROW(check_triple_product(TripleVariant::Transport, u, u, u, 9, part), std::out_of_range);
}

TEST(TripleProduct, ConstantFactorBoundedByLowHighSum) {
  // v = (1, ..., 1): the product is w, so lhs <= U_j W_j and the low-high sum
  // is 2^{-d/2} sqrt(d) near(W).
  for (int d : {2, 3}) {
    Grid g(d, 16);
    lp::DyadicPartition part(g);
    std::mt19937_64 rng(11 + d);
    VectorField u = tcm::testing::random_vector(g, rng, 1.0);
    VectorField w = tcm::testing::random_vector(g, rng, 1.2);
    VectorField v = const_vector(g, 1.0);
    const auto U = lp::block_norms(u, part);
    const double factor = std::exp2(d / 2.0) / std::sqrt(static_cast<double>(d));
    for (int j = 0; j <= part.j_max(); ++j) {
      auto c = check_triple_product(TripleVariant::Product, u, v, w, j, part);
      EXPECT_LE(c.lhs, factor * U[j + 1] * c.rhs_parts[0] * (1 + 1e-12)) << "d=" << d << " j=" << j;
    }
  }
}

TEST(LogInterpolation, SingleBlockClosedForm) {
  for (int d : {2, 3}) {
    for (int j0 : {0, 2, 4}) {
      auto s = single_block_series(7, j0, 0.3, 0.5);
      auto c = check_log_interpolation(s, d);
      ASSERT_FALSE(c.skipped);
      EXPECT_NEAR(c.ratio(), 1.0 / std::log(std::numbers::e + std::exp2(j0)), 1e-12);
    }
  }
}

TEST(LogInterpolation, ZeroSeriesSkipped) {
  auto s = single_block_series(5, 1, 0.0, 1.0);
  auto c = check_log_interpolation(s, 2);
  EXPECT_TRUE(c.skipped);
  EXPECT_THROW(c.ratio(), std::logic_error);
  EXPECT_THROW(check_log_interpolation(lp::NormSeries{}, 2), std::invalid_argument);
}

TEST(LogInterpolation, RatioFiniteOnRandomSeries) {
  // random decaying block profiles
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    lp::NormSeries s;
    for (int i = 0; i <= 8; ++i) {
      std::vector<double> b(6);
      for (int k = 0; k < 6; ++k) b[k] = U(rng) * std::exp2(-2.0 * k);
      s.push(0.1 * i, b);
    }
    auto c = check_log_interpolation(s, 2);
    EXPECT_TRUE(std::isfinite(c.ratio()));
    EXPECT_GT(c.ratio(), 0.0);
  }
}

TEST(Osgood, ModulusIntegrals) {
  EXPECT_NEAR(modulus_integral(Modulus::linear(), 0.1, 0.4), std::log(4.0), 1e-14);
  // int dr / (r log(e + C/r)) with C = 0 reduces to log(y/x)
  EXPECT_NEAR(modulus_integral(Modulus::log(0.0), 0.1, 0.4), std::log(4.0), 1e-12);
  // substitution w = log(e + 1/r) is not elementary; compare with a fine midpoint rule
  const Modulus mu = Modulus::log(2.0);
  const double x = 1e-3, y = 0.5;
  const int N = 200000;
  double acc = 0.0;
  const double h = (std::log(y) - std::log(x)) / N;
  for (int i = 0; i < N; ++i) {
    const double r = std::exp(std::log(x) + (i + 0.5) * h);
    acc += h * r / mu(r);
  }
  EXPECT_NEAR(modulus_integral(mu, x, y), acc, 1e-9);
  EXPECT_NEAR(psi(mu, x, 0.5), acc, 1e-9);
  EXPECT_NEAR(psi(mu, 0.5, 0.5), 0.0, 1e-15);
  EXPECT_LT(psi(mu, 0.7, 0.5), 0.0);
  EXPECT_THROW(modulus_integral(mu, 0.0, 1.0), std::invalid_argument);
}

TEST(Osgood, LinearModulusIsGronwall) {
  for (double c : {1e-6, 1e-3, 0.1}) {
    auto p = linear_phi_problem(c, 2.0, 0.5, Modulus::linear());
    OsgoodBound b(p);
    for (double t : {0.0, 0.1, 0.37, 0.5, 1.0}) {
      // Phi(t) = 2 t - 0.75 t^2
      const double expect = c * std::exp(2.0 * t - 0.75 * t * t);
      EXPECT_NEAR(b(t) / expect, 1.0, 1e-8) << "c=" << c << " t=" << t;
    }
  }
}

TEST(Osgood, LogModulusMatchesOdeSolution) {
  // The bound with equality solves y' = phi(t) mu(y), y(0) = c.
  for (double C : {0.5, 5.0}) {
    for (double c : {1e-5, 1e-2}) {
      const Modulus mu = Modulus::log(C);
      auto p = linear_phi_problem(c, 1.0, 2.0, mu);
      OsgoodBound b(p);
      auto phi = [](double t) { return 1.0 + t; };
      double y = c, t = 0.0;
      const int N = 20000;
      const double h = 1.0 / N;
      for (int i = 0; i < N; ++i) {
        const double k1 = phi(t) * mu(y);
        const double k2 = phi(t + h / 2) * mu(y + h / 2 * k1);
        const double k3 = phi(t + h / 2) * mu(y + h / 2 * k2);
        const double k4 = phi(t + h) * mu(y + h * k3);
        y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        t += h;
        if ((i + 1) % 5000 == 0) EXPECT_NEAR(b(t) / y, 1.0, 1e-6) << "C=" << C << " c=" << c;
      }
    }
  }
}

TEST(Osgood, ZeroDataAndVacuousBound) {
  auto p = linear_phi_problem(0.0, 1.0, 1.0, Modulus::log(1.0));
  OsgoodBound b(p);
  for (double x : b.at_samples()) EXPECT_EQ(x, 0.0);
  p.c = 0.5;
  EXPECT_THROW(OsgoodBound{p}, std::domain_error);
  p.c = 0.7;
  EXPECT_THROW(osgood_bound(p), std::domain_error);
  p.c = 0.1;
  p.phi[3] = -1.0;
  EXPECT_THROW(OsgoodBound{p}, std::invalid_argument);
  p = linear_phi_problem(0.1, 1.0, 1.0, Modulus::log(1.0));
  p.a = 1.0;
  EXPECT_THROW(OsgoodBound{p}, std::invalid_argument);
  p.a = 0.5;
  p.phi.pop_back();
  EXPECT_THROW(OsgoodBound{p}, std::invalid_argument);
}

TEST(Osgood, MonotoneInTimeDataAndRate) {
  const Modulus mu = Modulus::log(1.0);
  OsgoodBound base(linear_phi_problem(1e-3, 1.0, 1.0, mu));
  OsgoodBound more_c(linear_phi_problem(2e-3, 1.0, 1.0, mu));
  OsgoodBound more_phi(linear_phi_problem(1e-3, 1.5, 1.5, mu));
  EXPECT_NEAR(base(0.0), 1e-3, 1e-18);
  const auto s = base.at_samples();
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_GT(s[i], s[i - 1]);
  for (double t : {0.2, 0.6, 1.0}) {
    EXPECT_GT(more_c(t), base(t));
    EXPECT_GT(more_phi(t), base(t));
  }
  EXPECT_THROW(base(1.5), std::out_of_range);
}

TEST(Uniqueness, ZeroPerturbationGivesZeroDifference) {
  Grid g(2, 16);
  auto init = data::generate_data({data::Family::RandomBesov, 1e-3, 4}, g, 1.0);
  UniquenessConfig cfg;
  cfg.epsilon = 0.0;
  cfg.T1 = 0.02;
  auto m = measure_uniqueness(init.state, cfg);
  EXPECT_EQ(m.halvings, 0);
  EXPECT_NEAR(m.T1, 0.02, 1e-12);
  ASSERT_EQ(m.times.size(), 21u);
  for (std::size_t i = 0; i < m.f.size(); ++i) {
    EXPECT_LT(m.f[i], 1e-13);
    EXPECT_LT(m.u_diff_l2[i] + m.v_diff_l2[i] + m.theta_diff_l2[i], 1e-13);
  }
  EXPECT_EQ(minimal_envelope_constant(m), 0.0);
}

TEST(Uniqueness, DifferenceScalesWithEpsilonAndFitsEnvelope) {
  Grid g(2, 16);
  auto init = data::generate_data({data::Family::RandomBesov, 1e-3, 4}, g, 1.0);
  UniquenessConfig cfg;
  cfg.T1 = 0.02;
  cfg.epsilon = 1e-6;
  auto a = measure_uniqueness(init.state, cfg);
  cfg.epsilon = 1e-8;
  auto b = measure_uniqueness(init.state, cfg);
  EXPECT_GT(a.f.back(), 0.0);
  EXPECT_NEAR(a.f.back() / b.f.back(), 100.0, 1.0);
  EXPECT_LT(a.smallness, 0.25);
  for (std::size_t i = 1; i < a.f.size(); ++i) EXPECT_GE(a.f[i], a.f[i - 1]);

  const double C = minimal_envelope_constant(a);
  ASSERT_TRUE(std::isfinite(C));
  EXPECT_GT(C, 0.0);
  EXPECT_TRUE(envelope(a, 1.01 * C).inside);
  EXPECT_FALSE(envelope(a, 0.9 * C).inside);
  const auto e = envelope(a, C);
  EXPECT_EQ(e.bound.size(), a.f.size());
  EXPECT_LE(e.worst_ratio, 1.0 + 1e-9);
}

TEST(Uniqueness, LargeDataHalvesWindowOrFails) {
  Grid g(2, 16);
  auto init = data::generate_data({data::Family::RandomBesov, 0.5, 4}, g, 1.0);
  UniquenessConfig cfg;
  cfg.T1 = 0.05;
  cfg.smallness_constant = 5.0;
  try {
    auto m = measure_uniqueness(init.state, cfg);
    EXPECT_GT(m.halvings, 0);
    EXPECT_LE(m.smallness, 0.25);
    EXPECT_LT(m.T1, 0.05);
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("smallness"), std::string::npos);
  }
  cfg.max_halvings = 0;
  cfg.smallness_constant = 1e9;
  EXPECT_THROW(measure_uniqueness(init.state, cfg), std::runtime_error);
}

TEST(Calibration, FileRoundTrip) {
  Calibration cal;
  cal.d = 3;
  cal.n = 32;
  cal.seed = 0xFFFFFFFFFFFFFFF1ULL;
  cal.trials = 17;
  cal.margin = 1.5;
  cal.constants["triple_transport"] = 0.1 + 0.2;
  cal.constants["log_interpolation"] = 1.0 / 3.0;
  const auto path = std::filesystem::temp_directory_path() / "tcm_calibration_roundtrip.txt";
  write_calibration(path, cal);
  auto back = read_calibration(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.d, cal.d);
  EXPECT_EQ(back.n, cal.n);
  EXPECT_EQ(back.seed, cal.seed);
  EXPECT_EQ(back.trials, cal.trials);
  EXPECT_EQ(back.margin, cal.margin);
  EXPECT_EQ(back.constants, cal.constants);
}

TEST(Calibration, SelfAssertionHasNoViolations) {
  Grid g(2, 16);
  std::vector<SuiteResult> suites;
  auto cal = calibrate(g, 2, 99, 1.5, &suites);
  EXPECT_EQ(cal.constants.size(), 6u);
  for (const auto& s : suites) {
    EXPECT_FALSE(s.ratios.empty()) << s.name;
    EXPECT_NEAR(cal.constants.at(s.name), 1.5 * s.max_ratio, 1e-15);
  }
  auto res = assert_calibration(cal, g, 2, 99);
  for (const auto& a : res) EXPECT_EQ(a.violations, 0) << a.name;
  EXPECT_THROW(calibrate(g, 0, 1, 1.5), std::invalid_argument);
}

TEST(Calibration, PicardDominanceTransfersAcrossGrids) {
  Grid coarse(2, 16), fine(2, 32);
  auto c = picard_dominance_suite(coarse, 6, 123);
  auto f = picard_dominance_suite(fine, 6, 456);
  ASSERT_FALSE(c.ratios.empty());
  ASSERT_FALSE(f.ratios.empty());
  const double constant = 1.5 * c.max_ratio;
  for (double r : f.ratios) EXPECT_LE(r, std::max(constant, 1e-12));
  EXPECT_LE(c.max_ratio, 1.0);
}
