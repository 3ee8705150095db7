#include "heraldsim/analysis.h"

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "heraldsim/errors.h"

using namespace heraldsim;

namespace {

using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 k;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  }
  return k;
}

Eigen::Vector4cd phi_plus() {
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  v[0] = v[3] = 1.0 / std::sqrt(2.0);
  return v;
}

Mat4 werner(double v) {
  Eigen::Vector4cd p = phi_plus();
  return v * (p * p.adjoint()) + (1 - v) / 4 * Mat4::Identity();
}

Mat4 random_density(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat4 a;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) a(i, j) = {g(rng), g(rng)};
  }
  Mat4 rho = a * a.adjoint();
  return rho / rho.trace().real();
}

// Largest CHSH value over spin measurements in the x-z plane.
double max_chsh(const Mat4& rho) {
  auto obs = [](double t) {
    Mat2 m;
    m << std::cos(t), std::sin(t), std::sin(t), -std::cos(t);
    return m;
  };
  auto e = [&](double a, double b) { return (rho * kron(obs(a), obs(b))).trace().real(); };
  double best = 0.0;
  const int n = 180;
  for (int i = 0; i < n; ++i) {
    const double b = 2 * M_PI * i / n;
    for (int j = 0; j < n; ++j) {
      const double bp = 2 * M_PI * j / n;
      const double s = e(0, b) + e(0, bp) + e(M_PI / 2, b) - e(M_PI / 2, bp);
      best = std::max(best, std::abs(s));
    }
  }
  return best;
}

}  // namespace

TEST(analysis, eff_theory_examples) {
  EXPECT_NEAR(eff_theory(0.486, 0.0), 0.486 * 0.486, 1e-15);
  EXPECT_NEAR(eff_theory(0.486, 0.1823), 0.2595, 1e-3);
  EXPECT_NEAR(eff_theory(0.685, 0.207), 0.5014, 5e-5);
  EXPECT_NEAR(eff_theory(1.0, 0.5), 1.0, 1e-15);
  EXPECT_THROW(eff_theory(1.1, 0.2), DomainError);
  EXPECT_THROW(eff_theory(0.5, -0.2), DomainError);
}

TEST(analysis, eff_theory_increases_with_reflectivity) {
  for (double eta : {0.0, 0.18, 0.5, 1.0}) {
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
      const double e = eff_theory(i / 100.0, eta);
      EXPECT_GT(e, prev);
      prev = e;
    }
  }
}

TEST(analysis, eff_exp_examples) {
  EXPECT_NEAR(eff_exp(37, 9710, 0.129).value, 0.229, 5e-4);
  EXPECT_NEAR(eff_exp(14, 1347, 0.15).value, 0.462, 5e-4);
  EXPECT_EQ(eff_exp(0, 1000, 0.15).value, 0.0);
  EXPECT_THROW(eff_exp(1, 0, 0.15), UndefinedEstimate);
  EXPECT_THROW(eff_exp(1, 10, 0.0), DomainError);
  const auto e = eff_exp(14, 1347, 0.15);
  EXPECT_NEAR(e.sigma, std::sqrt(14.0 + 14.0 * 14.0 / 1347.0) / (1347 * 0.0225), 1e-12);
}

TEST(analysis, correlation_from_counts) {
  auto c = correlation_from_counts({{{60, 5}, {5, 60}}});
  EXPECT_NEAR(c.value, 110.0 / 130.0, 1e-15);
  EXPECT_EQ(correlation_from_counts({{{10, 0}, {0, 3}}}).value, 1.0);
  EXPECT_EQ(correlation_from_counts({{{7, 7}, {7, 7}}}).value, 0.0);
  EXPECT_THROW(correlation_from_counts({}), UndefinedEstimate);
  for (std::uint64_t k : {2u, 10u, 1000u}) {
    EXPECT_NEAR(correlation_from_counts({{{60 * k, 5 * k}, {5 * k, 60 * k}}}).value, c.value, 1e-15);
  }
}

TEST(analysis, fidelity_examples) {
  EXPECT_NEAR(fidelity_phi_plus({1, -1, 1}).value, 1.0, 1e-15);
  EXPECT_NEAR(fidelity_phi_plus({0, 0, 0}).value, 0.25, 1e-15);
  EXPECT_NEAR(fidelity_phi_plus({0.91, -0.91, 0.91}).value, 0.9325, 1e-12);
  EXPECT_NEAR(fidelity_from_visibilities(1, 1, 1), 1.0, 1e-15);
  EXPECT_NEAR(fidelity_from_visibilities(0, 0, 0), 0.25, 1e-15);
  EXPECT_NEAR(fidelity_from_visibilities(0.91, 0.91, 0.91), 0.9325, 1e-12);
  PauliCorrelation c{0.9, -0.8, 0.95, {0.02, 0.04, 0.04}};
  EXPECT_NEAR(fidelity_phi_plus(c).sigma, 0.25 * std::sqrt(0.0004 + 0.0016 + 0.0016), 1e-15);
  EXPECT_THROW((PauliCorrelation{1.5, 0, 0}.validate()), DomainError);
}

TEST(analysis, werner_state_correlations) {
  for (double v : {0.0, 0.5, 0.91, 1.0}) {
    auto c = pauli_correlations(werner(v));
    EXPECT_NEAR(c.xx, v, 1e-14);
    EXPECT_NEAR(c.yy, -v, 1e-14);
    EXPECT_NEAR(c.zz, v, 1e-14);
    EXPECT_NEAR(fidelity_phi_plus(c).value, (1 + 3 * v) / 4, 1e-14);
  }
}

TEST(analysis, fidelity_paths_agree_on_random_states) {
  std::mt19937_64 rng(11);
  const Eigen::Vector4cd p = phi_plus();
  for (int i = 0; i < 200; ++i) {
    const Mat4 rho = random_density(rng);
    const double direct = (p.adjoint() * rho * p)(0, 0).real();
    const double via_corr = fidelity_phi_plus(pauli_correlations(rho)).value;
    EXPECT_NEAR(via_corr, direct, 1e-12);
    EXPECT_NEAR(overlap_phi_plus(rho), direct, 1e-12);
    EXPECT_GE(via_corr, -1e-12);
    EXPECT_LE(via_corr, 1 + 1e-12);
  }
}

TEST(analysis, chsh_threshold_matches_werner_optimization) {
  EXPECT_NEAR(chsh_werner_threshold(), 0.780330, 1e-6);
  // Bisect the Werner visibility where the optimized CHSH value crosses 2.
  double lo = 0.5, hi = 1.0;
  for (int i = 0; i < 30; ++i) {
    const double mid = 0.5 * (lo + hi);
    (max_chsh(werner(mid)) > 2.0 ? hi : lo) = mid;
  }
  const double f = (1 + 3 * 0.5 * (lo + hi)) / 4;
  EXPECT_NEAR(f, chsh_werner_threshold(), 1e-4);
}

TEST(analysis, chsh_examples) {
  auto a = violates_chsh({1.0, 0.01});
  EXPECT_TRUE(a.violates);
  EXPECT_NEAR(a.n_sigmas, 21.97, 0.01);
  auto b = violates_chsh({0.87, 0.029});
  EXPECT_TRUE(b.violates);
  EXPECT_NEAR(b.n_sigmas, 3.09, 0.01);
  auto c = violates_chsh({0.9, 0.0});
  EXPECT_TRUE(c.violates);
  EXPECT_EQ(c.n_sigmas, std::numeric_limits<double>::infinity());
  EXPECT_FALSE(violates_chsh({0.7, 0.01}).violates);
}

TEST(analysis, dark_count_ratio) {
  EXPECT_NEAR(dark_count_ratio(300, 12e-9, 0.15), 2.4e-5, 1e-15);
  EXPECT_EQ(dark_count_ratio(0, 12e-9, 0.15), 0.0);
  EXPECT_NEAR(dark_count_ratio(300, 24e-9, 0.15), 2 * dark_count_ratio(300, 12e-9, 0.15), 1e-18);
  EXPECT_THROW(dark_count_ratio(300, 12e-9, 0.0), DomainError);
}

TEST(analysis, four_pair_weight_zero_gives_no_shift) {
  auto c = combine_sectors(5.7e-5, 1e-3, 0.26, 0.0, 2e-3, 0.1);
  EXPECT_EQ(c.shift, 0.0);
  EXPECT_EQ(c.eff34, 0.26);
  EXPECT_THROW(combine_sectors(0, 0, 0, 0, 0, 0), UndefinedEstimate);
}

TEST(analysis, four_pair_correction_working_points) {
  SpdcParams p;
  p.r = coupling_from_rate(0.047);
  p.n_max = 4;
  const auto c5050 = four_pair_correction(p, 0.486, standard_layout(0.167, 1.0));
  EXPECT_NEAR(c5050.eff3, eff_theory(0.486, 0.167), 1e-10);
  EXPECT_NEAR(c5050.shift, -0.00409, 5e-5);
  const auto c6040 = four_pair_correction(p, 0.570, standard_layout(0.173, 1.0));
  const auto c7030 = four_pair_correction(p, 0.685, standard_layout(0.207, 1.0));
  const double mean = (std::abs(c5050.shift) + std::abs(c6040.shift) + std::abs(c7030.shift)) / 3;
  EXPECT_GE(mean, 0.03);
  EXPECT_LE(mean, 0.06);
  p.n_max = 3;
  EXPECT_THROW(four_pair_correction(p, 0.486, standard_layout(0.167, 1.0)), ConfigError);
}

TEST(analysis, four_pair_shift_grows_with_coupling) {
  SpdcParams p;
  p.n_max = 4;
  double prev = 0.0;
  for (double r = 0.10; r <= 0.25 + 1e-9; r += 0.03) {
    p.r = r;
    const double s = std::abs(four_pair_correction(p, 0.6, standard_layout(0.2, 1.0)).shift);
    EXPECT_GT(s, prev) << r;
    prev = s;
  }
}
