#include "heraldsim/optics.h"

#include <cmath>

#include <gtest/gtest.h>

#include "heraldsim/errors.h"
#include "heraldsim/source.h"

using namespace heraldsim;

namespace {

Amplitude coeff(const ModeTransform& t, const ModeId& in, const ModeId& out) {
  Amplitude c{};
  for (const auto& [v, m] : t.column(in)) {
    if (m == out) c += v;
  }
  return c;
}

}  // namespace

TEST(optics, beam_splitter_is_isometric_and_checks_r_plus_t) {
  auto t = beam_splitter({0.486, 0.514, "a", "c", "e"});
  EXPECT_TRUE(validate_isometry(t).pass);
  EXPECT_NEAR(std::norm(coeff(t, {"a", "x"}, {"c", "x"})), 0.486, 1e-15);
  EXPECT_NEAR(std::norm(coeff(t, {"a", "y"}, {"e", "y"})), 0.514, 1e-15);
  EXPECT_THROW(beam_splitter({0.5, 0.6, "a", "c", "e"}), ConfigError);
  EXPECT_THROW(beam_splitter({1.3, -0.3, "a", "c", "e"}), ConfigError);
}

TEST(optics, wave_plate_matrix_examples) {
  const ModeId fx{"f", "x"}, fy{"f", "y"};
  auto zero = half_wave_plate({0.0, "f"});
  EXPECT_NEAR(coeff(zero, fx, fx).real(), 1.0, 1e-15);
  EXPECT_NEAR(coeff(zero, fy, fy).real(), -1.0, 1e-15);
  EXPECT_NEAR(std::abs(coeff(zero, fx, fy)), 0.0, 1e-15);

  auto w = half_wave_plate({-22.5, "f"});
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(coeff(w, fx, fx).real(), s, 1e-15);
  EXPECT_NEAR(coeff(w, fx, fy).real(), -s, 1e-15);
  EXPECT_NEAR(coeff(w, fy, fx).real(), -s, 1e-15);
  EXPECT_NEAR(coeff(w, fy, fy).real(), -s, 1e-15);
  EXPECT_TRUE(validate_isometry(w).pass);
  EXPECT_THROW(half_wave_plate({-90.0, "f"}), ConfigError);
  EXPECT_NO_THROW(half_wave_plate({90.0, "f"}));
}

TEST(optics, pbs_routes_polarizations) {
  auto t = polarizing_beam_splitter({"f", {"x'", "y'"}});
  EXPECT_EQ(coeff(t, {"f", "x'"}, {"f_t", "x'"}), Amplitude(1.0));
  EXPECT_EQ(coeff(t, {"f", "y'"}, {"f_r", "y'"}), Amplitude(1.0));
  EXPECT_TRUE(validate_isometry(t).pass);
}

TEST(optics, isometry_check_flags_non_unitary_maps) {
  ModeTransform t;
  t.columns[{"a", "x"}] = {{1.0, {"c", "x"}}};
  t.columns[{"a", "y"}] = {{1.0, {"c", "x"}}};
  auto r = validate_isometry(t);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.max_deviation, 1.0, 1e-15);
}

TEST(optics, analyzer_rotations_are_unitary) {
  for (Basis b : {Basis::HV, Basis::DA, Basis::RL}) {
    EXPECT_TRUE(validate_isometry(analyzer_rotation("c", {"x", "y"}, b)).pass) << basis_name(b);
  }
  EXPECT_EQ(parse_basis("RL"), Basis::RL);
  EXPECT_THROW(parse_basis("XY"), ConfigError);
}

TEST(optics, heralding_circuit_modes) {
  auto c = heralding_circuit(0.486);
  std::vector<ModeId> expect{{"c", "x"},   {"c", "y"},   {"d", "x"},   {"d", "y"},
                             {"e_r", "y"}, {"e_t", "x"}, {"f_r", "y'"}, {"f_t", "x'"}};
  EXPECT_EQ(c.output_modes(), expect);
}

TEST(optics, circuit_rejects_missing_and_reused_modes) {
  CircuitSpec c;
  c.input_modes = source_modes();
  c.elements.emplace_back(PbsSpec{"z"});
  EXPECT_THROW(c.validate(), ConfigError);
  CircuitSpec d;
  d.input_modes = source_modes();
  d.elements.emplace_back(BeamSplitterSpec{0.5, 0.5, "a", "b", "c"});
  EXPECT_THROW(d.validate(), ConfigError);
}

TEST(optics, circuit_conserves_norm_for_every_sector) {
  for (double R : {0.0, 0.3, 0.486, 0.685, 1.0}) {
    for (unsigned n = 1; n <= 4; ++n) {
      auto out = apply_circuit(n_pair_state(n), heralding_circuit(R));
      EXPECT_NEAR(out.norm_sq(), 1.0, 1e-12) << "R=" << R << " n=" << n;
    }
  }
}

TEST(optics, phase_element) {
  auto t = phase_shift({{"c", "x"}, 90.0});
  EXPECT_NEAR(std::abs(coeff(t, {"c", "x"}, {"c", "x"}) - Amplitude(0.0, 1.0)), 0.0, 1e-15);
}
