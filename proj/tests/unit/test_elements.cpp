#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qsense/elements.hpp"
#include "qsense/sources.hpp"

using namespace qsense;

namespace {

const ModeLabel kA = ModeLabel::path(0);
const ModeLabel kB = ModeLabel::path(1);

SpacePtr two_paths(int n_max) { return FockSpace::make({kA, kB}, n_max); }

StateVector ket(const SpacePtr& s, int na, int nb) {
  return StateVector::basis(s, s->state({{kA, na}, {kB, nb}}));
}

StateVector random_state(const SpacePtr& s, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  StateVector::Amplitudes amps;
  for (const auto& b : s->basis()) amps[b] = {g(rng), g(rng)};
  return StateVector(s, amps);
}

using Mat2 = Eigen::Matrix2cd;

Mat2 bs_oracle(double k) {
  Mat2 m;
  m << std::cos(k), kI * std::sin(k), kI * std::sin(k), std::cos(k);
  return m;
}

}  // namespace

TEST(BeamSplitter, SinglePhoton) {
  auto s = two_paths(2);
  const auto out = apply_beam_splitter(ket(s, 1, 0), kA, kB);
  const double h = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(out.amplitude(s->state({{kA, 1}})) - cplx(h, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(out.amplitude(s->state({{kB, 1}})) - cplx(0, h)), 0.0, 1e-15);
}

// Oracle: enumerate the four paths of two photons through the 2x2 matrix.
TEST(BeamSplitter, HongOuMandelAgainstPathSum) {
  auto s = two_paths(2);
  const auto out = apply_beam_splitter(ket(s, 1, 1), kA, kB);
  const Mat2 u = bs_oracle(kPi / 4);
  // Photon from A lands in port i, photon from B in port j.
  cplx coinc = 0.0;
  cplx both_a = 0.0;
  cplx both_b = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const cplx amp = u(i, 0) * u(j, 1);
      if (i != j) coinc += amp;
      else if (i == 0) both_a += amp;
      else both_b += amp;
    }
  // |2,0> carries a sqrt(2!) bosonic factor.
  EXPECT_NEAR(std::abs(out.amplitude(s->state({{kA, 2}})) - both_a * std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(out.amplitude(s->state({{kB, 2}})) - both_b * std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_LT(std::abs(out.amplitude(s->state({{kA, 1}, {kB, 1}}))), 1e-14);
  EXPECT_LT(std::abs(coinc), 1e-15);
  EXPECT_NEAR(std::abs(out.amplitude(s->state({{kA, 2}})) - cplx(0, 1.0 / std::sqrt(2.0))), 0.0, 1e-15);
}

TEST(BeamSplitter, ZeroMixingIsIdentity) {
  std::mt19937_64 rng(3);
  auto s = two_paths(3);
  const auto psi = random_state(s, rng);
  EXPECT_NEAR((apply_beam_splitter(psi, kA, kB, 0.0) - psi).norm(), 0.0, 1e-15);
}

TEST(PhaseShift, ActsOnUpperMode) {
  auto s = two_paths(4);
  const double phi = 0.37;
  const auto in = (ket(s, 0, 1) + ket(s, 1, 0)).normalized();
  const auto out = apply_phase_shift(in, kA, phi);
  const auto expected = (ket(s, 0, 1) + ket(s, 1, 0) * std::polar(1.0, phi)).normalized();
  EXPECT_NEAR(std::abs(out.inner(expected)) , 1.0, 1e-15);
  EXPECT_NEAR((out - expected).norm(), 0.0, 1e-15);

  const auto four = apply_phase_shift(ket(s, 4, 0), kA, kPi / 4);
  EXPECT_NEAR(std::abs(four.amplitude(s->state({{kA, 4}})) + 1.0), 0.0, 1e-14);
  EXPECT_NEAR((apply_phase_shift(in, kA, 0.0) - in).norm(), 0.0, 1e-15);
}

TEST(DovePrism, FlipsChargeWithPhase) {
  auto s = FockSpace::make({ModeLabel::oam(0, -2), ModeLabel::oam(0, 0), ModeLabel::oam(0, 2)}, 2);
  const auto reg = oam_modes_on_port(*s, 0);
  const double theta = 0.3;
  const auto out = apply_dove_prism(single_photon(s, ModeLabel::oam(0, 2)), reg, theta);
  const cplx amp = out.amplitude(s->state({{ModeLabel::oam(0, -2), 1}}));
  EXPECT_NEAR(std::abs(amp - std::polar(1.0, 4.0 * theta)), 0.0, 1e-15);

  const auto zero = single_photon(s, ModeLabel::oam(0, 0));
  EXPECT_NEAR((apply_dove_prism(zero, reg, 1.1) - zero).norm(), 0.0, 1e-15);

  const auto sup = (single_photon(s, ModeLabel::oam(0, 2)) + single_photon(s, ModeLabel::oam(0, -2))).normalized();
  EXPECT_NEAR((apply_dove_prism(sup, reg, 0.0) - sup).norm(), 0.0, 1e-15);
}

TEST(DovePrism, MissingPartnerThrows) {
  auto s = FockSpace::make({ModeLabel::oam(0, 1)}, 1);
  const auto reg = oam_modes_on_port(*s, 0);
  EXPECT_THROW(apply_dove_prism(single_photon(s, ModeLabel::oam(0, 1)), reg, 0.1), MissingModeError);
}

TEST(Interferometer, MachZehnderMatchesMatrixProduct) {
  auto s = two_paths(1);
  for (double phi : {0.0, 0.4, 1.3, kPi / 2, 2.9}) {
    const auto mz = build_interferometer(
        s, {ElementSpec::beam_splitter(kA, kB), ElementSpec::phase_shift(kA, phi),
            ElementSpec::beam_splitter(kA, kB)});
    const auto out = mz.apply(ket(s, 1, 0));
    Mat2 p = Mat2::Identity();
    p(0, 0) = std::polar(1.0, phi);
    const Mat2 m = bs_oracle(kPi / 4) * p * bs_oracle(kPi / 4);
    EXPECT_NEAR(std::norm(out.amplitude(s->state({{kA, 1}}))), std::norm(m(0, 0)), 1e-14);
    EXPECT_NEAR(std::norm(out.amplitude(s->state({{kB, 1}}))), std::norm(m(1, 0)), 1e-14);
    EXPECT_NEAR(std::norm(m(1, 0)), std::pow(std::cos(phi / 2), 2), 1e-14);
  }
}

TEST(Interferometer, EmptyIsIdentityAndDoubleSplitterRoutes) {
  std::mt19937_64 rng(5);
  auto s = two_paths(1);
  const auto psi = random_state(s, rng);
  EXPECT_NEAR((build_interferometer(s, {}).apply(psi) - psi).norm(), 0.0, 1e-15);
  const auto out = build_interferometer(s, {ElementSpec::beam_splitter(kA, kB), ElementSpec::beam_splitter(kA, kB)})
                       .apply(ket(s, 1, 0));
  EXPECT_NEAR(std::norm(out.amplitude(s->state({{kB, 1}}))), 1.0, 1e-15);
  EXPECT_LT(std::norm(out.amplitude(s->state({{kA, 1}}))), 1e-30);
}

TEST(Interferometer, PrecomposedMatchesSequential) {
  std::mt19937_64 rng(9);
  auto s = two_paths(4);
  const auto ifm = build_interferometer(
      s, {ElementSpec::beam_splitter(kA, kB, 0.3), ElementSpec::phase_shift(kB, 1.1),
          ElementSpec::swap(kA, kB), ElementSpec::beam_splitter(kA, kB)});
  const auto psi = random_state(s, rng);
  EXPECT_NEAR((ifm.apply(psi) - ifm.apply_sequential(psi)).norm(), 0.0, 1e-13);
}

// Randomized unitarity, photon-number conservation and inner-product
// preservation for every element kind.
TEST(ElementProperties, UnitaryAndNumberConserving) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  auto s = FockSpace::make({kA, kB, ModeLabel::oam(0, -1), ModeLabel::oam(0, 1)}, 3);
  const auto reg = oam_modes_on_port(*s, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const auto u = random_state(s, rng);
    const auto v = random_state(s, rng);
    const std::vector<ElementSpec> elements{
        ElementSpec::beam_splitter(kA, kB, angle(rng)),
        ElementSpec::beam_splitter(kB, ModeLabel::oam(0, 1), angle(rng)),
        ElementSpec::phase_shift(kA, angle(rng)),
        ElementSpec::dove_prism(reg, angle(rng)),
        ElementSpec::mirror(reg),
        ElementSpec::swap(kA, ModeLabel::oam(0, -1))};
    for (const auto& e : elements) {
      const auto eu = apply_element(u, e);
      const auto ev = apply_element(v, e);
      EXPECT_NEAR(eu.norm(), 1.0, 1e-12) << to_string(e.kind);
      EXPECT_LT(std::abs(eu.inner(ev) - u.inner(v)), 1e-11) << to_string(e.kind);
      EXPECT_NEAR(total_number_expectation(eu), total_number_expectation(u), 1e-12) << to_string(e.kind);
    }
  }
}

TEST(ElementProperties, DoveTwiceIsGlobalPhase) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  auto s = FockSpace::make({ModeLabel::oam(0, -2), ModeLabel::oam(0, -1), ModeLabel::oam(0, 1),
                            ModeLabel::oam(0, 2)}, 1);
  const auto reg = oam_modes_on_port(*s, 0);
  for (int trial = 0; trial < 20; ++trial) {
    // Single-charge-magnitude superpositions pick up one common phase.
    const cplx c0{std::normal_distribution<double>()(rng), 0.3};
    const auto psi = (single_photon(s, ModeLabel::oam(0, 2)) * c0 + single_photon(s, ModeLabel::oam(0, -2))).normalized();
    const double theta = angle(rng);
    const auto twice = apply_dove_prism(apply_dove_prism(psi, reg, theta), reg, theta);
    EXPECT_NEAR(std::abs(psi.inner(twice)), 1.0, 1e-12);
  }
}

TEST(ElementSpecValidation, RejectsBadSpecs) {
  EXPECT_THROW(ElementSpec::beam_splitter(kA, kA).validate(), InvalidArgument);
  EXPECT_THROW(ElementSpec::phase_shift(kA, std::nan("")).validate(), InvalidArgument);
}
