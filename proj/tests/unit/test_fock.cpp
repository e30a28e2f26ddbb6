#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qsense/fock.hpp"
#include "qsense/sources.hpp"

using namespace qsense;

namespace {

const ModeLabel kA = ModeLabel::path(0);
const ModeLabel kB = ModeLabel::path(1);

SpacePtr single_mode(int n_max) { return FockSpace::make({kA}, n_max); }

StateVector ket(const SpacePtr& s, int n) { return StateVector::basis(s, s->state({{kA, n}})); }

}  // namespace

TEST(ModeLabel, OrderingAndEquality) {
  EXPECT_EQ(ModeLabel::oam(0, 2), ModeLabel::oam(0, 2));
  EXPECT_NE(ModeLabel::oam(0, 2), ModeLabel::oam(1, 2));
  EXPECT_LT(ModeLabel::path(0), ModeLabel::path(1));
  EXPECT_EQ(ModeLabelHash{}(ModeLabel::level(1)), ModeLabelHash{}(ModeLabel::level(1)));
}

TEST(FockSpace, DimensionMatchesBinomial) {
  auto s = FockSpace::make({kA, kB, ModeLabel::path(2)}, 4);
  // C(3 + 4, 4) = 35
  EXPECT_EQ(s->dimension(), 35u);
  EXPECT_EQ(s->basis().size(), 35u);
}

TEST(FockSpace, RejectsOverTruncation) {
  auto s = single_mode(2);
  EXPECT_THROW(s->state({{kA, 3}}), TruncationError);
  EXPECT_THROW(s->position(kB), MissingModeError);
}

TEST(Ladder, CreateOnVacuum) {
  auto s = single_mode(4);
  const auto out = create(ket(s, 0), kA);
  EXPECT_NEAR(std::abs(out.amplitude(s->state({{kA, 1}})) - 1.0), 0.0, 1e-15);
}

TEST(Ladder, CreateOnTwo) {
  auto s = single_mode(4);
  const auto out = create(ket(s, 2), kA);
  EXPECT_NEAR(out.amplitude(s->state({{kA, 3}})).real(), std::sqrt(3.0), 1e-15);
}

TEST(Ladder, CreateOnSuperposition) {
  auto s = single_mode(4);
  const auto in = (ket(s, 0) + ket(s, 1)).normalized();
  const auto out = create(in, kA);
  EXPECT_NEAR(out.amplitude(s->state({{kA, 1}})).real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(out.amplitude(s->state({{kA, 2}})).real(), 1.0, 1e-15);
}

TEST(Ladder, Annihilate) {
  auto s = single_mode(4);
  EXPECT_NEAR(annihilate(ket(s, 1), kA).amplitude(s->vacuum()).real(), 1.0, 1e-15);
  EXPECT_TRUE(annihilate(ket(s, 0), kA).is_zero());
  const auto out = annihilate((ket(s, 0) + ket(s, 3)).normalized(), kA);
  EXPECT_NEAR(out.amplitude(s->state({{kA, 2}})).real(), std::sqrt(3.0) / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(out.support_size(), 1u);
}

TEST(Ladder, CreateAtTruncationThrows) {
  auto s = single_mode(2);
  EXPECT_THROW(create(ket(s, 2), kA), TruncationError);
}

TEST(Ladder, CommutatorIsIdentityBelowTruncation) {
  auto s = single_mode(6);
  for (int n = 0; n < 6; ++n) {
    const auto v = ket(s, n);
    const auto comm = annihilate(create(v, kA), kA) - create(annihilate(v, kA), kA);
    EXPECT_NEAR(std::abs(comm.inner(v) - 1.0), 0.0, 1e-14) << n;
    EXPECT_NEAR((comm - v).norm(), 0.0, 1e-14) << n;
  }
}

TEST(NumberExpectation, FockAndSuperposition) {
  auto s = single_mode(5);
  EXPECT_NEAR(number_expectation(ket(s, 5), kA), 5.0, 1e-14);
  EXPECT_NEAR(number_expectation((ket(s, 0) + ket(s, 2)).normalized(), kA), 1.0, 1e-14);
}

TEST(NumberExpectation, CoherentStateMatchesPoissonSum) {
  auto s = single_mode(40);
  const auto coh = coherent_state(s, kA, 2.0);
  // Oracle: truncated Poisson weights summed directly.
  double mass = 0.0;
  double mean = 0.0;
  double w = std::exp(-4.0);
  for (int n = 0; n <= 40; ++n) {
    if (n > 0) w *= 4.0 / n;
    mass += w;
    mean += n * w;
  }
  EXPECT_NEAR(number_expectation(coh.state, kA), mean / mass, 1e-12);
  EXPECT_NEAR(number_expectation(coh.state, kA), 4.0, 1e-9);
}

TEST(SusskindGlogower, ShiftLowersOne) {
  auto s = single_mode(3);
  const auto sg = susskind_glogower(s);
  const auto out = sg.shift.apply(ket(s, 1));
  EXPECT_NEAR(std::abs(out.amplitude(s->vacuum()) - 1.0), 0.0, 1e-15);
}

TEST(SusskindGlogower, TwoLevelIsPauliX) {
  auto s = single_mode(1);
  const auto m = susskind_glogower(s).cosine.dense(s->basis());
  Eigen::Matrix2cd x;
  x << 0, 1, 1, 0;
  EXPECT_LT((m - x).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SusskindGlogower, PhaseStateIsEigenvectorUpToTail) {
  for (int n_max : {4, 9, 25}) {
    auto s = single_mode(n_max);
    const double phi = 0.7;
    const auto v = truncated_phase_state(s, phi);
    const auto sv = susskind_glogower(s).shift.apply(v);
    const double tail = (sv - v * std::polar(1.0, phi)).norm();
    EXPECT_NEAR(tail, 1.0 / std::sqrt(n_max + 1.0), 1e-12);
    EXPECT_NEAR(phase_state_tail_bound(*s), 1.0 / std::sqrt(n_max + 1.0), 1e-15);
  }
}

TEST(SusskindGlogower, MatchesLadderForm) {
  auto s = single_mode(8);
  const auto basis = s->basis();
  const auto sum_form = susskind_glogower(s).shift.dense(basis);
  const auto ladder_form = shift_from_ladder(s).dense(basis);
  EXPECT_LT((sum_form - ladder_form).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Expectation, PauliOnPhasedState) {
  auto s = single_mode(1);
  const auto a = susskind_glogower(s).cosine;
  const auto psi = (ket(s, 0) + ket(s, 1) * std::polar(1.0, kPi / 3)).normalized();
  EXPECT_NEAR(expectation(psi, a), 0.5, 1e-15);
  EXPECT_NEAR(expectation(psi, a * a), 1.0, 1e-15);
  EXPECT_NEAR(expectation(psi, Observable::identity(s)), 1.0, 1e-15);
}

TEST(Expectation, UncertaintyOfPauli) {
  auto s = single_mode(1);
  const auto a = susskind_glogower(s).cosine;
  const auto quarter = (ket(s, 0) + ket(s, 1) * std::polar(1.0, kPi / 2)).normalized();
  EXPECT_NEAR(variance_and_uncertainty(quarter, a).uncertainty, 1.0, 1e-15);
  const auto eigen = (ket(s, 0) + ket(s, 1)).normalized();
  EXPECT_NEAR(variance_and_uncertainty(eigen, a).uncertainty, 0.0, 1e-7);
}

TEST(Observables, GeneratedOperatorsAreHermitian) {
  auto s = FockSpace::make({kA, kB}, 5);
  EXPECT_LT(number_operator(s, kA).max_hermiticity_defect(), 1e-12);
  auto one = single_mode(7);
  EXPECT_LT(susskind_glogower(one).cosine.max_hermiticity_defect(), 1e-12);
  const auto x = annihilation_operator(s, kA) + creation_operator(s, kA);
  EXPECT_LT(x.max_hermiticity_defect(), 1e-12);
}

TEST(Schmidt, ProductNoonAndSpdc) {
  auto s = FockSpace::make({kA, kB}, 5);
  const ModeLabel side[] = {kA};
  EXPECT_EQ(schmidt(StateVector::basis(s, s->state({{kA, 1}})), side).rank, 1);
  const auto noon = noon_state(s, kA, kB, 5);
  const auto d = schmidt(noon, side);
  EXPECT_EQ(d.rank, 2);
  EXPECT_NEAR(d.singular_values[0], 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(d.singular_values[1], 1.0 / std::sqrt(2.0), 1e-14);

  auto oam = spdc_oam_space(2);
  const auto pair = spdc_oam_pair(oam, SpdcOamSpectrum::uniform(2));
  std::vector<ModeLabel> signal;
  for (const auto& m : oam->modes())
    if (m.port == kSignalPort) signal.push_back(m);
  EXPECT_EQ(schmidt(pair, signal).rank, 5);
}

// Rank 1 iff <O_A x O_B> = <O_A><O_B> for random local observables. The
// space has room for two extra photons so the operators never truncate.
TEST(Schmidt, RankOneIffProductObservablesFactorize) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  auto s = FockSpace::make({kA, kB}, 4);
  const ModeLabel side[] = {kA};

  auto random_local = [&](const ModeLabel& m) {
    const auto a = annihilation_operator(s, m);
    const cplx c{g(rng), g(rng)};
    return a * c + a.adjoint() * std::conj(c) + number_operator(s, m) * cplx{g(rng), 0.0};
  };
  auto random_pair_state = [&](bool product) {
    StateVector::Amplitudes amps;
    const cplx u[2] = {{g(rng), g(rng)}, {g(rng), g(rng)}};
    const cplx v[2] = {{g(rng), g(rng)}, {g(rng), g(rng)}};
    for (int na = 0; na <= 1; ++na)
      for (int nb = 0; nb <= 1; ++nb)
        amps[s->state({{kA, na}, {kB, nb}})] = product ? u[na] * v[nb] : cplx{g(rng), g(rng)};
    return StateVector(s, amps);
  };
  for (int trial = 0; trial < 20; ++trial) {
    const auto product = random_pair_state(true);
    const auto generic = random_pair_state(false);
    const auto oa = random_local(kA);
    const auto ob = random_local(kB);
    auto gap = [&](const StateVector& psi) {
      const cplx joint = psi.inner(oa.apply(ob.apply(psi)));
      const cplx ea = psi.inner(oa.apply(psi));
      const cplx eb = psi.inner(ob.apply(psi));
      return std::abs(joint - ea * eb);
    };
    EXPECT_EQ(schmidt(product, side).rank, 1) << trial;
    EXPECT_LT(gap(product), 1e-9) << trial;
    EXPECT_EQ(schmidt(generic, side).rank, 2) << trial;
    EXPECT_GT(gap(generic), 1e-9) << trial;
  }
}
