#include "qsense/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "qsense/elements.hpp"
#include "qsense/sources.hpp"

namespace qsense {

std::string to_string(EstimationMethod method) {
  return method == EstimationMethod::analytic ? "analytic" : "monte-carlo";
}

// ---------------------------------------------------------------------------
// Observables

Observable observable_a(SpacePtr space) {
  if (space->mode_count() != 1) throw InvalidArgument("A is defined on a single-mode space");
  if (space->max_photons() < 1) throw TruncationError("A needs N_max >= 1");
  const auto zero = space->vacuum();
  const auto one = zero.with_count(0, 1);
  Observable::Elements e;
  e[zero][one] = 1.0;
  e[one][zero] = 1.0;
  return Observable(std::move(space), std::move(e), true);
}

Observable observable_b(SpacePtr space, const ModeLabel& a, const ModeLabel& b, int n) {
  if (n < 1) throw InvalidArgument("B_N needs N >= 1");
  if (a == b) throw InvalidArgument("B_N needs two distinct modes");
  const auto left = space->state({{a, n}});
  const auto right = space->state({{b, n}});
  Observable::Elements e;
  e[right][left] = 1.0;
  e[left][right] = 1.0;
  return Observable(std::move(space), std::move(e), true);
}

Observable observable_r(SpacePtr space, int detector_a, int detector_b, int l) {
  if (l == 0) throw InvalidArgument("R needs a nonzero charge");
  if (detector_a == detector_b) throw InvalidArgument("R needs two distinct detectors");
  const auto first =
      space->state({{ModeLabel::oam(detector_b, l), 1}, {ModeLabel::oam(detector_a, -l), 1}});
  const auto second =
      space->state({{ModeLabel::oam(detector_b, -l), 1}, {ModeLabel::oam(detector_a, l), 1}});
  Observable::Elements e;
  e[first][first] = 1.0;
  e[second][second] = 1.0;
  return Observable(std::move(space), std::move(e), true);
}

// ---------------------------------------------------------------------------
// Error propagation

double propagate_uncertainty(const ResponseCurve& curve, double x, std::size_t trials) {
  if (trials == 0) throw InvalidArgument("error propagation needs at least one trial");
  if (!curve.mean || !curve.spread) throw InvalidArgument("response curve is incomplete");
  double slope = 0.0;
  if (curve.slope) {
    slope = curve.slope(x);
  } else {
    const double h = kDerivativeStep;
    slope = (curve.mean(x + h) - curve.mean(x - h)) / (2.0 * h);
  }
  if (!(std::abs(slope) >= kDerivativeFloor))
    throw StationaryPointError("response slope " + std::to_string(slope) + " at x=" +
                               std::to_string(x) + " is below the derivative floor");
  return curve.spread(x) / (std::sqrt(static_cast<double>(trials)) * std::abs(slope));
}

ResponseCurve independent_photon_curve() { return noon_curve(1); }

ResponseCurve noon_curve(int n) {
  if (n < 1) throw InvalidArgument("NOON curve needs N >= 1");
  const double k = n;
  return {[k](double phi) { return std::cos(k * phi); },
          [k](double phi) { return std::abs(std::sin(k * phi)); },
          [k](double phi) { return -k * std::sin(k * phi); }};
}

ResponseCurve angular_curve(int n, int l) {
  if (n < 1 || l < 1) throw InvalidArgument("angular curve needs N >= 1 and l >= 1");
  const double k = static_cast<double>(n) * l;
  return {[k](double t) { return std::pow(std::cos(k * t), 2); },
          [k](double t) { return 0.5 * std::abs(std::sin(2.0 * k * t)); },
          [k](double t) { return -k * std::sin(2.0 * k * t); }};
}

ResponseCurve state_curve(std::function<StateVector(double)> prepare, Observable observable) {
  auto obs = std::make_shared<Observable>(std::move(observable));
  auto prep = std::make_shared<std::function<StateVector(double)>>(std::move(prepare));
  return {[obs, prep](double x) { return expectation((*prep)(x), *obs); },
          [obs, prep](double x) { return variance_and_uncertainty((*prep)(x), *obs).uncertainty; },
          {}};
}

// ---------------------------------------------------------------------------
// State families

SpacePtr upper_branch_space() { return FockSpace::make({ModeLabel::path(0)}, 1); }

StateVector mz_branch_state(SpacePtr space, double phi) {
  if (space->mode_count() != 1) throw InvalidArgument("branch state lives on one mode");
  const auto zero = space->vacuum();
  StateVector::Amplitudes amps;
  amps[zero] = 1.0;
  amps[zero.with_count(0, 1)] = 1.0;
  const ModeLabel mode = space->modes()[0];
  return apply_phase_shift(StateVector(std::move(space), std::move(amps)), mode, phi);
}

SpacePtr noon_space(int n) {
  if (n < 1) throw InvalidArgument("NOON space needs N >= 1");
  return FockSpace::make({ModeLabel::path(0), ModeLabel::path(1)}, n);
}

StateVector phased_noon_state(SpacePtr space, int n, double phi) {
  if (space->mode_count() < 2) throw InvalidArgument("NOON state needs two modes");
  const ModeLabel a = space->modes()[0];
  const ModeLabel b = space->modes()[1];
  return apply_phase_shift(noon_state(std::move(space), a, b, n), a, phi);
}

namespace {

std::vector<ModeLabel> signed_pair(int port, int l) {
  return {ModeLabel::oam(port, -l), ModeLabel::oam(port, l)};
}

SpacePtr four_mode_oam_space(int l, int max_photons) {
  if (l < 1) throw InvalidArgument("angular apparatus needs l >= 1");
  std::vector<ModeLabel> modes = signed_pair(0, l);
  const auto lower = signed_pair(1, l);
  modes.insert(modes.end(), lower.begin(), lower.end());
  return FockSpace::make(std::move(modes), max_photons);
}

}  // namespace

SpacePtr angular_pair_space(int l) { return four_mode_oam_space(l, 2); }

double angular_reference_angle(int l) {
  if (l < 1) throw InvalidArgument("angular apparatus needs l >= 1");
  return -kPi / (4.0 * l);
}

StateVector angular_pair_output(SpacePtr space, int l, double theta) {
  auto input = spdc_oam_pair(space, SpdcOamSpectrum::filtered(l), 0, 1);
  const Interferometer device(
      space, {ElementSpec::dove_prism(signed_pair(0, l), theta),
              ElementSpec::dove_prism(signed_pair(1, l), angular_reference_angle(l)),
              ElementSpec::beam_splitter(ModeLabel::oam(0, l), ModeLabel::oam(1, l)),
              ElementSpec::beam_splitter(ModeLabel::oam(0, -l), ModeLabel::oam(1, -l))});
  return device.apply(input);
}

SpacePtr angular_noon_space(int n, int l) {
  if (n < 1) throw InvalidArgument("angular NOON needs N >= 1");
  return four_mode_oam_space(l, n);
}

StateVector angular_noon_output(SpacePtr space, int n, int l, double theta) {
  auto input = noon_state(space, ModeLabel::oam(0, l), ModeLabel::oam(1, l), n);
  const Interferometer device(space, {ElementSpec::dove_prism(signed_pair(0, l), theta),
                                      ElementSpec::dove_prism(signed_pair(1, l), 0.0)});
  return device.apply(input);
}

Observable observable_r_noon(SpacePtr space, int n, int l) {
  auto target = noon_state(space, ModeLabel::oam(0, -l), ModeLabel::oam(1, -l), n);
  return Observable::projector(target);
}

// ---------------------------------------------------------------------------
// Protocols

namespace {

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

Protocol single_photon_protocol() {
  auto space = upper_branch_space();
  return {.name = "single-photon",
          .photons_per_trial = 1,
          .observable = observable_a(space),
          .prepare = [space](double phi) { return mz_branch_state(space, phi); },
          .invert = [](double mean) { return std::acos(clamp_unit(mean)); },
          .curve = independent_photon_curve()};
}

Protocol noon_protocol(int n) {
  auto space = noon_space(n);
  return {.name = "noon-" + std::to_string(n),
          .photons_per_trial = n,
          .observable = observable_b(space, ModeLabel::path(0), ModeLabel::path(1), n),
          .prepare = [space, n](double phi) { return phased_noon_state(space, n, phi); },
          .invert = [n](double mean) { return std::acos(clamp_unit(mean)) / n; },
          .curve = noon_curve(n)};
}

Protocol angular_pair_protocol(int l) {
  auto space = angular_pair_space(l);
  const double k = 2.0 * l;
  return {.name = "angular-pair-l" + std::to_string(l),
          .photons_per_trial = 2,
          .observable = observable_r(space, 0, 1, l),
          .prepare = [space, l](double theta) { return angular_pair_output(space, l, theta); },
          .invert = [k](double mean) { return std::acos(std::sqrt(std::clamp(mean, 0.0, 1.0))) / k; },
          .mean_min = 0.0,
          .mean_max = 1.0,
          .curve = angular_curve(2, l)};
}

Protocol angular_noon_protocol(int n, int l) {
  auto space = angular_noon_space(n, l);
  const double k = static_cast<double>(n) * l;
  return {.name = "angular-noon-" + std::to_string(n) + "-l" + std::to_string(l),
          .photons_per_trial = n,
          .observable = observable_r_noon(space, n, l),
          .prepare = [space, n, l](double theta) { return angular_noon_output(space, n, l, theta); },
          .invert = [k](double mean) { return std::acos(std::sqrt(std::clamp(mean, 0.0, 1.0))) / k; },
          .mean_min = 0.0,
          .mean_max = 1.0,
          .curve = angular_curve(n, l)};
}

// ---------------------------------------------------------------------------
// Monte Carlo

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream_a, std::uint64_t stream_b) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream_a), hi(stream_a), lo(stream_b), hi(stream_b)};
  return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

BornDistribution born_distribution(const StateVector& state, const Observable& obs) {
  if (!obs.hermitian()) throw InvalidArgument("Born sampling requires a Hermitian observable");
  if (!state.is_normalized(1e-9)) throw InvalidArgument("Born sampling requires a normalized state");

  std::vector<BasisState> basis = obs.support();
  for (const auto& [b, a] : state.amplitudes()) basis.push_back(b);
  std::sort(basis.begin(), basis.end());
  basis.erase(std::unique(basis.begin(), basis.end()), basis.end());

  const Eigen::MatrixXcd m = obs.dense(basis);
  Eigen::VectorXcd psi(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i)
    psi(static_cast<Eigen::Index>(i)) = state.amplitude(basis[i]);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Eigen::VectorXcd proj = solver.eigenvectors().adjoint() * psi;

  BornDistribution dist;
  const auto& values = solver.eigenvalues();
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    const double p = std::norm(proj(k));
    // Counting observables have integer spectra; snap the solver's roundoff so
    // eigenstates invert to exact parameters.
    double v = values(k);
    if (std::abs(v - std::round(v)) < 1e-9) v = std::round(v);
    if (!dist.outcomes.empty() && std::abs(v - dist.outcomes.back()) < 1e-9) {
      dist.probabilities.back() += p;
    } else {
      dist.outcomes.push_back(v);
      dist.probabilities.push_back(p);
    }
  }
  // Drop empty eigenspaces so samplers never land on them through roundoff.
  BornDistribution kept;
  double total = 0.0;
  for (std::size_t i = 0; i < dist.outcomes.size(); ++i) {
    if (dist.probabilities[i] < kPruneThreshold) continue;
    kept.outcomes.push_back(dist.outcomes[i]);
    kept.probabilities.push_back(dist.probabilities[i]);
    total += dist.probabilities[i];
  }
  for (auto& p : kept.probabilities) p /= total;
  return kept;
}

namespace {

struct Sampler {
  std::vector<double> outcomes;
  std::vector<double> cumulative;

  explicit Sampler(const BornDistribution& dist) : outcomes(dist.outcomes) {
    cumulative.resize(dist.probabilities.size());
    std::partial_sum(dist.probabilities.begin(), dist.probabilities.end(), cumulative.begin());
    cumulative.back() = 1.0;
  }

  std::size_t draw(std::mt19937_64& rng) const {
    const double u = uniform01(rng);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                 cumulative.size() - 1);
  }
};

EstimationResult monte_carlo(const Protocol& protocol, double truth, std::size_t trials,
                             std::size_t repetitions, std::uint64_t seed, std::uint64_t stream) {
  if (trials == 0) throw InvalidArgument("Monte Carlo needs at least one trial");
  if (repetitions < 2) throw InvalidArgument("Monte Carlo needs at least two repetitions");

  const auto dist = born_distribution(protocol.prepare(truth), protocol.observable);
  const Sampler sampler(dist);

  EstimationResult out;
  out.method = EstimationMethod::monte_carlo;
  out.resources = trials;
  out.photons_per_trial = protocol.photons_per_trial;
  out.repetitions = repetitions;
  out.seed = seed;

  std::vector<double> estimates(repetitions);
  for (std::size_t r = 0; r < repetitions; ++r) {
    auto rng = stream_rng(seed, stream, r);
    double sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) sum += sampler.outcomes[sampler.draw(rng)];
    double mean = sum / static_cast<double>(trials);
    if (mean < protocol.mean_min - 1e-12 || mean > protocol.mean_max + 1e-12) out.clamped = true;
    mean = std::clamp(mean, protocol.mean_min, protocol.mean_max);
    estimates[r] = protocol.invert(mean);
  }

  const double n = static_cast<double>(repetitions);
  const double avg = std::accumulate(estimates.begin(), estimates.end(), 0.0) / n;
  double ss = 0.0;
  for (double e : estimates) ss += (e - avg) * (e - avg);
  out.estimate = avg;
  out.uncertainty = std::sqrt(ss / (n - 1.0));
  return out;
}

}  // namespace

std::vector<std::size_t> sample_counts(const BornDistribution& dist, std::size_t samples,
                                       std::mt19937_64& rng) {
  if (dist.outcomes.empty()) throw InvalidArgument("empty Born distribution");
  const Sampler sampler(dist);
  std::vector<std::size_t> counts(dist.outcomes.size(), 0);
  for (std::size_t i = 0; i < samples; ++i) ++counts[sampler.draw(rng)];
  return counts;
}

EstimationResult run_monte_carlo(const Protocol& protocol, double truth, std::size_t trials,
                                 std::size_t repetitions, std::uint64_t seed) {
  return monte_carlo(protocol, truth, trials, repetitions, seed, 0);
}

// ---------------------------------------------------------------------------
// Scaling

ScalingFit fit_scaling(std::vector<ScalingPoint> points) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : points) {
    if (!(p.resources > 0.0) || !(p.uncertainty > 0.0))
      throw InvalidArgument("scaling fit needs positive resources and uncertainties");
    xs.push_back(std::log(p.resources));
    ys.push_back(std::log(p.uncertainty));
  }
  auto distinct = xs;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 4) throw InvalidArgument("scaling fit needs at least four distinct points");

  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  ScalingFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ssr += r * r;
  }
  fit.slope_error = xs.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
  fit.points = std::move(points);
  return fit;
}

ScalingFit scaling_experiment(ScalingFamily family, std::span<const int> grid,
                              const ScalingOptions& options, std::uint64_t seed) {
  std::vector<ScalingPoint> points;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const int n = grid[g];
    if (n < 1) throw InvalidArgument("scaling grid values must be >= 1");
    ScalingPoint pt;
    pt.resources = n;
    if (family == ScalingFamily::independent_photons) {
      const auto protocol = single_photon_protocol();
      const double phi = kPi / 2.0;
      pt.uncertainty = monte_carlo(protocol, phi, static_cast<std::size_t>(n), options.repetitions,
                                   seed, g)
                           .uncertainty;
      pt.analytic = propagate_uncertainty(protocol.curve, phi, static_cast<std::size_t>(n));
    } else {
      const auto protocol = noon_protocol(n);
      const double phi = kPi / (2.0 * n);
      const std::size_t m = options.trials_per_repetition;
      // Per-shot spread: the repetition spread of an M-trial mean times sqrt(M).
      pt.uncertainty = monte_carlo(protocol, phi, m, options.repetitions, seed, g).uncertainty *
                       std::sqrt(static_cast<double>(m));
      pt.analytic = propagate_uncertainty(protocol.curve, phi);
    }
    points.push_back(pt);
  }
  return fit_scaling(std::move(points));
}

// ---------------------------------------------------------------------------
// Ramsey

RamseyResult ramsey_frequency_estimate(double omega, double t, const RamseyProtocol& protocol) {
  if (!(t > 0.0)) throw InvalidArgument("Ramsey interrogation time must be positive");
  if (protocol.atoms < 1) throw InvalidArgument("Ramsey protocol needs at least one atom");
  RamseyResult out;
  out.phase = omega * t;
  out.estimate.method = EstimationMethod::analytic;
  out.estimate.photons_per_trial = protocol.entangled ? protocol.atoms : 1;
  if (!protocol.entangled) {
    auto space = upper_branch_space();
    out.fringe = expectation(mz_branch_state(space, out.phase), observable_a(space));
    out.estimate.resources = static_cast<std::size_t>(protocol.atoms);
    out.estimate.estimate = std::acos(clamp_unit(out.fringe)) / t;
    out.estimate.uncertainty =
        propagate_uncertainty(independent_photon_curve(), out.phase,
                              static_cast<std::size_t>(protocol.atoms)) / t;
  } else {
    const int n = protocol.atoms;
    auto space = FockSpace::make({ModeLabel::level(0), ModeLabel::level(1)}, n);
    out.fringe = expectation(phased_noon_state(space, n, out.phase),
                             observable_b(space, ModeLabel::level(0), ModeLabel::level(1), n));
    out.estimate.resources = 1;
    out.estimate.estimate = std::acos(clamp_unit(out.fringe)) / (n * t);
    out.estimate.uncertainty = propagate_uncertainty(noon_curve(n), out.phase) / t;
  }
  return out;
}

}  // namespace qsense
