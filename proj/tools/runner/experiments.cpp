#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qsense/dispersion.hpp"
#include "qsense/metrology.hpp"
#include "qsense/oam.hpp"

namespace qsense::runner {

namespace {

using I64 = std::int64_t;

void require_fit_points(const std::vector<int>& grid, const std::string& key) {
  if (std::set<int>(grid.begin(), grid.end()).size() < 4)
    throw ConfigError("params." + key + ": the scaling fit needs at least four distinct values");
}

std::uint64_t seed_of(const ResultBundle& b) {
  if (!b.config.seed) throw ConfigError(to_string(b.config.kind) + " is stochastic and needs a seed");
  return *b.config.seed;
}

// ---------------------------------------------------------------------------

void run_sql_scaling(Params& p, ResultBundle& b) {
  const auto grid = p.integers("grid", {16, 32, 64, 128, 256, 512, 1024, 2048, 4096}, 1);
  const int reps = p.integer("repetitions", 500, 2);
  p.finish();
  require_fit_points(grid, "grid");
  const auto fit = scaling_experiment(ScalingFamily::independent_photons, grid,
                                      {.repetitions = static_cast<std::size_t>(reps)}, seed_of(b));
  Table t{"scaling", {{"N", "photons"}, {"delta_phi_analytic", "rad"}, {"delta_phi_mc", "rad"}}, {}};
  for (const auto& pt : fit.points)
    t.add({static_cast<I64>(pt.resources), pt.analytic, pt.uncertainty});
  b.tables.push_back(std::move(t));
  b.metrics["working_point_phi"] = kPi / 2.0;
  b.metrics["slope"] = fit.slope;
  b.metrics["slope_error"] = fit.slope_error;
  b.metrics["expected_slope"] = -0.5;
}

void run_heisenberg_scaling(Params& p, ResultBundle& b) {
  const auto grid = p.integers("n_values", {1, 2, 3, 4, 5}, 1);
  const int reps = p.integer("repetitions", 500, 2);
  const int trials = p.integer("trials_per_repetition", 100, 1);
  p.finish();
  require_fit_points(grid, "n_values");
  const auto fit = scaling_experiment(
      ScalingFamily::noon, grid,
      {.repetitions = static_cast<std::size_t>(reps), .trials_per_repetition = static_cast<std::size_t>(trials)},
      seed_of(b));
  Table t{"scaling", {{"N", "photons"}, {"delta_phi_analytic", "rad"}, {"delta_phi_mc", "rad"}}, {}};
  for (const auto& pt : fit.points)
    t.add({static_cast<I64>(pt.resources), pt.analytic, pt.uncertainty});
  b.tables.push_back(std::move(t));
  b.metrics["slope"] = fit.slope;
  b.metrics["slope_error"] = fit.slope_error;
  b.metrics["expected_slope"] = -1.0;
}

void run_angular(Params& p, ResultBundle& b) {
  const auto apparatus = p.text("apparatus", "pair", {"pair", "noon"});
  const int l = p.integer("l", 2, 1);
  const int photons = p.integer("photons", 2, 1);
  if (apparatus == "pair" && photons != 2)
    throw ConfigError("params.photons: the pair apparatus always uses 2 photons");
  const double half = kPi / (2.0 * photons * l);
  const int points = p.integer("theta_points", 101, 2);
  const double lo = p.number("theta_min", -half);
  const double hi = p.number("theta_max", half);
  p.finish();
  if (!(hi > lo)) throw ConfigError("params.theta_max must exceed params.theta_min");

  const auto protocol = apparatus == "pair" ? angular_pair_protocol(l) : angular_noon_protocol(photons, l);
  const double k = static_cast<double>(photons) * l;
  Table t{"fringe", {{"theta", "rad"}, {"R", "1"}, {"R_model", "1"}}, {}};
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double theta = lo + (hi - lo) * i / (points - 1);
    const double r = expectation(protocol.prepare(theta), protocol.observable);
    const double model = std::pow(std::cos(k * theta), 2);
    worst = std::max(worst, std::abs(r - model));
    t.add({theta, r, model});
  }
  b.tables.push_back(std::move(t));
  const double working = kPi / (4.0 * k);
  b.metrics["max_deviation"] = worst;
  b.metrics["working_point_theta"] = working;
  b.metrics["delta_theta_analytic"] = propagate_uncertainty(protocol.curve, working);
  b.metrics["delta_theta_state"] =
      propagate_uncertainty(state_curve(protocol.prepare, protocol.observable), working);
  b.metrics["delta_theta_bound"] = 1.0 / (2.0 * k);
}

ObjectProfile build_object(Params& o, Params& p) {
  const auto type = o.text("type", "letter", {"letter", "disk", "petal", "lg", "file"});
  if (type == "file") {
    const auto path = o.text("path", "", {});
    o.finish();
    std::ifstream in(path);
    if (!in) throw ConfigError("params.object.path: cannot open '" + path + "'");
    return ObjectProfile::read_text(in);
  }
  const int n_r = p.integer("n_r", static_cast<int>(PolarGrid::kDefaultRadial), 8);
  const int n_theta = p.integer("n_theta", static_cast<int>(PolarGrid::kDefaultAngular), 8);
  const double r_max = p.positive("r_max", PolarGrid::kDefaultExtent);
  const PolarGrid grid(static_cast<std::size_t>(n_r), static_cast<std::size_t>(n_theta), r_max);
  if (type == "letter") {
    const auto letter = o.text("letter", "F", {"F", "L", "P", "R"});
    const double height = o.positive("height", 3.0);
    o.finish();
    return make_letter_mask(grid, letter[0], height);
  }
  if (type == "disk") {
    const double radius = o.positive("radius", 2.0);
    o.finish();
    return make_disk(grid, radius);
  }
  if (type == "petal") {
    const int q = o.integer("q", 3, 0);
    const double width = o.positive("width", 1.5);
    o.finish();
    return make_petal(grid, q, width);
  }
  const auto charges = o.integers("charges", {1, -1}, -1000);
  const int radial = o.integer("p", 0, 0);
  o.finish();
  std::vector<std::pair<LgModeSpec, cplx>> terms;
  const double weight = 1.0 / std::sqrt(static_cast<double>(charges.size()));
  for (int l : charges) terms.push_back({LgModeSpec{l, radial}, weight});
  return make_lg_superposition(grid, terms);
}

void run_spiral(Params& p, ResultBundle& b) {
  Params o = p.block("object");
  const auto object = build_object(o, p);
  p.adopt("object", o);
  ProjectionBasis basis;
  basis.l_max = p.integer("l_max", 10, 0);
  basis.p_max = p.integer("p_max", 2, 0);
  basis.w0 = p.positive("w0", 1.0);
  basis.p0_only = p.boolean("p0_only", false);
  const double theta0 = p.number("rotation", 0.5);
  p.finish();

  const auto direct = project_object(object, basis);
  const auto rotated = project_object(rotate_object(object, theta0), basis);
  const auto correlated = correlated_phases(object, basis);

  Table spectrum{"spectrum",
                 {{"l", "1"}, {"p", "1"}, {"power", "1"}, {"phase", "rad"}, {"power_rotated", "1"},
                  {"phase_rotated", "rad"}, {"correlated_phase", "rad"}},
                 {}};
  double max_power_change = 0.0;
  double max_phase_error = 0.0;
  const double floor = kZeroChannelThreshold * std::sqrt(direct.object_norm);
  std::size_t idx = 0;
  for (const auto& [key, a] : direct.coefficients) {
    const cplx ar = rotated.coefficient(key.first, key.second);
    const auto& ch = correlated.channels[idx++];
    max_power_change = std::max(max_power_change, std::abs(std::norm(ar) - std::norm(a)));
    if (std::abs(a) > floor) {
      // a_lp -> a_lp e^{+i l theta0} with the e^{-il theta} azimuthal factor.
      const cplx ratio = ar / a / std::polar(1.0, key.first * theta0);
      max_phase_error = std::max(max_phase_error, std::abs(std::arg(ratio)));
    }
    spectrum.add({static_cast<I64>(key.first), static_cast<I64>(key.second), std::norm(a), std::arg(a),
                  std::norm(ar), std::arg(ar), ch.phase ? *ch.phase : std::nan("")});
  }
  Table charges{"charges", {{"l", "1"}, {"power", "1"}, {"power_rotated", "1"}}, {}};
  const auto cp = direct.charge_power();
  const auto cpr = rotated.charge_power();
  for (const auto& [l, w] : cp) charges.add({static_cast<I64>(l), w, cpr.at(l)});
  b.tables.push_back(std::move(spectrum));
  b.tables.push_back(std::move(charges));
  b.metrics["object_norm"] = direct.object_norm;
  b.metrics["residual"] = direct.residual;
  b.metrics["symmetry_order"] = detect_rotational_symmetry(direct);
  b.metrics["max_power_change"] = max_power_change;
  b.metrics["max_phase_error"] = max_phase_error;
}

void run_doppler(Params& p, ResultBundle& b) {
  const auto ls = p.integers("l_values", {1, 5, 10}, 1);
  const auto rates = p.numbers("omega_values", {0.5, 1.0, 2.0});
  const double duration = p.positive("duration", 200.0);
  const double fs = p.positive("sample_rate", 100.0);
  const double carrier = p.number("carrier", 0.0);
  p.finish();

  Table t{"beats",
          {{"l", "1"}, {"Omega", "rad/s"}, {"beat", "rad/s"}, {"expected", "rad/s"}, {"resolution", "rad/s"}},
          {}};
  std::vector<double> x;
  std::vector<double> y;
  double worst_bins = 0.0;
  for (int l : ls)
    for (double omega : rates) {
      const auto r = rotational_doppler_beat({l, omega, carrier, duration, fs});
      const double expected = 2.0 * l * std::abs(omega);
      t.add({static_cast<I64>(l), omega, r.beat, expected, r.resolution});
      x.push_back(expected);
      y.push_back(r.beat);
      worst_bins = std::max(worst_bins, std::abs(r.beat - expected) / r.resolution);
    }
  b.tables.push_back(std::move(t));
  // R^2 of the least-squares line through (2 l Omega, beat).
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  b.metrics["max_error_bins"] = worst_bins;
  b.metrics["r_squared"] = sxx > 0.0 && syy > 0.0 ? sxy * sxy / (sxx * syy) : std::nan("");
}

void run_dispersion(Params& p, ResultBundle& b) {
  const double sigma = p.positive("sigma", 1e14);
  const double center = p.positive("center_frequency", 2.4e15);
  const int bins = p.integer("bins", 1024, 2);
  const double span = p.positive("span_sigmas", 4.0);
  const double b1 = p.number("beta1_L", 3e-15);
  const double b2 = p.number("beta2_L", 2.0 / (sigma * sigma));
  const double b3 = p.number("beta3_L", 3.0 / (sigma * sigma * sigma));
  const int points = p.integer("delay_points", 401, 6);
  const double step = p.positive("delay_step", 1.0 / (40.0 * sigma));
  p.finish();
  if (bins % 2 != 0) throw ConfigError("params.bins must be even");

  const auto spec = BiphotonSpectrum::gaussian(center, sigma, static_cast<std::size_t>(bins), span);
  std::vector<double> tau(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) tau[static_cast<std::size_t>(i)] = (i - 0.5 * (points - 1)) * step;

  using DP = DispersionProfile;
  const auto hom = hom_interferogram(spec, {}, tau);
  const auto hom_b2 = hom_interferogram(spec, {DP::second_order(b2, 1.0), DP::second_order(b2, 1.0)}, tau);
  const auto skc_b1 = skc_interferogram(spec, DP::group_delay(b1, 1.0), tau);
  const auto skc_b2 = skc_interferogram(spec, DP::second_order(b2, 1.0), tau);
  const auto skc_b3 = skc_interferogram(spec, DP::third_order(b3, 1.0), tau);
  const auto fr = franson_envelope(spec, {}, tau);
  const auto fr_b2 = franson_envelope(spec, {DP::second_order(b2, 1.0), DP::second_order(-b2, 1.0)}, tau);
  const auto fr_one = franson_envelope(spec, {DP::second_order(b2, 1.0), DP{}}, tau);

  Table t{"interferograms",
          {{"tau", "s"}, {"hom", "1"}, {"hom_beta2", "1"}, {"skc_beta1", "1"}, {"skc_beta2", "1"},
           {"skc_beta3", "1"}, {"franson", "1"}, {"franson_beta2", "1"}, {"franson_beta2_one_arm", "1"}},
          {}};
  for (std::size_t i = 0; i < tau.size(); ++i)
    t.add({tau[i], hom.coincidence[i], hom_b2.coincidence[i], skc_b1.coincidence[i], skc_b2.coincidence[i],
           skc_b3.coincidence[i], fr.coincidence[i], fr_b2.coincidence[i], fr_one.coincidence[i]});
  b.tables.push_back(std::move(t));

  const auto e_hom = envelope_stats(hom);
  const auto e_skc2 = envelope_stats(skc_b2);
  const auto e_skc3 = envelope_stats(skc_b3);
  const auto e_skc1 = envelope_stats(skc_b1);
  const auto e_fr = envelope_stats(fr);
  const auto e_fr2 = envelope_stats(fr_b2);
  const auto e_fr1 = envelope_stats(fr_one);
  const auto classical = classical_baseline(spec, DP::second_order(b2, 1.0));
  const auto delay = extract_delay(hom_interferogram(spec, {DP::group_delay(b1, 1.0), DP{}}, tau));
  const auto delay_b2 =
      extract_delay(hom_interferogram(spec, {DP{{0.0, b1, b2, 0.0}, 1.0}, DP{}}, tau));

  auto& m = b.metrics;
  m["hom_rms_width"] = e_hom.rms_width;
  m["hom_visibility"] = 1.0 - *std::min_element(hom.coincidence.begin(), hom.coincidence.end()) / 0.5;
  m["skc_beta2_width_ratio"] = e_skc2.rms_width / e_hom.rms_width;
  m["franson_beta2_width_ratio"] = e_fr2.rms_width / e_fr.rms_width;
  m["franson_one_arm_width_ratio"] = e_fr1.rms_width / e_fr.rms_width;
  m["skc_beta1_center_shift"] = e_skc1.center - e_hom.center;
  m["skc_beta3_kurtosis_change"] = e_skc3.kurtosis / e_hom.kurtosis - 1.0;
  m["classical_broadening"] = classical.broadening;
  m["classical_broadening_closed_form"] = std::sqrt(1.0 + std::pow(b2 * sigma * sigma, 2));
  m["delay"] = delay.delay;
  m["delay_standard_error"] = delay.standard_error;
  m["delay_with_beta2"] = delay_b2.delay;
  m["delay_with_beta2_standard_error"] = delay_b2.standard_error;
}

void run_ramsey(Params& p, ResultBundle& b) {
  const double omega = p.number("omega", 1.0);
  const auto times = p.numbers("times", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7});
  const int atoms = p.integer("atoms", 4, 1);
  p.finish();
  for (double t : times)
    if (!(t > 0.0)) throw ConfigError("params.times: interrogation times must be positive");

  Table t{"ramsey",
          {{"t", "s"}, {"fringe_independent", "1"}, {"omega_hat_independent", "rad/s"},
           {"delta_omega_independent", "rad/s"}, {"fringe_entangled", "1"},
           {"omega_hat_entangled", "rad/s"}, {"delta_omega_entangled", "rad/s"}},
          {}};
  for (double time : times) {
    const auto ind = ramsey_frequency_estimate(omega, time, {atoms, false});
    const auto ent = ramsey_frequency_estimate(omega, time, {atoms, true});
    t.add({time, ind.fringe, ind.estimate.estimate, ind.estimate.uncertainty, ent.fringe,
           ent.estimate.estimate, ent.estimate.uncertainty});
  }
  b.tables.push_back(std::move(t));
  b.metrics["atoms"] = atoms;
  b.metrics["omega"] = omega;
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries{
      {ExperimentKind::sql_scaling, "[phase estimation: shot noise]",
       "Monte Carlo phase uncertainty of N independent photons against 1/sqrt(N)",
       {{"grid", "[16,32,...,4096]", "trial counts N"},
        {"repetitions", "500", "repetitions per grid point"}}},
      {ExperimentKind::heisenberg_scaling, "[phase estimation: NOON states]",
       "Monte Carlo phase uncertainty of N-photon NOON states against 1/N",
       {{"n_values", "[1,2,3,4,5]", "photon numbers N"},
        {"repetitions", "500", "repetitions per N"},
        {"trials_per_repetition", "100", "NOON measurements averaged per repetition"}}},
      {ExperimentKind::angular, "[OAM: angular displacement]",
       "Dove-prism rotation fringe <R>(theta) = cos^2(N l theta) and its angular uncertainty",
       {{"apparatus", "pair", "pair (entangled OAM pair) or noon (N-photon OAM NOON)"},
        {"l", "2", "topological charge"},
        {"photons", "2", "photon number N"},
        {"theta_points", "101", "scan points"},
        {"theta_min", "-pi/(2 N l)", "scan start [rad]"},
        {"theta_max", "pi/(2 N l)", "scan end [rad]"}}},
      {ExperimentKind::spiral, "[OAM: spiral imaging]",
       "LG spectrum of an object, its rotation invariance, correlated phases and symmetry order",
       {{"object", "{type: letter}", "letter | disk | petal | lg | file, with shape keys"},
        {"l_max", "10", "largest charge"},
        {"p_max", "2", "largest radial index"},
        {"w0", "1", "basis waist"},
        {"p0_only", "false", "keep only p = 0 channels"},
        {"rotation", "0.5", "object rotation [rad]"},
        {"n_r", "128", "radial nodes"},
        {"n_theta", "256", "angular nodes"},
        {"r_max", "6", "grid extent"}}},
      {ExperimentKind::doppler, "[OAM: rotational Doppler]",
       "Beat 2 l Omega between +-l components reflected from a rotating body",
       {{"l_values", "[1,5,10]", "charges"},
        {"omega_values", "[0.5,1,2]", "rotation rates [rad/s]"},
        {"duration", "200", "record length [s]"},
        {"sample_rate", "100", "samples per second"},
        {"carrier", "0", "optical frequency [rad/s]; drops out"}}},
      {ExperimentKind::dispersion, "[dispersion cancellation]",
       "HOM, SKC and Franson interferograms with beta_1..3 media, classical baseline, delay fit",
       {{"sigma", "1e14", "spectral amplitude width [rad/s]"},
        {"center_frequency", "2.4e15", "w0 [rad/s]"},
        {"bins", "1024", "detuning bins"},
        {"span_sigmas", "4", "grid half-span in sigma"},
        {"beta1_L", "3e-15", "group delay [s]"},
        {"beta2_L", "2/sigma^2", "second-order phase [s^2]"},
        {"beta3_L", "3/sigma^3", "third-order phase [s^3]"},
        {"delay_points", "401", "delay scan points"},
        {"delay_step", "1/(40 sigma)", "delay step [s]"}}},
      {ExperimentKind::ramsey, "[frequency estimation: Ramsey]",
       "Ramsey frequency estimate and uncertainty for independent and entangled atoms",
       {{"omega", "1", "true frequency [rad/s]"},
        {"times", "[0.1,...,0.7]", "interrogation times [s]"},
        {"atoms", "4", "atom number"}}},
  };
  return entries;
}

std::string catalog_text() {
  std::ostringstream out;
  for (const auto& e : catalog()) {
    out << to_string(e.kind) << "  " << e.topic << (is_stochastic(e.kind) ? "  (seeded)" : "") << "\n";
    out << "    " << e.summary << "\n";
    for (const auto& prm : e.params)
      out << "    " << prm.name << " = " << prm.fallback << "  " << prm.description << "\n";
    out << "\n";
  }
  return out.str();
}

ResultBundle run_experiment(const ExperimentConfig& config) {
  ResultBundle bundle;
  bundle.config = config;
  if (is_stochastic(config.kind) && !config.seed)
    throw ConfigError(to_string(config.kind) + " is stochastic and needs a seed");
  Params params(config.params, "params");
  try {
    switch (config.kind) {
      case ExperimentKind::sql_scaling: run_sql_scaling(params, bundle); break;
      case ExperimentKind::heisenberg_scaling: run_heisenberg_scaling(params, bundle); break;
      case ExperimentKind::angular: run_angular(params, bundle); break;
      case ExperimentKind::spiral: run_spiral(params, bundle); break;
      case ExperimentKind::doppler: run_doppler(params, bundle); break;
      case ExperimentKind::dispersion: run_dispersion(params, bundle); break;
      case ExperimentKind::ramsey: run_ramsey(params, bundle); break;
    }
  } catch (const qsense::InvalidArgument& e) {
    throw ConfigError(std::string("invalid parameter: ") + e.what());
  }
  bundle.resolved_params = params.echo();
  return bundle;
}

}  // namespace qsense::runner
