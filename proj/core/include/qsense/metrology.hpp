#pragma once

// Phase, angle and frequency estimation protocols.
//
// Every protocol pairs a state family psi(x) with a Hermitian observable O and
// an estimator that inverts <O>(x) on its principal branch. Uncertainties come
// either from error propagation, dx = dO / |d<O>/dx|, or from Monte Carlo
// sampling of projective measurements.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qsense/fock.hpp"

namespace qsense {

enum class EstimationMethod { analytic, monte_carlo };

std::string to_string(EstimationMethod method);

struct EstimationResult {
  double estimate = 0.0;     // radians (phase/angle) or rad/s (frequency)
  double uncertainty = 0.0;
  std::size_t resources = 1;  // trials per estimate
  int photons_per_trial = 1;
  EstimationMethod method = EstimationMethod::analytic;
  std::size_t repetitions = 0;
  std::uint64_t seed = 0;
  // Some sample means fell outside the estimator domain and were clamped.
  bool clamped = false;
};

// --- observables -----------------------------------------------------------

// sigma_x on the {|0>,|1>} occupations of a single-mode space. The mode counts
// photons in the upper interferometer branch, so |0> = |L> and |1> = |U>.
Observable observable_a(SpacePtr space);

// |0,N><N,0| + |N,0><0,N| over modes (a, b).
Observable observable_b(SpacePtr space, const ModeLabel& a, const ModeLabel& b, int n);

// Coincidences with charge +l at one detector and -l at the other:
// |+l>_b|-l>_a <..| + |-l>_b|+l>_a <..|, detectors being OAM ports.
Observable observable_r(SpacePtr space, int detector_a, int detector_b, int l);

// --- error propagation -----------------------------------------------------

inline constexpr double kDerivativeFloor = 1e-8;
inline constexpr double kDerivativeStep = 1e-6;

// Single-trial response of an observable to the parameter x.
struct ResponseCurve {
  std::function<double(double)> mean;
  std::function<double(double)> spread;
  // Left empty when no closed form exists; a central difference is used.
  std::function<double(double)> slope;
};

// dx = sqrt(trials) * spread / (trials * |slope|). Throws StationaryPointError
// when |slope| < kDerivativeFloor.
double propagate_uncertainty(const ResponseCurve& curve, double x, std::size_t trials = 1);

// <A> = cos(phi) with spread |sin(phi)|.
ResponseCurve independent_photon_curve();
// <B_N> = cos(N phi) with spread |sin(N phi)|.
ResponseCurve noon_curve(int n);
// <R> = cos^2(N l theta) with spread |sin(2 N l theta)| / 2.
ResponseCurve angular_curve(int n, int l);
// Mean and spread evaluated on prepared states; slope by central difference.
ResponseCurve state_curve(std::function<StateVector(double)> prepare, Observable observable);

// --- state families --------------------------------------------------------

// Single-mode space counting photons in the upper branch, N_max = 1.
SpacePtr upper_branch_space();
// State reaching the second splitter: (|0> + e^{i phi}|1>)/sqrt(2).
StateVector mz_branch_state(SpacePtr space, double phi);

// Paths 0 and 1 with N_max = n.
SpacePtr noon_space(int n);
// (|0,N> + e^{i N phi}|N,0>)/sqrt(2) over the first two modes of the space:
// a NOON state with phase phi on the first mode.
StateVector phased_noon_state(SpacePtr space, int n, double phi);

// Angular-displacement apparatus for an OAM pair. The filtered pair
// (|l>_s|-l>_i + |-l>_s|l>_i)/sqrt(2) travels with the signal in arm 0 and the
// idler in arm 1. Arm 0 holds the Dove prism under test (angle theta), arm 1 a
// reference Dove prism at angular_reference_angle(l); a 50:50 splitter then
// maps arm 0 to detector a (port 0) and arm 1 to detector b (port 1).
//
// The reference prism equalizes the OAM flips of the two arms (with a flip in
// one arm only the two photons always leave with equal charge and R vanishes)
// and biases the interferometer so that theta = 0 is the bright coincidence
// point, giving <R> = cos^2(2 l theta).
SpacePtr angular_pair_space(int l);
double angular_reference_angle(int l);
StateVector angular_pair_output(SpacePtr space, int l, double theta);

// N-photon generalization: (|N>_{0,l} + |N>_{1,l})/sqrt(2) through Dove prisms
// at theta (arm 0) and 0 (arm 1). R_N projects onto the symmetric
// combination of the flipped branches; <R_N> = cos^2(N l theta).
SpacePtr angular_noon_space(int n, int l);
StateVector angular_noon_output(SpacePtr space, int n, int l, double theta);
Observable observable_r_noon(SpacePtr space, int n, int l);

// --- protocols -------------------------------------------------------------

struct Protocol {
  std::string name;
  int photons_per_trial = 1;
  Observable observable;
  std::function<StateVector(double)> prepare;
  // Sample mean -> parameter estimate, principal branch.
  std::function<double(double)> invert;
  double mean_min = -1.0;
  double mean_max = 1.0;
  ResponseCurve curve;
};

Protocol single_photon_protocol();
Protocol noon_protocol(int n);
Protocol angular_pair_protocol(int l);
Protocol angular_noon_protocol(int n, int l);

// --- Monte Carlo -----------------------------------------------------------

// Reproducible generator for (seed, stream...) built through std::seed_seq,
// so repetitions give identical draws regardless of scheduling.
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream_a, std::uint64_t stream_b = 0);
// Uniform double in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng);

struct BornDistribution {
  std::vector<double> outcomes;       // distinct eigenvalues
  std::vector<double> probabilities;  // Born weights, sum to 1
};

BornDistribution born_distribution(const StateVector& state, const Observable& obs);
std::vector<std::size_t> sample_counts(const BornDistribution& dist, std::size_t samples,
                                       std::mt19937_64& rng);

// Each repetition measures `trials` copies of psi(truth) and inverts the sample
// mean. The estimate is the mean over repetitions and the uncertainty their
// standard deviation; repetitions must be >= 2.
EstimationResult run_monte_carlo(const Protocol& protocol, double truth, std::size_t trials,
                                 std::size_t repetitions, std::uint64_t seed);

// --- scaling ---------------------------------------------------------------

struct ScalingPoint {
  double resources = 0.0;  // N (trials or photons)
  double uncertainty = 0.0;
  double analytic = 0.0;
};

struct ScalingFit {
  std::vector<ScalingPoint> points;
  double slope = 0.0;
  double slope_error = 0.0;
  double intercept = 0.0;
};

// Least-squares slope of log(uncertainty) against log(resources). Needs >= 4
// distinct points with positive uncertainty.
ScalingFit fit_scaling(std::vector<ScalingPoint> points);

enum class ScalingFamily { independent_photons, noon };

struct ScalingOptions {
  std::size_t repetitions = 500;
  // NOON family only: trials per repetition. The independent-photon family
  // uses the grid value itself as the trial count.
  std::size_t trials_per_repetition = 100;
};

// Independent photons sit at phi = pi/2; NOON states at N phi = pi/2.
ScalingFit scaling_experiment(ScalingFamily family, std::span<const int> grid,
                              const ScalingOptions& options, std::uint64_t seed);

// --- Ramsey ----------------------------------------------------------------

struct RamseyProtocol {
  int atoms = 1;
  bool entangled = false;
};

struct RamseyResult {
  EstimationResult estimate;  // estimate and uncertainty in rad/s
  double phase = 0.0;         // w t
  double fringe = 0.0;        // <A> (or <B_N> when entangled)
};

// Ramsey interferometry as a Mach-Zehnder with phase w t. Throws
// InvalidArgument for t <= 0.
RamseyResult ramsey_frequency_estimate(double omega, double t, const RamseyProtocol& protocol);

}  // namespace qsense
