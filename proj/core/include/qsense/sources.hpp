#pragma once

// Input-state preparation: single photons, truncated coherent states, NOON
// states, OAM-entangled SPDC pairs and frequency-entangled biphotons.

#include <map>
#include <vector>

#include "qsense/fock.hpp"

namespace qsense {

StateVector single_photon(SpacePtr space, const ModeLabel& mode);

struct CoherentState {
  StateVector state;
  // Poisson mass kept by the truncation; the state was divided by its sqrt.
  double retained_mass;
};

inline constexpr double kCoherentTailTolerance = 1e-9;

// Truncated sum_n e^{-|alpha|^2/2} alpha^n / sqrt(n!) |n>, renormalized.
// Throws TruncationError naming the required N_max if the omitted Poisson
// mass is >= 1e-9.
CoherentState coherent_state(SpacePtr space, const ModeLabel& mode, cplx alpha);

// Smallest N_max whose omitted Poisson mass for mean |alpha|^2 is below tol.
int required_truncation(double mean_photons, double tol = kCoherentTailTolerance);

// (|N,0> + |0,N>)/sqrt(2) over modes (a, b).
StateVector noon_state(SpacePtr space, const ModeLabel& a, const ModeLabel& b, int n);

// K_{l,-l} over signal charge l. Radial index p is fixed to 0.
class SpdcOamSpectrum {
 public:
  // Normalizes so that sum |K|^2 = 1.
  explicit SpdcOamSpectrum(std::map<int, cplx> coefficients);

  static SpdcOamSpectrum uniform(int l_max);
  static SpdcOamSpectrum gaussian(int l_max, double width);
  // Keeps only the +-l terms with equal weight.
  static SpdcOamSpectrum filtered(int l);

  const std::map<int, cplx>& coefficients() const { return coefficients_; }
  int l_max() const { return l_max_; }
  SpdcOamSpectrum filter(int l) const;

 private:
  std::map<int, cplx> coefficients_;
  int l_max_ = 0;
};

inline constexpr int kSignalPort = 0;
inline constexpr int kIdlerPort = 1;

// sum_l K_{l,-l} |l>_s |-l>_i with signal modes oam(signal_port, l) and idler
// modes oam(idler_port, -l).
StateVector spdc_oam_pair(SpacePtr space, const SpdcOamSpectrum& spectrum,
                          int signal_port = kSignalPort, int idler_port = kIdlerPort);

// Space holding every charge |l| <= l_max on both ports, N_max = 2.
SpacePtr spdc_oam_space(int l_max, int signal_port = kSignalPort, int idler_port = kIdlerPort);

// Joint spectral amplitude of a frequency-anticorrelated pair: the signal sits
// at w0 + d and the idler at w0 - d for every detuning d of the grid.
// Amplitudes are densities: sum |A|^2 * bin_width = 1. The grid is uniform,
// symmetric about zero, and does not contain d = 0.
struct BiphotonSpectrum {
  double center_frequency = 0.0;  // w0, rad/s
  double bin_width = 0.0;         // rad/s
  std::vector<double> detunings;  // rad/s, strictly increasing
  std::vector<cplx> amplitudes;

  // Checks the grid invariants and the normalization; throws InvalidArgument.
  void validate() const;
  std::size_t size() const { return detunings.size(); }
  // Index of the bin holding -detunings[i].
  std::size_t mirror(std::size_t i) const { return size() - 1 - i; }

  // Midpoint grid of n_bins over [-half_span, half_span] with spectral
  // amplitude envelope exp(-d^2 / (2 sigma^2)).
  static BiphotonSpectrum gaussian(double center_frequency, double sigma, std::size_t n_bins = 1024,
                                   double half_span_sigmas = 4.0);
  // Two bins at +-delta with equal weight.
  static BiphotonSpectrum two_bin(double center_frequency, double delta);
  // Renormalizes an arbitrary amplitude list on a midpoint grid.
  static BiphotonSpectrum from_amplitudes(double center_frequency, double bin_width,
                                          std::vector<cplx> amplitudes);
};

// Fock-space form of the biphoton: signal photon in frequency(signal_port, i),
// idler in frequency(idler_port, mirror(i)); N_max = 2.
StateVector frequency_entangled_pair(const BiphotonSpectrum& spectrum, int signal_port = kSignalPort,
                                     int idler_port = kIdlerPort);

}  // namespace qsense
