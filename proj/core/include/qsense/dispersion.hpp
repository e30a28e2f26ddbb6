#pragma once

// Frequency-domain propagation of frequency-entangled pairs and the two-photon
// interferometers built on them: HOM dips, dispersion cancellation in the
// one-arm (SKC) and opposite-dispersion (Franson) arrangements, the classical
// pulse-broadening baseline and delay extraction from a dip.
//
// Conventions. A photon at detuning v from w0 crossing a medium picks up
// L * sum_n beta_n v^n / n!. The scanned delay tau sits in arm 1 and adds
// (w0 + v) tau. Splitters follow beam_splitter_matrix().

#include <array>
#include <string>
#include <vector>

#include "qsense/sources.hpp"

namespace qsense {

struct DispersionProfile {
  std::array<double, 4> beta{};  // beta_0 [1/m], beta_1 [s/m], beta_2 [s^2/m], beta_3 [s^3/m]
  double length = 0.0;           // m

  void validate() const;
  // L * sum_n beta_n v^n / n!.
  double phase(double detuning) const;

  static DispersionProfile group_delay(double beta1, double length);
  static DispersionProfile second_order(double beta2, double length);
  static DispersionProfile third_order(double beta3, double length);
};

struct ArmProfiles {
  DispersionProfile arm0;  // signal arm
  DispersionProfile arm1;  // idler / reference arm
};

// Multiplies A(d) by exp(i (phi_0(d) + phi_1(-d))): the signal photon at
// w0 + d crosses arm 0, the idler at w0 - d crosses arm 1.
BiphotonSpectrum propagate(const BiphotonSpectrum& spectrum, const ArmProfiles& arms);

struct Interferogram {
  std::string configuration;      // hom, skc, skc-shared, franson
  std::string scan_unit = "s";
  std::vector<double> scan;       // strictly increasing
  std::vector<double> coincidence;
  // Both photons at detector 0 / detector 1. Empty for timing envelopes.
  std::vector<double> bunching0;
  std::vector<double> bunching1;

  void validate() const;
};

enum class ArmLayout {
  // Signal and idler each travel one arm and meet on a single splitter.
  // Even dispersion orders cancel.
  separate_arms,
  // Both photons enter a Mach-Zehnder through its first splitter and share the
  // arms. Odd orders cancel instead.
  shared_arms,
};

std::string to_string(ArmLayout layout);

// Coincidence and bunching probabilities after the arms and the final
// splitter. Each conjugate pair (+d, -d) is an independent 2x2 amplitude block
// a[p][q] (photon at +d in port p, photon at -d in port q) updated as
// a -> U a U^T per splitter. Throws ResolutionError when the delay step
// exceeds 1 / (4 * rms spectral width).
Interferogram two_photon_interferogram(const BiphotonSpectrum& spectrum, const ArmProfiles& arms,
                                       const std::vector<double>& delays, ArmLayout layout);

Interferogram hom_interferogram(const BiphotonSpectrum& spectrum, const ArmProfiles& arms,
                                const std::vector<double>& delays);

// Dispersive medium in arm 0 only.
Interferogram skc_interferogram(const BiphotonSpectrum& spectrum, const DispersionProfile& medium,
                                const std::vector<double>& delays,
                                ArmLayout layout = ArmLayout::separate_arms);

// Arrival-time-difference distribution of the pair after the arms,
// p(tau) = (bin / 2 pi) |sum_j A'_j sqrt(bin) e^{-i d_j tau}|^2, reported per
// scan step (p(tau) * step).
Interferogram franson_envelope(const BiphotonSpectrum& spectrum, const ArmProfiles& arms,
                               const std::vector<double>& delays);

struct EnvelopeStats {
  double baseline = 0.0;
  double center = 0.0;
  double rms_width = 0.0;
  double kurtosis = 0.0;
};

// Moments of |coincidence - baseline| over the scan, the baseline being the
// mean of the two end points.
EnvelopeStats envelope_stats(const Interferogram& interferogram);

// Root-mean-square width of |A|^2 over detuning.
double spectral_rms_width(const BiphotonSpectrum& spectrum);

struct ClassicalPulse {
  double transform_limited_width = 0.0;  // s
  double width = 0.0;                    // s
  double broadening = 0.0;               // width / transform-limited width
};

// A classical pulse with the single-photon power spectrum |A|^2 crossing the
// medium. Temporal RMS widths come from Fourier synthesis on a zero-padded
// grid. For a Gaussian amplitude exp(-v^2 / (2 s^2)) the broadening factor is
// sqrt(1 + (beta_2 L s^2)^2).
ClassicalPulse classical_baseline(const BiphotonSpectrum& spectrum, const DispersionProfile& medium);

struct DelayEstimate {
  double delay = 0.0;           // s
  double standard_error = 0.0;  // s
  double width = 0.0;           // s, Gaussian sigma of the dip
  double depth = 0.0;
  double baseline = 0.0;
  double residual_rms = 0.0;
};

// Least-squares fit of baseline - depth exp(-(tau - tau0)^2 / (2 width^2)).
// Throws FitError on featureless data or when the fit does not converge.
DelayEstimate extract_delay(const Interferogram& interferogram);

}  // namespace qsense
