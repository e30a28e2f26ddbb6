#pragma once

// Laguerre-Gauss modes and OAM measurement applications: digital and
// correlated spiral imaging, rotational symmetry detection and the rotational
// Doppler beat.
//
//   u_lp(r, theta, z) = C / w(z) (sqrt(2) r / w(z))^|l| exp(-r^2 / w(z)^2)
//                       L_p^|l|(2 r^2 / w(z)^2)
//                       exp(-i k r^2 z / (2 (z^2 + z_R^2)))
//                       exp(-i l theta + i (2p + |l| + 1) atan(z / z_R))
//
// with C = sqrt(2 p! / (pi (p + |l|)!)), w(z) = w0 sqrt(1 + (z/z_R)^2) and
// z_R = pi w0^2 / lambda.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "qsense/fock.hpp"

namespace qsense {

struct LgModeSpec {
  int l = 0;
  int p = 0;
  double w0 = 1.0;
  double wavelength = 1.0;
  double z = 0.0;

  void validate() const;
  double rayleigh_range() const;
  double beam_radius() const;
};

double lg_normalization(int l, int p);
cplx lg_amplitude(const LgModeSpec& spec, double r, double theta);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [a, b] by the Golub-Welsch eigenvalue method.
QuadratureRule gauss_legendre(std::size_t n, double a, double b);

// Gauss-Legendre in r on [0, r_max] times a uniform (trapezoid) rule in theta.
class PolarGrid {
 public:
  static constexpr std::size_t kDefaultRadial = 128;
  static constexpr std::size_t kDefaultAngular = 256;
  static constexpr double kDefaultExtent = 6.0;  // r_max in units of w0

  PolarGrid(std::size_t n_r, std::size_t n_theta, double r_max);
  static PolarGrid standard(double w0 = 1.0);

  std::size_t n_r() const { return radii_.size(); }
  std::size_t n_theta() const { return n_theta_; }
  double r_max() const { return r_max_; }
  double radius(std::size_t i) const { return radii_[i]; }
  double angle(std::size_t j) const { return angular_step() * static_cast<double>(j); }
  double angular_step() const { return 2.0 * kPi / static_cast<double>(n_theta_); }
  // Area element w_i r_i dtheta.
  double area_weight(std::size_t i) const { return area_weights_[i]; }

  bool operator==(const PolarGrid& other) const;

 private:
  std::size_t n_theta_;
  double r_max_;
  std::vector<double> radii_;
  std::vector<double> area_weights_;
};

// Complex transmission f(r, theta) on a polar grid; rows are radii, columns
// angles. A passive object has |f| <= 1.
class ObjectProfile {
 public:
  ObjectProfile(PolarGrid grid, Eigen::MatrixXcd values);

  static ObjectProfile sample(const PolarGrid& grid,
                              const std::function<cplx(double r, double theta)>& f);

  const PolarGrid& grid() const { return grid_; }
  const Eigen::MatrixXcd& values() const { return values_; }
  cplx at(std::size_t i, std::size_t j) const { return values_(static_cast<Eigen::Index>(i),
                                                                 static_cast<Eigen::Index>(j)); }
  // Integral of |f|^2 over the disk r <= r_max.
  double norm_squared() const;

  // Header line "n_r n_theta r_max", then n_r rows of n_theta "re,im" pairs.
  void write_text(std::ostream& out) const;
  static ObjectProfile read_text(std::istream& in);

 private:
  struct Unchecked {};
  ObjectProfile(PolarGrid grid, Eigen::MatrixXcd values, Unchecked);
  friend ObjectProfile rotate_object(const ObjectProfile& object, double theta0);

  PolarGrid grid_;
  Eigen::MatrixXcd values_;
};

// Synthetic objects.
ObjectProfile make_disk(const PolarGrid& grid, double radius);
ObjectProfile make_lg_superposition(const PolarGrid& grid,
                                    const std::vector<std::pair<LgModeSpec, cplx>>& terms);
// cos(q theta) exp(-r^2 / width^2).
ObjectProfile make_petal(const PolarGrid& grid, int q, double width);
// Block letter on a 5x7 bitmap scaled to `height`, centered on the axis.
// Supported letters: F, L, P, R.
ObjectProfile make_letter_mask(const PolarGrid& grid, char letter, double height);

struct ProjectionBasis {
  double w0 = 1.0;
  double wavelength = 1.0;
  double z = 0.0;
  int l_max = 3;
  int p_max = 2;
  // Only the p = 0 channels are kept, as with single-mode fiber detection.
  bool p0_only = false;
};

struct SpiralSpectrum {
  std::map<std::pair<int, int>, cplx> coefficients;  // (l, p) -> a_lp
  double object_norm = 0.0;                         // ||f||^2
  double residual = 0.0;                            // ||f||^2 - sum |a|^2

  cplx coefficient(int l, int p) const;
  double power(int l, int p) const { return std::norm(coefficient(l, p)); }
  double total_power() const;
  // sum over p of |a_lp|^2.
  std::map<int, double> charge_power() const;
};

// a_lp = sum_ij w_i r_i dtheta conj(u_lp(r_i, theta_j)) f_ij. Throws
// ResolutionError if n_theta < 4 l_max.
SpiralSpectrum project_object(const ObjectProfile& object, const ProjectionBasis& basis);

// f'(r, theta) = f(r, theta - theta0), by band-limited (Fourier) interpolation
// along each ring. Rotations by whole grid steps are exact rolls. Off-grid
// rotations of objects with sharp edges ring slightly (Gibbs), so the result
// is not re-checked for |f| <= 1.
//
// With the e^{-il theta} azimuthal factor, a_lp picks up e^{+i l theta0}.
ObjectProfile rotate_object(const ObjectProfile& object, double theta0);

struct ChannelPhase {
  int l = 0;
  int p = 0;
  double magnitude = 0.0;
  std::optional<double> phase;  // empty when the channel carries no light
};

struct CorrelatedSpectrum {
  SpiralSpectrum spectrum;  // complex amplitudes rebuilt from intensities
  std::vector<ChannelPhase> channels;
};

inline constexpr double kZeroChannelThreshold = 1e-9;

// Correlated spiral imaging. Each channel's object amplitude a is combined on a
// 50:50 splitter with a reference r e^{i psi}, psi in {0, pi/2, pi, 3pi/2}.
// With the splitter convention of elements.hpp the port difference
// D(psi) = I_c - I_d obeys sum_k D(psi_k) e^{i psi_k} = -4i a conj(r), which
// gives a from intensities alone. `reference` defaults to 1 for channels it
// does not list. Channels with |a| < kZeroChannelThreshold * ||f|| are flagged.
CorrelatedSpectrum correlated_phases(const ObjectProfile& object, const ProjectionBasis& basis,
                                     const std::map<std::pair<int, int>, cplx>& reference = {});

// Largest q with all significant weight on charges l = 0 mod q. Channels
// count as significant above 1e-6 of the total power. Returns 0 when only
// l = 0 is significant (continuous symmetry).
int detect_rotational_symmetry(const SpiralSpectrum& spectrum, double threshold = 1e-6);

struct DopplerConfig {
  int l = 1;
  double rotation_rate = 0.0;  // Omega, rad/s
  double carrier = 0.0;        // omega, rad/s; drops out of the intensity
  double duration = 0.0;       // s
  double sample_rate = 0.0;    // samples/s
};

struct DopplerResult {
  double beat = 0.0;        // rad/s
  double resolution = 0.0;  // one DFT bin, rad/s
  bool no_peak = false;
  std::size_t samples = 0;
};

// Intensity of the two reflected components shifted to omega +- l Omega,
// sampled, Hann-windowed and Fourier transformed. Throws ResolutionError when
// sample_rate <= 4 l Omega / (2 pi) or duration < 10 beat periods.
DopplerResult rotational_doppler_beat(const DopplerConfig& config);

}  // namespace qsense
