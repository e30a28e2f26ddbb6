#include "qsense/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "qsense/elements.hpp"

namespace qsense {

void DispersionProfile::validate() const {
  for (double b : beta)
    if (!std::isfinite(b)) throw InvalidArgument("dispersion coefficients must be finite");
  if (!(length >= 0.0) || !std::isfinite(length))
    throw InvalidArgument("medium length must be finite and >= 0");
}

double DispersionProfile::phase(double detuning) const {
  const double v = detuning;
  return length * (beta[0] + beta[1] * v + beta[2] * v * v / 2.0 + beta[3] * v * v * v / 6.0);
}

DispersionProfile DispersionProfile::group_delay(double beta1, double length) {
  return {{0.0, beta1, 0.0, 0.0}, length};
}
DispersionProfile DispersionProfile::second_order(double beta2, double length) {
  return {{0.0, 0.0, beta2, 0.0}, length};
}
DispersionProfile DispersionProfile::third_order(double beta3, double length) {
  return {{0.0, 0.0, 0.0, beta3}, length};
}

BiphotonSpectrum propagate(const BiphotonSpectrum& spectrum, const ArmProfiles& arms) {
  spectrum.validate();
  arms.arm0.validate();
  arms.arm1.validate();
  BiphotonSpectrum out = spectrum;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = out.detunings[i];
    out.amplitudes[i] *= std::polar(1.0, arms.arm0.phase(d) + arms.arm1.phase(-d));
  }
  return out;
}

void Interferogram::validate() const {
  if (scan.empty()) throw InvalidArgument("interferogram has no scan points");
  if (coincidence.size() != scan.size())
    throw InvalidArgument("interferogram rate/scan size mismatch");
  for (std::size_t i = 1; i < scan.size(); ++i)
    if (!(scan[i] > scan[i - 1])) throw InvalidArgument("interferogram scan is not strictly increasing");
}

std::string to_string(ArmLayout layout) {
  return layout == ArmLayout::separate_arms ? "separate-arms" : "shared-arms";
}

double spectral_rms_width(const BiphotonSpectrum& spectrum) {
  double s = 0.0;
  double m = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double w = std::norm(spectrum.amplitudes[i]) * spectrum.bin_width;
    s += w;
    m += w * spectrum.detunings[i];
  }
  m /= s;
  double v = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double d = spectrum.detunings[i] - m;
    v += std::norm(spectrum.amplitudes[i]) * spectrum.bin_width * d * d;
  }
  return std::sqrt(v / s);
}

namespace {

void check_delays(const BiphotonSpectrum& spectrum, const std::vector<double>& delays) {
  if (delays.size() < 2) throw InvalidArgument("delay grid needs at least two points");
  double max_step = 0.0;
  for (std::size_t i = 1; i < delays.size(); ++i) {
    const double step = delays[i] - delays[i - 1];
    if (!(step > 0.0)) throw InvalidArgument("delay grid must be strictly increasing");
    max_step = std::max(max_step, step);
  }
  const double limit = 1.0 / (4.0 * spectral_rms_width(spectrum));
  if (max_step > limit)
    throw ResolutionError("delay step " + std::to_string(max_step) +
                          " s is coarser than the resolvable 1/(4 rms bandwidth) = " +
                          std::to_string(limit) + " s");
}

using Block = std::array<std::array<cplx, 2>, 2>;

// a -> U a U^T
Block mix(const Block& a, const std::array<std::array<cplx, 2>, 2>& u) {
  Block out{};
  for (int q = 0; q < 2; ++q)
    for (int r = 0; r < 2; ++r) {
      cplx s{};
      for (int p = 0; p < 2; ++p)
        for (int pp = 0; pp < 2; ++pp) s += u[q][p] * u[r][pp] * a[p][pp];
      out[q][r] = s;
    }
  return out;
}

}  // namespace

Interferogram two_photon_interferogram(const BiphotonSpectrum& spectrum, const ArmProfiles& arms,
                                       const std::vector<double>& delays, ArmLayout layout) {
  spectrum.validate();
  arms.arm0.validate();
  arms.arm1.validate();
  check_delays(spectrum, delays);

  const std::size_t n = spectrum.size();
  const std::size_t half = n / 2;
  const double root_bin = std::sqrt(spectrum.bin_width);
  const auto u = beam_splitter_matrix(kBalancedMixing);

  // Medium phases per port for the photon at +d (index 0) and -d (index 1).
  struct PairPhases {
    double d;
    std::array<std::array<double, 2>, 2> medium;  // [port][sign]
    cplx plus;                                     // A(+d) sqrt(bin)
    cplx minus;                                    // A(-d) sqrt(bin)
  };
  std::vector<PairPhases> pairs;
  pairs.reserve(half);
  for (std::size_t i = half; i < n; ++i) {
    const std::size_t m = spectrum.mirror(i);
    const double d = spectrum.detunings[i];
    PairPhases pp{d,
                  {{{arms.arm0.phase(d), arms.arm0.phase(-d)}, {arms.arm1.phase(d), arms.arm1.phase(-d)}}},
                  spectrum.amplitudes[i] * root_bin,
                  spectrum.amplitudes[m] * root_bin};
    pairs.push_back(pp);
  }

  Interferogram out;
  out.configuration = layout == ArmLayout::separate_arms ? "hom" : "skc-shared";
  out.scan = delays;
  out.coincidence.resize(delays.size());
  out.bunching0.resize(delays.size());
  out.bunching1.resize(delays.size());

  const double w0 = spectrum.center_frequency;
  for (std::size_t k = 0; k < delays.size(); ++k) {
    const double tau = delays[k];
    double coinc = 0.0;
    double b0 = 0.0;
    double b1 = 0.0;
    for (const auto& pp : pairs) {
      // Total phase on port p for the photon of sign s (0: +d, 1: -d).
      std::array<std::array<double, 2>, 2> phi = pp.medium;
      phi[1][0] += (w0 + pp.d) * tau;
      phi[1][1] += (w0 - pp.d) * tau;

      Block a{};
      a[0][1] = pp.plus;
      a[1][0] = pp.minus;
      if (layout == ArmLayout::shared_arms) a = mix(a, u);
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) a[p][q] *= std::polar(1.0, phi[p][0] + phi[q][1]);
      a = mix(a, u);

      coinc += std::norm(a[0][1]) + std::norm(a[1][0]);
      b0 += std::norm(a[0][0]);
      b1 += std::norm(a[1][1]);
    }
    out.coincidence[k] = coinc;
    out.bunching0[k] = b0;
    out.bunching1[k] = b1;
  }
  return out;
}

Interferogram hom_interferogram(const BiphotonSpectrum& spectrum, const ArmProfiles& arms,
                                const std::vector<double>& delays) {
  auto out = two_photon_interferogram(spectrum, arms, delays, ArmLayout::separate_arms);
  out.configuration = "hom";
  return out;
}

Interferogram skc_interferogram(const BiphotonSpectrum& spectrum, const DispersionProfile& medium,
                                const std::vector<double>& delays, ArmLayout layout) {
  auto out = two_photon_interferogram(spectrum, {medium, DispersionProfile{}}, delays, layout);
  out.configuration = layout == ArmLayout::separate_arms ? "skc" : "skc-shared";
  return out;
}

Interferogram franson_envelope(const BiphotonSpectrum& spectrum, const ArmProfiles& arms,
                               const std::vector<double>& delays) {
  const auto dispersed = propagate(spectrum, arms);
  check_delays(spectrum, delays);
  const double root_bin = std::sqrt(dispersed.bin_width);
  const double density = dispersed.bin_width / (2.0 * kPi);

  Interferogram out;
  out.configuration = "franson";
  out.scan = delays;
  out.coincidence.resize(delays.size());
  for (std::size_t k = 0; k < delays.size(); ++k) {
    const double step = k + 1 < delays.size() ? delays[k + 1] - delays[k] : delays[k] - delays[k - 1];
    cplx s{};
    for (std::size_t j = 0; j < dispersed.size(); ++j)
      s += dispersed.amplitudes[j] * root_bin * std::polar(1.0, -dispersed.detunings[j] * delays[k]);
    out.coincidence[k] = density * std::norm(s) * step;
  }
  return out;
}

EnvelopeStats envelope_stats(const Interferogram& interferogram) {
  interferogram.validate();
  const auto& x = interferogram.scan;
  const auto& y = interferogram.coincidence;
  if (x.size() < 3) throw InvalidArgument("envelope statistics need at least three points");
  EnvelopeStats st;
  st.baseline = 0.5 * (y.front() + y.back());
  double w_sum = 0.0;
  double m1 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = std::abs(y[i] - st.baseline);
    w_sum += w;
    m1 += w * x[i];
  }
  if (!(w_sum > 0.0)) throw NumericalError("interferogram has no envelope above its baseline");
  st.center = m1 / w_sum;
  double m2 = 0.0;
  double m4 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = std::abs(y[i] - st.baseline);
    const double d2 = (x[i] - st.center) * (x[i] - st.center);
    m2 += w * d2;
    m4 += w * d2 * d2;
  }
  m2 /= w_sum;
  m4 /= w_sum;
  st.rms_width = std::sqrt(m2);
  st.kurtosis = m4 / (m2 * m2);
  return st;
}

namespace {

// RMS duration of |sum_j c_j e^{-i j bin t}|^2 sampled by a zero-padded FFT.
double synthesized_width(const std::vector<cplx>& coeffs, double bin_width) {
  constexpr std::size_t kPadding = 16;
  const std::size_t n = coeffs.size() * kPadding;
  std::vector<cplx> padded(n, cplx{});
  std::copy(coeffs.begin(), coeffs.end(), padded.begin());
  Eigen::FFT<double> fft;
  std::vector<cplx> field;
  fft.fwd(field, padded);
  const double dt = 2.0 * kPi / (static_cast<double>(n) * bin_width);
  double s = 0.0;
  double m1 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (k < n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n)) * dt;
    const double w = std::norm(field[k]);
    s += w;
    m1 += w * t;
  }
  const double c = m1 / s;
  double m2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (k < n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n)) * dt;
    m2 += std::norm(field[k]) * (t - c) * (t - c);
  }
  return std::sqrt(m2 / s);
}

}  // namespace

ClassicalPulse classical_baseline(const BiphotonSpectrum& spectrum, const DispersionProfile& medium) {
  spectrum.validate();
  medium.validate();
  std::vector<cplx> flat(spectrum.size());
  std::vector<cplx> chirped(spectrum.size());
  for (std::size_t j = 0; j < spectrum.size(); ++j) {
    const double mag = std::abs(spectrum.amplitudes[j]);
    flat[j] = mag;
    chirped[j] = std::polar(mag, medium.phase(spectrum.detunings[j]));
  }
  ClassicalPulse out;
  out.transform_limited_width = synthesized_width(flat, spectrum.bin_width);
  out.width = synthesized_width(chirped, spectrum.bin_width);
  out.broadening = out.width / out.transform_limited_width;
  return out;
}

namespace {

// Gaussian dip in scaled coordinates: y = c - d exp(-(x - x0)^2 / (2 s^2)),
// parameters (c, d, x0, s).
struct DipModel : Eigen::DenseFunctor<double> {
  const Eigen::VectorXd& x;
  const Eigen::VectorXd& y;

  DipModel(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys)
      : Eigen::DenseFunctor<double>(4, static_cast<int>(xs.size())), x(xs), y(ys) {}

  int operator()(const InputType& p, ValueType& f) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double u = (x(i) - p(2)) / p(3);
      f(i) = p(0) - p(1) * std::exp(-0.5 * u * u) - y(i);
    }
    return 0;
  }

  int df(const InputType& p, JacobianType& j) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double u = (x(i) - p(2)) / p(3);
      const double g = std::exp(-0.5 * u * u);
      j(i, 0) = 1.0;
      j(i, 1) = -g;
      j(i, 2) = -p(1) * g * u / p(3);
      j(i, 3) = -p(1) * g * u * u / p(3);
    }
    return 0;
  }
};

}  // namespace

DelayEstimate extract_delay(const Interferogram& interferogram) {
  interferogram.validate();
  const auto n = static_cast<Eigen::Index>(interferogram.scan.size());
  if (n < 6) throw FitError("delay fit needs at least six scan points");

  const double lo = interferogram.scan.front();
  const double hi = interferogram.scan.back();
  const double mid = 0.5 * (lo + hi);
  const double scale = 0.5 * (hi - lo);
  Eigen::VectorXd x(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = (interferogram.scan[static_cast<std::size_t>(i)] - mid) / scale;
    y(i) = interferogram.coincidence[static_cast<std::size_t>(i)];
  }

  const double base = 0.5 * (y(0) + y(n - 1));
  Eigen::Index at_min = 0;
  y.minCoeff(&at_min);
  const double depth = base - y(at_min);
  const double spread = y.maxCoeff() - y.minCoeff();
  if (!(depth > 1e-9) || !(spread > 1e-9))
    throw FitError("interferogram is featureless: no dip below the baseline");

  // Half-depth crossing gives the initial width.
  double half_width = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (base - y(i) >= 0.5 * depth) half_width = std::max(half_width, std::abs(x(i) - x(at_min)));
  Eigen::VectorXd p(4);
  p << base, depth, x(at_min), std::max(half_width / 1.1774, 2.0 / static_cast<double>(n));

  DipModel model(x, y);
  Eigen::LevenbergMarquardt<DipModel> lm(model);
  lm.setMaxfev(2000);
  const auto status = lm.minimize(p);
  using Space = Eigen::LevenbergMarquardtSpace::Status;
  if (status == Space::ImproperInputParameters || status == Space::TooManyFunctionEvaluation ||
      status == Space::UserAsked || !p.allFinite())
    throw FitError("delay fit did not converge (status " + std::to_string(static_cast<int>(status)) + ")");
  if (!(p(1) > 0.0)) throw FitError("delay fit converged to a peak, not a dip");

  Eigen::VectorXd resid(n);
  model(p, resid);
  Eigen::MatrixXd jac(n, 4);
  model.df(p, jac);
  const double ssr = resid.squaredNorm();
  const double s2 = ssr / static_cast<double>(n - 4);
  const Eigen::MatrixXd normal = jac.transpose() * jac;
  const Eigen::MatrixXd cov = s2 * normal.ldlt().solve(Eigen::MatrixXd::Identity(4, 4));

  DelayEstimate out;
  out.delay = mid + p(2) * scale;
  // Noiseless data leave only roundoff in the residual; the floor keeps the
  // reported error at the conditioning level of the scaled fit.
  const double floor = 1e-12 * scale;
  out.standard_error = std::max(std::sqrt(std::max(cov(2, 2), 0.0)) * scale, floor);
  out.width = std::abs(p(3)) * scale;
  out.depth = p(1);
  out.baseline = p(0);
  out.residual_rms = std::sqrt(ssr / static_cast<double>(n));
  return out;
}

}  // namespace qsense
