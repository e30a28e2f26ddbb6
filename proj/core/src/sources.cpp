#include "qsense/sources.hpp"

#include <cmath>
#include <string>

namespace qsense {

StateVector single_photon(SpacePtr space, const ModeLabel& mode) {
  if (space->max_photons() < 1) throw TruncationError("single photon needs N_max >= 1");
  const auto b = space->state({{mode, 1}});
  return StateVector::basis(std::move(space), b);
}

namespace {

double log_poisson(double mean, int n) {
  if (mean == 0.0) return n == 0 ? 0.0 : -INFINITY;
  return -mean + n * std::log(mean) - std::lgamma(n + 1.0);
}

// Poisson mass above n_max, summed term by term past the mode.
double poisson_tail(double mean, int n_max) {
  double tail = 0.0;
  for (int n = n_max + 1;; ++n) {
    const double term = std::exp(log_poisson(mean, n));
    tail += term;
    if (n > mean && term < 1e-30 * std::max(tail, 1e-300)) break;
    if (n > n_max + 100000) break;
  }
  return tail;
}

}  // namespace

int required_truncation(double mean_photons, double tol) {
  int n = 0;
  while (poisson_tail(mean_photons, n) >= tol) ++n;
  return n;
}

CoherentState coherent_state(SpacePtr space, const ModeLabel& mode, cplx alpha) {
  const double mean = std::norm(alpha);
  const int n_max = space->max_photons();
  const double tail = poisson_tail(mean, n_max);
  if (tail >= kCoherentTailTolerance)
    throw TruncationError("coherent state with |alpha|^2=" + std::to_string(mean) +
                          " loses Poisson mass " + std::to_string(tail) + " at N_max=" +
                          std::to_string(n_max) + "; required N_max=" +
                          std::to_string(required_truncation(mean)));

  const auto pos = space->position(mode);
  const double mag = std::abs(alpha);
  const double arg = std::arg(alpha);
  StateVector::Amplitudes amps;
  double kept = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    if (mag == 0.0 && n > 0) break;
    const double log_mag = -0.5 * mean + (n == 0 ? 0.0 : n * std::log(mag)) - 0.5 * std::lgamma(n + 1.0);
    const double m = std::exp(log_mag);
    kept += m * m;
    amps[space->vacuum().with_count(pos, n)] = std::polar(m, n * arg);
  }
  return {StateVector(std::move(space), std::move(amps)), kept};
}

StateVector noon_state(SpacePtr space, const ModeLabel& a, const ModeLabel& b, int n) {
  if (n < 0) throw InvalidArgument("NOON photon number must be >= 0");
  if (n > space->max_photons())
    throw TruncationError("NOON state with N=" + std::to_string(n) + " exceeds N_max=" +
                          std::to_string(space->max_photons()));
  if (a == b) throw InvalidArgument("NOON state needs two distinct modes");
  const auto na = space->state({{a, n}});
  const auto nb = space->state({{b, n}});
  StateVector::Amplitudes amps;
  amps[na] += 1.0;
  amps[nb] += 1.0;
  return StateVector(std::move(space), std::move(amps));
}

// ---------------------------------------------------------------------------

SpdcOamSpectrum::SpdcOamSpectrum(std::map<int, cplx> coefficients)
    : coefficients_(std::move(coefficients)) {
  double total = 0.0;
  for (const auto& [l, k] : coefficients_) {
    total += std::norm(k);
    l_max_ = std::max(l_max_, std::abs(l));
  }
  if (total <= 0.0) throw InvalidArgument("SPDC OAM spectrum has no weight");
  const double inv = 1.0 / std::sqrt(total);
  for (auto& [l, k] : coefficients_) k *= inv;
}

SpdcOamSpectrum SpdcOamSpectrum::uniform(int l_max) {
  if (l_max < 0) throw InvalidArgument("l_max must be >= 0");
  std::map<int, cplx> k;
  for (int l = -l_max; l <= l_max; ++l) k[l] = 1.0;
  return SpdcOamSpectrum(std::move(k));
}

SpdcOamSpectrum SpdcOamSpectrum::gaussian(int l_max, double width) {
  if (l_max < 0 || width <= 0.0) throw InvalidArgument("bad Gaussian OAM spectrum parameters");
  std::map<int, cplx> k;
  for (int l = -l_max; l <= l_max; ++l) k[l] = std::exp(-0.5 * l * l / (width * width));
  return SpdcOamSpectrum(std::move(k));
}

SpdcOamSpectrum SpdcOamSpectrum::filtered(int l) {
  if (l == 0) return SpdcOamSpectrum({{0, 1.0}});
  return SpdcOamSpectrum({{l, 1.0}, {-l, 1.0}});
}

SpdcOamSpectrum SpdcOamSpectrum::filter(int l) const {
  std::map<int, cplx> k;
  for (const auto& [charge, value] : coefficients_)
    if (std::abs(charge) == std::abs(l)) k[charge] = value;
  return SpdcOamSpectrum(std::move(k));
}

SpacePtr spdc_oam_space(int l_max, int signal_port, int idler_port) {
  std::vector<ModeLabel> modes;
  for (int l = -l_max; l <= l_max; ++l) {
    modes.push_back(ModeLabel::oam(signal_port, l));
    modes.push_back(ModeLabel::oam(idler_port, l));
  }
  return FockSpace::make(std::move(modes), 2);
}

StateVector spdc_oam_pair(SpacePtr space, const SpdcOamSpectrum& spectrum, int signal_port,
                          int idler_port) {
  if (signal_port == idler_port) throw InvalidArgument("signal and idler need distinct ports");
  StateVector::Amplitudes amps;
  for (const auto& [l, k] : spectrum.coefficients()) {
    const auto b = space->state({{ModeLabel::oam(signal_port, l), 1}, {ModeLabel::oam(idler_port, -l), 1}});
    amps[b] += k;
  }
  return StateVector(std::move(space), std::move(amps));
}

// ---------------------------------------------------------------------------

void BiphotonSpectrum::validate() const {
  const std::size_t n = detunings.size();
  if (n < 2) throw InvalidArgument("biphoton grid needs at least two bins");
  if (amplitudes.size() != n) throw InvalidArgument("biphoton amplitude/grid size mismatch");
  if (!(bin_width > 0.0)) throw InvalidArgument("biphoton bin width must be positive");
  const double tol = 1e-9 * bin_width;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(detunings[i] + detunings[mirror(i)]) > tol)
      throw InvalidArgument("asymmetric detuning grid: bin " + std::to_string(i) +
                            " has no mirror partner");
    if (i > 0 && std::abs(detunings[i] - detunings[i - 1] - bin_width) > 1e-6 * bin_width)
      throw InvalidArgument("detuning grid is not uniform with the declared bin width");
  }
  if (n % 2 != 0) throw InvalidArgument("detuning grid must not contain the zero-detuning bin");
  double total = 0.0;
  for (const auto& a : amplitudes) total += std::norm(a) * bin_width;
  if (std::abs(total - 1.0) > 1e-9)
    throw InvalidArgument("biphoton amplitude is not grid-normalized (sum |A|^2 dw = " +
                          std::to_string(total) + ")");
}

BiphotonSpectrum BiphotonSpectrum::from_amplitudes(double center_frequency, double bin_width,
                                                   std::vector<cplx> amplitudes) {
  const std::size_t n = amplitudes.size();
  if (n < 2 || n % 2 != 0) throw InvalidArgument("biphoton grid needs an even number >= 2 of bins");
  BiphotonSpectrum s;
  s.center_frequency = center_frequency;
  s.bin_width = bin_width;
  s.detunings.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    s.detunings[i] = (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1)) * bin_width;
  double total = 0.0;
  for (const auto& a : amplitudes) total += std::norm(a) * bin_width;
  if (total <= 0.0) throw InvalidArgument("biphoton amplitude has no weight");
  const double inv = 1.0 / std::sqrt(total);
  for (auto& a : amplitudes) a *= inv;
  s.amplitudes = std::move(amplitudes);
  s.validate();
  return s;
}

BiphotonSpectrum BiphotonSpectrum::gaussian(double center_frequency, double sigma,
                                            std::size_t n_bins, double half_span_sigmas) {
  if (!(sigma > 0.0)) throw InvalidArgument("spectral width must be positive");
  const double width = 2.0 * half_span_sigmas * sigma / static_cast<double>(n_bins);
  std::vector<cplx> amps(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    const double d = (static_cast<double>(i) - 0.5 * static_cast<double>(n_bins - 1)) * width;
    amps[i] = std::exp(-0.5 * d * d / (sigma * sigma));
  }
  return from_amplitudes(center_frequency, width, std::move(amps));
}

BiphotonSpectrum BiphotonSpectrum::two_bin(double center_frequency, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("two-bin detuning must be positive");
  return from_amplitudes(center_frequency, 2.0 * delta, {1.0, 1.0});
}

StateVector frequency_entangled_pair(const BiphotonSpectrum& spectrum, int signal_port,
                                     int idler_port) {
  spectrum.validate();
  if (signal_port == idler_port) throw InvalidArgument("signal and idler need distinct ports");
  const std::size_t n = spectrum.size();
  std::vector<ModeLabel> modes;
  modes.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    modes.push_back(ModeLabel::frequency(signal_port, static_cast<int>(i)));
    modes.push_back(ModeLabel::frequency(idler_port, static_cast<int>(i)));
  }
  auto space = FockSpace::make(std::move(modes), 2);
  const double root_bin = std::sqrt(spectrum.bin_width);
  StateVector::Amplitudes amps;
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = space->state({{ModeLabel::frequency(signal_port, static_cast<int>(i)), 1},
                                 {ModeLabel::frequency(idler_port, static_cast<int>(spectrum.mirror(i))), 1}});
    amps[b] += spectrum.amplitudes[i] * root_bin;
  }
  return StateVector(std::move(space), std::move(amps));
}

}  // namespace qsense
