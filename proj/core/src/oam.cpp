#include "qsense/oam.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "qsense/elements.hpp"

namespace qsense {

void LgModeSpec::validate() const {
  if (p < 0) throw InvalidArgument("LG radial index p must be >= 0");
  if (!(w0 > 0.0)) throw InvalidArgument("LG beam waist must be positive");
  if (!(wavelength > 0.0)) throw InvalidArgument("LG wavelength must be positive");
  if (!std::isfinite(z)) throw InvalidArgument("LG propagation distance must be finite");
}

double LgModeSpec::rayleigh_range() const { return kPi * w0 * w0 / wavelength; }

double LgModeSpec::beam_radius() const {
  const double s = z / rayleigh_range();
  return w0 * std::sqrt(1.0 + s * s);
}

double lg_normalization(int l, int p) {
  const int al = std::abs(l);
  return std::sqrt(2.0 / kPi * std::exp(std::lgamma(p + 1.0) - std::lgamma(p + al + 1.0)));
}

namespace {

// Everything but the e^{-il theta} factor.
cplx lg_radial(const LgModeSpec& spec, double r) {
  const int al = std::abs(spec.l);
  const double w = spec.beam_radius();
  const double x = 2.0 * r * r / (w * w);
  const double radial = lg_normalization(spec.l, spec.p) / w *
                        std::pow(std::sqrt(2.0) * r / w, al) * std::exp(-r * r / (w * w)) *
                        std::assoc_laguerre(static_cast<unsigned>(spec.p), static_cast<unsigned>(al), x);
  if (spec.z == 0.0) return radial;
  const double zr = spec.rayleigh_range();
  const double k = 2.0 * kPi / spec.wavelength;
  const double curvature = -k * r * r * spec.z / (2.0 * (spec.z * spec.z + zr * zr));
  const double gouy = (2.0 * spec.p + al + 1.0) * std::atan(spec.z / zr);
  return std::polar(radial, curvature + gouy);
}

}  // namespace

cplx lg_amplitude(const LgModeSpec& spec, double r, double theta) {
  spec.validate();
  if (r < 0.0) throw InvalidArgument("LG amplitude needs r >= 0");
  return lg_radial(spec, r) * std::polar(1.0, -spec.l * theta);
}

QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
  if (n == 0) throw InvalidArgument("Gauss-Legendre rule needs at least one node");
  if (!(b > a)) throw InvalidArgument("Gauss-Legendre interval must have b > a");
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index k = 1; k < m; ++k) {
    const double kk = static_cast<double>(k);
    const double beta = kk / std::sqrt(4.0 * kk * kk - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) throw NumericalError("Golub-Welsch eigensolve failed");

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double v0 = solver.eigenvectors()(0, k);
    rule.nodes[static_cast<std::size_t>(k)] = mid + half * solver.eigenvalues()(k);
    rule.weights[static_cast<std::size_t>(k)] = 2.0 * v0 * v0 * half;
  }
  return rule;
}

// ---------------------------------------------------------------------------

PolarGrid::PolarGrid(std::size_t n_r, std::size_t n_theta, double r_max)
    : n_theta_(n_theta), r_max_(r_max) {
  if (n_r == 0 || n_theta == 0) throw InvalidArgument("polar grid needs n_r, n_theta >= 1");
  if (!(r_max > 0.0)) throw InvalidArgument("polar grid extent must be positive");
  auto rule = gauss_legendre(n_r, 0.0, r_max);
  radii_ = std::move(rule.nodes);
  area_weights_.resize(n_r);
  for (std::size_t i = 0; i < n_r; ++i) area_weights_[i] = rule.weights[i] * radii_[i] * angular_step();
}

PolarGrid PolarGrid::standard(double w0) {
  return PolarGrid(kDefaultRadial, kDefaultAngular, kDefaultExtent * w0);
}

bool PolarGrid::operator==(const PolarGrid& other) const {
  return n_theta_ == other.n_theta_ && r_max_ == other.r_max_ && radii_ == other.radii_;
}

ObjectProfile::ObjectProfile(PolarGrid grid, Eigen::MatrixXcd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.rows()) != grid_.n_r() ||
      static_cast<std::size_t>(values_.cols()) != grid_.n_theta())
    throw InvalidArgument("object values do not match the grid shape");
  for (Eigen::Index i = 0; i < values_.rows(); ++i)
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
      const double m = std::abs(values_(i, j));
      if (!std::isfinite(m)) throw InvalidArgument("object transmission is not finite");
      if (m > 1.0 + 1e-9)
        throw InvalidArgument("object transmission |f| = " + std::to_string(m) +
                              " exceeds 1; a passive object cannot amplify");
    }
}

ObjectProfile::ObjectProfile(PolarGrid grid, Eigen::MatrixXcd values, Unchecked)
    : grid_(std::move(grid)), values_(std::move(values)) {}

ObjectProfile ObjectProfile::sample(const PolarGrid& grid,
                                    const std::function<cplx(double, double)>& f) {
  Eigen::MatrixXcd v(static_cast<Eigen::Index>(grid.n_r()), static_cast<Eigen::Index>(grid.n_theta()));
  for (std::size_t i = 0; i < grid.n_r(); ++i)
    for (std::size_t j = 0; j < grid.n_theta(); ++j)
      v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f(grid.radius(i), grid.angle(j));
  return ObjectProfile(grid, std::move(v));
}

double ObjectProfile::norm_squared() const {
  double s = 0.0;
  for (std::size_t i = 0; i < grid_.n_r(); ++i)
    s += grid_.area_weight(i) * values_.row(static_cast<Eigen::Index>(i)).squaredNorm();
  return s;
}

void ObjectProfile::write_text(std::ostream& out) const {
  out.precision(17);
  out << grid_.n_r() << ' ' << grid_.n_theta() << ' ' << grid_.r_max() << '\n';
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
      if (j) out << ' ';
      out << values_(i, j).real() << ',' << values_(i, j).imag();
    }
    out << '\n';
  }
}

ObjectProfile ObjectProfile::read_text(std::istream& in) {
  std::size_t n_r = 0;
  std::size_t n_theta = 0;
  double r_max = 0.0;
  if (!(in >> n_r >> n_theta >> r_max)) throw InvalidArgument("object file: bad header");
  PolarGrid grid(n_r, n_theta, r_max);
  Eigen::MatrixXcd v(static_cast<Eigen::Index>(n_r), static_cast<Eigen::Index>(n_theta));
  for (std::size_t i = 0; i < n_r; ++i)
    for (std::size_t j = 0; j < n_theta; ++j) {
      std::string token;
      if (!(in >> token))
        throw InvalidArgument("object file: expected " + std::to_string(n_r * n_theta) +
                              " values, ran out at row " + std::to_string(i));
      const auto comma = token.find(',');
      if (comma == std::string::npos)
        throw InvalidArgument("object file: value '" + token + "' is not a re,im pair");
      try {
        v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            cplx(std::stod(token.substr(0, comma)), std::stod(token.substr(comma + 1)));
      } catch (const std::logic_error&) {
        throw InvalidArgument("object file: cannot parse '" + token + "'");
      }
    }
  std::string extra;
  if (in >> extra) throw InvalidArgument("object file: trailing data after the grid");
  return ObjectProfile(std::move(grid), std::move(v));
}

// ---------------------------------------------------------------------------

ObjectProfile make_disk(const PolarGrid& grid, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("disk radius must be positive");
  return ObjectProfile::sample(grid, [radius](double r, double) { return r <= radius ? 1.0 : 0.0; });
}

ObjectProfile make_lg_superposition(const PolarGrid& grid,
                                    const std::vector<std::pair<LgModeSpec, cplx>>& terms) {
  if (terms.empty()) throw InvalidArgument("LG superposition needs at least one term");
  for (const auto& [spec, c] : terms) spec.validate();
  return ObjectProfile::sample(grid, [&terms](double r, double theta) {
    cplx s{};
    for (const auto& [spec, c] : terms) s += c * lg_amplitude(spec, r, theta);
    return s;
  });
}

ObjectProfile make_petal(const PolarGrid& grid, int q, double width) {
  if (q < 0 || !(width > 0.0)) throw InvalidArgument("petal needs q >= 0 and a positive width");
  return ObjectProfile::sample(grid, [q, width](double r, double theta) {
    return std::cos(q * theta) * std::exp(-r * r / (width * width));
  });
}

namespace {

using Bitmap = std::array<const char*, 7>;

const Bitmap* letter_bitmap(char letter) {
  static const Bitmap f{"#####", "#....", "#....", "####.", "#....", "#....", "#...."};
  static const Bitmap l{"#....", "#....", "#....", "#....", "#....", "#....", "#####"};
  static const Bitmap p{"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."};
  static const Bitmap r{"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"};
  switch (letter) {
    case 'F': return &f;
    case 'L': return &l;
    case 'P': return &p;
    case 'R': return &r;
    default: return nullptr;
  }
}

}  // namespace

ObjectProfile make_letter_mask(const PolarGrid& grid, char letter, double height) {
  const Bitmap* bitmap = letter_bitmap(letter);
  if (!bitmap) throw InvalidArgument(std::string("no bitmap for letter '") + letter + "'");
  if (!(height > 0.0)) throw InvalidArgument("letter height must be positive");
  const double cell = height / 7.0;
  return ObjectProfile::sample(grid, [bitmap, cell](double r, double theta) {
    const double x = r * std::cos(theta) + 2.5 * cell;
    const double y = 3.5 * cell - r * std::sin(theta);
    if (x < 0.0 || y < 0.0) return 0.0;
    const auto col = static_cast<std::size_t>(x / cell);
    const auto row = static_cast<std::size_t>(y / cell);
    if (col >= 5 || row >= 7) return 0.0;
    return (*bitmap)[row][col] == '#' ? 1.0 : 0.0;
  });
}

// ---------------------------------------------------------------------------

cplx SpiralSpectrum::coefficient(int l, int p) const {
  const auto it = coefficients.find({l, p});
  return it == coefficients.end() ? cplx{} : it->second;
}

double SpiralSpectrum::total_power() const {
  double s = 0.0;
  for (const auto& [key, a] : coefficients) s += std::norm(a);
  return s;
}

std::map<int, double> SpiralSpectrum::charge_power() const {
  std::map<int, double> out;
  for (const auto& [key, a] : coefficients) out[key.first] += std::norm(a);
  return out;
}

SpiralSpectrum project_object(const ObjectProfile& object, const ProjectionBasis& basis) {
  if (basis.l_max < 0 || basis.p_max < 0) throw InvalidArgument("l_max and p_max must be >= 0");
  const auto& grid = object.grid();
  if (grid.n_theta() < 4 * static_cast<std::size_t>(basis.l_max))
    throw ResolutionError("angular grid of " + std::to_string(grid.n_theta()) +
                          " points is below the Nyquist bound 4*l_max = " +
                          std::to_string(4 * basis.l_max));
  LgModeSpec probe{0, 0, basis.w0, basis.wavelength, basis.z};
  probe.validate();

  const std::size_t n_r = grid.n_r();
  const std::size_t n_t = grid.n_theta();
  const auto& f = object.values();
  const int p_max = basis.p0_only ? 0 : basis.p_max;

  SpiralSpectrum out;
  out.object_norm = object.norm_squared();
  std::vector<cplx> ring(n_r);
  for (int l = -basis.l_max; l <= basis.l_max; ++l) {
    // Angular sum per ring: sum_j f_ij e^{i l theta_j}.
    std::vector<cplx> twiddle(n_t);
    for (std::size_t j = 0; j < n_t; ++j) twiddle[j] = std::polar(1.0, l * grid.angle(j));
    for (std::size_t i = 0; i < n_r; ++i) {
      cplx s{};
      for (std::size_t j = 0; j < n_t; ++j)
        s += f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * twiddle[j];
      ring[i] = s;
    }
    for (int p = 0; p <= p_max; ++p) {
      LgModeSpec spec = probe;
      spec.l = l;
      spec.p = p;
      cplx a{};
      for (std::size_t i = 0; i < n_r; ++i)
        a += grid.area_weight(i) * std::conj(lg_radial(spec, grid.radius(i))) * ring[i];
      out.coefficients[{l, p}] = a;
    }
  }
  out.residual = out.object_norm - out.total_power();
  return out;
}

ObjectProfile rotate_object(const ObjectProfile& object, double theta0) {
  const auto& grid = object.grid();
  const std::size_t n = grid.n_theta();
  Eigen::MatrixXcd rotated(object.values().rows(), object.values().cols());

  const double shift = theta0 / grid.angular_step();
  if (std::abs(shift - std::round(shift)) < 1e-12) {
    const auto nn = static_cast<long long>(n);
    const auto s = static_cast<long long>(std::llround(shift)) % nn;
    for (std::size_t i = 0; i < grid.n_r(); ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const auto src = ((static_cast<long long>(j) - s) % nn + nn) % nn;
        rotated(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            object.at(i, static_cast<std::size_t>(src));
      }
    return ObjectProfile(grid, std::move(rotated));
  }

  Eigen::FFT<double> fft;
  std::vector<cplx> in(n);
  std::vector<cplx> spec;
  std::vector<cplx> back;
  for (std::size_t i = 0; i < grid.n_r(); ++i) {
    for (std::size_t j = 0; j < n; ++j) in[j] = object.at(i, j);
    fft.fwd(spec, in);
    // Eigen's forward transform uses e^{-i 2 pi k j / n}: bin k holds the
    // e^{+i m theta} component with m = k (k < n/2) or k - n.
    for (std::size_t k = 0; k < n; ++k) {
      const bool nyquist = n % 2 == 0 && k == n / 2;
      const double m = k <= n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
      spec[k] *= nyquist ? cplx(std::cos(m * theta0), 0.0) : std::polar(1.0, -m * theta0);
    }
    fft.inv(back, spec);
    for (std::size_t j = 0; j < n; ++j)
      rotated(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = back[j];
  }
  return ObjectProfile(grid, std::move(rotated), ObjectProfile::Unchecked{});
}

CorrelatedSpectrum correlated_phases(const ObjectProfile& object, const ProjectionBasis& basis,
                                     const std::map<std::pair<int, int>, cplx>& reference) {
  const auto direct = project_object(object, basis);
  const auto m = beam_splitter_matrix(kBalancedMixing);
  const double floor = kZeroChannelThreshold * std::sqrt(std::max(direct.object_norm, 0.0));

  CorrelatedSpectrum out;
  out.spectrum.object_norm = direct.object_norm;
  for (const auto& [key, a] : direct.coefficients) {
    const auto ref_it = reference.find(key);
    const cplx r = ref_it == reference.end() ? cplx{1.0, 0.0} : ref_it->second;
    if (std::abs(r) == 0.0) throw InvalidArgument("reference amplitude must be nonzero");
    cplx sum{};
    for (int k = 0; k < 4; ++k) {
      const double psi = k * kPi / 2.0;
      const cplx rr = r * std::polar(1.0, psi);
      const double ic = std::norm(m[0][0] * a + m[0][1] * rr);
      const double id = std::norm(m[1][0] * a + m[1][1] * rr);
      sum += (ic - id) * std::polar(1.0, psi);
    }
    const cplx rebuilt = kI * sum / (4.0 * std::conj(r));
    out.spectrum.coefficients[key] = rebuilt;
    ChannelPhase ch{key.first, key.second, std::abs(rebuilt), std::nullopt};
    if (ch.magnitude >= floor && ch.magnitude > 0.0) ch.phase = std::arg(rebuilt);
    out.channels.push_back(ch);
  }
  out.spectrum.residual = out.spectrum.object_norm - out.spectrum.total_power();
  return out;
}

int detect_rotational_symmetry(const SpiralSpectrum& spectrum, double threshold) {
  const auto charges = spectrum.charge_power();
  double total = 0.0;
  for (const auto& [l, w] : charges) total += w;
  if (total <= 0.0) return 0;
  int q = 0;
  for (const auto& [l, w] : charges)
    if (w > threshold * total) q = std::gcd(q, std::abs(l));
  return q;
}

DopplerResult rotational_doppler_beat(const DopplerConfig& config) {
  if (!(config.duration > 0.0) || !(config.sample_rate > 0.0))
    throw InvalidArgument("Doppler duration and sample rate must be positive");
  const double shift = std::abs(config.l * config.rotation_rate);  // |l Omega|
  const auto n = static_cast<std::size_t>(std::floor(config.duration * config.sample_rate));
  if (n < 8) throw ResolutionError("Doppler record holds fewer than 8 samples");

  DopplerResult out;
  out.samples = n;
  out.resolution = 2.0 * kPi * config.sample_rate / static_cast<double>(n);
  if (shift == 0.0) {
    out.no_peak = true;
    return out;
  }
  const double beat = 2.0 * shift;
  if (config.sample_rate <= 2.0 * beat / (2.0 * kPi))
    throw ResolutionError("sample rate " + std::to_string(config.sample_rate) +
                          " Hz undersamples the beat; need > " +
                          std::to_string(2.0 * beat / (2.0 * kPi)) + " Hz");
  if (config.duration < 10.0 * 2.0 * kPi / beat)
    throw ResolutionError("record shorter than 10 beat periods");

  if (!std::isfinite(config.carrier)) throw InvalidArgument("Doppler carrier must be finite");
  // Fields at carrier +- l Omega. The common e^{i carrier t} factor is dropped
  // before squaring; evaluating it at optical frequencies would only lose
  // digits.
  const double lw = config.l * config.rotation_rate;
  std::vector<double> signal(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / config.sample_rate;
    signal[k] = std::norm(std::polar(1.0, lw * t) + std::polar(1.0, -lw * t));
  }
  const double mean = std::accumulate(signal.begin(), signal.end(), 0.0) / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(k) / static_cast<double>(n));
    signal[k] = (signal[k] - mean) * hann;
  }
  Eigen::FFT<double> fft;
  std::vector<cplx> spec;
  fft.fwd(spec, signal);
  const std::size_t half = n / 2;
  std::size_t peak = 1;
  for (std::size_t k = 2; k < half; ++k)
    if (std::abs(spec[k]) > std::abs(spec[peak])) peak = k;
  if (std::abs(spec[peak]) < 1e-9 * static_cast<double>(n)) {
    out.no_peak = true;
    return out;
  }
  double offset = 0.0;
  if (peak > 1 && peak + 1 < half) {
    const double a = std::abs(spec[peak - 1]);
    const double b = std::abs(spec[peak]);
    const double c = std::abs(spec[peak + 1]);
    const double denom = a - 2.0 * b + c;
    if (denom != 0.0) offset = 0.5 * (a - c) / denom;
  }
  out.beat = (static_cast<double>(peak) + offset) * out.resolution;
  return out;
}

}  // namespace qsense
