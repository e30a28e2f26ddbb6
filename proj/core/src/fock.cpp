#include "qsense/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace qsense {

std::string to_string(ModeKind kind) {
  switch (kind) {
    case ModeKind::path: return "path";
    case ModeKind::oam: return "oam";
    case ModeKind::frequency_bin: return "freq";
    case ModeKind::two_level: return "level";
  }
  return "?";
}

std::string to_string(const ModeLabel& mode) {
  std::ostringstream os;
  os << to_string(mode.kind) << '[' << mode.port << ':' << mode.index << ']';
  return os.str();
}

std::size_t ModeLabelHash::operator()(const ModeLabel& m) const noexcept {
  std::size_t h = static_cast<std::size_t>(m.kind);
  h = h * 1000003u ^ std::hash<int>{}(m.port);
  h = h * 1000003u ^ std::hash<int>{}(m.index);
  return h;
}

// ---------------------------------------------------------------------------

BasisState::BasisState(std::vector<std::uint16_t> counts) : counts_(std::move(counts)) {
  for (auto c : counts_) total_ += c;
}

BasisState BasisState::with_count(std::size_t mode_position, int n) const {
  if (n < 0) throw InvalidArgument("negative photon count");
  if (n > std::numeric_limits<std::uint16_t>::max()) throw TruncationError("photon count overflow");
  auto counts = counts_;
  counts.at(mode_position) = static_cast<std::uint16_t>(n);
  return BasisState(std::move(counts));
}

// ---------------------------------------------------------------------------

FockSpace::FockSpace(std::vector<ModeLabel> modes, int max_photons)
    : modes_(std::move(modes)), max_photons_(max_photons) {
  if (modes_.empty()) throw InvalidArgument("a Fock space needs at least one mode");
  if (max_photons_ < 0) throw InvalidArgument("negative photon-number truncation");
  std::sort(modes_.begin(), modes_.end());
  if (std::adjacent_find(modes_.begin(), modes_.end()) != modes_.end())
    throw InvalidArgument("duplicate mode label in Fock space");
}

SpacePtr FockSpace::make(std::vector<ModeLabel> modes, int max_photons) {
  return std::make_shared<const FockSpace>(std::move(modes), max_photons);
}

std::optional<std::size_t> FockSpace::find(const ModeLabel& mode) const {
  auto it = std::lower_bound(modes_.begin(), modes_.end(), mode);
  if (it == modes_.end() || *it != mode) return std::nullopt;
  return static_cast<std::size_t>(it - modes_.begin());
}

std::size_t FockSpace::position(const ModeLabel& mode) const {
  if (auto p = find(mode)) return *p;
  throw MissingModeError("mode " + to_string(mode) + " is not in the space");
}

std::uint64_t FockSpace::dimension() const {
  // C(M + N, M), built as C(M + k, k) = C(M + k - 1, k - 1) (M + k) / k.
  // Dividing the gcd out first keeps every step an exact integer product.
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t m = modes_.size();
  std::uint64_t value = 1;
  for (std::uint64_t k = 1; k <= static_cast<std::uint64_t>(max_photons_); ++k) {
    const std::uint64_t g = std::gcd(value, k);
    const std::uint64_t factor = (m + k) / (k / g);
    if (value / g > kMax / factor) return kMax;
    value = value / g * factor;
  }
  return value;
}

std::vector<BasisState> FockSpace::basis() const {
  if (dimension() > kEnumerationLimit)
    throw InvalidArgument("space too large to enumerate (" + std::to_string(dimension()) +
                          " basis states)");
  std::vector<BasisState> out;
  out.reserve(dimension());
  std::vector<std::uint16_t> counts(modes_.size(), 0);
  // Depth-first, first mode varying slowest: yields lexicographic order.
  std::function<void(std::size_t, int)> fill = [&](std::size_t pos, int remaining) {
    if (pos == counts.size()) {
      out.emplace_back(counts);
      return;
    }
    for (int n = 0; n <= remaining; ++n) {
      counts[pos] = static_cast<std::uint16_t>(n);
      fill(pos + 1, remaining - n);
    }
    counts[pos] = 0;
  };
  fill(0, max_photons_);
  return out;
}

BasisState FockSpace::vacuum() const {
  return BasisState(std::vector<std::uint16_t>(modes_.size(), 0));
}

BasisState FockSpace::state(std::span<const std::pair<ModeLabel, int>> occupations) const {
  std::vector<std::uint16_t> counts(modes_.size(), 0);
  for (const auto& [mode, n] : occupations) {
    if (n < 0) throw InvalidArgument("negative photon count");
    counts[position(mode)] += static_cast<std::uint16_t>(n);
  }
  BasisState b(std::move(counts));
  if (b.total() > max_photons_)
    throw TruncationError("basis state holds " + std::to_string(b.total()) +
                          " photons, truncation is " + std::to_string(max_photons_));
  return b;
}

BasisState FockSpace::state(std::initializer_list<std::pair<ModeLabel, int>> occupations) const {
  return state(std::span<const std::pair<ModeLabel, int>>(occupations.begin(), occupations.size()));
}

std::vector<std::pair<ModeLabel, int>> FockSpace::occupations(const BasisState& b) const {
  std::vector<std::pair<ModeLabel, int>> out;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b.count(i) > 0) out.emplace_back(modes_[i], b.count(i));
  return out;
}

bool FockSpace::admits(const BasisState& b) const {
  return b.size() == modes_.size() && b.total() <= max_photons_;
}

int default_truncation(int prepared_photons) { return std::max(1, 2 * prepared_photons); }

// ---------------------------------------------------------------------------

namespace {

void prune(StateVector::Amplitudes& amps) {
  std::erase_if(amps, [](const auto& kv) { return std::abs(kv.second) < kPruneThreshold; });
}

double squared_norm(const StateVector::Amplitudes& amps) {
  double s = 0.0;
  for (const auto& [b, a] : amps) s += std::norm(a);
  return s;
}

void require_same_space(const FockSpace& a, const FockSpace& b) {
  if (&a != &b && (a.max_photons() != b.max_photons() ||
                   !std::equal(a.modes().begin(), a.modes().end(), b.modes().begin(),
                               b.modes().end())))
    throw InvalidArgument("operands live in different Fock spaces");
}

}  // namespace

StateVector::StateVector(SpacePtr space, Amplitudes amplitudes, Normalization mode)
    : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
  if (!space_) throw InvalidArgument("null Fock space");
  for (const auto& [b, a] : amplitudes_) {
    if (b.size() != space_->mode_count())
      throw InvalidArgument("basis state does not match the space's mode count");
    if (b.total() > space_->max_photons())
      throw TruncationError("basis state with " + std::to_string(b.total()) +
                            " photons exceeds truncation " +
                            std::to_string(space_->max_photons()));
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
      throw NumericalError("non-finite amplitude");
  }
  prune(amplitudes_);
  if (mode == Normalization::normalize) {
    const double n2 = squared_norm(amplitudes_);
    if (n2 == 0.0) throw InvalidArgument("cannot normalize the zero vector");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& [b, a] : amplitudes_) a *= inv;
  }
}

StateVector StateVector::basis(SpacePtr space, const BasisState& b) {
  return StateVector(std::move(space), Amplitudes{{b, cplx{1.0, 0.0}}});
}

StateVector StateVector::zero(SpacePtr space) {
  return StateVector(std::move(space), {}, Normalization::keep);
}

cplx StateVector::amplitude(const BasisState& b) const {
  auto it = amplitudes_.find(b);
  return it == amplitudes_.end() ? cplx{} : it->second;
}

double StateVector::norm() const { return std::sqrt(squared_norm(amplitudes_)); }

bool StateVector::is_normalized(double tol) const { return std::abs(norm() - 1.0) <= tol; }

StateVector StateVector::normalized() const {
  return StateVector(space_, amplitudes_, Normalization::normalize);
}

cplx StateVector::inner(const StateVector& other) const {
  require_same_space(*space_, *other.space_);
  const auto& small = amplitudes_.size() <= other.amplitudes_.size() ? amplitudes_ : other.amplitudes_;
  const bool this_small = &small == &amplitudes_;
  cplx s{};
  for (const auto& [b, a] : small) {
    if (this_small) {
      s += std::conj(a) * other.amplitude(b);
    } else {
      s += std::conj(amplitude(b)) * a;
    }
  }
  return s;
}

StateVector StateVector::operator+(const StateVector& other) const {
  require_same_space(*space_, *other.space_);
  Amplitudes out = amplitudes_;
  for (const auto& [b, a] : other.amplitudes_) out[b] += a;
  return StateVector(space_, std::move(out), Normalization::keep);
}

StateVector StateVector::operator-(const StateVector& other) const { return *this + other * -1.0; }

StateVector StateVector::operator*(cplx factor) const {
  Amplitudes out = amplitudes_;
  for (auto& [b, a] : out) a *= factor;
  return StateVector(space_, std::move(out), Normalization::keep);
}

StateVector operator*(cplx factor, const StateVector& state) { return state * factor; }

// ---------------------------------------------------------------------------

StateVector create(const StateVector& state, const ModeLabel& mode) {
  const auto pos = state.space().position(mode);
  const int cap = state.space().max_photons();
  StateVector::Amplitudes out;
  for (const auto& [b, a] : state.amplitudes()) {
    if (b.total() + 1 > cap)
      throw TruncationError("creation on " + to_string(mode) + " would exceed truncation N_max=" +
                            std::to_string(cap));
    const int n = b.count(pos);
    out[b.with_count(pos, n + 1)] += a * std::sqrt(static_cast<double>(n + 1));
  }
  return StateVector(state.space_ptr(), std::move(out), Normalization::keep);
}

StateVector annihilate(const StateVector& state, const ModeLabel& mode) {
  const auto pos = state.space().position(mode);
  StateVector::Amplitudes out;
  for (const auto& [b, a] : state.amplitudes()) {
    const int n = b.count(pos);
    if (n == 0) continue;
    out[b.with_count(pos, n - 1)] += a * std::sqrt(static_cast<double>(n));
  }
  return StateVector(state.space_ptr(), std::move(out), Normalization::keep);
}

double number_expectation(const StateVector& state, const ModeLabel& mode) {
  const auto pos = state.space().position(mode);
  double s = 0.0;
  for (const auto& [b, a] : state.amplitudes()) s += std::norm(a) * b.count(pos);
  return s;
}

double total_number_expectation(const StateVector& state) {
  double s = 0.0;
  for (const auto& [b, a] : state.amplitudes()) s += std::norm(a) * b.total();
  return s;
}

// ---------------------------------------------------------------------------

namespace {

void prune(Observable::Elements& els) {
  for (auto it = els.begin(); it != els.end();) {
    std::erase_if(it->second, [](const auto& kv) { return std::abs(kv.second) < kPruneThreshold; });
    it = it->second.empty() ? els.erase(it) : std::next(it);
  }
}

double hermiticity_defect(const Observable::Elements& els) {
  double worst = 0.0;
  auto lookup = [&](const BasisState& r, const BasisState& c) -> cplx {
    auto row = els.find(r);
    if (row == els.end()) return {};
    auto it = row->second.find(c);
    return it == row->second.end() ? cplx{} : it->second;
  };
  for (const auto& [r, row] : els)
    for (const auto& [c, v] : row) worst = std::max(worst, std::abs(v - std::conj(lookup(c, r))));
  return worst;
}

}  // namespace

Observable::Observable(SpacePtr space, Elements elements, bool hermitian)
    : space_(std::move(space)), elements_(std::move(elements)), hermitian_(hermitian) {
  if (!space_) throw InvalidArgument("null Fock space");
  for (const auto& [r, row] : elements_) {
    if (!space_->admits(r)) throw InvalidArgument("observable row outside the space");
    for (const auto& [c, v] : row)
      if (!space_->admits(c)) throw InvalidArgument("observable column outside the space");
  }
  prune(elements_);
  if (hermitian_ && hermiticity_defect(elements_) > kHermiticityTolerance)
    throw InvalidArgument("observable flagged Hermitian but M != M^dagger");
}

Observable Observable::identity(SpacePtr space) {
  Elements els;
  for (const auto& b : space->basis()) els[b][b] = 1.0;
  return Observable(std::move(space), std::move(els), true);
}

Observable Observable::projector(const StateVector& v) { return outer(v, v); }

Observable Observable::outer(const StateVector& ket, const StateVector& bra) {
  require_same_space(ket.space(), bra.space());
  Elements els;
  for (const auto& [r, a] : ket.amplitudes())
    for (const auto& [c, b] : bra.amplitudes()) els[r][c] += a * std::conj(b);
  const bool herm = hermiticity_defect(els) <= kHermiticityTolerance;
  return Observable(ket.space_ptr(), std::move(els), herm);
}

cplx Observable::element(const BasisState& row, const BasisState& col) const {
  auto r = elements_.find(row);
  if (r == elements_.end()) return {};
  auto it = r->second.find(col);
  return it == r->second.end() ? cplx{} : it->second;
}

StateVector Observable::apply(const StateVector& state) const {
  require_same_space(*space_, state.space());
  StateVector::Amplitudes out;
  for (const auto& [r, row] : elements_) {
    cplx s{};
    for (const auto& [c, v] : row) s += v * state.amplitude(c);
    if (s != cplx{}) out[r] = s;
  }
  return StateVector(space_, std::move(out), Normalization::keep);
}

Observable Observable::adjoint() const {
  Elements els;
  for (const auto& [r, row] : elements_)
    for (const auto& [c, v] : row) els[c][r] = std::conj(v);
  return Observable(space_, std::move(els), hermitian_);
}

Observable Observable::operator*(const Observable& other) const {
  require_same_space(*space_, other.space());
  Elements els;
  for (const auto& [r, row] : elements_) {
    for (const auto& [k, a] : row) {
      auto orow = other.elements_.find(k);
      if (orow == other.elements_.end()) continue;
      for (const auto& [c, b] : orow->second) els[r][c] += a * b;
    }
  }
  prune(els);
  const bool herm = hermiticity_defect(els) <= kHermiticityTolerance;
  return Observable(space_, std::move(els), herm);
}

Observable Observable::operator+(const Observable& other) const {
  require_same_space(*space_, other.space());
  Elements els = elements_;
  for (const auto& [r, row] : other.elements_)
    for (const auto& [c, v] : row) els[r][c] += v;
  prune(els);
  return Observable(space_, std::move(els), hermitian_ && other.hermitian_);
}

Observable Observable::operator*(cplx factor) const {
  Elements els = elements_;
  for (auto& [r, row] : els)
    for (auto& [c, v] : row) v *= factor;
  const bool herm = hermitian_ && std::abs(factor.imag()) == 0.0;
  return Observable(space_, std::move(els), herm);
}

double Observable::max_hermiticity_defect() const { return hermiticity_defect(elements_); }

double Observable::max_abs_difference(const Observable& other) const {
  double worst = 0.0;
  for (const auto& [r, row] : elements_)
    for (const auto& [c, v] : row) worst = std::max(worst, std::abs(v - other.element(r, c)));
  for (const auto& [r, row] : other.elements_)
    for (const auto& [c, v] : row) worst = std::max(worst, std::abs(v - element(r, c)));
  return worst;
}

std::vector<BasisState> Observable::support() const {
  std::vector<BasisState> out;
  for (const auto& [r, row] : elements_) {
    out.push_back(r);
    for (const auto& [c, v] : row) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Eigen::MatrixXcd Observable::dense(std::span<const BasisState> basis) const {
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = element(basis[i], basis[j]);
  return m;
}

// ---------------------------------------------------------------------------

namespace {

Observable ladder(SpacePtr space, const ModeLabel& mode, bool raise) {
  const auto pos = space->position(mode);
  Observable::Elements els;
  for (const auto& b : space->basis()) {
    const int n = b.count(pos);
    if (raise) {
      if (b.total() + 1 > space->max_photons()) continue;
      els[b.with_count(pos, n + 1)][b] = std::sqrt(static_cast<double>(n + 1));
    } else if (n > 0) {
      els[b.with_count(pos, n - 1)][b] = std::sqrt(static_cast<double>(n));
    }
  }
  return Observable(space, std::move(els), false);
}

void require_single_mode(const FockSpace& space, const char* what) {
  if (space.mode_count() != 1)
    throw InvalidArgument(std::string(what) + " needs a single-mode space");
}

}  // namespace

Observable annihilation_operator(SpacePtr space, const ModeLabel& mode) {
  return ladder(std::move(space), mode, false);
}

Observable creation_operator(SpacePtr space, const ModeLabel& mode) {
  return ladder(std::move(space), mode, true);
}

Observable number_operator(SpacePtr space, const ModeLabel& mode) {
  const auto pos = space->position(mode);
  Observable::Elements els;
  for (const auto& b : space->basis())
    if (b.count(pos) > 0) els[b][b] = b.count(pos);
  return Observable(space, std::move(els), true);
}

PhaseOperators susskind_glogower(SpacePtr space) {
  require_single_mode(*space, "susskind_glogower");
  if (space->max_photons() < 1) throw InvalidArgument("susskind_glogower needs N_max >= 1");
  Observable::Elements shift;
  Observable::Elements cosine;
  for (int n = 0; n < space->max_photons(); ++n) {
    const BasisState lo({static_cast<std::uint16_t>(n)});
    const BasisState hi({static_cast<std::uint16_t>(n + 1)});
    shift[lo][hi] = 1.0;
    cosine[lo][hi] = 1.0;
    cosine[hi][lo] = 1.0;
  }
  return {Observable(space, std::move(shift), false), Observable(space, std::move(cosine), true)};
}

Observable shift_from_ladder(SpacePtr space) {
  require_single_mode(*space, "shift_from_ladder");
  const auto mode = space->modes()[0];
  // (N+1)^{-1/2} is diagonal with entries 1/sqrt(n+1).
  Observable::Elements inv_sqrt;
  for (const auto& b : space->basis()) inv_sqrt[b][b] = 1.0 / std::sqrt(b.total() + 1.0);
  Observable scale(space, std::move(inv_sqrt), true);
  return scale * annihilation_operator(space, mode);
}

StateVector truncated_phase_state(SpacePtr space, double phi) {
  require_single_mode(*space, "truncated_phase_state");
  StateVector::Amplitudes amps;
  for (int n = 0; n <= space->max_photons(); ++n)
    amps[BasisState({static_cast<std::uint16_t>(n)})] = std::polar(1.0, n * phi);
  return StateVector(std::move(space), std::move(amps));
}

double phase_state_tail_bound(const FockSpace& space) {
  return 1.0 / std::sqrt(space.max_photons() + 1.0);
}

// ---------------------------------------------------------------------------

double expectation(const StateVector& state, const Observable& obs) {
  if (!obs.hermitian()) throw InvalidArgument("expectation requires a Hermitian observable");
  const cplx value = state.inner(obs.apply(state));
  if (std::abs(value.imag()) >= 1e-10)
    throw NumericalError("expectation has imaginary residue " + std::to_string(value.imag()));
  return value.real();
}

Spread variance_and_uncertainty(const StateVector& state, const Observable& obs) {
  const double mean = expectation(state, obs);
  // <O^2> = ||O psi||^2 for Hermitian O.
  const double second = obs.apply(state).inner(obs.apply(state)).real();
  const double variance = second - mean * mean;
  return {variance, std::sqrt(std::max(variance, 0.0))};
}

SchmidtDecomposition schmidt(const StateVector& state, std::span<const ModeLabel> side_a) {
  const auto& space = state.space();
  std::vector<bool> in_a(space.mode_count(), false);
  for (const auto& m : side_a) in_a[space.position(m)] = true;
  const auto count_a = std::count(in_a.begin(), in_a.end(), true);
  if (count_a == 0 || count_a == static_cast<long>(in_a.size()))
    throw InvalidArgument("Schmidt partition has an empty side");

  std::map<std::vector<std::uint16_t>, Eigen::Index> rows;
  std::map<std::vector<std::uint16_t>, Eigen::Index> cols;
  std::vector<std::tuple<Eigen::Index, Eigen::Index, cplx>> entries;
  for (const auto& [b, amp] : state.amplitudes()) {
    std::vector<std::uint16_t> ka;
    std::vector<std::uint16_t> kb;
    for (std::size_t i = 0; i < b.size(); ++i)
      (in_a[i] ? ka : kb).push_back(static_cast<std::uint16_t>(b.count(i)));
    auto r = rows.try_emplace(std::move(ka), static_cast<Eigen::Index>(rows.size())).first->second;
    auto c = cols.try_emplace(std::move(kb), static_cast<Eigen::Index>(cols.size())).first->second;
    entries.emplace_back(r, c, amp);
  }
  if (entries.empty()) return {0, {}};

  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()),
                                              static_cast<Eigen::Index>(cols.size()));
  for (const auto& [r, c, amp] : entries) m(r, c) = amp;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& sv = svd.singularValues();
  SchmidtDecomposition out{0, {}};
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    out.singular_values.push_back(sv(i));
    if (sv(i) > kSchmidtThreshold) ++out.rank;
  }
  return out;
}

}  // namespace qsense
