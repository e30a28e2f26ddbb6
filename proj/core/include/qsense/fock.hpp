#pragma once

// Truncated multimode bosonic Fock space.
//
// A FockSpace is a sorted set of distinguishable modes plus a cap N_max on the
// total photon number. States and operators are sparse maps keyed by
// BasisState, the occupation vector aligned with the space's mode order.

#include <compare>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qsense/error.hpp"

namespace qsense {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

// Amplitudes with magnitude below this are dropped after every operation.
inline constexpr double kPruneThreshold = 1e-15;
inline constexpr double kNormTolerance = 1e-12;

enum class ModeKind : std::uint8_t { path, oam, frequency_bin, two_level };

std::string to_string(ModeKind kind);

// A distinguishable optical mode. `port` names the spatial channel the mode
// travels in (interferometer arm, detector, signal/idler beam); `index` is the
// identifier within the kind (path id, OAM charge l, frequency bin, level).
struct ModeLabel {
  ModeKind kind = ModeKind::path;
  int port = 0;
  int index = 0;

  auto operator<=>(const ModeLabel&) const = default;

  static ModeLabel path(int index) { return {ModeKind::path, 0, index}; }
  static ModeLabel oam(int port, int charge) { return {ModeKind::oam, port, charge}; }
  static ModeLabel frequency(int port, int bin) { return {ModeKind::frequency_bin, port, bin}; }
  static ModeLabel level(int index) { return {ModeKind::two_level, 0, index}; }
};

std::string to_string(const ModeLabel& mode);

struct ModeLabelHash {
  std::size_t operator()(const ModeLabel& m) const noexcept;
};

// Occupation numbers, one per mode of the owning space, in space order.
class BasisState {
 public:
  BasisState() = default;
  explicit BasisState(std::vector<std::uint16_t> counts);

  int count(std::size_t mode_position) const { return counts_.at(mode_position); }
  int total() const { return total_; }
  std::size_t size() const { return counts_.size(); }
  std::span<const std::uint16_t> counts() const { return counts_; }

  BasisState with_count(std::size_t mode_position, int n) const;

  auto operator<=>(const BasisState& other) const { return counts_ <=> other.counts_; }
  bool operator==(const BasisState& other) const { return counts_ == other.counts_; }

 private:
  std::vector<std::uint16_t> counts_;
  int total_ = 0;
};

class FockSpace;
using SpacePtr = std::shared_ptr<const FockSpace>;

class FockSpace {
 public:
  // Spaces larger than this refuse explicit basis enumeration.
  static constexpr std::uint64_t kEnumerationLimit = 2'000'000;

  FockSpace(std::vector<ModeLabel> modes, int max_photons);

  static SpacePtr make(std::vector<ModeLabel> modes, int max_photons);

  std::span<const ModeLabel> modes() const { return modes_; }
  std::size_t mode_count() const { return modes_.size(); }
  int max_photons() const { return max_photons_; }

  std::optional<std::size_t> find(const ModeLabel& mode) const;
  bool contains(const ModeLabel& mode) const { return find(mode).has_value(); }
  // Throws MissingModeError.
  std::size_t position(const ModeLabel& mode) const;

  // Number of basis states with total photon number <= N_max; saturates at
  // UINT64_MAX.
  std::uint64_t dimension() const;

  // All basis states in lexicographic order of their occupation vectors.
  std::vector<BasisState> basis() const;

  BasisState vacuum() const;
  // Builds a basis state from (mode, count) pairs; unspecified modes are empty.
  BasisState state(std::span<const std::pair<ModeLabel, int>> occupations) const;
  BasisState state(std::initializer_list<std::pair<ModeLabel, int>> occupations) const;

  // Canonical list form: (mode, n) pairs sorted by mode, zero counts omitted.
  std::vector<std::pair<ModeLabel, int>> occupations(const BasisState& b) const;

  bool admits(const BasisState& b) const;

 private:
  std::vector<ModeLabel> modes_;
  int max_photons_;
};

// Default truncation for a space that will hold prepared states of at most
// `prepared_photons` photons.
int default_truncation(int prepared_photons);

enum class Normalization { normalize, keep };

// Complex amplitudes over basis states of one space. Immutable.
class StateVector {
 public:
  using Amplitudes = std::map<BasisState, cplx>;

  StateVector(SpacePtr space, Amplitudes amplitudes,
              Normalization mode = Normalization::normalize);

  static StateVector basis(SpacePtr space, const BasisState& b);
  static StateVector zero(SpacePtr space);

  const FockSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const Amplitudes& amplitudes() const { return amplitudes_; }
  cplx amplitude(const BasisState& b) const;
  std::size_t support_size() const { return amplitudes_.size(); }

  double norm() const;
  bool is_zero() const { return amplitudes_.empty(); }
  bool is_normalized(double tol = kNormTolerance) const;
  StateVector normalized() const;

  // <this|other>
  cplx inner(const StateVector& other) const;

  StateVector operator+(const StateVector& other) const;
  StateVector operator-(const StateVector& other) const;
  StateVector operator*(cplx factor) const;

 private:
  SpacePtr space_;
  Amplitudes amplitudes_;
};

StateVector operator*(cplx factor, const StateVector& state);

// Ladder action. create() is linear, not unitary: the result is not
// renormalized. Throws TruncationError when a populated component would
// exceed N_max.
StateVector create(const StateVector& state, const ModeLabel& mode);
// The n = 0 component maps to the zero vector.
StateVector annihilate(const StateVector& state, const ModeLabel& mode);

double number_expectation(const StateVector& state, const ModeLabel& mode);
double total_number_expectation(const StateVector& state);

// Linear operator on the truncated space, stored sparsely row -> (col -> v).
class Observable {
 public:
  using Row = std::map<BasisState, cplx>;
  using Elements = std::map<BasisState, Row>;

  static constexpr double kHermiticityTolerance = 1e-12;

  // Throws InvalidArgument if `hermitian` is set but M != M^dagger.
  Observable(SpacePtr space, Elements elements, bool hermitian);

  static Observable identity(SpacePtr space);
  // |v><v|
  static Observable projector(const StateVector& v);
  // |ket><bra|
  static Observable outer(const StateVector& ket, const StateVector& bra);

  const FockSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const Elements& elements() const { return elements_; }
  bool hermitian() const { return hermitian_; }
  cplx element(const BasisState& row, const BasisState& col) const;

  StateVector apply(const StateVector& state) const;
  Observable adjoint() const;
  // Product flags the result Hermitian only if it is numerically so.
  Observable operator*(const Observable& other) const;
  Observable operator+(const Observable& other) const;
  Observable operator*(cplx factor) const;

  double max_hermiticity_defect() const;
  double max_abs_difference(const Observable& other) const;

  // All basis states touched by a nonzero element.
  std::vector<BasisState> support() const;
  Eigen::MatrixXcd dense(std::span<const BasisState> basis) const;

 private:
  SpacePtr space_;
  Elements elements_;
  bool hermitian_;
};

Observable annihilation_operator(SpacePtr space, const ModeLabel& mode);
Observable creation_operator(SpacePtr space, const ModeLabel& mode);
Observable number_operator(SpacePtr space, const ModeLabel& mode);

// Susskind-Glogower exponential-phase operator S = sum_n |n><n+1| and its
// Hermitian part A = S + S^dagger on a single-mode space.
struct PhaseOperators {
  Observable shift;
  Observable cosine;
};

PhaseOperators susskind_glogower(SpacePtr space);
// (N+1)^{-1/2} a, assembled from ladder and number operators.
Observable shift_from_ladder(SpacePtr space);

// Truncated partial sum of the S eigenstate, normalized:
// (N_max+1)^{-1/2} sum_{n<=N_max} e^{i n phi}|n>. S maps it to
// e^{i phi}(same state) up to a tail of norm 1/sqrt(N_max+1).
StateVector truncated_phase_state(SpacePtr space, double phi);
double phase_state_tail_bound(const FockSpace& space);

// <psi|O|psi> for Hermitian O. Rejects non-Hermitian observables; throws
// NumericalError if the imaginary residue exceeds 1e-10.
double expectation(const StateVector& state, const Observable& obs);

struct Spread {
  double variance;
  double uncertainty;
};

Spread variance_and_uncertainty(const StateVector& state, const Observable& obs);

struct SchmidtDecomposition {
  int rank;
  std::vector<double> singular_values;  // descending, all of them
};

inline constexpr double kSchmidtThreshold = 1e-10;

// Bipartition: `side_a` versus every other mode of the space.
SchmidtDecomposition schmidt(const StateVector& state, std::span<const ModeLabel> side_a);

}  // namespace qsense
