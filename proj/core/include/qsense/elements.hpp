#pragma once

// Unitary linear-optical elements acting on StateVectors.
//
// Beam-splitter convention: symmetric, i on reflection. For mixing angle k the
// creation operators transform as
//   a_A^dag -> cos(k) a_A^dag + i sin(k) a_B^dag
//   a_B^dag -> i sin(k) a_A^dag + cos(k) a_B^dag
// and k = pi/4 is the balanced 50:50 splitter. Reflection phases are not
// absorbed anywhere else; fringe formulas in tests are stated in this
// convention.
//
// Dove prism at angle theta: every photon in a registry mode of charge l is
// moved to charge -l on the same port and picks up exp(i 2 l theta).

#include <array>
#include <span>
#include <string>
#include <vector>

#include "qsense/fock.hpp"

namespace qsense {

inline constexpr double kBalancedMixing = kPi / 4.0;

enum class ElementKind { beam_splitter, phase_shift, dove_prism, mirror, swap };

std::string to_string(ElementKind kind);

struct ElementSpec {
  ElementKind kind = ElementKind::phase_shift;
  // Mixing angle (beam splitter), phase (phase shift) or prism rotation (Dove),
  // radians. Unused by mirror and swap.
  double parameter = 0.0;
  std::vector<ModeLabel> targets;

  static ElementSpec beam_splitter(ModeLabel a, ModeLabel b, double mixing = kBalancedMixing);
  static ElementSpec phase_shift(ModeLabel mode, double phi);
  static ElementSpec dove_prism(std::vector<ModeLabel> oam_modes, double theta);
  static ElementSpec mirror(std::vector<ModeLabel> modes);
  static ElementSpec swap(ModeLabel a, ModeLabel b);

  // Throws InvalidArgument on a malformed spec.
  void validate() const;
};

// 2x2 single-photon transfer matrix of the beam splitter (rows: output mode).
std::array<std::array<cplx, 2>, 2> beam_splitter_matrix(double mixing);

StateVector apply_beam_splitter(const StateVector& state, const ModeLabel& a, const ModeLabel& b,
                                double mixing = kBalancedMixing);
StateVector apply_phase_shift(const StateVector& state, const ModeLabel& mode, double phi);
// Throws MissingModeError if a populated charge l has no charge -l partner on
// the same port.
StateVector apply_dove_prism(const StateVector& state, std::span<const ModeLabel> registry,
                             double theta);
// Reflection reverses OAM handedness (l -> -l) with no phase; non-OAM targets
// are left alone.
StateVector apply_mirror(const StateVector& state, std::span<const ModeLabel> modes);
StateVector apply_swap(const StateVector& state, const ModeLabel& a, const ModeLabel& b);

StateVector apply_element(const StateVector& state, const ElementSpec& element);

// All OAM-kind modes of the space on the given port.
std::vector<ModeLabel> oam_modes_on_port(const FockSpace& space, int port);

// Ordered element list bound to one space. Below kPrecomposeLimit basis states
// the transform is precomposed into a sparse matrix once; above it, elements
// are applied one after another by ladder algebra.
class Interferometer {
 public:
  static constexpr std::uint64_t kPrecomposeLimit = 10'000;

  Interferometer(SpacePtr space, std::vector<ElementSpec> elements);

  StateVector apply(const StateVector& state) const;
  StateVector apply_sequential(const StateVector& state) const;

  const FockSpace& space() const { return *space_; }
  std::span<const ElementSpec> elements() const { return elements_; }
  bool precomposed() const { return precomposed_; }

 private:
  SpacePtr space_;
  std::vector<ElementSpec> elements_;
  bool precomposed_ = false;
  std::map<BasisState, std::vector<std::pair<BasisState, cplx>>> columns_;
};

Interferometer build_interferometer(SpacePtr space, std::vector<ElementSpec> elements);

}  // namespace qsense
