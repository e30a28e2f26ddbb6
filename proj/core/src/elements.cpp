#include "qsense/elements.hpp"

#include <algorithm>
#include <cmath>

namespace qsense {

std::string to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::beam_splitter: return "beam-splitter";
    case ElementKind::phase_shift: return "phase-shift";
    case ElementKind::dove_prism: return "dove-prism";
    case ElementKind::mirror: return "mirror";
    case ElementKind::swap: return "swap";
  }
  return "?";
}

ElementSpec ElementSpec::beam_splitter(ModeLabel a, ModeLabel b, double mixing) {
  return {ElementKind::beam_splitter, mixing, {a, b}};
}
ElementSpec ElementSpec::phase_shift(ModeLabel mode, double phi) {
  return {ElementKind::phase_shift, phi, {mode}};
}
ElementSpec ElementSpec::dove_prism(std::vector<ModeLabel> oam_modes, double theta) {
  return {ElementKind::dove_prism, theta, std::move(oam_modes)};
}
ElementSpec ElementSpec::mirror(std::vector<ModeLabel> modes) {
  return {ElementKind::mirror, 0.0, std::move(modes)};
}
ElementSpec ElementSpec::swap(ModeLabel a, ModeLabel b) { return {ElementKind::swap, 0.0, {a, b}}; }

void ElementSpec::validate() const {
  if (!std::isfinite(parameter)) throw InvalidArgument(to_string(kind) + ": non-finite parameter");
  switch (kind) {
    case ElementKind::beam_splitter:
    case ElementKind::swap:
      if (targets.size() != 2 || targets[0] == targets[1])
        throw InvalidArgument(to_string(kind) + " needs exactly two distinct modes");
      break;
    case ElementKind::phase_shift:
      if (targets.size() != 1) throw InvalidArgument("phase-shift needs exactly one mode");
      break;
    case ElementKind::dove_prism:
      if (targets.empty()) throw InvalidArgument("dove-prism needs at least one OAM mode");
      for (const auto& m : targets)
        if (m.kind != ModeKind::oam)
          throw InvalidArgument("dove-prism target " + to_string(m) + " is not an OAM mode");
      break;
    case ElementKind::mirror:
      if (targets.empty()) throw InvalidArgument("mirror needs at least one mode");
      break;
  }
}

std::array<std::array<cplx, 2>, 2> beam_splitter_matrix(double mixing) {
  const cplx c = std::cos(mixing);
  const cplx is = kI * std::sin(mixing);
  return {{{c, is}, {is, c}}};
}

namespace {

double log_factorial(int n) { return std::lgamma(n + 1.0); }

double binomial(int n, int k) {
  return std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k));
}

// Integer power of a complex number; std::pow(cplx, int) goes through exp/log.
cplx ipow(cplx z, int n) {
  cplx r{1.0, 0.0};
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

StateVector finish(const StateVector& in, StateVector::Amplitudes out) {
  return StateVector(in.space_ptr(), std::move(out), Normalization::keep);
}

}  // namespace

StateVector apply_beam_splitter(const StateVector& state, const ModeLabel& a, const ModeLabel& b,
                                double mixing) {
  ElementSpec::beam_splitter(a, b, mixing).validate();
  const auto pa = state.space().position(a);
  const auto pb = state.space().position(b);
  const cplx c = std::cos(mixing);
  const cplx is = kI * std::sin(mixing);

  StateVector::Amplitudes out;
  for (const auto& [basis, amp] : state.amplitudes()) {
    const int na = basis.count(pa);
    const int nb = basis.count(pb);
    if (na == 0 && nb == 0) {
      out[basis] += amp;
      continue;
    }
    const int n = na + nb;
    // (c a^dag + is b^dag)^na (is a^dag + c b^dag)^nb |0,0> / sqrt(na! nb!)
    std::vector<cplx> coeff(static_cast<std::size_t>(n) + 1, cplx{});
    for (int j = 0; j <= na; ++j) {
      const cplx left = binomial(na, j) * ipow(c, j) * ipow(is, na - j);
      for (int k = 0; k <= nb; ++k) {
        const cplx right = binomial(nb, k) * ipow(is, k) * ipow(c, nb - k);
        coeff[static_cast<std::size_t>(j + k)] += left * right;
      }
    }
    const double log_in = 0.5 * (log_factorial(na) + log_factorial(nb));
    for (int ka = 0; ka <= n; ++ka) {
      const cplx v = coeff[static_cast<std::size_t>(ka)];
      if (v == cplx{}) continue;
      const double scale = std::exp(0.5 * (log_factorial(ka) + log_factorial(n - ka)) - log_in);
      auto target = basis.with_count(pa, ka).with_count(pb, n - ka);
      out[target] += amp * v * scale;
    }
  }
  return finish(state, std::move(out));
}

StateVector apply_phase_shift(const StateVector& state, const ModeLabel& mode, double phi) {
  ElementSpec::phase_shift(mode, phi).validate();
  const auto pos = state.space().position(mode);
  StateVector::Amplitudes out;
  for (const auto& [basis, amp] : state.amplitudes())
    out[basis] = amp * std::polar(1.0, basis.count(pos) * phi);
  return finish(state, std::move(out));
}

namespace {

// Moves every photon of charge l in `modes` to charge -l, with per-photon phase
// exp(i 2 l theta).
StateVector flip_charges(const StateVector& state, std::span<const ModeLabel> modes, double theta) {
  const auto& space = state.space();
  struct Move {
    std::size_t from;
    std::size_t to;
    int charge;
  };
  std::vector<Move> moves;
  for (const auto& m : modes) {
    if (m.kind != ModeKind::oam) continue;
    const auto from = space.position(m);
    const ModeLabel partner{ModeKind::oam, m.port, -m.index};
    const auto to = space.find(partner);
    if (!to) {
      // Only an error if something actually has to move there.
      for (const auto& [basis, amp] : state.amplitudes())
        if (basis.count(from) > 0)
          throw MissingModeError("Dove prism: mode " + to_string(m) + " is populated but " +
                                 to_string(partner) + " is not in the space");
      continue;
    }
    moves.push_back({from, *to, m.index});
  }

  StateVector::Amplitudes out;
  for (const auto& [basis, amp] : state.amplitudes()) {
    std::vector<std::uint16_t> counts(basis.counts().begin(), basis.counts().end());
    for (const auto& mv : moves) counts[mv.from] = 0;
    double phase = 0.0;
    for (const auto& mv : moves) {
      const int n = basis.count(mv.from);
      counts[mv.to] = static_cast<std::uint16_t>(counts[mv.to] + n);
      phase += 2.0 * mv.charge * theta * n;
    }
    out[BasisState(std::move(counts))] += amp * std::polar(1.0, phase);
  }
  return finish(state, std::move(out));
}

}  // namespace

StateVector apply_dove_prism(const StateVector& state, std::span<const ModeLabel> registry,
                             double theta) {
  ElementSpec::dove_prism({registry.begin(), registry.end()}, theta).validate();
  // A registry must be closed under l -> -l, otherwise photons would pile
  // into modes the prism does not empty.
  for (const auto& m : registry) {
    const ModeLabel partner{ModeKind::oam, m.port, -m.index};
    if (std::find(registry.begin(), registry.end(), partner) == registry.end() &&
        state.space().contains(partner))
      throw InvalidArgument("Dove prism registry holds " + to_string(m) + " but not " +
                            to_string(partner));
  }
  return flip_charges(state, registry, theta);
}

StateVector apply_mirror(const StateVector& state, std::span<const ModeLabel> modes) {
  ElementSpec::mirror({modes.begin(), modes.end()}).validate();
  std::vector<ModeLabel> oam;
  for (const auto& m : modes)
    if (m.kind == ModeKind::oam) oam.push_back(m);
  if (oam.empty()) return state;
  return apply_dove_prism(state, oam, 0.0);
}

StateVector apply_swap(const StateVector& state, const ModeLabel& a, const ModeLabel& b) {
  ElementSpec::swap(a, b).validate();
  const auto pa = state.space().position(a);
  const auto pb = state.space().position(b);
  StateVector::Amplitudes out;
  for (const auto& [basis, amp] : state.amplitudes())
    out[basis.with_count(pa, basis.count(pb)).with_count(pb, basis.count(pa))] += amp;
  return finish(state, std::move(out));
}

StateVector apply_element(const StateVector& state, const ElementSpec& element) {
  switch (element.kind) {
    case ElementKind::beam_splitter:
      return apply_beam_splitter(state, element.targets.at(0), element.targets.at(1),
                                 element.parameter);
    case ElementKind::phase_shift:
      return apply_phase_shift(state, element.targets.at(0), element.parameter);
    case ElementKind::dove_prism:
      return apply_dove_prism(state, element.targets, element.parameter);
    case ElementKind::mirror:
      return apply_mirror(state, element.targets);
    case ElementKind::swap:
      return apply_swap(state, element.targets.at(0), element.targets.at(1));
  }
  throw InvalidArgument("unknown element kind");
}

std::vector<ModeLabel> oam_modes_on_port(const FockSpace& space, int port) {
  std::vector<ModeLabel> out;
  for (const auto& m : space.modes())
    if (m.kind == ModeKind::oam && m.port == port) out.push_back(m);
  return out;
}

// ---------------------------------------------------------------------------

Interferometer::Interferometer(SpacePtr space, std::vector<ElementSpec> elements)
    : space_(std::move(space)), elements_(std::move(elements)) {
  if (!space_) throw InvalidArgument("null Fock space");
  for (const auto& e : elements_) {
    e.validate();
    for (const auto& m : e.targets) space_->position(m);
  }
  if (space_->dimension() < kPrecomposeLimit) {
    precomposed_ = true;
    for (const auto& b : space_->basis()) {
      const auto image = apply_sequential(StateVector::basis(space_, b));
      auto& col = columns_[b];
      col.assign(image.amplitudes().begin(), image.amplitudes().end());
    }
  }
}

StateVector Interferometer::apply_sequential(const StateVector& state) const {
  StateVector current = state;
  for (const auto& e : elements_) current = apply_element(current, e);
  return current;
}

StateVector Interferometer::apply(const StateVector& state) const {
  if (!precomposed_) return apply_sequential(state);
  if (state.space_ptr() != space_ && state.space().modes().size() != space_->mode_count())
    throw InvalidArgument("state does not live in the interferometer's space");
  StateVector::Amplitudes out;
  for (const auto& [b, amp] : state.amplitudes()) {
    auto it = columns_.find(b);
    if (it == columns_.end()) throw InvalidArgument("basis state outside the interferometer space");
    for (const auto& [row, v] : it->second) out[row] += amp * v;
  }
  return StateVector(state.space_ptr(), std::move(out), Normalization::keep);
}

Interferometer build_interferometer(SpacePtr space, std::vector<ElementSpec> elements) {
  return Interferometer(std::move(space), std::move(elements));
}

}  // namespace qsense
