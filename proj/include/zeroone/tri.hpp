#pragma once

namespace zeroone {

/// Three-valued logic; Indeterminate never collapses to a definite answer.
enum class Tri { False, True, Indeterminate };

constexpr Tri tri_and(Tri a, Tri b) {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  if (a == Tri::True && b == Tri::True) return Tri::True;
  return Tri::Indeterminate;
}

constexpr Tri tri_or(Tri a, Tri b) {
  if (a == Tri::True || b == Tri::True) return Tri::True;
  if (a == Tri::False && b == Tri::False) return Tri::False;
  return Tri::Indeterminate;
}

constexpr Tri tri_not(Tri a) {
  if (a == Tri::Indeterminate) return a;
  return a == Tri::True ? Tri::False : Tri::True;
}

constexpr const char* to_string(Tri t) {
  switch (t) {
    case Tri::False: return "false";
    case Tri::True: return "true";
    case Tri::Indeterminate: return "indeterminate";
  }
  return "?";
}

}  // namespace zeroone
