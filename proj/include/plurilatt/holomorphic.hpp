#pragma once

#include "plurilatt/lagrangian.hpp"

namespace plurilatt {

// Conjugate field construction. For a harmonic u the 1-form below is closed
// and defines v up to one constant per vertex parity class ("bi-constant"):
//   v(m+e_j) - v(m+e_i) = alpha (u_ij - u) + beta (u_i - u_j)
//   v(m+e_i+e_j) - v(m) = beta (u_ij - u) + gamma (u_i - u_j)
// on every canonical face with diagonal coefficients (alpha, beta, gamma).
struct ConjugateAnchors {
  Point black;  // even coordinate sum
  Cx black_value;
  Point white;  // odd coordinate sum
  Cx white_value;
};

struct ConjugateResult {
  VertexField v;
  double max_closure_rel = 0.0;
  Point worst;
};

ConjugateResult conjugate(const LagrangianField& L, const QuadSurface& S, const VertexField& u,
                          const ConjugateAnchors& anchors, const Tolerances& tol = {});

// f_ij - f - i p (f_i - f_j) on one face, relative to the term magnitudes.
double cauchy_riemann_rel_residual(Cx p, Cx f, Cx f_i, Cx f_j, Cx f_ij);

struct CrStats {
  double max_rel = 0.0;
  Quad worst;
};

CrStats cauchy_riemann_stats(const PlaquetteField<Cx>& p, const std::vector<Quad>& faces,
                             const VertexField& f);

// Two-component Moutard propagation across one cube: given 2x2 coefficient
// matrices on all six faces and the pair w = (u, v) at the four bottom slots,
// computes the remaining slots. The far corner is reached along three routes;
// their relative spread is reported and must stay within tolerance.
struct MoutardPair {
  Cx u, v;
};

struct MoutardPropagation {
  std::array<MoutardPair, 8> w;
  double route_spread_rel = 0.0;
};

MoutardPropagation moutard_propagate(const PlaquetteField<MoutardCoeffs>& A, const Cube& c,
                                     const std::array<MoutardPair, 4>& bottom,
                                     const Tolerances& tol = {});

// Builds f = u + i v from a real harmonic u by conjugation. Anchors default
// to value 0 at the lexicographically smallest vertex of each parity class.
struct HoloResult {
  VertexField v;
  VertexField f;
  CrStats cr;
};

HoloResult holo_from_harmonic(const LagrangianField& L, const QuadSurface& S,
                              const VertexField& u,
                              std::optional<ConjugateAnchors> anchors = std::nullopt,
                              const Tolerances& tol = {});

}  // namespace plurilatt
