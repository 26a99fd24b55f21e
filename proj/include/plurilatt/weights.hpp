#pragma once

#include <array>
#include <optional>
#include <variant>

#include "plurilatt/lattice.hpp"
#include "plurilatt/point.hpp"

namespace plurilatt {

// Default tolerances. Residual checks scale with the data; see README.
struct Tolerances {
  double consistency_rel = 1e-9;  // runtime consistency residuals
  double algebra_rel = 1e-12;     // exact algebraic identities
  double degenerate_rel = 1e-12;  // denominator cutoff, times scale^2
  double rank_rel = 1e-8;         // SVD rank threshold, relative to sigma_max
  double order_rel = 1e-10;       // propagation order-independence
};

// ---------------------------------------------------------------------------
// Per-plaquette coefficient types. Each type stores the value for a quad read
// in canonical orientation (di < dj); reading against orientation applies
// swapped(). All scalar-entry kinds negate; the quad-equation kind exchanges
// the two linear coefficients and negates s.

struct PairPQ {
  Cx p, q;
};

struct TriangularAB {
  Cx a, b;
};

struct OffDiagAC {
  Cx a, c;
};

// Entries of the 2x2 coefficient matrix [[b, a], [c, b]].
struct MoutardCoeffs {
  Cx a, b, c;
};

// Coefficients of u_ij = c_ji u_i + c_ij u_j + c_ij c_ji u, plus the
// Lagrangian denominator entry s (antisymmetric in the direction order).
struct QNetCoeffs {
  Cx c_ij, c_ji, s;
};

inline Cx swapped(Cx v) { return -v; }
inline PairPQ swapped(PairPQ v) { return {-v.p, -v.q}; }
inline TriangularAB swapped(TriangularAB v) { return {-v.a, -v.b}; }
inline OffDiagAC swapped(OffDiagAC v) { return {-v.a, -v.c}; }
inline MoutardCoeffs swapped(MoutardCoeffs v) { return {-v.a, -v.b, -v.c}; }
inline QNetCoeffs swapped(QNetCoeffs v) { return {v.c_ji, v.c_ij, -v.s}; }

inline double vnorm(Cx v) { return std::abs(v); }
inline double vnorm(const PairPQ& v) { return std::max(std::abs(v.p), std::abs(v.q)); }
inline double vnorm(const TriangularAB& v) { return std::max(std::abs(v.a), std::abs(v.b)); }
inline double vnorm(const OffDiagAC& v) { return std::max(std::abs(v.a), std::abs(v.c)); }
inline double vnorm(const MoutardCoeffs& v) {
  return std::max({std::abs(v.a), std::abs(v.b), std::abs(v.c)});
}
inline double vnorm(const QNetCoeffs& v) {
  return std::max({std::abs(v.c_ij), std::abs(v.c_ji), std::abs(v.s)});
}

inline double vdist(Cx a, Cx b) { return std::abs(a - b); }
inline double vdist(const PairPQ& a, const PairPQ& b) {
  return std::max(std::abs(a.p - b.p), std::abs(a.q - b.q));
}
inline double vdist(const TriangularAB& a, const TriangularAB& b) {
  return std::max(std::abs(a.a - b.a), std::abs(a.b - b.b));
}
inline double vdist(const OffDiagAC& a, const OffDiagAC& b) {
  return std::max(std::abs(a.a - b.a), std::abs(a.c - b.c));
}
inline double vdist(const MoutardCoeffs& a, const MoutardCoeffs& b) {
  return std::max({std::abs(a.a - b.a), std::abs(a.b - b.b), std::abs(a.c - b.c)});
}
inline double vdist(const QNetCoeffs& a, const QNetCoeffs& b) {
  return std::max({std::abs(a.c_ij - b.c_ij), std::abs(a.c_ji - b.c_ji), std::abs(a.s - b.s)});
}

// ---------------------------------------------------------------------------
// Weight field: one value per canonical quad.

template <class V>
struct PlaquetteField {
  int dim = 0;
  std::unordered_map<Quad, V, QuadHash> values;

  bool has(const Quad& q) const { return values.count(q) != 0; }

  V at(const Quad& q) const {
    auto it = values.find(q);
    if (it == values.end()) throw MissingCoefficients("no coefficients on " + q.str());
    return it->second;
  }

  // Read in the given orientation; (i,j) may be in either order.
  V at_oriented(const Point& base, int i, int j) const {
    Oriented o = make_plaquette(base, i, j);
    V v = at(o.quad);
    return o.sign > 0 ? v : swapped(v);
  }

  void set_oriented(const Point& base, int i, int j, V v) {
    Oriented o = make_plaquette(base, i, j);
    values[o.quad] = o.sign > 0 ? v : swapped(v);
  }
};

// Cyclic face triple of a cube with directions d1 < d2 < d3:
// slot 0 reads the face pair (d2,d3), slot 1 (d3,d1), slot 2 (d1,d2),
// all at the cube base. Outputs live on the opposite faces: slot 0 at
// base+e_{d1}, slot 1 at base+e_{d2}, slot 2 at base+e_{d3}.
inline std::array<std::array<int, 2>, 3> cyclic_pairs(const Cube& c) {
  return {{{c.d2, c.d3}, {c.d3, c.d1}, {c.d1, c.d2}}};
}

template <class V>
bool corner_known(const PlaquetteField<V>& F, const Cube& c) {
  auto prs = cyclic_pairs(c);
  for (const auto& pr : prs)
    if (!F.has(make_plaquette(c.base, pr[0], pr[1]).quad)) return false;
  return true;
}

template <class V>
std::array<V, 3> read_corner(const PlaquetteField<V>& F, const Cube& c) {
  auto prs = cyclic_pairs(c);
  std::array<V, 3> out;
  for (int s = 0; s < 3; ++s) out[s] = F.at_oriented(c.base, prs[s][0], prs[s][1]);
  return out;
}

// ---------------------------------------------------------------------------
// Single-face closed-form steps. Triples are ordered cyclically:
// argument 0 carries the pair (i,j) the output belongs to, arguments 1 and 2
// carry (j,k) and (k,i).

// p^ij_k = p_ij / (p_ij p_jk + p_jk p_ki + p_ki p_ij).
Cx star_triangle(Cx p_ij, Cx p_jk, Cx p_ki, const Tolerances& tol = {});

// p^ij_k = -p_ij / (p_ij p_jk + p_jk p_ki + p_ki p_ij).
Cx star_triangle_neg(Cx p_ij, Cx p_jk, Cx p_ki, const Tolerances& tol = {});

// 1/p^ij_k = ratio * (q_ij q_jk + q_jk q_ki + q_ki q_ij) / q_ij and the same
// with p and q exchanged; ratio = lambda/nu.
std::pair<Cx, Cx> coupled_star_triangle(const std::array<Cx, 3>& p, const std::array<Cx, 3>& q,
                                        Cx ratio, const Tolerances& tol = {});

// Triangular-family step: b evolves by the negated star-triangle map and
// a^ij_k = (b^ij_k)^2 (a_jk + a_ki + (b_ki a_jk + b_jk a_ki)/b_ij
//                      - b_jk b_ki a_ij / b_ij^2).
std::pair<Cx, Cx> triangular_step(const std::array<Cx, 3>& a, const std::array<Cx, 3>& b,
                                  const Tolerances& tol = {});

// Off-diagonal-family step: the roles of a and c cross over,
// c^ij_k = -a_ij/(a_ij a_jk + ...) and a^ij_k = -c_ij/(c_ij c_jk + ...).
std::pair<Cx, Cx> offdiagonal_step(const std::array<Cx, 3>& a, const std::array<Cx, 3>& c,
                                   const Tolerances& tol = {});

// Cube-level matrix step: A_hat_i = -(A_j + A_k + A_k A_i^{-1} A_j)^{-1} for
// (i,j,k) cyclic. Inputs/outputs are in cyclic slots. Checks the necessary
// commutation condition A1 A2^{-1} A3 = A3 A2^{-1} A1 first.
std::array<MoutardCoeffs, 3> moutard_matrix_step(const std::array<MoutardCoeffs, 3>& A,
                                                 const Tolerances& tol = {});

// Cube-level quad-equation step for the gauged linear system.
std::array<QNetCoeffs, 3> qnet_step(const std::array<QNetCoeffs, 3>& w,
                                    const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Linear dependence lambda a_i + mu b_i + nu c_i = 0 across three faces.

struct ConstraintTriple {
  Cx lambda, mu, nu;

  // (xi, eta) with p = a + xi b, q = a + eta b; -xi and -eta are the roots of
  // lambda t^2 + mu t + nu = 0. Requires lambda != 0.
  std::pair<Cx, Cx> xi_eta() const;
};

// Kernel direction of the 3x3 matrix rows (a_i, b_i, c_i) via SVD, normalized
// by its largest-modulus entry. Null if the matrix is not rank-deficient.
std::optional<ConstraintTriple> check_dependence(const std::array<MoutardCoeffs, 3>& A,
                                                 const Tolerances& tol = {});

// Residual of lambda a - mu b + nu c = 0 (the constraint propagated to the
// opposite faces), relative to the largest term.
double dependence_flip_residual(const ConstraintTriple& t, const MoutardCoeffs& hat);

// ---------------------------------------------------------------------------
// Weight kinds and tagged fields (IO/CLI surface).

enum class WeightKind {
  ComplexP,
  ThreePointP,
  PairPQKind,
  MoutardABC,
  Triangular,
  OffDiagonal,
  QNet,
};

std::string kind_name(WeightKind k);
WeightKind kind_from_name(const std::string& s);

using AnyField = std::variant<PlaquetteField<Cx>, PlaquetteField<PairPQ>,
                              PlaquetteField<TriangularAB>, PlaquetteField<OffDiagAC>,
                              PlaquetteField<MoutardCoeffs>, PlaquetteField<QNetCoeffs>>;

struct TaggedWeightField {
  WeightKind kind = WeightKind::ComplexP;
  std::optional<ConstraintTriple> constraint;
  AnyField data;

  int dim() const {
    return std::visit([](const auto& f) { return f.dim; }, data);
  }
};

// ---------------------------------------------------------------------------
// Propagation: fire every cube of the region whose three base-corner faces
// are known; write the opposite faces. Round-synchronous so the result is
// traversal-order independent by construction; revisited faces are compared
// and a mismatch beyond tol.order_rel (relative) is an error.

struct PropagateStats {
  long cubes_fired = 0;
  long revisits = 0;
  double max_revisit_mismatch = 0.0;  // relative
};

struct PropagateOptions {
  bool parallel = false;
  bool require_full_cover = true;
  Tolerances tol = {};
};

namespace detail {

template <class V>
void merge_face(PlaquetteField<V>& F, const Point& base, int i, int j, V v,
                const PropagateOptions& opt, PropagateStats& st) {
  Oriented o = make_plaquette(base, i, j);
  V canon = o.sign > 0 ? v : swapped(v);
  auto it = F.values.find(o.quad);
  if (it == F.values.end()) {
    F.values.emplace(o.quad, canon);
    return;
  }
  st.revisits += 1;
  double scale = std::max({vnorm(it->second), vnorm(canon), 1e-300});
  double rel = vdist(it->second, canon) / scale;
  st.max_revisit_mismatch = std::max(st.max_revisit_mismatch, rel);
  if (rel > opt.tol.order_rel)
    throw InconsistentCoefficients("propagation revisit mismatch " + std::to_string(rel) +
                                   " on " + o.quad.str());
}

}  // namespace detail

// StepFn: std::array<V,3> -> std::array<V,3> in cyclic slots.
template <class V, class StepFn>
PropagateStats propagate(PlaquetteField<V>& F, const Box& region, StepFn step,
                         const PropagateOptions& opt = {}) {
  std::vector<Cube> cubes = enumerate_cubes(region);
  std::vector<char> fired(cubes.size(), 0);
  PropagateStats st;
  while (true) {
    std::vector<size_t> ready;
    for (size_t k = 0; k < cubes.size(); ++k)
      if (!fired[k] && corner_known(F, cubes[k])) ready.push_back(k);
    if (ready.empty()) break;
    std::vector<std::array<V, 3>> outs(ready.size());
#ifdef _OPENMP
#pragma omp parallel for if (opt.parallel) schedule(static)
#endif
    for (long long r = 0; r < static_cast<long long>(ready.size()); ++r)
      outs[static_cast<size_t>(r)] =
          step(read_corner(F, cubes[ready[static_cast<size_t>(r)]]));
    for (size_t r = 0; r < ready.size(); ++r) {
      const Cube& c = cubes[ready[r]];
      auto prs = cyclic_pairs(c);
      const int shift_dir[3] = {c.d1, c.d2, c.d3};
      for (int s = 0; s < 3; ++s)
        detail::merge_face(F, c.base.shifted(shift_dir[s]), prs[s][0], prs[s][1], outs[r][s],
                           opt, st);
      fired[ready[r]] = 1;
      st.cubes_fired += 1;
    }
  }
  if (opt.require_full_cover) {
    for (const Cube& c : cubes)
      for (const auto& f : c.faces())
        if (!F.has(f.quad))
          throw MissingInitialData("face " + f.quad.str() + " of " + c.str() +
                                   " cannot be reached from the initial data");
  }
  return st;
}

// Fires the eight elementary cubes of the unit hypercube spanned by axes
// (1,2,3,4) from the six faces at the base vertex. The cube list is visited
// repeatedly in the given preference order (or its reverse); a cube fires once
// its three base-corner faces are known. Every doubly-shifted face is produced
// along two routes, so stats.revisits == 6 on success and a route disagreement
// beyond tol.order_rel throws.
template <class V, class StepFn>
PropagateStats hypercube_sweep(PlaquetteField<V>& F, StepFn step, bool reversed,
                               const PropagateOptions& opt = {}) {
  if (F.dim != 4) throw InvalidAxes("hypercube sweep needs a 4-dimensional field");
  Point zero{std::vector<int>(4, 0)};
  std::vector<Cube> cubes;
  for (int m = 4; m >= 1; --m) {
    std::array<int, 3> d{};
    int k = 0;
    for (int a = 1; a <= 4; ++a)
      if (a != m) d[static_cast<size_t>(k++)] = a;
    cubes.push_back(Cube{zero, d[0], d[1], d[2]});
    cubes.push_back(Cube{zero.shifted(m), d[0], d[1], d[2]});
  }
  if (reversed) std::reverse(cubes.begin(), cubes.end());
  std::vector<char> fired(cubes.size(), 0);
  PropagateStats st;
  bool progress = true;
  while (progress) {
    progress = false;
    for (size_t k = 0; k < cubes.size(); ++k) {
      if (fired[k] || !corner_known(F, cubes[k])) continue;
      const Cube& c = cubes[k];
      std::array<V, 3> out = step(read_corner(F, c));
      auto prs = cyclic_pairs(c);
      const int shift_dir[3] = {c.d1, c.d2, c.d3};
      for (int s = 0; s < 3; ++s)
        detail::merge_face(F, c.base.shifted(shift_dir[s]), prs[s][0], prs[s][1], out[s], opt, st);
      fired[k] = 1;
      st.cubes_fired += 1;
      progress = true;
    }
  }
  if (st.cubes_fired != static_cast<long>(cubes.size()))
    throw MissingInitialData("hypercube sweep needs the six faces at the base vertex");
  return st;
}

// Cube step for each kind, in cyclic slots.
std::array<Cx, 3> step_complex_p(const std::array<Cx, 3>& v, const Tolerances& tol);
std::array<Cx, 3> step_three_point(const std::array<Cx, 3>& v, const Tolerances& tol);
std::array<PairPQ, 3> step_pair_pq(const std::array<PairPQ, 3>& v, Cx ratio,
                                   const Tolerances& tol);
std::array<TriangularAB, 3> step_triangular(const std::array<TriangularAB, 3>& v,
                                            const Tolerances& tol);
std::array<OffDiagAC, 3> step_offdiagonal(const std::array<OffDiagAC, 3>& v,
                                          const Tolerances& tol);

// Kind-dispatched propagation over a tagged field. PairPQ uses the coupled
// step with ratio lambda/nu taken from the constraint; when absent it uses
// the factorized family's triple (1,0,-1), i.e. ratio -1.
PropagateStats propagate_tagged(TaggedWeightField& W, const Box& region,
                                const PropagateOptions& opt = {});

// ---------------------------------------------------------------------------
// Gauge data for the ungauged linear quad equation
// u_ij = c_ji u_i + c_ij u_j + d u, d symmetric in the direction order.
struct QNetGeneral {
  Cx c_ij, c_ji, d;
};
inline QNetGeneral swapped(QNetGeneral v) { return {v.c_ji, v.c_ij, v.d}; }
inline double vnorm(const QNetGeneral& v) {
  return std::max({std::abs(v.c_ij), std::abs(v.c_ji), std::abs(v.d)});
}
inline double vdist(const QNetGeneral& a, const QNetGeneral& b) {
  return std::max({std::abs(a.c_ij - b.c_ij), std::abs(a.c_ji - b.c_ji), std::abs(a.d - b.d)});
}

}  // namespace plurilatt
