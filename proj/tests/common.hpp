#pragma once

// Shared generators for tests: admissible initial weight data on the corner
// 2-skeleton of a box (the floor/wall quads through the low corner), random
// fields, and small comparison helpers.

#include <cmath>

#include "plurilatt/lagrangian.hpp"
#include "plurilatt/rng.hpp"

namespace plurilatt::testutil {

inline bool close(Cx a, Cx b, double tol = 1e-12) {
  double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) <= tol * scale;
}

inline Cx rand_weight(Rng& rng) { return rng.complex_in(0.5, 2.0, -1.0, 1.0); }

// Canonical quads of the corner 2-skeleton: for each axis pair, the quads
// sweeping those two axes with every other coordinate pinned at the low
// corner. Propagation from this data fills any box (fires cubes by induction
// on the coordinate sum).
inline std::vector<Quad> skeleton_quads(const Box& box) {
  int n = box.dim();
  std::vector<Quad> out;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      for (int x = box.lo[i]; x < box.hi[i]; ++x)
        for (int y = box.lo[j]; y < box.hi[j]; ++y) {
          Point base = box.lo;
          base[i] = x;
          base[j] = y;
          out.push_back(Quad{base, i, j});
        }
    }
  return out;
}

inline long coord_sum(const Point& p) {
  long s = 0;
  for (int c : p.coords) s += c;
  return s;
}

// Admissible random initial data per kind on the skeleton of the box.
inline TaggedWeightField skeleton_field(WeightKind kind, const Box& box, Rng& rng) {
  TaggedWeightField W;
  W.kind = kind;
  int dim = box.dim();
  auto quads = skeleton_quads(box);
  switch (kind) {
    case WeightKind::ComplexP:
    case WeightKind::ThreePointP: {
      PlaquetteField<Cx> F;
      F.dim = dim;
      for (const Quad& q : quads) F.values[q] = rand_weight(rng);
      W.data = std::move(F);
      break;
    }
    case WeightKind::PairPQKind: {
      PlaquetteField<PairPQ> F;
      F.dim = dim;
      for (const Quad& q : quads) F.values[q] = PairPQ{rand_weight(rng), rand_weight(rng)};
      W.data = std::move(F);
      W.constraint = ConstraintTriple{Cx(1, 0), Cx(0, 0), Cx(-1, 0)};
      break;
    }
    case WeightKind::MoutardABC: {
      // Constraint lambda a + mu (-1)^{|n|} b + nu c = 0 holds on the data.
      ConstraintTriple t{rng.complex_unit(), rng.complex_unit(), rng.complex_unit()};
      PlaquetteField<MoutardCoeffs> F;
      F.dim = dim;
      for (const Quad& q : quads) {
        Cx a = rand_weight(rng), b = rand_weight(rng);
        double sgn = (coord_sum(q.base) % 2 == 0) ? 1.0 : -1.0;
        Cx c = -(t.lambda * a + t.mu * sgn * b) / t.nu;
        F.values[q] = MoutardCoeffs{a, b, c};
      }
      W.data = std::move(F);
      W.constraint = t;
      break;
    }
    case WeightKind::Triangular: {
      PlaquetteField<TriangularAB> F;
      F.dim = dim;
      for (const Quad& q : quads) F.values[q] = TriangularAB{rand_weight(rng), rand_weight(rng)};
      W.data = std::move(F);
      W.constraint = ConstraintTriple{Cx(0, 0), Cx(0, 0), Cx(1, 0)};
      break;
    }
    case WeightKind::OffDiagonal: {
      PlaquetteField<OffDiagAC> F;
      F.dim = dim;
      for (const Quad& q : quads) F.values[q] = OffDiagAC{rand_weight(rng), rand_weight(rng)};
      W.data = std::move(F);
      W.constraint = ConstraintTriple{Cx(0, 0), Cx(1, 0), Cx(0, 0)};
      break;
    }
    case WeightKind::QNet: {
      PlaquetteField<QNetCoeffs> F;
      F.dim = dim;
      for (const Quad& q : quads)
        F.values[q] = QNetCoeffs{rand_weight(rng), rand_weight(rng), rand_weight(rng)};
      W.data = std::move(F);
      break;
    }
  }
  return W;
}

inline Box make_box(std::vector<int> lo, std::vector<int> hi) {
  return Box{Point{std::move(lo)}, Point{std::move(hi)}};
}

// Random real boundary values for a surface, plus zero interior seed.
inline std::unordered_map<Point, Cx, PointHash> random_real_boundary(const QuadSurface& S,
                                                                     Rng& rng) {
  std::unordered_map<Point, Cx, PointHash> b;
  auto interior = S.interior_vertices();
  std::unordered_map<Point, bool, PointHash> is_int;
  for (const auto& v : interior) is_int[v] = true;
  for (const auto& v : S.vertex_list())
    if (!is_int.count(v)) b[v] = Cx(rng.uniform(-1.0, 1.0), 0.0);
  return b;
}

}  // namespace plurilatt::testutil
