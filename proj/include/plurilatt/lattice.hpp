#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <unordered_map>
#include <vector>

#include "plurilatt/point.hpp"

namespace plurilatt {

// Unoriented elementary square: base vertex plus two distinct 1-based axes in
// ascending order. The four corners in intrinsic order are
// (u, u_i, u_j, u_ij) = (base, base+e_i, base+e_j, base+e_i+e_j).
struct Quad {
  Point base;
  int di = 1, dj = 2;

  std::array<Point, 4> corners() const {
    Point ui = base.shifted(di);
    Point uj = base.shifted(dj);
    Point uij = ui.shifted(dj);
    return {base, ui, uj, uij};
  }

  bool operator==(const Quad& o) const { return di == o.di && dj == o.dj && base == o.base; }

  std::string str() const {
    return "sigma^" + std::to_string(di) + std::to_string(dj) + base.str();
  }
};

struct QuadHash {
  size_t operator()(const Quad& q) const {
    size_t h = PointHash{}(q.base);
    h ^= static_cast<size_t>(q.di) * 0x9e3779b97f4a7c15ull;
    h ^= static_cast<size_t>(q.dj) * 0xc2b2ae3d27d4eb4full;
    return h;
  }
};

// Oriented plaquette: canonical quad plus sign. sign +1 means orientation
// (di,dj) with di < dj; sign -1 means the reversed orientation (dj,di).
struct Oriented {
  Quad quad;
  int sign = +1;
};

// Canonicalizes an oriented plaquette given in any axis order.
// Swapping the two axes reverses the orientation.
inline Oriented make_plaquette(Point base, int i, int j, int sign = +1) {
  int n = base.dim();
  if (i < 1 || j < 1 || i > n || j > n || i == j)
    throw InvalidAxes("plaquette axes (" + std::to_string(i) + "," + std::to_string(j) +
                      ") invalid for dimension " + std::to_string(n));
  if (i > j) return Oriented{Quad{std::move(base), j, i}, -sign};
  return Oriented{Quad{std::move(base), i, j}, sign};
}

// Elementary cube: base vertex plus three ascending axes d1 < d2 < d3.
// Vertex slots follow the fixed order
//   0:u  1:u_1  2:u_2  3:u_3  4:u_12  5:u_23  6:u_13  7:u_123
// (subscripts name shifts along d1,d2,d3).
struct Cube {
  Point base;
  int d1 = 1, d2 = 2, d3 = 3;

  static constexpr int kVertexCount = 8;

  std::array<Point, 8> verts() const {
    std::array<Point, 8> v;
    v[0] = base;
    v[1] = base.shifted(d1);
    v[2] = base.shifted(d2);
    v[3] = base.shifted(d3);
    v[4] = v[1].shifted(d2);
    v[5] = v[2].shifted(d3);
    v[6] = v[1].shifted(d3);
    v[7] = v[4].shifted(d3);
    return v;
  }

  // One face of the cube boundary.
  //   bsign: coefficient of the canonically oriented face in the oriented
  //          boundary of the cube (the 2-chain whose action telescopes into
  //          the three-directional discrete exterior derivative).
  //   slots: cube vertex slots playing the roles (u, u_i, u_j, u_ij) of the
  //          face read in canonical orientation.
  struct Face {
    Quad quad;
    int bsign;
    std::array<int, 4> slots;
  };

  // Face order: [0] (d1,d2) bottom, [1] (d1,d2) top, [2] (d1,d3) bottom,
  // [3] (d1,d3) top, [4] (d2,d3) bottom, [5] (d2,d3) top.
  std::array<Face, 6> faces() const {
    std::array<Face, 6> f;
    f[0] = Face{Quad{base, d1, d2}, -1, {0, 1, 2, 4}};
    f[1] = Face{Quad{base.shifted(d3), d1, d2}, +1, {3, 6, 5, 7}};
    f[2] = Face{Quad{base, d1, d3}, +1, {0, 1, 3, 6}};
    f[3] = Face{Quad{base.shifted(d2), d1, d3}, -1, {2, 4, 5, 7}};
    f[4] = Face{Quad{base, d2, d3}, -1, {0, 2, 3, 5}};
    f[5] = Face{Quad{base.shifted(d1), d2, d3}, +1, {1, 4, 6, 7}};
    return f;
  }

  // Face indices (into faces()) incident to each vertex slot.
  static const std::array<std::array<int, 3>, 8>& vertex_faces() {
    static const std::array<std::array<int, 3>, 8> t = {{
        {0, 2, 4},  // slot 0
        {0, 2, 5},  // slot 1
        {0, 3, 4},  // slot 2
        {1, 2, 4},  // slot 3
        {0, 3, 5},  // slot 4
        {1, 3, 4},  // slot 5
        {1, 2, 5},  // slot 6
        {1, 3, 5},  // slot 7
    }};
    return t;
  }

  static int opposite_slot(int s) {
    static constexpr std::array<int, 8> opp = {7, 5, 6, 4, 3, 1, 2, 0};
    return opp[static_cast<size_t>(s)];
  }

  std::string str() const {
    return "cube" + base.str() + "/" + std::to_string(d1) + std::to_string(d2) +
           std::to_string(d3);
  }
};

inline Cube make_cube(Point base, int a, int b, int c) {
  int n = base.dim();
  int d[3] = {a, b, c};
  std::sort(d, d + 3);
  if (d[0] < 1 || d[2] > n || d[0] == d[1] || d[1] == d[2])
    throw InvalidAxes("cube axes must be three distinct axes within dimension " +
                      std::to_string(n));
  return Cube{std::move(base), d[0], d[1], d[2]};
}

// Oriented quad surface: a finite set of canonical quads with signs.
// Validity: every edge is traversed by at most two faces, and when by two,
// in opposite directions (orientations of neighbouring faces agree).
class QuadSurface {
 public:
  int dim = 0;
  std::unordered_map<Quad, int, QuadHash> faces;

  void insert(const Oriented& o) {
    auto [it, fresh] = faces.emplace(o.quad, o.sign);
    if (!fresh) throw IoError("duplicate plaquette " + o.quad.str());
  }

  bool has(const Quad& q) const { return faces.count(q) != 0; }

  int sign_of(const Quad& q) const {
    auto it = faces.find(q);
    if (it == faces.end()) throw MissingFieldValue("surface has no face " + q.str());
    return it->second;
  }

  // Directed edge key: unordered endpoint pair plus traversal balance.
  struct EdgeInfo {
    int count = 0;    // how many faces traverse the edge
    int dir_sum = 0;  // +1 per a->b traversal, -1 per b->a (a < b lex)
  };
  using EdgeMap = std::unordered_map<Point, std::unordered_map<Point, EdgeInfo, PointHash>, PointHash>;

  EdgeMap edge_map() const;

  // Throws IoError on orientation incompatibility or over-shared edges.
  void validate() const;

  std::vector<Point> vertex_list() const;

  // Vertices all of whose incident surface edges are shared by two faces.
  std::vector<Point> interior_vertices() const;

  // Edges traversed exactly once, as lex-ordered endpoint pairs.
  std::vector<std::pair<Point, Point>> boundary_edges() const;
};

// Square patch of a coordinate plane: faces sigma^(di,dj) with the base in
// [lo, hi-1]^2 along (di,dj), remaining coordinates fixed by at.
QuadSurface plane_patch(int dim, int di, int dj, const Point& at, int lo, int hi);

// Cube bases range over [lo_a, hi_a - 1] for every axis a; direction triples
// run over all ascending triples. Lexicographic in (base, triple).
std::vector<Cube> enumerate_cubes(const Box& region);

// Status of a cube relative to a surface: which of its six faces are present,
// and with which coherence sign. The present faces form s * (cube boundary
// restricted to them) for a single s in {-1,+1}; otherwise the move is invalid.
struct CubeIncidence {
  std::vector<int> present;  // indices into Cube::faces()
  std::vector<int> absent;
  int s = 0;
};
CubeIncidence cube_incidence(const QuadSurface& S, const Cube& c);

// Replaces the present faces of the cube by the complementary ones. The
// surface boundary is unchanged; orientation stays compatible. Throws
// NotFlippable if no face or all six faces are present or coherence fails.
QuadSurface cube_move(const QuadSurface& S, const Cube& c);

// Strict elementary flip: requires the present faces to be exactly the three
// faces around one cube vertex. Throws NotFlippable otherwise.
QuadSurface flip(const QuadSurface& S, const Cube& c);

}  // namespace plurilatt
