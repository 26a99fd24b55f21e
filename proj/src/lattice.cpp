#include "plurilatt/lattice.hpp"

#include <algorithm>
#include <set>

namespace plurilatt {

namespace {

// The four directed edges of a quad in canonical orientation
// u -> u_i -> u_ij -> u_j -> u.
std::array<std::pair<Point, Point>, 4> directed_edges(const Quad& q, int sign) {
  auto c = q.corners();
  std::array<std::pair<Point, Point>, 4> e = {
      std::make_pair(c[0], c[1]), std::make_pair(c[1], c[3]),
      std::make_pair(c[3], c[2]), std::make_pair(c[2], c[0])};
  if (sign < 0)
    for (auto& [a, b] : e) std::swap(a, b);
  return e;
}

}  // namespace

QuadSurface::EdgeMap QuadSurface::edge_map() const {
  EdgeMap m;
  for (const auto& [q, sign] : faces) {
    for (auto [a, b] : directed_edges(q, sign)) {
      int dir = +1;
      if (b < a) {
        std::swap(a, b);
        dir = -1;
      }
      EdgeInfo& info = m[a][b];
      info.count += 1;
      info.dir_sum += dir;
    }
  }
  return m;
}

void QuadSurface::validate() const {
  for (const auto& [a, inner] : edge_map()) {
    for (const auto& [b, info] : inner) {
      if (info.count > 2)
        throw IoError("edge " + a.str() + "-" + b.str() + " shared by " +
                      std::to_string(info.count) + " faces");
      if (info.count == 2 && info.dir_sum != 0)
        throw IoError("incompatible orientation across edge " + a.str() + "-" + b.str());
    }
  }
}

std::vector<Point> QuadSurface::vertex_list() const {
  std::set<Point> s;
  for (const auto& [q, sign] : faces)
    for (const auto& c : q.corners()) s.insert(c);
  return {s.begin(), s.end()};
}

std::vector<Point> QuadSurface::interior_vertices() const {
  EdgeMap em = edge_map();
  auto edge_count = [&](const Point& a, const Point& b) {
    const Point& lo = a < b ? a : b;
    const Point& hi = a < b ? b : a;
    return em.at(lo).at(hi).count;
  };
  std::set<Point> verts;
  std::unordered_map<Point, bool, PointHash> interior;
  for (const auto& [q, sign] : faces) {
    auto c = q.corners();
    // Vertex-incident edges within this face: corner order u,u_i,u_j,u_ij.
    const int nb[4][2] = {{1, 2}, {0, 3}, {0, 3}, {1, 2}};
    for (int k = 0; k < 4; ++k) {
      verts.insert(c[k]);
      auto it = interior.emplace(c[k], true).first;
      for (int t = 0; t < 2; ++t)
        if (edge_count(c[k], c[nb[k][t]]) != 2) it->second = false;
    }
  }
  std::vector<Point> out;
  for (const auto& v : verts)
    if (interior.at(v)) out.push_back(v);
  return out;
}

std::vector<std::pair<Point, Point>> QuadSurface::boundary_edges() const {
  std::vector<std::pair<Point, Point>> out;
  for (const auto& [a, inner] : edge_map())
    for (const auto& [b, info] : inner)
      if (info.count == 1) out.emplace_back(a, b);
  std::sort(out.begin(), out.end());
  return out;
}

QuadSurface plane_patch(int dim, int di, int dj, const Point& at, int lo, int hi) {
  if (di == dj || di < 1 || dj < 1 || di > dim || dj > dim)
    throw InvalidAxes("plane axes invalid");
  if (hi <= lo) throw IoError("plane patch needs hi > lo");
  QuadSurface S;
  S.dim = dim;
  for (int x = lo; x < hi; ++x)
    for (int y = lo; y < hi; ++y) {
      Point base = at;
      base[di] = x;
      base[dj] = y;
      S.insert(make_plaquette(base, di, dj, +1));
    }
  return S;
}

std::vector<Cube> enumerate_cubes(const Box& region) {
  int n = region.dim();
  std::vector<Cube> out;
  if (n < 3) return out;
  // Base ranges [lo, hi-1] per axis; empty if any axis has zero extent.
  Box bases = region;
  for (int a = 1; a <= n; ++a) {
    bases.hi[a] -= 1;
    if (bases.hi[a] < bases.lo[a]) return out;
  }
  for (const Point& b : bases.points())
    for (int d1 = 1; d1 <= n; ++d1)
      for (int d2 = d1 + 1; d2 <= n; ++d2)
        for (int d3 = d2 + 1; d3 <= n; ++d3) out.push_back(Cube{b, d1, d2, d3});
  // points() is lexicographic; reorder to (base, triple) grouping kept as-is:
  // bases outermost already, triples inner. Stable and deterministic.
  return out;
}

CubeIncidence cube_incidence(const QuadSurface& S, const Cube& c) {
  CubeIncidence inc;
  auto fs = c.faces();
  for (int k = 0; k < 6; ++k) {
    if (S.has(fs[k].quad))
      inc.present.push_back(k);
    else
      inc.absent.push_back(k);
  }
  for (int k : inc.present) {
    int s = S.sign_of(fs[k].quad) * fs[k].bsign;
    if (inc.s == 0) inc.s = s;
    if (s != inc.s)
      throw NotFlippable("faces of " + c.str() +
                         " sit in the surface with incoherent orientations");
  }
  return inc;
}

QuadSurface cube_move(const QuadSurface& S, const Cube& c) {
  CubeIncidence inc = cube_incidence(S, c);
  if (inc.present.empty()) throw NotFlippable("no face of " + c.str() + " lies in the surface");
  if (inc.absent.empty()) throw NotFlippable("all faces of " + c.str() + " lie in the surface");
  auto fs = c.faces();
  QuadSurface R = S;
  for (int k : inc.present) R.faces.erase(fs[k].quad);
  for (int k : inc.absent) R.insert(Oriented{fs[k].quad, -inc.s * fs[k].bsign});
  R.validate();
  return R;
}

QuadSurface flip(const QuadSurface& S, const Cube& c) {
  CubeIncidence inc = cube_incidence(S, c);
  if (inc.present.size() != 3)
    throw NotFlippable("flip needs exactly three faces of " + c.str() + " in the surface, found " +
                       std::to_string(inc.present.size()));
  bool corner = false;
  for (int v = 0; v < 8 && !corner; ++v) {
    auto adj = Cube::vertex_faces()[static_cast<size_t>(v)];
    corner = std::is_permutation(adj.begin(), adj.end(), inc.present.begin());
  }
  if (!corner)
    throw NotFlippable("the three surface faces of " + c.str() + " do not share a vertex");
  return cube_move(S, c);
}

}  // namespace plurilatt
