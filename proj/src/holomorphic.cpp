#include "plurilatt/holomorphic.hpp"

#include <deque>

namespace plurilatt {

namespace {

DiagonalCoeffs diag_of(const LagrangianField& L, const Quad& q) {
  FaceLagrangian f = L.face(q);
  if (auto* d = std::get_if<DiagonalCoeffs>(&f)) return *d;
  if (auto* p = std::get_if<FactorizedPQ>(&f)) return diagonal_from_factorized(p->p, p->q);
  if (auto* t = std::get_if<TriangularLag>(&f))
    return DiagonalCoeffs{2.0 / t->a, 2.0 * t->b / t->a, 2.0 * t->b * t->b / t->a};
  if (auto* o = std::get_if<OffDiagLag>(&f))
    return DiagonalCoeffs{2.0 / o->a, Cx(0, 0), -2.0 * o->c};
  throw IoError("conjugation needs a diagonal-form family");
}

struct Link {
  Point from, to;
  Cx diff;  // v(to) - v(from)
};

void apply_matrix(const MoutardCoeffs& m, Cx du, Cx dv, Cx& out_u, Cx& out_v) {
  out_u = m.b * du + m.a * dv;
  out_v = m.c * du + m.b * dv;
}

}  // namespace

ConjugateResult conjugate(const LagrangianField& L, const QuadSurface& S, const VertexField& u,
                          const ConjugateAnchors& anchors, const Tolerances& tol) {
  if (anchors.black.parity() != 0)
    throw IoError("black anchor " + anchors.black.str() + " has odd coordinate sum");
  if (anchors.white.parity() != 1)
    throw IoError("white anchor " + anchors.white.str() + " has even coordinate sum");

  // One difference link per relation: same-parity vertex pairs.
  std::unordered_map<Point, std::vector<Link>, PointHash> adj;
  std::vector<Link> links;
  double rhs_scale = 1.0;
  for (const auto& [q, sign] : S.faces) {
    DiagonalCoeffs d = diag_of(L, q);
    auto c = q.corners();
    Cx du_diag = u.at(c[3]) - u.at(c[0]);
    Cx du_cross = u.at(c[1]) - u.at(c[2]);
    Cx rhs_a = d.alpha * du_diag + d.beta * du_cross;   // v(u_j) - v(u_i)
    Cx rhs_b = d.beta * du_diag + d.gamma * du_cross;   // v(u_ij) - v(u)
    rhs_scale = std::max({rhs_scale, std::abs(rhs_a), std::abs(rhs_b)});
    links.push_back(Link{c[1], c[2], rhs_a});
    links.push_back(Link{c[0], c[3], rhs_b});
  }
  for (const Link& l : links) {
    adj[l.from].push_back(l);
    adj[l.to].push_back(Link{l.to, l.from, -l.diff});
  }

  ConjugateResult out;
  out.v.dim = S.dim;
  auto bfs = [&](const Point& start, Cx value) {
    if (!adj.count(start))
      throw IoError("anchor vertex " + start.str() + " is not on the surface");
    std::deque<Point> queue;
    out.v.set(start, value);
    queue.push_back(start);
    while (!queue.empty()) {
      Point cur = queue.front();
      queue.pop_front();
      Cx vc = out.v.at(cur);
      for (const Link& l : adj.at(cur)) {
        if (out.v.has(l.to)) continue;
        out.v.set(l.to, vc + l.diff);
        queue.push_back(l.to);
      }
    }
  };
  bfs(anchors.black, anchors.black_value);
  bfs(anchors.white, anchors.white_value);

  for (const Point& v : S.vertex_list())
    if (!out.v.has(v))
      throw MultiplyConnected("vertex " + v.str() +
                              " is unreachable from the anchors (surface not simply spanned)");

  // Closure check: every relation must hold, not only the spanning-tree ones.
  double scale = std::max(rhs_scale, out.v.max_abs());
  for (const Link& l : links) {
    double res = std::abs(out.v.at(l.to) - out.v.at(l.from) - l.diff) / scale;
    if (res > out.max_closure_rel) {
      out.max_closure_rel = res;
      out.worst = l.from;
    }
  }
  if (out.max_closure_rel > tol.consistency_rel)
    throw NotHarmonic("conjugate 1-form does not close: relative residual " +
                      std::to_string(out.max_closure_rel) + ", worst near vertex " +
                      out.worst.str());
  return out;
}

double cauchy_riemann_rel_residual(Cx p, Cx f, Cx f_i, Cx f_j, Cx f_ij) {
  Cx lhs = f_ij - f;
  Cx rhs = Cx(0, 1) * p * (f_i - f_j);
  double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
  return std::abs(lhs - rhs) / scale;
}

CrStats cauchy_riemann_stats(const PlaquetteField<Cx>& p, const std::vector<Quad>& faces,
                             const VertexField& f) {
  CrStats st;
  for (const Quad& q : faces) {
    auto c = q.corners();
    double r =
        cauchy_riemann_rel_residual(p.at(q), f.at(c[0]), f.at(c[1]), f.at(c[2]), f.at(c[3]));
    if (r > st.max_rel) {
      st.max_rel = r;
      st.worst = q;
    }
  }
  return st;
}

MoutardPropagation moutard_propagate(const PlaquetteField<MoutardCoeffs>& A, const Cube& c,
                                     const std::array<MoutardPair, 4>& bottom,
                                     const Tolerances& tol) {
  MoutardPropagation out;
  for (int s = 0; s < 4; ++s) out.w[static_cast<size_t>(s)] = bottom[static_cast<size_t>(s)];
  auto fs = c.faces();

  // Face relation in canonical roles: w(u_ij) = w(u) + A (w(u_i) - w(u_j)).
  auto advance = [&](int face_idx) {
    const auto& f = fs[static_cast<size_t>(face_idx)];
    MoutardCoeffs m = A.at(f.quad);
    const MoutardPair& w0 = out.w[static_cast<size_t>(f.slots[0])];
    const MoutardPair& wi = out.w[static_cast<size_t>(f.slots[1])];
    const MoutardPair& wj = out.w[static_cast<size_t>(f.slots[2])];
    Cx du, dv;
    apply_matrix(m, wi.u - wj.u, wi.v - wj.v, du, dv);
    return MoutardPair{w0.u + du, w0.v + dv};
  };

  out.w[4] = advance(0);  // (d1,d2) bottom -> u_12
  out.w[6] = advance(2);  // (d1,d3) bottom -> u_13
  out.w[5] = advance(4);  // (d2,d3) bottom -> u_23

  MoutardPair far[3] = {advance(1), advance(3), advance(5)};
  double scale = 1.0;
  for (const auto& w : far) scale = std::max({scale, std::abs(w.u), std::abs(w.v)});
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      double d = std::max(std::abs(far[a].u - far[b].u), std::abs(far[a].v - far[b].v)) / scale;
      out.route_spread_rel = std::max(out.route_spread_rel, d);
    }
  if (out.route_spread_rel > tol.consistency_rel)
    throw InconsistentCoefficients("two-component propagation routes disagree by " +
                                   std::to_string(out.route_spread_rel) + " on " + c.str());
  out.w[7] = far[0];
  return out;
}

HoloResult holo_from_harmonic(const LagrangianField& L, const QuadSurface& S,
                              const VertexField& u, std::optional<ConjugateAnchors> anchors,
                              const Tolerances& tol) {
  if (L.family != Family::ComplexAnalysis)
    throw IoError("holomorphic construction needs the complex_analysis family");
  double uscale = std::max(1.0, u.max_abs());
  for (const auto& [pt, val] : u.values)
    if (std::abs(val.imag()) > tol.algebra_rel * uscale)
      throw IoError("input field must be real-valued; vertex " + pt.str() +
                    " has imaginary part " + std::to_string(val.imag()));

  ConjugateAnchors a;
  if (anchors) {
    a = *anchors;
  } else {
    std::vector<Point> verts = S.vertex_list();
    std::sort(verts.begin(), verts.end());
    bool have_black = false, have_white = false;
    for (const Point& v : verts) {
      if (!have_black && v.parity() == 0) {
        a.black = v;
        a.black_value = 0;
        have_black = true;
      }
      if (!have_white && v.parity() == 1) {
        a.white = v;
        a.white_value = 0;
        have_white = true;
      }
    }
    if (!have_black || !have_white) throw IoError("surface lacks a vertex parity class");
  }

  HoloResult out;
  ConjugateResult cr = conjugate(L, S, u, a, tol);
  out.v = std::move(cr.v);
  out.f.dim = S.dim;
  for (const auto& [pt, val] : u.values)
    if (out.v.has(pt)) out.f.set(pt, val + Cx(0, 1) * out.v.at(pt));

  const auto& pfield = std::get<PlaquetteField<Cx>>(L.weights.data);
  std::vector<Quad> faces;
  for (const auto& [q, sign] : S.faces) faces.push_back(q);
  out.cr = cauchy_riemann_stats(pfield, faces, out.f);
  return out;
}

}  // namespace plurilatt
