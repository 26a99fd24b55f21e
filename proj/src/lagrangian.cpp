#include "plurilatt/lagrangian.hpp"

#include <cmath>

namespace plurilatt {

namespace {

using V4 = Eigen::Vector4cd;

// Difference vectors over x = (u, u_i, u_j, u_ij).
const V4 kDiag = (V4() << -1, 0, 0, 1).finished();   // u_ij - u
const V4 kCross = (V4() << 0, 1, -1, 0).finished();  // u_i - u_j

Eigen::Matrix4cd sym_outer(const V4& a, const V4& b) {
  return 0.5 * (a * b.transpose() + b * a.transpose());
}

void guard_nonzero(Cx v, const char* what) {
  if (std::abs(v) == 0.0) throw DegenerateWeights(std::string(what) + " requires a nonzero value");
}

DiagonalCoeffs to_diagonal(const FaceLagrangian& L) {
  if (auto* d = std::get_if<DiagonalCoeffs>(&L)) return *d;
  if (auto* f = std::get_if<FactorizedPQ>(&L)) return diagonal_from_factorized(f->p, f->q);
  if (auto* t = std::get_if<TriangularLag>(&L)) {
    guard_nonzero(t->a, "triangular Lagrangian");
    return DiagonalCoeffs{2.0 / t->a, 2.0 * t->b / t->a, 2.0 * t->b * t->b / t->a};
  }
  if (auto* o = std::get_if<OffDiagLag>(&L)) {
    guard_nonzero(o->a, "off-diagonal Lagrangian");
    return DiagonalCoeffs{2.0 / o->a, Cx(0, 0), -2.0 * o->c};
  }
  throw IoError("family has no diagonal-coefficient form");
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::Diagonal: return "diagonal";
    case Family::ComplexAnalysis: return "complex_analysis";
    case Family::Factorized: return "factorized";
    case Family::Triangular: return "triangular";
    case Family::OffDiagonal: return "off_diagonal";
    case Family::ThreePoint: return "three_point";
    case Family::QNet: return "qnet";
  }
  return "unknown";
}

Family family_from_name(const std::string& s) {
  if (s == "diagonal") return Family::Diagonal;
  if (s == "complex_analysis") return Family::ComplexAnalysis;
  if (s == "factorized") return Family::Factorized;
  if (s == "triangular") return Family::Triangular;
  if (s == "off_diagonal") return Family::OffDiagonal;
  if (s == "three_point") return Family::ThreePoint;
  if (s == "qnet") return Family::QNet;
  throw IoError("unknown family \"" + s + "\"");
}

Cx evaluate(const FaceLagrangian& L, Cx u, Cx u_i, Cx u_j, Cx u_ij) {
  Cx d1 = u_ij - u;
  Cx d2 = u_i - u_j;
  if (auto* d = std::get_if<DiagonalCoeffs>(&L))
    return 0.5 * d->alpha * d1 * d1 + d->beta * d1 * d2 + 0.5 * d->gamma * d2 * d2;
  if (auto* f = std::get_if<FactorizedPQ>(&L)) {
    guard_nonzero(f->p + f->q, "factorized Lagrangian");
    return (d1 + f->p * d2) * (d1 - f->q * d2) / (f->p + f->q);
  }
  if (auto* t = std::get_if<TriangularLag>(&L)) {
    guard_nonzero(t->a, "triangular Lagrangian");
    Cx w = d1 + t->b * d2;
    return w * w / t->a;
  }
  if (auto* o = std::get_if<OffDiagLag>(&L)) {
    guard_nonzero(o->a, "off-diagonal Lagrangian");
    return d1 * d1 / o->a - o->c * d2 * d2;
  }
  if (auto* p = std::get_if<ThreePointLag>(&L)) {
    Cx a = u_i - u, b = u_j - u;
    return a * a - b * b - p->p * d2 * d2;
  }
  const auto& q = std::get<QNetLag>(L);
  Cx den = 2.0 * q.s * q.c_ij * q.c_ji;
  guard_nonzero(den, "quad-equation Lagrangian");
  Cx w = u_ij - q.c_ji * u_i - q.c_ij * u_j - q.c_ij * q.c_ji * u;
  return w * w / den;
}

Eigen::Matrix4cd face_form(const FaceLagrangian& L) {
  if (auto* d = std::get_if<DiagonalCoeffs>(&L))
    return 0.5 * d->alpha * sym_outer(kDiag, kDiag) + d->beta * sym_outer(kDiag, kCross) +
           0.5 * d->gamma * sym_outer(kCross, kCross);
  if (auto* f = std::get_if<FactorizedPQ>(&L)) {
    guard_nonzero(f->p + f->q, "factorized Lagrangian");
    V4 w1 = kDiag + f->p * kCross;
    V4 w2 = kDiag - f->q * kCross;
    return sym_outer(w1, w2) / (f->p + f->q);
  }
  if (auto* t = std::get_if<TriangularLag>(&L)) {
    guard_nonzero(t->a, "triangular Lagrangian");
    V4 w = kDiag + t->b * kCross;
    return sym_outer(w, w) / t->a;
  }
  if (auto* o = std::get_if<OffDiagLag>(&L)) {
    guard_nonzero(o->a, "off-diagonal Lagrangian");
    return sym_outer(kDiag, kDiag) / o->a - o->c * sym_outer(kCross, kCross);
  }
  if (auto* p = std::get_if<ThreePointLag>(&L)) {
    V4 e1 = (V4() << -1, 1, 0, 0).finished();
    V4 e2 = (V4() << -1, 0, 1, 0).finished();
    return sym_outer(e1, e1) - sym_outer(e2, e2) - p->p * sym_outer(kCross, kCross);
  }
  const auto& q = std::get<QNetLag>(L);
  Cx den = 2.0 * q.s * q.c_ij * q.c_ji;
  guard_nonzero(den, "quad-equation Lagrangian");
  V4 ell = (V4() << -q.c_ij * q.c_ji, -q.c_ji, -q.c_ij, 1).finished();
  return sym_outer(ell, ell) / den;
}

DiagonalCoeffs from_moutard(const MoutardCoeffs& m) {
  guard_nonzero(m.a, "from_moutard");
  return DiagonalCoeffs{1.0 / m.a, -m.b / m.a, (m.b * m.b - m.a * m.c) / m.a};
}

MoutardCoeffs to_moutard(const DiagonalCoeffs& d) {
  guard_nonzero(d.alpha, "to_moutard");
  return MoutardCoeffs{1.0 / d.alpha, -d.beta / d.alpha,
                       (d.beta * d.beta - d.alpha * d.gamma) / d.alpha};
}

DiagonalCoeffs diagonal_from_complex_p(Cx p) {
  if (p.real() == 0.0) throw DegenerateWeights("complex weight needs Re p != 0");
  double re = p.real(), im = p.imag();
  return DiagonalCoeffs{Cx(1.0 / re, 0), Cx(im / re, 0), Cx((re * re + im * im) / re, 0)};
}

MoutardCoeffs moutard_from_complex_p(Cx p) {
  return MoutardCoeffs{Cx(p.real(), 0), Cx(-p.imag(), 0), Cx(-p.real(), 0)};
}

DiagonalCoeffs diagonal_from_factorized(Cx p, Cx q) {
  guard_nonzero(p + q, "factorized coefficients");
  return DiagonalCoeffs{2.0 / (p + q), (p - q) / (p + q), -2.0 * p * q / (p + q)};
}

Family family_for_kind(WeightKind k) {
  switch (k) {
    case WeightKind::ComplexP: return Family::ComplexAnalysis;
    case WeightKind::ThreePointP: return Family::ThreePoint;
    case WeightKind::PairPQKind: return Family::Factorized;
    case WeightKind::MoutardABC: return Family::Diagonal;
    case WeightKind::Triangular: return Family::Triangular;
    case WeightKind::OffDiagonal: return Family::OffDiagonal;
    case WeightKind::QNet: return Family::QNet;
  }
  throw IoError("unhandled kind");
}

WeightKind kind_for_family(Family f) {
  switch (f) {
    case Family::Diagonal: return WeightKind::MoutardABC;
    case Family::ComplexAnalysis: return WeightKind::ComplexP;
    case Family::Factorized: return WeightKind::PairPQKind;
    case Family::Triangular: return WeightKind::Triangular;
    case Family::OffDiagonal: return WeightKind::OffDiagonal;
    case Family::ThreePoint: return WeightKind::ThreePointP;
    case Family::QNet: return WeightKind::QNet;
  }
  throw IoError("unhandled family");
}

LagrangianField lagrangian_from_weights(TaggedWeightField W, std::optional<Family> fam) {
  Family f = fam.value_or(family_for_kind(W.kind));
  if (kind_for_family(f) != W.kind)
    throw IoError("family " + family_name(f) + " is incompatible with weight kind " +
                  kind_name(W.kind));
  return LagrangianField{f, std::move(W)};
}

bool LagrangianField::has_face(const Quad& q) const {
  return std::visit([&](const auto& f) { return f.has(q); }, weights.data);
}

FaceLagrangian LagrangianField::face(const Quad& q) const {
  switch (weights.kind) {
    case WeightKind::ComplexP:
      return diagonal_from_complex_p(std::get<PlaquetteField<Cx>>(weights.data).at(q));
    case WeightKind::ThreePointP:
      return ThreePointLag{std::get<PlaquetteField<Cx>>(weights.data).at(q)};
    case WeightKind::PairPQKind: {
      PairPQ v = std::get<PlaquetteField<PairPQ>>(weights.data).at(q);
      // Odd-parity faces store the hatted parametrization, in which the roles
      // of p and q relative to the underlying diagonal data are exchanged.
      if (q.base.parity() == 1) std::swap(v.p, v.q);
      return FactorizedPQ{v.p, v.q};
    }
    case WeightKind::MoutardABC:
      return from_moutard(std::get<PlaquetteField<MoutardCoeffs>>(weights.data).at(q));
    case WeightKind::Triangular: {
      // Stored data are the matrix entries; the Lagrangian parameters are
      // (2a, -b): L = (u_ij - u - b (u_i - u_j))^2 / (2a).
      TriangularAB v = std::get<PlaquetteField<TriangularAB>>(weights.data).at(q);
      return TriangularLag{2.0 * v.a, -v.b};
    }
    case WeightKind::OffDiagonal: {
      // Stored data are the matrix entries; Lagrangian parameters (2a, c/2).
      OffDiagAC v = std::get<PlaquetteField<OffDiagAC>>(weights.data).at(q);
      return OffDiagLag{2.0 * v.a, 0.5 * v.c};
    }
    case WeightKind::QNet: {
      QNetCoeffs v = std::get<PlaquetteField<QNetCoeffs>>(weights.data).at(q);
      return QNetLag{v.c_ij, v.c_ji, v.s};
    }
  }
  throw IoError("unhandled kind");
}

CubeGram cube_gram(const LagrangianField& L, const Cube& c) {
  Matrix8 M = Matrix8::Zero();
  for (const auto& f : c.faces()) {
    Eigen::Matrix4cd F = face_form(L.face(f.quad));
    for (int r = 0; r < 4; ++r)
      for (int s = 0; s < 4; ++s)
        M(f.slots[static_cast<size_t>(r)], f.slots[static_cast<size_t>(s)]) +=
            static_cast<double>(f.bsign) * F(r, s);
  }
  return CubeGram{c, M};
}

Cx action(const LagrangianField& L, const QuadSurface& S, const VertexField& u) {
  Cx total = 0;
  for (const auto& [q, sign] : S.faces) {
    auto corners = q.corners();
    Cx val = evaluate(L.face(q), u.at(corners[0]), u.at(corners[1]), u.at(corners[2]),
                      u.at(corners[3]));
    total += static_cast<double>(sign) * val;
  }
  return total;
}

Cx action_gradient(const LagrangianField& L, const QuadSurface& S, const VertexField& u,
                   const Point& vertex) {
  Cx g = 0;
  for (const auto& [q, sign] : S.faces) {
    auto corners = q.corners();
    int role = -1;
    for (int r = 0; r < 4; ++r)
      if (corners[static_cast<size_t>(r)] == vertex) role = r;
    if (role < 0) continue;
    Eigen::Matrix4cd F = face_form(L.face(q));
    V4 x;
    for (int r = 0; r < 4; ++r) x(r) = u.at(corners[static_cast<size_t>(r)]);
    g += static_cast<double>(sign) * 2.0 * (F.row(role) * x)(0, 0);
  }
  return g;
}

ConstraintCheck lagrangian_constraint_check(const LagrangianField& L,
                                            const std::vector<Quad>& faces,
                                            const ConstraintTriple& t) {
  ConstraintCheck out;
  for (const Quad& q : faces) {
    DiagonalCoeffs d = to_diagonal(L.face(q));
    long csum = 0;
    for (int v : q.base.coords) csum += v;
    double sgn = (((csum % 2) + 2) % 2 == 0) ? 1.0 : -1.0;
    Cx det = d.beta * d.beta - d.alpha * d.gamma;
    Cx terms[3] = {t.lambda, -t.mu * sgn * d.beta, t.nu * det};
    double scale =
        std::max({std::abs(terms[0]), std::abs(terms[1]), std::abs(terms[2]), 1e-300});
    double rel = std::abs(terms[0] + terms[1] + terms[2]) / scale;
    if (rel > out.max_rel_residual) {
      out.max_rel_residual = rel;
      out.worst = q;
    }
  }
  return out;
}

std::vector<Quad> enumerate_quads(const Box& region) {
  int n = region.dim();
  std::vector<Quad> out;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      Box bases = region;
      bases.hi[i] -= 1;
      bases.hi[j] -= 1;
      bool empty = false;
      for (int a = 1; a <= n; ++a)
        if (bases.hi[a] < bases.lo[a]) empty = true;
      if (empty) continue;
      for (const Point& b : bases.points()) out.push_back(Quad{b, i, j});
    }
  return out;
}

GaugeResult qnet_gauge_normalize(const PlaquetteField<QNetGeneral>& W, const Box& region,
                                 const Tolerances& tol) {
  const int n = region.dim();
  auto r_of = [&](const Quad& q) {
    QNetGeneral v = W.at(q);
    double scale = std::max(vnorm(v), 1e-300);
    if (std::abs(v.d) <= tol.degenerate_rel * scale ||
        std::abs(v.c_ij * v.c_ji) <= tol.degenerate_rel * scale * scale)
      throw DegenerateWeights("gauge data degenerate on " + q.str());
    return v.c_ij * v.c_ji / v.d;
  };

  // Conservation: the ratio r(top)/r(bottom) agrees across the three
  // direction pairs of every cube.
  for (const Cube& c : enumerate_cubes(region)) {
    auto fs = c.faces();
    Cx ratio[3];
    for (int pr = 0; pr < 3; ++pr) {
      const auto& bot = fs[static_cast<size_t>(2 * pr)];
      const auto& top = fs[static_cast<size_t>(2 * pr + 1)];
      ratio[pr] = r_of(top.quad) / r_of(bot.quad);
    }
    double scale = std::max({std::abs(ratio[0]), std::abs(ratio[1]), std::abs(ratio[2])});
    double worst = std::max({std::abs(ratio[0] - ratio[1]), std::abs(ratio[1] - ratio[2]),
                             std::abs(ratio[0] - ratio[2])});
    if (worst > tol.consistency_rel * std::max(scale, 1e-300))
      throw ConservationViolated("gauge conservation fails on " + c.str() +
                                 " (relative spread " + std::to_string(worst / scale) + ")");
  }

  // Potential in log domain: h + h_ij - h_i - h_j = log r on the quads of
  // the two lowest active axes; h = 0 where fewer than two axes are active.
  GaugeResult out;
  out.g.dim = n;
  std::unordered_map<Point, Cx, PointHash> h;
  for (const Point& v : region.points()) {
    std::vector<int> active;
    for (int a = 1; a <= n; ++a)
      if (v[a] > region.lo[a]) active.push_back(a);
    if (active.size() < 2) {
      h[v] = 0;
      continue;
    }
    int a1 = active[0], a2 = active[1];
    Point base = v.shifted(a1, -1).shifted(a2, -1);
    Cx lr = std::log(r_of(Quad{base, a1, a2}));
    h[v] = lr + h.at(v.shifted(a1, -1)) + h.at(v.shifted(a2, -1)) - h.at(base);
  }
  for (const auto& [v, hv] : h) out.g.set(v, std::exp(hv));

  // Gauged coefficients and the multiplicative residual (branch-safe).
  out.gauged.dim = n;
  for (const Quad& q : enumerate_quads(region)) {
    QNetGeneral v = W.at(q);
    auto c = q.corners();
    Cx g0 = out.g.at(c[0]), gi = out.g.at(c[1]), gj = out.g.at(c[2]), gij = out.g.at(c[3]);
    Cx r = r_of(q);
    double rel = std::abs(g0 * gij / (gi * gj) - r) / std::max(std::abs(r), 1e-300);
    out.max_gauge_residual = std::max(out.max_gauge_residual, rel);
    out.gauged.values[q] =
        QNetGeneral{v.c_ij * gj / gij, v.c_ji * gi / gij, v.d * g0 / gij};
  }
  if (out.max_gauge_residual > tol.consistency_rel)
    throw ConservationViolated("gauge condition residual " +
                               std::to_string(out.max_gauge_residual) + " beyond tolerance");
  return out;
}

}  // namespace plurilatt
