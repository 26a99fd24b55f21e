#include "plurilatt/weights.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace plurilatt {

namespace {

// Symmetric pairwise-product denominator x y + y z + z x.
Cx pair_sum(Cx x, Cx y, Cx z) { return x * y + y * z + z * x; }

void guard_denominator(Cx den, double scale, const Tolerances& tol, const char* what) {
  if (std::abs(den) <= tol.degenerate_rel * scale * scale)
    throw DegenerateWeights(std::string(what) + ": denominator magnitude " +
                            std::to_string(std::abs(den)) + " below cutoff");
}

using M2 = Eigen::Matrix2cd;

M2 as_matrix(const MoutardCoeffs& m) {
  M2 A;
  A << m.b, m.a, m.c, m.b;
  return A;
}

MoutardCoeffs as_coeffs(const M2& A, const Tolerances& tol, const char* what) {
  double scale = A.cwiseAbs().maxCoeff();
  if (std::abs(A(0, 0) - A(1, 1)) > std::max(tol.consistency_rel * scale, 1e-300))
    throw InconsistentCoefficients(std::string(what) + ": result lost the equal-diagonal form");
  return MoutardCoeffs{A(0, 1), 0.5 * (A(0, 0) + A(1, 1)), A(1, 0)};
}

M2 inverse_guarded(const M2& A, const Tolerances& tol, const char* what) {
  double scale = A.cwiseAbs().maxCoeff();
  Cx det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
  if (std::abs(det) <= tol.degenerate_rel * std::max(scale * scale, 1e-300))
    throw SingularMatrix(std::string(what) + ": 2x2 determinant below cutoff");
  M2 R;
  R << A(1, 1), -A(0, 1), -A(1, 0), A(0, 0);
  return R / det;
}

}  // namespace

Cx star_triangle(Cx p_ij, Cx p_jk, Cx p_ki, const Tolerances& tol) {
  double scale = std::max({std::abs(p_ij), std::abs(p_jk), std::abs(p_ki)});
  Cx den = pair_sum(p_ij, p_jk, p_ki);
  guard_denominator(den, scale, tol, "star_triangle");
  return p_ij / den;
}

Cx star_triangle_neg(Cx p_ij, Cx p_jk, Cx p_ki, const Tolerances& tol) {
  double scale = std::max({std::abs(p_ij), std::abs(p_jk), std::abs(p_ki)});
  Cx den = pair_sum(p_ij, p_jk, p_ki);
  guard_denominator(den, scale, tol, "star_triangle_neg");
  return -p_ij / den;
}

std::pair<Cx, Cx> coupled_star_triangle(const std::array<Cx, 3>& p, const std::array<Cx, 3>& q,
                                        Cx ratio, const Tolerances& tol) {
  if (std::abs(ratio) == 0.0) throw DegenerateWeights("coupled_star_triangle: ratio is zero");
  double qs = std::max({std::abs(q[0]), std::abs(q[1]), std::abs(q[2])});
  double ps = std::max({std::abs(p[0]), std::abs(p[1]), std::abs(p[2])});
  Cx dq = pair_sum(q[0], q[1], q[2]);
  Cx dp = pair_sum(p[0], p[1], p[2]);
  guard_denominator(dq, qs, tol, "coupled_star_triangle(q)");
  guard_denominator(dp, ps, tol, "coupled_star_triangle(p)");
  return {q[0] / (ratio * dq), p[0] / (ratio * dp)};
}

std::pair<Cx, Cx> triangular_step(const std::array<Cx, 3>& a, const std::array<Cx, 3>& b,
                                  const Tolerances& tol) {
  Cx b_hat = star_triangle_neg(b[0], b[1], b[2], tol);
  double bs = std::max({std::abs(b[0]), std::abs(b[1]), std::abs(b[2])});
  guard_denominator(b[0], std::sqrt(bs), tol, "triangular_step");
  Cx a_hat = b_hat * b_hat *
             (a[1] + a[2] + (b[2] * a[1] + b[1] * a[2]) / b[0] - b[1] * b[2] * a[0] / (b[0] * b[0]));
  return {a_hat, b_hat};
}

std::pair<Cx, Cx> offdiagonal_step(const std::array<Cx, 3>& a, const std::array<Cx, 3>& c,
                                   const Tolerances& tol) {
  Cx c_hat = star_triangle_neg(a[0], a[1], a[2], tol);
  Cx a_hat = star_triangle_neg(c[0], c[1], c[2], tol);
  return {a_hat, c_hat};
}

std::array<MoutardCoeffs, 3> moutard_matrix_step(const std::array<MoutardCoeffs, 3>& A,
                                                 const Tolerances& tol) {
  M2 M[3] = {as_matrix(A[0]), as_matrix(A[1]), as_matrix(A[2])};
  M2 inv1 = inverse_guarded(M[1], tol, "moutard_matrix_step");
  M2 lhs = M[0] * inv1 * M[2];
  M2 rhs = M[2] * inv1 * M[0];
  double scale = std::max({lhs.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff(), 1e-300});
  if ((lhs - rhs).cwiseAbs().maxCoeff() > tol.consistency_rel * scale)
    throw InconsistentCoefficients(
        "moutard_matrix_step: A1 A2^{-1} A3 != A3 A2^{-1} A1 beyond tolerance");
  std::array<MoutardCoeffs, 3> out;
  for (int i = 0; i < 3; ++i) {
    int j = (i + 1) % 3, k = (i + 2) % 3;
    M2 inv_i = inverse_guarded(M[i], tol, "moutard_matrix_step");
    M2 sum = M[j] + M[k] + M[k] * inv_i * M[j];
    M2 hat = -inverse_guarded(sum, tol, "moutard_matrix_step(sum)");
    out[static_cast<size_t>(i)] = as_coeffs(hat, tol, "moutard_matrix_step");
  }
  return out;
}

std::array<QNetCoeffs, 3> qnet_step(const std::array<QNetCoeffs, 3>& w, const Tolerances& tol) {
  // Local ordered-pair tables over direction positions 1,2,3.
  // Slot 0 carries the pair (2,3), slot 1 (3,1), slot 2 (1,2).
  Cx c[4][4];
  Cx s[4][4];
  auto load = [&](int slot, int i, int j) {
    c[i][j] = w[static_cast<size_t>(slot)].c_ij;
    c[j][i] = w[static_cast<size_t>(slot)].c_ji;
    s[i][j] = w[static_cast<size_t>(slot)].s;
    s[j][i] = -w[static_cast<size_t>(slot)].s;
  };
  load(0, 2, 3);
  load(1, 3, 1);
  load(2, 1, 2);
  double scale = std::max({vnorm(w[0]), vnorm(w[1]), vnorm(w[2])});
  auto c_out = [&](int i, int j, int k) {
    guard_denominator(c[k][j], std::sqrt(scale), tol, "qnet_step");
    return (c[i][k] * c[k][i] - c[i][k] * c[k][j] - c[k][i] * c[i][j]) / c[k][j];
  };
  auto s_out = [&](int i, int j, int k) {
    return c[k][i] * c[k][j] * s[i][j] + c[k][i] * (c[i][j] - c[i][k]) * s[j][k] +
           c[k][j] * (c[j][i] - c[j][k]) * s[k][i];
  };
  auto face = [&](int i, int j, int k) {
    return QNetCoeffs{c_out(i, j, k), c_out(j, i, k), s_out(i, j, k)};
  };
  return {face(2, 3, 1), face(3, 1, 2), face(1, 2, 3)};
}

std::pair<Cx, Cx> ConstraintTriple::xi_eta() const {
  if (std::abs(lambda) == 0.0)
    throw DegenerateWeights("xi_eta needs lambda != 0 (generic constraint)");
  Cx disc = std::sqrt(mu * mu - 4.0 * lambda * nu);
  return {(mu - disc) / (2.0 * lambda), (mu + disc) / (2.0 * lambda)};
}

std::optional<ConstraintTriple> check_dependence(const std::array<MoutardCoeffs, 3>& A,
                                                 const Tolerances& tol) {
  Eigen::Matrix3cd M;
  for (int i = 0; i < 3; ++i) {
    M(i, 0) = A[static_cast<size_t>(i)].a;
    M(i, 1) = A[static_cast<size_t>(i)].b;
    M(i, 2) = A[static_cast<size_t>(i)].c;
  }
  Eigen::JacobiSVD<Eigen::Matrix3cd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(2) > tol.rank_rel * std::max(sv(0), 1e-300)) return std::nullopt;
  Eigen::Vector3cd k = svd.matrixV().col(2);
  int imax = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(k(i)) > std::abs(k(imax))) imax = i;
  k /= k(imax);
  return ConstraintTriple{k(0), k(1), k(2)};
}

double dependence_flip_residual(const ConstraintTriple& t, const MoutardCoeffs& hat) {
  Cx terms[3] = {t.lambda * hat.a, -t.mu * hat.b, t.nu * hat.c};
  double scale = std::max({std::abs(terms[0]), std::abs(terms[1]), std::abs(terms[2]), 1e-300});
  return std::abs(terms[0] + terms[1] + terms[2]) / scale;
}

std::string kind_name(WeightKind k) {
  switch (k) {
    case WeightKind::ComplexP: return "complex_p";
    case WeightKind::ThreePointP: return "three_point";
    case WeightKind::PairPQKind: return "pair_pq";
    case WeightKind::MoutardABC: return "moutard_abc";
    case WeightKind::Triangular: return "triangular";
    case WeightKind::OffDiagonal: return "off_diagonal";
    case WeightKind::QNet: return "qnet";
  }
  return "unknown";
}

WeightKind kind_from_name(const std::string& s) {
  if (s == "complex_p") return WeightKind::ComplexP;
  if (s == "three_point") return WeightKind::ThreePointP;
  if (s == "pair_pq") return WeightKind::PairPQKind;
  if (s == "moutard_abc") return WeightKind::MoutardABC;
  if (s == "triangular") return WeightKind::Triangular;
  if (s == "off_diagonal") return WeightKind::OffDiagonal;
  if (s == "qnet") return WeightKind::QNet;
  throw IoError("unknown weight kind \"" + s + "\"");
}

std::array<Cx, 3> step_complex_p(const std::array<Cx, 3>& v, const Tolerances& tol) {
  double scale = std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
  Cx den = pair_sum(v[0], v[1], v[2]);
  guard_denominator(den, scale, tol, "step_complex_p");
  return {v[0] / den, v[1] / den, v[2] / den};
}

std::array<Cx, 3> step_three_point(const std::array<Cx, 3>& v, const Tolerances& tol) {
  double scale = std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
  Cx den = pair_sum(v[0], v[1], v[2]);
  guard_denominator(den, scale, tol, "step_three_point");
  return {-v[0] / den, -v[1] / den, -v[2] / den};
}

std::array<PairPQ, 3> step_pair_pq(const std::array<PairPQ, 3>& v, Cx ratio,
                                   const Tolerances& tol) {
  std::array<PairPQ, 3> out;
  for (int s = 0; s < 3; ++s) {
    std::array<Cx, 3> p = {v[static_cast<size_t>(s)].p, v[static_cast<size_t>((s + 1) % 3)].p,
                           v[static_cast<size_t>((s + 2) % 3)].p};
    std::array<Cx, 3> q = {v[static_cast<size_t>(s)].q, v[static_cast<size_t>((s + 1) % 3)].q,
                           v[static_cast<size_t>((s + 2) % 3)].q};
    auto [ph, qh] = coupled_star_triangle(p, q, ratio, tol);
    out[static_cast<size_t>(s)] = PairPQ{ph, qh};
  }
  return out;
}

std::array<TriangularAB, 3> step_triangular(const std::array<TriangularAB, 3>& v,
                                            const Tolerances& tol) {
  std::array<TriangularAB, 3> out;
  for (int s = 0; s < 3; ++s) {
    std::array<Cx, 3> a = {v[static_cast<size_t>(s)].a, v[static_cast<size_t>((s + 1) % 3)].a,
                           v[static_cast<size_t>((s + 2) % 3)].a};
    std::array<Cx, 3> b = {v[static_cast<size_t>(s)].b, v[static_cast<size_t>((s + 1) % 3)].b,
                           v[static_cast<size_t>((s + 2) % 3)].b};
    auto [ah, bh] = triangular_step(a, b, tol);
    out[static_cast<size_t>(s)] = TriangularAB{ah, bh};
  }
  return out;
}

std::array<OffDiagAC, 3> step_offdiagonal(const std::array<OffDiagAC, 3>& v,
                                          const Tolerances& tol) {
  std::array<OffDiagAC, 3> out;
  for (int s = 0; s < 3; ++s) {
    std::array<Cx, 3> a = {v[static_cast<size_t>(s)].a, v[static_cast<size_t>((s + 1) % 3)].a,
                           v[static_cast<size_t>((s + 2) % 3)].a};
    std::array<Cx, 3> c = {v[static_cast<size_t>(s)].c, v[static_cast<size_t>((s + 1) % 3)].c,
                           v[static_cast<size_t>((s + 2) % 3)].c};
    auto [ah, ch] = offdiagonal_step(a, c, tol);
    out[static_cast<size_t>(s)] = OffDiagAC{ah, ch};
  }
  return out;
}

PropagateStats propagate_tagged(TaggedWeightField& W, const Box& region,
                                const PropagateOptions& opt) {
  const Tolerances& tol = opt.tol;
  switch (W.kind) {
    case WeightKind::ComplexP: {
      auto& F = std::get<PlaquetteField<Cx>>(W.data);
      return propagate(F, region,
                       [&](const std::array<Cx, 3>& v) { return step_complex_p(v, tol); }, opt);
    }
    case WeightKind::ThreePointP: {
      auto& F = std::get<PlaquetteField<Cx>>(W.data);
      return propagate(F, region,
                       [&](const std::array<Cx, 3>& v) { return step_three_point(v, tol); }, opt);
    }
    case WeightKind::PairPQKind: {
      Cx ratio = Cx(-1.0, 0.0);
      if (W.constraint) {
        if (std::abs(W.constraint->nu) == 0.0)
          throw DegenerateWeights("pair_pq propagation needs nu != 0 in the constraint");
        ratio = W.constraint->lambda / W.constraint->nu;
      }
      auto& F = std::get<PlaquetteField<PairPQ>>(W.data);
      return propagate(F, region,
                       [&](const std::array<PairPQ, 3>& v) { return step_pair_pq(v, ratio, tol); },
                       opt);
    }
    case WeightKind::MoutardABC: {
      auto& F = std::get<PlaquetteField<MoutardCoeffs>>(W.data);
      return propagate(
          F, region,
          [&](const std::array<MoutardCoeffs, 3>& v) { return moutard_matrix_step(v, tol); }, opt);
    }
    case WeightKind::Triangular: {
      auto& F = std::get<PlaquetteField<TriangularAB>>(W.data);
      return propagate(
          F, region,
          [&](const std::array<TriangularAB, 3>& v) { return step_triangular(v, tol); }, opt);
    }
    case WeightKind::OffDiagonal: {
      auto& F = std::get<PlaquetteField<OffDiagAC>>(W.data);
      return propagate(
          F, region,
          [&](const std::array<OffDiagAC, 3>& v) { return step_offdiagonal(v, tol); }, opt);
    }
    case WeightKind::QNet: {
      auto& F = std::get<PlaquetteField<QNetCoeffs>>(W.data);
      return propagate(F, region,
                       [&](const std::array<QNetCoeffs, 3>& v) { return qnet_step(v, tol); }, opt);
    }
  }
  throw IoError("unhandled weight kind");
}

}  // namespace plurilatt
