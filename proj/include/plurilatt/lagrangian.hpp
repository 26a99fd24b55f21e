#pragma once

#include <Eigen/Dense>
#include <variant>

#include "plurilatt/weights.hpp"

namespace plurilatt {

// Quadratic Lagrangian families on a plaquette, each a function of the corner
// values x = (u, u_i, u_j, u_ij) read in canonical orientation. Reversing the
// orientation negates the value: L(ji) = -L(ij).
enum class Family {
  Diagonal,         // general (alpha, beta, gamma) from Moutard coefficients
  ComplexAnalysis,  // from scalar p, all three coefficients real
  Factorized,       // product of two linear factors, parameters (p, q)
  Triangular,       // single squared factor over a, parameters (a, b)
  OffDiagonal,      // decoupled squares, parameters (a, c)
  ThreePoint,       // difference of corner squares minus p (u_i - u_j)^2
  QNet,             // squared linear quad equation over 2 s c_ij c_ji
};

std::string family_name(Family f);
Family family_from_name(const std::string& s);

// L = 1/2 alpha (u_ij - u)^2 + beta (u_ij - u)(u_i - u_j) + 1/2 gamma (u_i - u_j)^2.
struct DiagonalCoeffs {
  Cx alpha, beta, gamma;
};

// L = (u_ij - u + p (u_i - u_j)) (u_ij - u - q (u_i - u_j)) / (p + q).
struct FactorizedPQ {
  Cx p, q;
};

// L = (u_ij - u + b (u_i - u_j))^2 / a.
struct TriangularLag {
  Cx a, b;
};

// L = (u_ij - u)^2 / a - c (u_i - u_j)^2.
struct OffDiagLag {
  Cx a, c;
};

// L = (u_i - u)^2 - (u_j - u)^2 - p (u_i - u_j)^2.
struct ThreePointLag {
  Cx p;
};

// L = (u_ij - c_ji u_i - c_ij u_j - c_ij c_ji u)^2 / (2 s c_ij c_ji).
struct QNetLag {
  Cx c_ij, c_ji, s;
};

using FaceLagrangian =
    std::variant<DiagonalCoeffs, FactorizedPQ, TriangularLag, OffDiagLag, ThreePointLag, QNetLag>;

// Closed-form value of L at the four corner values.
Cx evaluate(const FaceLagrangian& L, Cx u, Cx u_i, Cx u_j, Cx u_ij);

// Symmetric 4x4 matrix F with x^T F x = L, x = (u, u_i, u_j, u_ij).
Eigen::Matrix4cd face_form(const FaceLagrangian& L);

// Conversions between the diagonal coefficients and the 2x2 matrix entries.
// from_moutard: alpha = 1/a, beta = -b/a, gamma = (b^2 - a c)/a.
DiagonalCoeffs from_moutard(const MoutardCoeffs& m);
MoutardCoeffs to_moutard(const DiagonalCoeffs& d);

// ComplexAnalysis coefficients: alpha = 1/Re p, beta = Im p/Re p,
// gamma = |p|^2/Re p (all real); matrix entries (Re p, -Im p, -Re p).
DiagonalCoeffs diagonal_from_complex_p(Cx p);
MoutardCoeffs moutard_from_complex_p(Cx p);

// Expansion of the factorized product into diagonal coefficients:
// alpha = 2/(p+q), beta = (p-q)/(p+q), gamma = -2 p q/(p+q); beta^2
// - alpha gamma = 1.
DiagonalCoeffs diagonal_from_factorized(Cx p, Cx q);

// Lagrangian field: a weight field plus the family that tells how plaquette
// data turns into face Lagrangians.
struct LagrangianField {
  Family family = Family::ComplexAnalysis;
  TaggedWeightField weights;

  int dim() const { return weights.dim(); }
  bool has_face(const Quad& q) const;
  FaceLagrangian face(const Quad& q) const;
};

// Pairs a weight kind with its family (validates compatibility if fam given).
LagrangianField lagrangian_from_weights(TaggedWeightField W, std::optional<Family> fam = {});

Family family_for_kind(WeightKind k);
WeightKind kind_for_family(Family f);

// 8x8 Gram matrix M of the cube action S = x^T M x over the vertex slots of
// Cube::verts(); assembled as sum of boundary-signed scattered face forms.
using Matrix8 = Eigen::Matrix<Cx, 8, 8>;
using Vector8 = Eigen::Matrix<Cx, 8, 1>;

struct CubeGram {
  Cube cube;
  Matrix8 M;
};

CubeGram cube_gram(const LagrangianField& L, const Cube& c);

// Action sum over an oriented surface: sum of sign * L(face corners).
Cx action(const LagrangianField& L, const QuadSurface& S, const VertexField& u);

// d(action)/d(u(vertex)) over the faces of S containing the vertex.
Cx action_gradient(const LagrangianField& L, const QuadSurface& S, const VertexField& u,
                   const Point& vertex);

// Residual statistics of lambda - mu (-1)^{|n|} beta + nu (beta^2 - alpha
// gamma) = 0 over the given faces; |n| is the base coordinate sum. Only
// families reducible to diagonal coefficients are supported.
struct ConstraintCheck {
  double max_rel_residual = 0.0;
  Quad worst;
};
ConstraintCheck lagrangian_constraint_check(const LagrangianField& L,
                                            const std::vector<Quad>& faces,
                                            const ConstraintTriple& t);

// All canonical quads with all four corners inside the region.
std::vector<Quad> enumerate_quads(const Box& region);

// Gauge normalization of the ungauged linear quad equation: finds g with
// c_ij c_ji / d = g g_ij / (g_i g_j) on the region and returns the gauged
// coefficients c~_ji = c_ji g_i / g_ij, c~_ij = c_ij g_j / g_ij,
// d~ = d g / g_ij = c~_ij c~_ji.
struct GaugeResult {
  VertexField g;
  PlaquetteField<QNetGeneral> gauged;
  double max_gauge_residual = 0.0;  // relative, multiplicative check
};
GaugeResult qnet_gauge_normalize(const PlaquetteField<QNetGeneral>& W, const Box& region,
                                 const Tolerances& tol = {});

}  // namespace plurilatt
