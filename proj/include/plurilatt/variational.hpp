#pragma once

#include <Eigen/Sparse>

#include "plurilatt/lagrangian.hpp"

namespace plurilatt {

// Corner equations of a cube are the rows of 2 M x = 0.
Vector8 corner_residuals(const Matrix8& M, const Vector8& x);

// Consistency of one cube: singular values of the Gram matrix and the rank at
// the relative threshold tol.rank_rel. Consistent iff rank == 2.
struct CubeVerdict {
  Cube cube;
  std::array<double, 8> singular_values{};
  int rank = 0;
  bool consistent = false;
};

CubeVerdict verify_cube(const CubeGram& G, const Tolerances& tol = {});

// Orthonormal basis of the numerical kernel (columns), dimension 8 - rank.
Eigen::MatrixXcd kernel_basis(const Matrix8& M, const Tolerances& tol = {});

// Verdicts for every cube of the region. With parallel set, cubes are
// processed with OpenMP; the output order is the enumeration order either way.
std::vector<CubeVerdict> verify_region(const LagrangianField& L, const Box& region,
                                       bool parallel = false, const Tolerances& tol = {});

// Dirichlet problem on an oriented quad surface: interior equations
// d(action)/d(u(n)) = 0, boundary values prescribed.
struct DirichletProblem {
  QuadSurface surface;
  LagrangianField lagrangian;
  std::unordered_map<Point, Cx, PointHash> boundary;
};

struct DirichletSolution {
  VertexField u;                 // full field: boundary plus solved interior
  std::vector<Point> interior;   // row order of the assembled system
  double residual = 0.0;         // max |A x - b| over rows
};

// Assembled sparse system A x = b over the interior vertices (lex order).
struct AssembledSystem {
  std::vector<Point> interior;
  Eigen::SparseMatrix<Cx> A;
  Eigen::VectorXcd b;
};

AssembledSystem assemble_laplacian(const DirichletProblem& P);

DirichletSolution solve_dirichlet(const DirichletProblem& P, const Tolerances& tol = {});

// Replaces the surface faces of the cube by the complementary faces
// (cube_move) and extends the field to the new vertices by solving the cube's
// corner equations in least squares (minimum-norm when underdetermined). All
// eight corner residuals of the extended cube data are reported.
struct FlipExtension {
  QuadSurface surface;     // after the move
  VertexField u;           // extended field
  std::vector<Point> new_vertices;
  double corner_residual = 0.0;  // max |2 M x| relative to ||M|| max|x|
};

FlipExtension extend_across_flip(const QuadSurface& S, const Cube& c, const LagrangianField& L,
                                 const VertexField& u, const Tolerances& tol = {});

// Action values of the same field on two surfaces plus their difference.
struct EnergyComparison {
  Cx before, after;
  double abs_difference = 0.0;
};

EnergyComparison energy_invariance(const LagrangianField& L, const QuadSurface& before,
                                   const QuadSurface& after, const VertexField& u);

}  // namespace plurilatt
