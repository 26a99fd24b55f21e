#include "plurilatt/variational.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseLU>
#include <algorithm>

namespace plurilatt {

Vector8 corner_residuals(const Matrix8& M, const Vector8& x) { return 2.0 * M * x; }

CubeVerdict verify_cube(const CubeGram& G, const Tolerances& tol) {
  Eigen::JacobiSVD<Matrix8> svd(G.M);
  CubeVerdict v;
  v.cube = G.cube;
  const auto& sv = svd.singularValues();
  for (int i = 0; i < 8; ++i) v.singular_values[static_cast<size_t>(i)] = sv(i);
  double cutoff = tol.rank_rel * std::max(sv(0), 1e-300);
  v.rank = 0;
  for (int i = 0; i < 8; ++i)
    if (sv(i) > cutoff) ++v.rank;
  v.consistent = (v.rank == 2);
  return v;
}

Eigen::MatrixXcd kernel_basis(const Matrix8& M, const Tolerances& tol) {
  Eigen::JacobiSVD<Matrix8> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double cutoff = tol.rank_rel * std::max(sv(0), 1e-300);
  int rank = 0;
  for (int i = 0; i < 8; ++i)
    if (sv(i) > cutoff) ++rank;
  return svd.matrixV().rightCols(8 - rank);
}

std::vector<CubeVerdict> verify_region(const LagrangianField& L, const Box& region,
                                       bool parallel, const Tolerances& tol) {
  std::vector<Cube> cubes = enumerate_cubes(region);
  std::vector<CubeVerdict> out(cubes.size());
#ifdef _OPENMP
#pragma omp parallel for if (parallel) schedule(static)
#endif
  for (long long k = 0; k < static_cast<long long>(cubes.size()); ++k) {
    size_t i = static_cast<size_t>(k);
    out[i] = verify_cube(cube_gram(L, cubes[i]), tol);
  }
  return out;
}

AssembledSystem assemble_laplacian(const DirichletProblem& P) {
  P.surface.validate();
  AssembledSystem sys;
  sys.interior = P.surface.interior_vertices();
  std::sort(sys.interior.begin(), sys.interior.end());
  std::unordered_map<Point, int, PointHash> index;
  for (size_t i = 0; i < sys.interior.size(); ++i)
    index[sys.interior[i]] = static_cast<int>(i);

  // Boundary vertices must carry prescribed values.
  for (const Point& v : P.surface.vertex_list()) {
    if (index.count(v)) continue;
    if (!P.boundary.count(v))
      throw MissingFieldValue("boundary vertex " + v.str() + " has no prescribed value");
  }

  const int n = static_cast<int>(sys.interior.size());
  sys.b = Eigen::VectorXcd::Zero(n);
  std::vector<Eigen::Triplet<Cx>> trips;

  // Row for vertex n: sum over incident faces of sign * 2 (F x)_role = 0.
  for (const auto& [q, sign] : P.surface.faces) {
    Eigen::Matrix4cd F = face_form(P.lagrangian.face(q));
    auto corners = q.corners();
    int idx[4];
    for (int r = 0; r < 4; ++r) {
      auto it = index.find(corners[static_cast<size_t>(r)]);
      idx[r] = (it == index.end()) ? -1 : it->second;
    }
    for (int r = 0; r < 4; ++r) {
      if (idx[r] < 0) continue;  // boundary vertex: no equation
      for (int s = 0; s < 4; ++s) {
        Cx coef = static_cast<double>(sign) * 2.0 * F(r, s);
        if (coef == Cx(0, 0)) continue;
        if (idx[s] >= 0)
          trips.emplace_back(idx[r], idx[s], coef);
        else
          sys.b(idx[r]) -= coef * P.boundary.at(corners[static_cast<size_t>(s)]);
      }
    }
  }
  sys.A.resize(n, n);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  return sys;
}

DirichletSolution solve_dirichlet(const DirichletProblem& P, const Tolerances& tol) {
  AssembledSystem sys = assemble_laplacian(P);
  DirichletSolution sol;
  sol.interior = sys.interior;
  sol.u.dim = P.surface.dim;
  for (const auto& [v, val] : P.boundary) sol.u.set(v, val);
  if (!sys.interior.empty()) {
    Eigen::SparseLU<Eigen::SparseMatrix<Cx>> lu;
    lu.compute(sys.A);
    if (lu.info() != Eigen::Success)
      throw SingularSystem("Dirichlet system factorization failed (singular within tolerance)");
    Eigen::VectorXcd x = lu.solve(sys.b);
    if (lu.info() != Eigen::Success) throw SingularSystem("Dirichlet solve failed");
    Eigen::VectorXcd r = sys.A * x - sys.b;
    double scale = std::max({1.0, sys.b.cwiseAbs().maxCoeff(), x.cwiseAbs().maxCoeff()});
    sol.residual = r.cwiseAbs().maxCoeff() / scale;
    if (sol.residual > tol.consistency_rel)
      throw SingularSystem("Dirichlet residual " + std::to_string(sol.residual) +
                           " beyond tolerance (ill-conditioned system)");
    for (size_t i = 0; i < sys.interior.size(); ++i)
      sol.u.set(sys.interior[i], x(static_cast<Eigen::Index>(i)));
  }
  return sol;
}

FlipExtension extend_across_flip(const QuadSurface& S, const Cube& c, const LagrangianField& L,
                                 const VertexField& u, const Tolerances& tol) {
  FlipExtension out;
  out.surface = cube_move(S, c);
  out.u = u;

  // Unknowns: cube vertices appearing on the new surface without a value.
  auto verts = c.verts();
  std::vector<int> unknown;
  for (int s = 0; s < 8; ++s) {
    const Point& v = verts[static_cast<size_t>(s)];
    bool needed = false;
    for (const auto& f : c.faces())
      if (out.surface.has(f.quad))
        for (const auto& corner : f.quad.corners())
          if (corner == v) needed = true;
    if (needed && !u.has(v)) {
      unknown.push_back(s);
      out.new_vertices.push_back(v);
    }
  }

  Matrix8 M = cube_gram(L, c).M;
  Vector8 x = Vector8::Zero();
  for (int s = 0; s < 8; ++s)
    if (u.has(verts[static_cast<size_t>(s)])) x(s) = u.at(verts[static_cast<size_t>(s)]);

  if (!unknown.empty()) {
    // Solve 2M (x_known + E y) = 0 in least squares over the unknown slots y.
    const int k = static_cast<int>(unknown.size());
    Eigen::MatrixXcd A(8, k);
    for (int col = 0; col < k; ++col) A.col(col) = 2.0 * M.col(unknown[static_cast<size_t>(col)]);
    Vector8 rhs = -2.0 * M * x;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double smax = svd.singularValues()(0);
    double mscale = std::max(M.cwiseAbs().maxCoeff(), 1e-300);
    Eigen::VectorXcd y;
    if (smax <= tol.degenerate_rel * mscale) {
      // Unconstrained new vertices: consistent only when the remaining
      // equations already hold, and the minimum-norm choice is zero.
      double rscale = mscale * std::max(x.cwiseAbs().maxCoeff(), 1.0);
      if (rhs.cwiseAbs().maxCoeff() > tol.consistency_rel * rscale)
        throw UnsolvablePivot("corner system does not constrain the new vertices of " + c.str());
      y = Eigen::VectorXcd::Zero(k);
    } else {
      y = svd.solve(rhs);
    }
    for (int col = 0; col < k; ++col) {
      x(unknown[static_cast<size_t>(col)]) = y(col);
      out.u.set(verts[static_cast<size_t>(unknown[static_cast<size_t>(col)])], y(col));
    }
  }

  Vector8 res = corner_residuals(M, x);
  double scale = std::max(M.cwiseAbs().maxCoeff() * std::max(x.cwiseAbs().maxCoeff(), 1.0), 1e-300);
  out.corner_residual = res.cwiseAbs().maxCoeff() / scale;
  if (out.corner_residual > tol.consistency_rel)
    throw UnsolvablePivot("corner equations of " + c.str() + " are not solvable: residual " +
                          std::to_string(out.corner_residual));
  return out;
}

EnergyComparison energy_invariance(const LagrangianField& L, const QuadSurface& before,
                                   const QuadSurface& after, const VertexField& u) {
  EnergyComparison e;
  e.before = action(L, before, u);
  e.after = action(L, after, u);
  e.abs_difference = std::abs(e.after - e.before);
  return e;
}

}  // namespace plurilatt
