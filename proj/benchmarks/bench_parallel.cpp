// Compares serial and OpenMP execution of the two batch kernels: cube firing
// during weight propagation and per-cube verification over a region. Reports
// the minimum wall time over a few rounds.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "plurilatt/rng.hpp"
#include "plurilatt/variational.hpp"

using namespace plurilatt;

namespace {

using Clock = std::chrono::steady_clock;

Box cube_box(int n) {
  return Box{Point{{0, 0, 0}}, Point{{n, n, n}}};
}

// Corner 2-skeleton initial data: quads sweeping each axis pair with the
// remaining coordinate pinned at zero.
PlaquetteField<Cx> skeleton(const Box& box, Rng& rng) {
  PlaquetteField<Cx> F;
  F.dim = box.dim();
  for (int i = 1; i <= 3; ++i)
    for (int j = i + 1; j <= 3; ++j)
      for (int x = box.lo[i]; x < box.hi[i]; ++x)
        for (int y = box.lo[j]; y < box.hi[j]; ++y) {
          Point base = box.lo;
          base[i] = x;
          base[j] = y;
          F.values[Quad{base, i, j}] = rng.complex_in(0.5, 2.0, -1.0, 1.0);
        }
  return F;
}

template <class Fn>
double best_ms(int rounds, Fn body) {
  double best = 1e300;
  for (int r = 0; r < rounds; ++r) {
    auto t0 = Clock::now();
    body();
    double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    if (ms < best) best = ms;
  }
  return best;
}

}  // namespace

int main() {
  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  const int rounds = 5;
  Tolerances tol;

  // Propagation kernel.
  Box pbox = cube_box(24);
  Rng rng(1);
  PlaquetteField<Cx> base = skeleton(pbox, rng);
  long pcubes = static_cast<long>(enumerate_cubes(pbox).size());
  auto step = [&tol](const std::array<Cx, 3>& v) { return step_complex_p(v, tol); };

  double prop_serial = best_ms(rounds, [&] {
    PlaquetteField<Cx> F = base;
    PropagateOptions opt;
    opt.parallel = false;
    propagate(F, pbox, step, opt);
  });
  double prop_parallel = best_ms(rounds, [&] {
    PlaquetteField<Cx> F = base;
    PropagateOptions opt;
    opt.parallel = true;
    propagate(F, pbox, step, opt);
  });

  // Verification kernel.
  Box vbox = cube_box(12);
  Rng vrng(2);
  TaggedWeightField W;
  W.kind = WeightKind::ComplexP;
  W.data = skeleton(vbox, vrng);
  propagate_tagged(W, vbox);
  LagrangianField L = lagrangian_from_weights(std::move(W));
  long vcubes = static_cast<long>(enumerate_cubes(vbox).size());

  double ver_serial = best_ms(rounds, [&] { verify_region(L, vbox, false); });
  double ver_parallel = best_ms(rounds, [&] { verify_region(L, vbox, true); });

  std::printf("threads: %d\n", threads);
  std::printf("%-22s %8s %12s %14s %9s\n", "kernel", "cubes", "serial_ms", "parallel_ms",
              "speedup");
  std::printf("%-22s %8ld %12.2f %14.2f %8.2fx\n", "propagate [0,24]^3", pcubes, prop_serial,
              prop_parallel, prop_serial / prop_parallel);
  std::printf("%-22s %8ld %12.2f %14.2f %8.2fx\n", "verify    [0,12]^3", vcubes, ver_serial,
              ver_parallel, ver_serial / ver_parallel);
  return 0;
}
