// Command-line front end. Every command prints a JSON-lines report to stdout:
// a run record echoing inputs and their digests, command-specific records, and
// a final summary record. Only the summary's wall_ms field varies between
// identical runs.

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "plurilatt/holomorphic.hpp"
#include "plurilatt/io.hpp"
#include "plurilatt/rng.hpp"
#include "plurilatt/variational.hpp"

namespace {

using namespace plurilatt;

using Clock = std::chrono::steady_clock;

void emit(const Json& j) { std::cout << j.dump() << "\n"; }

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Json point_json(const Point& p) {
  Json a = Json::array();
  for (int c : p.coords) a.push_back(c);
  return a;
}

Json box_json(const Box& b) {
  return Json{{"lo", point_json(b.lo)}, {"hi", point_json(b.hi)}};
}

Json quad_json(const Quad& q) {
  return Json{{"base", point_json(q.base)}, {"dirs", Json::array({q.di, q.dj})}};
}

Json cube_json(const Cube& c) {
  return Json{{"base", point_json(c.base)}, {"dirs", Json::array({c.d1, c.d2, c.d3})}};
}

Json cx_json(Cx v) { return Json::array({v.real(), v.imag()}); }

Json input_record(const std::string& role, const std::string& path) {
  return Json{{"record", "input"},
              {"role", role},
              {"path", path},
              {"digest", hex64(fnv1a(read_file(path)))}};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

int parse_int(const std::string& s, const char* ctx) {
  try {
    size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw IoError("");
    return v;
  } catch (const std::exception&) {
    throw IoError(std::string(ctx) + ": \"" + s + "\" is not an integer");
  }
}

double parse_double(const std::string& s, const char* ctx) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw IoError("");
    return v;
  } catch (const std::exception&) {
    throw IoError(std::string(ctx) + ": \"" + s + "\" is not a number");
  }
}

// "a:b,c:d,..." with one a:b pair per axis, inclusive bounds.
Box parse_region(const std::string& spec, int dim) {
  auto parts = split(spec, ',');
  if (static_cast<int>(parts.size()) != dim)
    throw IoError("region \"" + spec + "\" has " + std::to_string(parts.size()) +
                  " axes, the weight field has " + std::to_string(dim));
  std::vector<int> lo, hi;
  for (const auto& part : parts) {
    auto ends = split(part, ':');
    if (ends.size() != 2) throw IoError("region axis \"" + part + "\" must be lo:hi");
    int a = parse_int(ends[0], "region");
    int b = parse_int(ends[1], "region");
    if (a > b) throw IoError("region axis \"" + part + "\" has lo > hi");
    lo.push_back(a);
    hi.push_back(b);
  }
  return Box{Point{std::move(lo)}, Point{std::move(hi)}};
}

Point parse_point(const std::string& spec, const char* ctx) {
  std::vector<int> c;
  for (const auto& part : split(spec, ',')) c.push_back(parse_int(part, ctx));
  return Point{std::move(c)};
}

// "re" or "re,im".
Cx parse_value(const std::string& spec, const char* ctx) {
  auto parts = split(spec, ',');
  if (parts.size() == 1) return Cx(parse_double(parts[0], ctx), 0.0);
  if (parts.size() == 2)
    return Cx(parse_double(parts[0], ctx), parse_double(parts[1], ctx));
  throw IoError(std::string(ctx) + ": \"" + spec + "\" must be re or re,im");
}

// "x,y,z:d1,d2,d3". Any malformation violates the flip precondition.
Cube parse_cube(const std::string& spec, int dim) {
  try {
    auto halves = split(spec, ':');
    if (halves.size() != 2) throw IoError("cube spec needs base:dirs");
    Point base = parse_point(halves[0], "cube base");
    if (base.dim() != dim) throw IoError("cube base dimension mismatch");
    auto dirs = split(halves[1], ',');
    if (dirs.size() != 3) throw IoError("cube spec needs three directions");
    return make_cube(base, parse_int(dirs[0], "cube dirs"), parse_int(dirs[1], "cube dirs"),
                     parse_int(dirs[2], "cube dirs"));
  } catch (const std::exception& e) {
    throw NotFlippable("invalid cube spec \"" + spec + "\": " + e.what());
  }
}

std::optional<Family> parse_family(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return family_from_name(s);
}

Tolerances resolve_tol(double tol_flag) {
  Tolerances tol = tolerances_from_env();
  if (tol_flag > 0) tol.consistency_rel = tol_flag;
  return tol;
}

void write_json(const std::string& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

long field_size(const TaggedWeightField& W) {
  return std::visit([](const auto& f) { return static_cast<long>(f.values.size()); }, W.data);
}

Json summary_base(const char* command, const std::string& status) {
  return Json{{"record", "summary"}, {"command", command}, {"status", status}};
}

// ---------------------------------------------------------------------------

struct PropagateArgs {
  std::string weights, region, out;
  bool parallel = false;
  double tol = 0;
};

int cmd_propagate(const PropagateArgs& a, Clock::time_point t0) {
  Tolerances tol = resolve_tol(a.tol);
  TaggedWeightField W = weights_from_json(load_json_file(a.weights));
  Box region = parse_region(a.region, W.dim());
  emit(Json{{"record", "run"},
            {"command", "propagate"},
            {"kind", kind_name(W.kind)},
            {"region", box_json(region)},
            {"parallel", a.parallel}});
  emit(input_record("weights", a.weights));
  PropagateOptions opt;
  opt.parallel = a.parallel;
  opt.tol = tol;
  PropagateStats st = propagate_tagged(W, region, opt);
  write_json(a.out, weights_to_json(W));
  emit(Json{{"record", "result"},
            {"cubes_fired", st.cubes_fired},
            {"revisits", st.revisits},
            {"max_revisit_mismatch", st.max_revisit_mismatch},
            {"faces", field_size(W)},
            {"out", a.out}});
  Json s = summary_base("propagate", "ok");
  s["cubes_fired"] = st.cubes_fired;
  s["wall_ms"] = elapsed_ms(t0);
  emit(s);
  return 0;
}

struct VerifyArgs {
  std::string weights, region, family;
  uint64_t seed = 0;
  bool parallel = false;
  double tol = 0;
};

int cmd_verify(const VerifyArgs& a, Clock::time_point t0) {
  Tolerances tol = resolve_tol(a.tol);
  TaggedWeightField W = weights_from_json(load_json_file(a.weights));
  LagrangianField L = lagrangian_from_weights(std::move(W), parse_family(a.family));
  Box region = parse_region(a.region, L.dim());
  emit(Json{{"record", "run"},
            {"command", "verify"},
            {"family", family_name(L.family)},
            {"region", box_json(region)},
            {"seed", a.seed},
            {"parallel", a.parallel}});
  emit(input_record("weights", a.weights));
  std::vector<CubeVerdict> verdicts = verify_region(L, region, a.parallel, tol);
  if (verdicts.empty())
    emit(Json{{"record", "warning"}, {"message", "region contains no cubes"}});
  long bad = 0;
  double max_s3 = 0.0, sum_s3 = 0.0;
  for (const CubeVerdict& v : verdicts) {
    Json sv = Json::array();
    for (double x : v.singular_values) sv.push_back(x);
    Json rec = cube_json(v.cube);
    Json out{{"record", "cube"}};
    out["base"] = rec["base"];
    out["dirs"] = rec["dirs"];
    out["singular_values"] = std::move(sv);
    out["rank"] = v.rank;
    out["consistent"] = v.consistent;
    emit(out);
    if (!v.consistent) ++bad;
    double s3 = v.singular_values[2] / std::max(v.singular_values[0], 1e-300);
    max_s3 = std::max(max_s3, s3);
    sum_s3 += s3;
  }
  if (!verdicts.empty())
    emit(Json{{"record", "stats"},
              {"cubes", verdicts.size()},
              {"inconsistent", bad},
              {"max_sigma3_rel", max_s3},
              {"mean_sigma3_rel", sum_s3 / static_cast<double>(verdicts.size())}});
  Json s = summary_base("verify", bad == 0 ? "ok" : "inconsistent");
  s["cubes"] = verdicts.size();
  s["inconsistent"] = bad;
  s["wall_ms"] = elapsed_ms(t0);
  emit(s);
  return bad == 0 ? 0 : 3;
}

struct SolveArgs {
  std::string surface, weights, boundary, family, out, csv, svg;
  double tol = 0;
};

int cmd_solve(const SolveArgs& a, Clock::time_point t0) {
  Tolerances tol = resolve_tol(a.tol);
  QuadSurface S = surface_from_json(load_json_file(a.surface));
  S.validate();
  TaggedWeightField W = weights_from_json(load_json_file(a.weights));
  LagrangianField L = lagrangian_from_weights(std::move(W), parse_family(a.family));
  int bdim = 0;
  auto boundary = boundary_from_json(load_json_file(a.boundary), &bdim);
  if (bdim != S.dim) throw IoError("boundary dimension does not match the surface");
  emit(Json{{"record", "run"},
            {"command", "solve"},
            {"family", family_name(L.family)},
            {"faces", S.faces.size()}});
  emit(input_record("surface", a.surface));
  emit(input_record("weights", a.weights));
  emit(input_record("boundary", a.boundary));
  DirichletProblem P{std::move(S), std::move(L), std::move(boundary)};
  DirichletSolution sol = solve_dirichlet(P, tol);
  if (!a.out.empty()) write_json(a.out, field_to_json(sol.u));
  if (!a.csv.empty()) write_file(a.csv, field_to_csv(sol.u));
  if (!a.svg.empty()) write_file(a.svg, svg_heatmap(P.surface, sol.u));
  emit(Json{{"record", "result"},
            {"interior", sol.interior.size()},
            {"residual", sol.residual},
            {"out", a.out},
            {"csv", a.csv},
            {"svg", a.svg}});
  Json s = summary_base("solve", "ok");
  s["interior"] = sol.interior.size();
  s["residual"] = sol.residual;
  s["wall_ms"] = elapsed_ms(t0);
  emit(s);
  return 0;
}

struct FlipArgs {
  std::string surface, weights, boundary, family, cube, out_surface, out_field;
  double tol = 0;
};

int cmd_flip_invariance(const FlipArgs& a, Clock::time_point t0) {
  Tolerances tol = resolve_tol(a.tol);
  QuadSurface S = surface_from_json(load_json_file(a.surface));
  S.validate();
  TaggedWeightField W = weights_from_json(load_json_file(a.weights));
  LagrangianField L = lagrangian_from_weights(std::move(W), parse_family(a.family));
  int bdim = 0;
  auto boundary = boundary_from_json(load_json_file(a.boundary), &bdim);
  if (bdim != S.dim) throw IoError("boundary dimension does not match the surface");
  Cube c = parse_cube(a.cube, S.dim);
  emit(Json{{"record", "run"},
            {"command", "flip-invariance"},
            {"family", family_name(L.family)},
            {"cube", cube_json(c)}});
  emit(input_record("surface", a.surface));
  emit(input_record("weights", a.weights));
  emit(input_record("boundary", a.boundary));
  DirichletProblem P{S, L, std::move(boundary)};
  DirichletSolution sol = solve_dirichlet(P, tol);
  FlipExtension ext = extend_across_flip(S, c, L, sol.u, tol);
  EnergyComparison cmp = energy_invariance(L, S, ext.surface, ext.u);
  bool ok = cmp.abs_difference <= tol.consistency_rel * std::max(1.0, std::abs(cmp.before)) &&
            ext.corner_residual <= tol.consistency_rel;
  Json nv = Json::array();
  for (const Point& p : ext.new_vertices) nv.push_back(point_json(p));
  if (!a.out_surface.empty()) write_json(a.out_surface, surface_to_json(ext.surface));
  if (!a.out_field.empty()) write_json(a.out_field, field_to_json(ext.u));
  emit(Json{{"record", "flip"},
            {"cube", cube_json(c)},
            {"new_vertices", std::move(nv)},
            {"corner_residual", ext.corner_residual},
            {"energy_before", cx_json(cmp.before)},
            {"energy_after", cx_json(cmp.after)},
            {"abs_difference", cmp.abs_difference}});
  Json s = summary_base("flip-invariance", ok ? "ok" : "violated");
  s["abs_difference"] = cmp.abs_difference;
  s["wall_ms"] = elapsed_ms(t0);
  emit(s);
  return ok ? 0 : 3;
}

struct ConjugateArgs {
  std::string field, weights, surface, family;
  std::string black, black_value = "0", white, white_value = "0";
  std::string out_v, out_f;
  double tol = 0;
};

int cmd_conjugate(const ConjugateArgs& a, Clock::time_point t0) {
  Tolerances tol = resolve_tol(a.tol);
  QuadSurface S = surface_from_json(load_json_file(a.surface));
  S.validate();
  TaggedWeightField W = weights_from_json(load_json_file(a.weights));
  LagrangianField L = lagrangian_from_weights(std::move(W), parse_family(a.family));
  VertexField u = field_from_json(load_json_file(a.field));
  if (u.dim != S.dim) throw IoError("field dimension does not match the surface");
  std::optional<ConjugateAnchors> anchors;
  if (a.black.empty() != a.white.empty())
    throw IoError("anchors need both --black and --white (or neither)");
  if (!a.black.empty()) {
    anchors = ConjugateAnchors{parse_point(a.black, "--black"),
                               parse_value(a.black_value, "--black-value"),
                               parse_point(a.white, "--white"),
                               parse_value(a.white_value, "--white-value")};
  }
  emit(Json{{"record", "run"},
            {"command", "conjugate"},
            {"family", family_name(L.family)},
            {"anchored", anchors.has_value()}});
  emit(input_record("field", a.field));
  emit(input_record("weights", a.weights));
  emit(input_record("surface", a.surface));
  HoloResult holo = holo_from_harmonic(L, S, u, anchors, tol);
  if (!a.out_v.empty()) write_json(a.out_v, field_to_json(holo.v));
  if (!a.out_f.empty()) write_json(a.out_f, field_to_json(holo.f));
  emit(Json{{"record", "conjugate"},
            {"cr_max_rel", holo.cr.max_rel},
            {"cr_worst", quad_json(holo.cr.worst)},
            {"out_v", a.out_v},
            {"out_f", a.out_f}});
  Json s = summary_base("conjugate", "ok");
  s["cr_max_rel"] = holo.cr.max_rel;
  s["wall_ms"] = elapsed_ms(t0);
  emit(s);
  return 0;
}

struct QnetVerifyArgs {
  long trials = 25;
  uint64_t seed = 12345;
  double tol = 0;
};

int cmd_qnet_verify(const QnetVerifyArgs& a, Clock::time_point t0) {
  Tolerances tol = resolve_tol(a.tol);
  emit(Json{{"record", "run"},
            {"command", "qnet-verify"},
            {"trials", a.trials},
            {"seed", a.seed}});
  PropagateOptions opt;
  opt.tol = tol;
  long bad = 0;
  double worst = 0.0;
  for (long t = 0; t < a.trials; ++t) {
    Rng rng(a.seed + static_cast<uint64_t>(t));
    PlaquetteField<QNetCoeffs> init;
    init.dim = 4;
    Point zero{std::vector<int>(4, 0)};
    for (int i = 1; i <= 4; ++i)
      for (int j = i + 1; j <= 4; ++j)
        init.values[Quad{zero, i, j}] =
            QNetCoeffs{rng.complex_in(0.5, 2.0, -1.0, 1.0), rng.complex_in(0.5, 2.0, -1.0, 1.0),
                       rng.complex_in(0.5, 2.0, -1.0, 1.0)};
    auto step = [&tol](const std::array<QNetCoeffs, 3>& v) { return qnet_step(v, tol); };
    PlaquetteField<QNetCoeffs> fwd = init, rev = init;
    double mismatch = 0.0;
    bool consistent = true;
    std::string detail;
    try {
      PropagateStats sf = hypercube_sweep(fwd, step, false, opt);
      PropagateStats sr = hypercube_sweep(rev, step, true, opt);
      mismatch = std::max(sf.max_revisit_mismatch, sr.max_revisit_mismatch);
      for (const auto& [q, v] : fwd.values) {
        double scale = std::max({vnorm(v), vnorm(rev.values.at(q)), 1e-300});
        mismatch = std::max(mismatch, vdist(v, rev.values.at(q)) / scale);
      }
      if (mismatch > tol.order_rel) consistent = false;
    } catch (const Error& e) {
      consistent = false;
      detail = e.what();
    }
    if (!consistent) ++bad;
    worst = std::max(worst, mismatch);
    Json rec{{"record", "trial"},
             {"index", t},
             {"max_order_mismatch", mismatch},
             {"consistent", consistent}};
    if (!detail.empty()) rec["detail"] = detail;
    emit(rec);
  }
  Json s = summary_base("qnet-verify", bad == 0 ? "ok" : "inconsistent");
  s["trials"] = a.trials;
  s["inconsistent"] = bad;
  s["max_order_mismatch"] = worst;
  s["wall_ms"] = elapsed_ms(t0);
  emit(s);
  return bad == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete pluri-Lagrangian lattice toolkit"};
  app.require_subcommand(1);

  PropagateArgs pa;
  CLI::App* prop = app.add_subcommand("propagate", "fill a region from initial weight data");
  prop->add_option("--weights", pa.weights, "input weight field JSON")->required();
  prop->add_option("--region", pa.region, "box lo:hi per axis, comma separated")->required();
  prop->add_option("--out", pa.out, "output weight field JSON")->required();
  prop->add_flag("--parallel", pa.parallel, "evaluate propagation rounds with OpenMP");
  prop->add_option("--tol", pa.tol, "consistency tolerance override");

  VerifyArgs va;
  CLI::App* ver = app.add_subcommand("verify", "rank-check the corner equations of every cube");
  ver->add_option("--weights", va.weights, "weight field JSON")->required();
  ver->add_option("--region", va.region, "box lo:hi per axis, comma separated")->required();
  ver->add_option("--family", va.family, "Lagrangian family (defaults to the kind's family)");
  ver->add_option("--seed", va.seed, "seed echoed into the report");
  ver->add_flag("--parallel", va.parallel, "check cubes with OpenMP");
  ver->add_option("--tol", va.tol, "consistency tolerance override");

  SolveArgs sa;
  CLI::App* sol = app.add_subcommand("solve", "solve the Dirichlet problem on a quad surface");
  sol->add_option("--surface", sa.surface, "surface JSON")->required();
  sol->add_option("--weights", sa.weights, "weight field JSON")->required();
  sol->add_option("--boundary", sa.boundary, "boundary values JSON")->required();
  sol->add_option("--family", sa.family, "Lagrangian family");
  sol->add_option("--out", sa.out, "output field JSON");
  sol->add_option("--csv", sa.csv, "output field CSV");
  sol->add_option("--svg", sa.svg, "heatmap SVG (planar patches)");
  sol->add_option("--tol", sa.tol, "consistency tolerance override");

  FlipArgs fa;
  CLI::App* fl = app.add_subcommand("flip-invariance",
                                    "solve, extend across one cube move, compare energies");
  fl->add_option("--surface", fa.surface, "surface JSON")->required();
  fl->add_option("--weights", fa.weights, "weight field JSON")->required();
  fl->add_option("--boundary", fa.boundary, "boundary values JSON")->required();
  fl->add_option("--family", fa.family, "Lagrangian family");
  fl->add_option("--cube", fa.cube, "cube spec x,y,z:d1,d2,d3")->required();
  fl->add_option("--out-surface", fa.out_surface, "write the moved surface JSON");
  fl->add_option("--out-field", fa.out_field, "write the extended field JSON");
  fl->add_option("--tol", fa.tol, "consistency tolerance override");

  ConjugateArgs ca;
  CLI::App* con = app.add_subcommand("conjugate",
                                     "conjugate a harmonic field and report holomorphy residuals");
  con->add_option("--field", ca.field, "harmonic field JSON")->required();
  con->add_option("--weights", ca.weights, "weight field JSON")->required();
  con->add_option("--surface", ca.surface, "surface JSON")->required();
  con->add_option("--family", ca.family, "Lagrangian family");
  con->add_option("--black", ca.black, "even-parity anchor vertex x,y,...");
  con->add_option("--black-value", ca.black_value, "anchor value re or re,im");
  con->add_option("--white", ca.white, "odd-parity anchor vertex x,y,...");
  con->add_option("--white-value", ca.white_value, "anchor value re or re,im");
  con->add_option("--out-v", ca.out_v, "write the conjugate field JSON");
  con->add_option("--out-f", ca.out_f, "write the combined field JSON");
  con->add_option("--tol", ca.tol, "consistency tolerance override");

  QnetVerifyArgs qa;
  CLI::App* qn = app.add_subcommand("qnet-verify",
                                    "random hypercube sweeps of the linear quad-equation maps");
  qn->add_option("--trials", qa.trials, "number of random hypercube trials");
  qn->add_option("--seed", qa.seed, "base seed for the trials");
  qn->add_option("--tol", qa.tol, "consistency tolerance override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  Clock::time_point t0 = Clock::now();
  const char* command = "";
  try {
    if (prop->parsed()) {
      command = "propagate";
      return cmd_propagate(pa, t0);
    }
    if (ver->parsed()) {
      command = "verify";
      return cmd_verify(va, t0);
    }
    if (sol->parsed()) {
      command = "solve";
      return cmd_solve(sa, t0);
    }
    if (fl->parsed()) {
      command = "flip-invariance";
      return cmd_flip_invariance(fa, t0);
    }
    if (con->parsed()) {
      command = "conjugate";
      return cmd_conjugate(ca, t0);
    }
    command = "qnet-verify";
    return cmd_qnet_verify(qa, t0);
  } catch (const Error& e) {
    emit(Json{{"record", "error"}, {"kind", e.kind}, {"detail", e.what()}});
    Json s = summary_base(command, "error");
    s["kind"] = e.kind;
    s["wall_ms"] = elapsed_ms(t0);
    emit(s);
    return e.exit_code;
  } catch (const std::exception& e) {
    emit(Json{{"record", "error"}, {"kind", "Unhandled"}, {"detail", e.what()}});
    Json s = summary_base(command, "error");
    s["kind"] = "Unhandled";
    s["wall_ms"] = elapsed_ms(t0);
    emit(s);
    return 1;
  }
}
