#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "common.hpp"
#include "plurilatt/io.hpp"

using namespace plurilatt;
using namespace plurilatt::testutil;

namespace {

Point pt(std::vector<int> c) { return Point{std::move(c)}; }

// --- JSON serialization --------------------------------------------------

TaggedWeightField roundtrip(const TaggedWeightField& W) {
  Json j = weights_to_json(W);
  std::string text = j.dump(2);
  return weights_from_json(Json::parse(text));
}

template <class V>
const PlaquetteField<V>& field_of(const TaggedWeightField& W) {
  return std::get<PlaquetteField<V>>(W.data);
}

}  // namespace

TEST_CASE("weight JSON roundtrips preserve every kind") {
  Rng rng(31);
  Box box = make_box({0, 0, 0}, {2, 2, 2});
  for (WeightKind kind :
       {WeightKind::ComplexP, WeightKind::ThreePointP, WeightKind::PairPQKind,
        WeightKind::MoutardABC, WeightKind::Triangular, WeightKind::OffDiagonal,
        WeightKind::QNet}) {
    TaggedWeightField W = skeleton_field(kind, box, rng);
    TaggedWeightField R = roundtrip(W);
    CHECK(R.kind == W.kind);
    CHECK(R.constraint.has_value() == W.constraint.has_value());
    if (W.constraint) {
      CHECK(close(R.constraint->lambda, W.constraint->lambda));
      CHECK(close(R.constraint->mu, W.constraint->mu));
      CHECK(close(R.constraint->nu, W.constraint->nu));
    }
    std::visit(
        [&](const auto& f) {
          using V = typename std::decay_t<decltype(f.values)>::mapped_type;
          const auto& g = field_of<V>(R);
          REQUIRE(g.values.size() == f.values.size());
          for (const auto& [q, v] : f.values) {
            REQUIRE(g.has(q));
            CHECK(vdist(g.at(q), v) == doctest::Approx(0.0).epsilon(1e-15));
          }
        },
        W.data);
  }
}

TEST_CASE("weight values serialize exactly through text") {
  // 17 significant digits survive a dump/parse cycle bit for bit.
  TaggedWeightField W;
  W.kind = WeightKind::ComplexP;
  PlaquetteField<Cx> F;
  F.dim = 2;
  Cx v(0.1234567890123456789, -3.33333333333333315e-1);
  F.values[Quad{pt({0, 0}), 1, 2}] = v;
  W.data = std::move(F);
  TaggedWeightField R = roundtrip(W);
  CHECK(field_of<Cx>(R).at(Quad{pt({0, 0}), 1, 2}) == v);
}

TEST_CASE("weight JSON schema errors name the offending key") {
  Json base = Json::parse(R"({"kind":"complex_p","constraint":null,
      "values":[{"base":[0,0],"dirs":[1,2],"data":{"p":[1.0,0.0]}}]})");

  Json j = base;
  j.erase("kind");
  CHECK_THROWS_WITH_AS(weights_from_json(j), doctest::Contains("kind"), IoError);

  j = base;
  j["kind"] = "no_such_kind";
  CHECK_THROWS_AS(weights_from_json(j), IoError);

  j = base;
  j["values"][0].erase("data");
  CHECK_THROWS_WITH_AS(weights_from_json(j), doctest::Contains("data"), IoError);

  j = base;
  j["values"][0]["data"] = Json{{"q", Json::array({1.0, 0.0})}};
  CHECK_THROWS_WITH_AS(weights_from_json(j), doctest::Contains("\"p\""), IoError);

  j = base;
  j["values"][0]["dirs"] = Json::array({1, 3});
  CHECK_THROWS_AS(weights_from_json(j), InvalidAxes);

  j = base;
  j["values"][0]["data"]["p"] = 1.0;
  CHECK_THROWS_WITH_AS(weights_from_json(j), doctest::Contains("[re, im]"), IoError);

  j = base;
  j["constraint"] = Json::array({Json::array({1.0, 0.0})});
  CHECK_THROWS_WITH_AS(weights_from_json(j), doctest::Contains("constraint"), IoError);

  j = base;
  j["values"].push_back(j["values"][0]);
  CHECK_THROWS_WITH_AS(weights_from_json(j), doctest::Contains("duplicate"), IoError);
}

TEST_CASE("orientation folds into canonical storage on load") {
  Json j = Json::parse(R"({"kind":"complex_p","constraint":null,
      "values":[{"base":[0,0],"dirs":[2,1],"data":{"p":[2.0,1.0]}}]})");
  TaggedWeightField W = weights_from_json(j);
  CHECK(field_of<Cx>(W).at(Quad{pt({0, 0}), 1, 2}) == Cx(-2.0, -1.0));
}

TEST_CASE("surface JSON roundtrip keeps faces and signs") {
  QuadSurface S = plane_patch(3, 1, 2, pt({0, 0, 5}), 0, 3);
  Json j = surface_to_json(S);
  QuadSurface R = surface_from_json(Json::parse(j.dump()));
  CHECK(R.dim == S.dim);
  REQUIRE(R.faces.size() == S.faces.size());
  for (const auto& [q, s] : S.faces) CHECK(R.sign_of(q) == s);

  Json bad = j;
  bad["plaquettes"][0]["sign"] = 2;
  CHECK_THROWS_WITH_AS(surface_from_json(bad), doctest::Contains("sign"), IoError);
  bad = j;
  bad.erase("dim");
  CHECK_THROWS_WITH_AS(surface_from_json(bad), doctest::Contains("dim"), IoError);
}

TEST_CASE("field and boundary JSON roundtrips") {
  VertexField f;
  f.dim = 3;
  f.set(pt({0, 1, 2}), Cx(1.5, -2.25));
  f.set(pt({-3, 0, 0}), Cx(0.0, 4.0));
  VertexField g = field_from_json(Json::parse(field_to_json(f).dump()));
  CHECK(g.dim == 3);
  REQUIRE(g.values.size() == 2);
  CHECK(g.at(pt({0, 1, 2})) == Cx(1.5, -2.25));
  CHECK(g.at(pt({-3, 0, 0})) == Cx(0.0, 4.0));

  std::unordered_map<Point, Cx, PointHash> b{{pt({0, 0}), Cx(7, 0)}};
  int dim = 0;
  auto r = boundary_from_json(Json::parse(boundary_to_json(b, 2).dump()), &dim);
  CHECK(dim == 2);
  CHECK(r.at(pt({0, 0})) == Cx(7, 0));

  Json dup = field_to_json(f);
  dup["values"].push_back(dup["values"][0]);
  CHECK_THROWS_WITH_AS(field_from_json(dup), doctest::Contains("duplicate"), IoError);
}

TEST_CASE("gram JSON lists the cube and an 8x8 complex matrix") {
  Rng rng(5);
  Box box = make_box({0, 0, 0}, {1, 1, 1});
  TaggedWeightField W = skeleton_field(WeightKind::ComplexP, box, rng);
  propagate_tagged(W, box);
  LagrangianField L = lagrangian_from_weights(std::move(W));
  CubeGram G = cube_gram(L, Cube{pt({0, 0, 0}), 1, 2, 3});
  Json j = gram_to_json(G);
  CHECK(j["dirs"] == Json::array({1, 2, 3}));
  REQUIRE(j["matrix"].size() == 8);
  REQUIRE(j["matrix"][0].size() == 8);
  CHECK(j["matrix"][3][5][0].is_number());
}

TEST_CASE("CSV export is lex ordered with a dimension-matched header") {
  VertexField f;
  f.dim = 2;
  f.set(pt({1, 0}), Cx(0.5, 0));
  f.set(pt({0, 1}), Cx(-1, 0.125));
  f.set(pt({0, 0}), Cx(2, 0));
  std::string csv = field_to_csv(f);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  CHECK(line == "n1,n2,re,im");
  std::getline(is, line);
  CHECK(line == "0,0,2,0");
  std::getline(is, line);
  CHECK(line == "0,1,-1,0.125");
  std::getline(is, line);
  CHECK(line == "1,0,0.5,0");
  CHECK_FALSE(std::getline(is, line));
}

TEST_CASE("SVG heatmap draws one cell per face of a planar patch") {
  QuadSurface S = plane_patch(2, 1, 2, pt({0, 0}), 0, 3);
  VertexField u;
  u.dim = 2;
  for (int x = 0; x <= 3; ++x)
    for (int y = 0; y <= 3; ++y) u.set(pt({x, y}), Cx(x * x - y * y, 0));
  std::string svg = svg_heatmap(S, u);
  CHECK(svg.find("<svg") == 0);
  size_t rects = 0, pos = 0;
  while ((pos = svg.find("<rect", pos)) != std::string::npos) {
    ++rects;
    ++pos;
  }
  CHECK(rects == 9);

  QuadSurface S3;
  S3.dim = 3;
  S3.insert(make_plaquette(pt({0, 0, 0}), 1, 2, +1));
  S3.insert(make_plaquette(pt({1, 0, 0}), 2, 3, +1));
  VertexField w;
  w.dim = 3;
  for (const auto& v : S3.vertex_list()) w.set(v, Cx(0, 0));
  CHECK_THROWS_WITH_AS(svg_heatmap(S3, w), doctest::Contains("planar"), IoError);
}

TEST_CASE("fnv1a digest and hex rendering are pinned") {
  CHECK(fnv1a("") == 14695981039346656037ull);
  CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
  CHECK(hex64(0) == "0000000000000000");
}

TEST_CASE("file helpers and env tolerance override") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "plurilatt_io_test";
  fs::create_directories(dir);
  std::string path = (dir / "x.json").string();
  write_file(path, "{\"dim\": 2}");
  CHECK(read_file(path) == "{\"dim\": 2}");
  CHECK(load_json_file(path)["dim"] == 2);
  write_file(path, "{not json");
  CHECK_THROWS_WITH_AS(load_json_file(path), doctest::Contains("malformed"), IoError);
  CHECK_THROWS_AS(read_file((dir / "missing.json").string()), IoError);

  CHECK(tolerances_from_env().consistency_rel == 1e-9);
  setenv("PLURILATT_TOL", "1e-6", 1);
  CHECK(tolerances_from_env().consistency_rel == 1e-6);
  setenv("PLURILATT_TOL", "bogus", 1);
  CHECK_THROWS_AS(tolerances_from_env(), IoError);
  unsetenv("PLURILATT_TOL");
  fs::remove_all(dir);
}

// --- CLI end to end --------------------------------------------------------

namespace {

namespace fs = std::filesystem;

struct CliRun {
  int exit_code = -1;
  std::vector<Json> records;
  std::string raw;
};

const std::string kCli = PLURILATT_CLI_PATH;

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "plurilatt_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string wpath(const std::string& name) { return (work_dir() / name).string(); }

CliRun run_cli(const std::string& args, const std::string& env_prefix = "") {
  CliRun r;
  std::string out = wpath("stdout.jsonl");
  std::string cmd = env_prefix + "\"" + kCli + "\" " + args + " > \"" + out + "\" 2>&1";
  int rc = std::system(cmd.c_str());
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  std::ifstream in(out);
  std::ostringstream os;
  os << in.rdbuf();
  r.raw = os.str();
  std::istringstream lines(r.raw);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (!j.is_discarded()) r.records.push_back(std::move(j));
  }
  return r;
}

const Json& record_of(const CliRun& r, const std::string& kind) {
  for (const auto& j : r.records)
    if (j.contains("record") && j["record"] == kind) return j;
  static Json none;
  REQUIRE(false);
  return none;
}

void write_json_file(const std::string& path, const Json& j) { write_file(path, j.dump(2)); }

Json unit_p_corner(int extent1) {
  // complex_p faces p = 1 on the corner skeleton of [0,extent1] x [0,1]^2.
  Json vals = Json::array();
  auto face = [](std::vector<int> base, int i, int j) {
    return Json{{"base", base}, {"dirs", Json::array({i, j})},
                {"data", Json{{"p", Json::array({1.0, 0.0})}}}};
  };
  for (int x = 0; x < extent1; ++x) {
    vals.push_back(face({x, 0, 0}, 1, 2));
    vals.push_back(face({x, 0, 0}, 1, 3));
  }
  vals.push_back(face({0, 0, 0}, 2, 3));
  return Json{{"kind", "complex_p"}, {"constraint", nullptr}, {"values", vals}};
}

}  // namespace

TEST_CASE("cli help and usage errors") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("propagate --help").exit_code == 0);
  CHECK(run_cli("no-such-command").exit_code == 1);
  CHECK(run_cli("propagate --region 0:1").exit_code == 1);  // missing required flags
}

TEST_CASE("cli propagate fills the unit cube and reports deterministically") {
  write_json_file(wpath("w_in.json"), unit_p_corner(1));
  std::string args = "propagate --weights \"" + wpath("w_in.json") + "\" --region 0:1,0:1,0:1 --out \"" +
                     wpath("w_out.json") + "\"";
  CliRun r = run_cli(args);
  CHECK(r.exit_code == 0);
  const Json& res = record_of(r, "result");
  CHECK(res["cubes_fired"] == 1);
  CHECK(res["revisits"] == 0);
  CHECK(record_of(r, "summary")["status"] == "ok");
  CHECK(record_of(r, "input")["digest"].is_string());

  TaggedWeightField W = weights_from_json(load_json_file(wpath("w_out.json")));
  const auto& F = field_of<Cx>(W);
  REQUIRE(F.values.size() == 6);
  // Cyclic inputs (p^23, p^31, p^12) = (1, -1, 1) give denominator -1, so
  // every opposite face carries -p.
  CHECK(close(F.at(Quad{pt({0, 0, 1}), 1, 2}), Cx(-1, 0)));
  CHECK(close(F.at(Quad{pt({0, 1, 0}), 1, 3}), Cx(-1, 0)));
  CHECK(close(F.at(Quad{pt({1, 0, 0}), 2, 3}), Cx(-1, 0)));

  // Rerun: byte-identical output except the wall-time field.
  CliRun r2 = run_cli(args);
  REQUIRE(r2.records.size() == r.records.size());
  for (size_t i = 0; i < r.records.size(); ++i) {
    Json a = r.records[i], b = r2.records[i];
    a.erase("wall_ms");
    b.erase("wall_ms");
    CHECK(a.dump() == b.dump());
  }
}

TEST_CASE("cli propagate rejects unusable inputs") {
  write_file(wpath("bad.json"), "{broken");
  CliRun r = run_cli("propagate --weights \"" + wpath("bad.json") +
                     "\" --region 0:1,0:1,0:1 --out \"" + wpath("x.json") + "\"");
  CHECK(r.exit_code == 1);
  CHECK(record_of(r, "error")["kind"] == "IoError");
  CHECK(record_of(r, "summary")["status"] == "error");

  write_json_file(wpath("w_in.json"), unit_p_corner(1));
  r = run_cli("propagate --weights \"" + wpath("w_in.json") + "\" --region 0:1,0:1 --out \"" +
              wpath("x.json") + "\"");
  CHECK(r.exit_code == 1);

  // Region the initial data cannot reach.
  r = run_cli("propagate --weights \"" + wpath("w_in.json") + "\" --region 0:2,0:1,0:1 --out \"" +
              wpath("x.json") + "\"");
  CHECK(r.exit_code == 1);
  CHECK(record_of(r, "error")["kind"] == "MissingInitialData");
}

TEST_CASE("cli verify flags exactly the cubes touched by a perturbed face") {
  write_json_file(wpath("v_in.json"), unit_p_corner(2));
  std::string prop = "propagate --weights \"" + wpath("v_in.json") +
                     "\" --region 0:2,0:1,0:1 --out \"" + wpath("v_full.json") + "\"";
  REQUIRE(run_cli(prop).exit_code == 0);

  CliRun ok = run_cli("verify --weights \"" + wpath("v_full.json") + "\" --region 0:2,0:1,0:1");
  CHECK(ok.exit_code == 0);
  CHECK(record_of(ok, "summary")["status"] == "ok");
  int cubes = 0;
  for (const auto& j : ok.records)
    if (j["record"] == "cube") {
      CHECK(j["rank"] == 2);
      CHECK(j["consistent"] == true);
      REQUIRE(j["singular_values"].size() == 8);
      ++cubes;
    }
  CHECK(cubes == 2);

  // Perturb the face owned by the second cube only.
  Json w = load_json_file(wpath("v_full.json"));
  bool touched = false;
  for (auto& e : w["values"]) {
    if (e["base"] == Json::array({2, 0, 0}) && e["dirs"] == Json::array({2, 3})) {
      e["data"]["p"][0] = e["data"]["p"][0].get<double>() * 1.1;
      touched = true;
    }
  }
  REQUIRE(touched);
  write_json_file(wpath("v_pert.json"), w);
  CliRun bad = run_cli("verify --weights \"" + wpath("v_pert.json") + "\" --region 0:2,0:1,0:1");
  CHECK(bad.exit_code == 3);
  CHECK(record_of(bad, "summary")["status"] == "inconsistent");
  for (const auto& j : bad.records)
    if (j["record"] == "cube") {
      bool second = j["base"] == Json::array({1, 0, 0});
      CHECK(j["consistent"] == !second);
    }

  CliRun empty = run_cli("verify --weights \"" + wpath("v_full.json") + "\" --region 0:0,0:0,0:0");
  CHECK(empty.exit_code == 0);
  CHECK(record_of(empty, "warning")["message"] == "region contains no cubes");
}

namespace {

// Planar patch surface, weights, and boundary files for the solve pipeline:
// p = 1 on [0,n]^2 in the plane, boundary x^2 - y^2.
void write_saddle_problem(int n, const std::string& sname, const std::string& wname,
                          const std::string& bname) {
  QuadSurface S = plane_patch(2, 1, 2, pt({0, 0}), 0, n);
  write_json_file(sname, surface_to_json(S));

  TaggedWeightField W;
  W.kind = WeightKind::ComplexP;
  PlaquetteField<Cx> F;
  F.dim = 2;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) F.values[Quad{pt({x, y}), 1, 2}] = Cx(1, 0);
  W.data = std::move(F);
  write_json_file(wname, weights_to_json(W));

  std::unordered_map<Point, Cx, PointHash> b;
  auto interior = S.interior_vertices();
  std::unordered_map<Point, bool, PointHash> is_int;
  for (const auto& v : interior) is_int[v] = true;
  for (const auto& v : S.vertex_list())
    if (!is_int.count(v)) b[v] = Cx(v[1] * v[1] - v[2] * v[2], 0);
  write_json_file(bname, boundary_to_json(b, 2));
}

}  // namespace

TEST_CASE("cli solve reproduces the saddle and emits csv and svg") {
  write_saddle_problem(4, wpath("s_surf.json"), wpath("s_w.json"), wpath("s_b.json"));
  CliRun r = run_cli("solve --surface \"" + wpath("s_surf.json") + "\" --weights \"" +
                     wpath("s_w.json") + "\" --boundary \"" + wpath("s_b.json") + "\" --out \"" +
                     wpath("s_u.json") + "\" --csv \"" + wpath("s_u.csv") + "\" --svg \"" +
                     wpath("s_u.svg") + "\"");
  CHECK(r.exit_code == 0);
  const Json& res = record_of(r, "result");
  CHECK(res["interior"] == 9);
  CHECK(res["residual"].get<double>() <= 1e-9);

  VertexField u = field_from_json(load_json_file(wpath("s_u.json")));
  for (int x = 1; x < 4; ++x)
    for (int y = 1; y < 4; ++y) CHECK(close(u.at(pt({x, y})), Cx(x * x - y * y, 0), 1e-9));

  std::string csv = read_file(wpath("s_u.csv"));
  CHECK(csv.rfind("n1,n2,re,im\n", 0) == 0);
  CHECK(read_file(wpath("s_u.svg")).find("<svg") == 0);
}

TEST_CASE("cli solve names a missing boundary vertex and exits 1") {
  write_saddle_problem(4, wpath("m_surf.json"), wpath("m_w.json"), wpath("m_b.json"));
  Json b = load_json_file(wpath("m_b.json"));
  Json kept = Json::array();
  for (const auto& e : b["values"])
    if (e["point"] != Json::array({0, 3})) kept.push_back(e);
  b["values"] = kept;
  write_json_file(wpath("m_b.json"), b);
  CliRun r = run_cli("solve --surface \"" + wpath("m_surf.json") + "\" --weights \"" +
                     wpath("m_w.json") + "\" --boundary \"" + wpath("m_b.json") + "\" --out \"" +
                     wpath("m_u.json") + "\"");
  CHECK(r.exit_code == 1);
  const Json& err = record_of(r, "error");
  CHECK(err["kind"] == "MissingFieldValue");
  CHECK(err["detail"].get<std::string>().find("(0,3)") != std::string::npos);
}

namespace {

// 3D flip-invariance inputs: patch in the (1,2) plane of Z^3, consistent
// propagated p-weights over one layer, real boundary values.
void write_flip_problem(int n, const std::string& sname, const std::string& wname,
                        const std::string& bname) {
  QuadSurface S = plane_patch(3, 1, 2, pt({0, 0, 0}), 0, n);
  write_json_file(sname, surface_to_json(S));

  Rng rng(99);
  Box box = make_box({0, 0, 0}, {n, n, 1});
  TaggedWeightField W = skeleton_field(WeightKind::ComplexP, box, rng);
  propagate_tagged(W, box);
  write_json_file(wname, weights_to_json(W));

  Rng brng(100);
  write_json_file(bname, boundary_to_json(random_real_boundary(S, brng), 3));
}

}  // namespace

TEST_CASE("cli flip-invariance keeps the Dirichlet energy across a cube move") {
  write_flip_problem(4, wpath("f_surf.json"), wpath("f_w.json"), wpath("f_b.json"));
  CliRun r = run_cli("flip-invariance --surface \"" + wpath("f_surf.json") + "\" --weights \"" +
                     wpath("f_w.json") + "\" --boundary \"" + wpath("f_b.json") +
                     "\" --cube 1,1,0:1,2,3 --out-surface \"" + wpath("f_s2.json") +
                     "\" --out-field \"" + wpath("f_u2.json") + "\"");
  CHECK(r.exit_code == 0);
  const Json& f = record_of(r, "flip");
  CHECK(f["new_vertices"].size() == 4);
  CHECK(f["abs_difference"].get<double>() <= 1e-9);
  CHECK(record_of(r, "summary")["status"] == "ok");

  QuadSurface S2 = surface_from_json(load_json_file(wpath("f_s2.json")));
  CHECK(S2.faces.size() == 16 + 4);  // one face replaced by five
  S2.validate();

  CliRun bad = run_cli("flip-invariance --surface \"" + wpath("f_surf.json") + "\" --weights \"" +
                       wpath("f_w.json") + "\" --boundary \"" + wpath("f_b.json") +
                       "\" --cube 1,1:1,2");
  CHECK(bad.exit_code == 5);
  CHECK(record_of(bad, "error")["kind"] == "NotFlippable");

  CliRun off = run_cli("flip-invariance --surface \"" + wpath("f_surf.json") + "\" --weights \"" +
                       wpath("f_w.json") + "\" --boundary \"" + wpath("f_b.json") +
                       "\" --cube 9,9,0:1,2,3");
  CHECK(off.exit_code == 5);
}

TEST_CASE("cli conjugate produces 2xy from the saddle and rejects non-harmonic input") {
  write_saddle_problem(4, wpath("c_surf.json"), wpath("c_w.json"), wpath("c_b.json"));
  REQUIRE(run_cli("solve --surface \"" + wpath("c_surf.json") + "\" --weights \"" +
                  wpath("c_w.json") + "\" --boundary \"" + wpath("c_b.json") + "\" --out \"" +
                  wpath("c_u.json") + "\"")
              .exit_code == 0);

  CliRun r = run_cli("conjugate --field \"" + wpath("c_u.json") + "\" --weights \"" +
                     wpath("c_w.json") + "\" --surface \"" + wpath("c_surf.json") +
                     "\" --out-v \"" + wpath("c_v.json") + "\" --out-f \"" + wpath("c_f.json") +
                     "\"");
  CHECK(r.exit_code == 0);
  CHECK(record_of(r, "conjugate")["cr_max_rel"].get<double>() <= 1e-9);

  VertexField v = field_from_json(load_json_file(wpath("c_v.json")));
  VertexField f = field_from_json(load_json_file(wpath("c_f.json")));
  for (int x = 0; x <= 4; ++x)
    for (int y = 0; y <= 4; ++y) {
      CHECK(close(v.at(pt({x, y})), Cx(2 * x * y, 0), 1e-9));
      CHECK(close(f.at(pt({x, y})), Cx(x * x - y * y, 2 * x * y), 1e-9));
    }

  // Explicit anchors shift the bi-constant gauge.
  CliRun anch = run_cli("conjugate --field \"" + wpath("c_u.json") + "\" --weights \"" +
                        wpath("c_w.json") + "\" --surface \"" + wpath("c_surf.json") +
                        "\" --black 0,0 --black-value 5 --white 0,1 --white-value -1 --out-v \"" +
                        wpath("c_v2.json") + "\"");
  CHECK(anch.exit_code == 0);
  VertexField v2 = field_from_json(load_json_file(wpath("c_v2.json")));
  CHECK(close(v2.at(pt({0, 0})), Cx(5, 0), 1e-12));
  CHECK(close(v2.at(pt({2, 2})), Cx(8 + 5, 0), 1e-9));
  CHECK(close(v2.at(pt({2, 1})), Cx(4 - 1, 0), 1e-9));

  // Non-harmonic field: bump one interior value.
  Json uj = load_json_file(wpath("c_u.json"));
  for (auto& e : uj["values"])
    if (e["point"] == Json::array({2, 2})) e["re"] = e["re"].get<double>() + 1.0;
  write_json_file(wpath("c_u_bad.json"), uj);
  CliRun bad = run_cli("conjugate --field \"" + wpath("c_u_bad.json") + "\" --weights \"" +
                       wpath("c_w.json") + "\" --surface \"" + wpath("c_surf.json") + "\"");
  CHECK(bad.exit_code == 6);
  CHECK(record_of(bad, "error")["kind"] == "NotHarmonic");

  CliRun mism = run_cli("conjugate --field \"" + wpath("c_u.json") + "\" --weights \"" +
                        wpath("c_w.json") + "\" --surface \"" + wpath("c_surf.json") +
                        "\" --black 0,0");
  CHECK(mism.exit_code == 1);
}

TEST_CASE("cli qnet-verify sweeps hypercubes consistently") {
  CliRun r = run_cli("qnet-verify --trials 3 --seed 7");
  CHECK(r.exit_code == 0);
  int trials = 0;
  for (const auto& j : r.records)
    if (j["record"] == "trial") {
      CHECK(j["consistent"] == true);
      CHECK(j["max_order_mismatch"].get<double>() <= 1e-10);
      ++trials;
    }
  CHECK(trials == 3);
  const Json& s = record_of(r, "summary");
  CHECK(s["status"] == "ok");
  CHECK(s["inconsistent"] == 0);

  // Same seed, same report (modulo wall time).
  CliRun r2 = run_cli("qnet-verify --trials 3 --seed 7");
  REQUIRE(r2.records.size() == r.records.size());
  for (size_t i = 0; i < r.records.size(); ++i) {
    Json a = r.records[i], b = r2.records[i];
    a.erase("wall_ms");
    b.erase("wall_ms");
    CHECK(a.dump() == b.dump());
  }
}

TEST_CASE("cli tol flag and env var relax the closure threshold, flag wins") {
  write_saddle_problem(4, wpath("t_surf.json"), wpath("t_w.json"), wpath("t_b.json"));
  REQUIRE(run_cli("solve --surface \"" + wpath("t_surf.json") + "\" --weights \"" +
                  wpath("t_w.json") + "\" --boundary \"" + wpath("t_b.json") + "\" --out \"" +
                  wpath("t_u.json") + "\"")
              .exit_code == 0);
  Json uj = load_json_file(wpath("t_u.json"));
  for (auto& e : uj["values"])
    if (e["point"] == Json::array({2, 2})) e["re"] = e["re"].get<double>() + 1.0;
  write_json_file(wpath("t_u_bad.json"), uj);

  std::string conj = "conjugate --field \"" + wpath("t_u_bad.json") + "\" --weights \"" +
                     wpath("t_w.json") + "\" --surface \"" + wpath("t_surf.json") + "\"";
  CHECK(run_cli(conj).exit_code == 6);
  CHECK(run_cli(conj + " --tol 1e6").exit_code == 0);
  CHECK(run_cli(conj, "PLURILATT_TOL=1e6 ").exit_code == 0);
  CHECK(run_cli(conj + " --tol 1e6", "PLURILATT_TOL=1e-15 ").exit_code == 0);
}
