#include "plurilatt/io.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace plurilatt {

namespace {

const Json& require(const Json& j, const char* key, const char* ctx) {
  if (!j.is_object() || !j.contains(key))
    throw IoError(std::string(ctx) + ": missing key \"" + key + "\"");
  return j.at(key);
}

Cx cx_from_json(const Json& j, const char* ctx) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw IoError(std::string(ctx) + ": complex values are [re, im] number pairs");
  return Cx(j[0].get<double>(), j[1].get<double>());
}

Json cx_to_json(Cx v) { return Json::array({v.real(), v.imag()}); }

Point point_from_json(const Json& j, const char* ctx) {
  if (!j.is_array() || j.empty()) throw IoError(std::string(ctx) + ": point must be an array");
  std::vector<int> c;
  for (const auto& e : j) {
    if (!e.is_number_integer()) throw IoError(std::string(ctx) + ": coordinates are integers");
    c.push_back(e.get<int>());
  }
  return Point{std::move(c)};
}

Json point_to_json(const Point& p) {
  Json a = Json::array();
  for (int c : p.coords) a.push_back(c);
  return a;
}

template <class V>
Json values_to_json(const PlaquetteField<V>& F, Json (*data_fn)(const V&)) {
  std::vector<const Quad*> keys;
  for (const auto& [q, v] : F.values) keys.push_back(&q);
  std::sort(keys.begin(), keys.end(), [](const Quad* a, const Quad* b) {
    if (a->base.coords != b->base.coords) return a->base.coords < b->base.coords;
    return std::tie(a->di, a->dj) < std::tie(b->di, b->dj);
  });
  Json arr = Json::array();
  for (const Quad* q : keys) {
    Json e;
    e["base"] = point_to_json(q->base);
    e["dirs"] = Json::array({q->di, q->dj});
    e["data"] = data_fn(F.values.at(*q));
    arr.push_back(std::move(e));
  }
  return arr;
}

Json data_complex(const Cx& v) { return Json{{"p", cx_to_json(v)}}; }
Json data_pair_pq(const PairPQ& v) {
  return Json{{"p", cx_to_json(v.p)}, {"q", cx_to_json(v.q)}};
}
Json data_triangular(const TriangularAB& v) {
  return Json{{"a", cx_to_json(v.a)}, {"b", cx_to_json(v.b)}};
}
Json data_offdiag(const OffDiagAC& v) {
  return Json{{"a", cx_to_json(v.a)}, {"c", cx_to_json(v.c)}};
}
Json data_moutard(const MoutardCoeffs& v) {
  return Json{{"a", cx_to_json(v.a)}, {"b", cx_to_json(v.b)}, {"c", cx_to_json(v.c)}};
}
Json data_qnet(const QNetCoeffs& v) {
  return Json{{"c_ij", cx_to_json(v.c_ij)}, {"c_ji", cx_to_json(v.c_ji)}, {"s", cx_to_json(v.s)}};
}

template <class V>
void values_from_json(const Json& arr, PlaquetteField<V>& F, V (*parse_fn)(const Json&)) {
  if (!arr.is_array()) throw IoError("weights: \"values\" must be an array");
  for (const auto& e : arr) {
    Point base = point_from_json(require(e, "base", "weights value"), "weights value");
    const Json& dirs = require(e, "dirs", "weights value");
    if (!dirs.is_array() || dirs.size() != 2)
      throw IoError("weights value: \"dirs\" must be a pair of axes");
    int i = dirs[0].get<int>(), j = dirs[1].get<int>();
    V v = parse_fn(require(e, "data", "weights value"));
    Oriented o = make_plaquette(base, i, j);
    if (F.values.count(o.quad)) throw IoError("duplicate weight entry on " + o.quad.str());
    F.values[o.quad] = o.sign > 0 ? v : swapped(v);
    if (base.dim() != 0 && F.dim == 0) F.dim = base.dim();
    if (base.dim() != F.dim) throw IoError("weights: inconsistent point dimensions");
  }
}

Cx parse_complex_entry(const Json& d) { return cx_from_json(require(d, "p", "data"), "data.p"); }
PairPQ parse_pair_pq(const Json& d) {
  return PairPQ{cx_from_json(require(d, "p", "data"), "data.p"),
                cx_from_json(require(d, "q", "data"), "data.q")};
}
TriangularAB parse_triangular(const Json& d) {
  return TriangularAB{cx_from_json(require(d, "a", "data"), "data.a"),
                      cx_from_json(require(d, "b", "data"), "data.b")};
}
OffDiagAC parse_offdiag(const Json& d) {
  return OffDiagAC{cx_from_json(require(d, "a", "data"), "data.a"),
                   cx_from_json(require(d, "c", "data"), "data.c")};
}
MoutardCoeffs parse_moutard(const Json& d) {
  return MoutardCoeffs{cx_from_json(require(d, "a", "data"), "data.a"),
                       cx_from_json(require(d, "b", "data"), "data.b"),
                       cx_from_json(require(d, "c", "data"), "data.c")};
}
QNetCoeffs parse_qnet(const Json& d) {
  return QNetCoeffs{cx_from_json(require(d, "c_ij", "data"), "data.c_ij"),
                    cx_from_json(require(d, "c_ji", "data"), "data.c_ji"),
                    cx_from_json(require(d, "s", "data"), "data.s")};
}

}  // namespace

Json surface_to_json(const QuadSurface& S) {
  Json out;
  out["dim"] = S.dim;
  std::vector<const Quad*> keys;
  for (const auto& [q, s] : S.faces) keys.push_back(&q);
  std::sort(keys.begin(), keys.end(), [](const Quad* a, const Quad* b) {
    if (a->base.coords != b->base.coords) return a->base.coords < b->base.coords;
    return std::tie(a->di, a->dj) < std::tie(b->di, b->dj);
  });
  Json arr = Json::array();
  for (const Quad* q : keys) {
    Json e;
    e["base"] = point_to_json(q->base);
    e["dirs"] = Json::array({q->di, q->dj});
    e["sign"] = S.faces.at(*q);
    arr.push_back(std::move(e));
  }
  out["plaquettes"] = std::move(arr);
  return out;
}

QuadSurface surface_from_json(const Json& j) {
  QuadSurface S;
  const Json& dim = require(j, "dim", "surface");
  if (!dim.is_number_integer() || dim.get<int>() < 2)
    throw IoError("surface: \"dim\" must be an integer >= 2");
  S.dim = dim.get<int>();
  const Json& pls = require(j, "plaquettes", "surface");
  if (!pls.is_array()) throw IoError("surface: \"plaquettes\" must be an array");
  for (const auto& e : pls) {
    Point base = point_from_json(require(e, "base", "plaquette"), "plaquette");
    if (base.dim() != S.dim) throw IoError("plaquette: base dimension mismatch");
    const Json& dirs = require(e, "dirs", "plaquette");
    if (!dirs.is_array() || dirs.size() != 2)
      throw IoError("plaquette: \"dirs\" must be a pair of axes");
    const Json& sg = require(e, "sign", "plaquette");
    int sign = sg.get<int>();
    if (sign != 1 && sign != -1) throw IoError("plaquette: \"sign\" must be +1 or -1");
    S.insert(make_plaquette(base, dirs[0].get<int>(), dirs[1].get<int>(), sign));
  }
  return S;
}

Json weights_to_json(const TaggedWeightField& W) {
  Json out;
  out["kind"] = kind_name(W.kind);
  if (W.constraint) {
    out["constraint"] = Json::array({cx_to_json(W.constraint->lambda),
                                     cx_to_json(W.constraint->mu), cx_to_json(W.constraint->nu)});
  } else {
    out["constraint"] = nullptr;
  }
  out["values"] = std::visit(
      [](const auto& f) -> Json {
        using V = typename std::decay_t<decltype(f.values)>::mapped_type;
        if constexpr (std::is_same_v<V, Cx>) return values_to_json(f, &data_complex);
        else if constexpr (std::is_same_v<V, PairPQ>) return values_to_json(f, &data_pair_pq);
        else if constexpr (std::is_same_v<V, TriangularAB>)
          return values_to_json(f, &data_triangular);
        else if constexpr (std::is_same_v<V, OffDiagAC>) return values_to_json(f, &data_offdiag);
        else if constexpr (std::is_same_v<V, MoutardCoeffs>)
          return values_to_json(f, &data_moutard);
        else
          return values_to_json(f, &data_qnet);
      },
      W.data);
  return out;
}

TaggedWeightField weights_from_json(const Json& j) {
  TaggedWeightField W;
  W.kind = kind_from_name(require(j, "kind", "weights").get<std::string>());
  const Json& cons = require(j, "constraint", "weights");
  if (!cons.is_null()) {
    if (!cons.is_array() || cons.size() != 3)
      throw IoError("weights: \"constraint\" must be null or a [lambda, mu, nu] triple");
    W.constraint = ConstraintTriple{cx_from_json(cons[0], "constraint"),
                                    cx_from_json(cons[1], "constraint"),
                                    cx_from_json(cons[2], "constraint")};
  }
  const Json& vals = require(j, "values", "weights");
  switch (W.kind) {
    case WeightKind::ComplexP:
    case WeightKind::ThreePointP: {
      PlaquetteField<Cx> F;
      values_from_json(vals, F, &parse_complex_entry);
      W.data = std::move(F);
      break;
    }
    case WeightKind::PairPQKind: {
      PlaquetteField<PairPQ> F;
      values_from_json(vals, F, &parse_pair_pq);
      W.data = std::move(F);
      break;
    }
    case WeightKind::Triangular: {
      PlaquetteField<TriangularAB> F;
      values_from_json(vals, F, &parse_triangular);
      W.data = std::move(F);
      break;
    }
    case WeightKind::OffDiagonal: {
      PlaquetteField<OffDiagAC> F;
      values_from_json(vals, F, &parse_offdiag);
      W.data = std::move(F);
      break;
    }
    case WeightKind::MoutardABC: {
      PlaquetteField<MoutardCoeffs> F;
      values_from_json(vals, F, &parse_moutard);
      W.data = std::move(F);
      break;
    }
    case WeightKind::QNet: {
      PlaquetteField<QNetCoeffs> F;
      values_from_json(vals, F, &parse_qnet);
      W.data = std::move(F);
      break;
    }
  }
  return W;
}

Json field_to_json(const VertexField& f) {
  Json out;
  out["dim"] = f.dim;
  std::vector<const Point*> keys;
  for (const auto& [p, v] : f.values) keys.push_back(&p);
  std::sort(keys.begin(), keys.end(),
            [](const Point* a, const Point* b) { return a->coords < b->coords; });
  Json arr = Json::array();
  for (const Point* p : keys) {
    Cx v = f.values.at(*p);
    Json e;
    e["point"] = point_to_json(*p);
    e["re"] = v.real();
    e["im"] = v.imag();
    arr.push_back(std::move(e));
  }
  out["values"] = std::move(arr);
  return out;
}

VertexField field_from_json(const Json& j) {
  VertexField f;
  f.dim = require(j, "dim", "field").get<int>();
  const Json& vals = require(j, "values", "field");
  if (!vals.is_array()) throw IoError("field: \"values\" must be an array");
  for (const auto& e : vals) {
    Point p = point_from_json(require(e, "point", "field value"), "field value");
    if (p.dim() != f.dim) throw IoError("field value: point dimension mismatch");
    double re = require(e, "re", "field value").get<double>();
    double im = require(e, "im", "field value").get<double>();
    if (f.values.count(p)) throw IoError("duplicate field value at " + p.str());
    f.set(p, Cx(re, im));
  }
  return f;
}

Json boundary_to_json(const std::unordered_map<Point, Cx, PointHash>& b, int dim) {
  VertexField f;
  f.dim = dim;
  f.values = b;
  return field_to_json(f);
}

std::unordered_map<Point, Cx, PointHash> boundary_from_json(const Json& j, int* dim_out) {
  VertexField f = field_from_json(j);
  if (dim_out) *dim_out = f.dim;
  return std::move(f.values);
}

Json gram_to_json(const CubeGram& G) {
  Json out;
  out["base"] = point_to_json(G.cube.base);
  out["dirs"] = Json::array({G.cube.d1, G.cube.d2, G.cube.d3});
  Json rows = Json::array();
  for (int r = 0; r < 8; ++r) {
    Json row = Json::array();
    for (int c = 0; c < 8; ++c) row.push_back(cx_to_json(G.M(r, c)));
    rows.push_back(std::move(row));
  }
  out["matrix"] = std::move(rows);
  return out;
}

std::string field_to_csv(const VertexField& f) {
  std::vector<const Point*> keys;
  for (const auto& [p, v] : f.values) keys.push_back(&p);
  std::sort(keys.begin(), keys.end(),
            [](const Point* a, const Point* b) { return a->coords < b->coords; });
  std::ostringstream os;
  os << std::setprecision(17);
  for (int a = 1; a <= f.dim; ++a) os << 'n' << a << ',';
  os << "re,im\n";
  for (const Point* p : keys) {
    for (int c : p->coords) os << c << ',';
    Cx v = f.values.at(*p);
    os << v.real() << ',' << v.imag() << '\n';
  }
  return os.str();
}

std::string svg_heatmap(const QuadSurface& S, const VertexField& u) {
  if (S.faces.empty()) throw IoError("svg: empty surface");
  // The patch must live in a single coordinate plane.
  int di = 0, dj = 0;
  for (const auto& [q, sign] : S.faces) {
    if (di == 0) {
      di = q.di;
      dj = q.dj;
    } else if (q.di != di || q.dj != dj) {
      throw IoError("svg: surface is not a planar patch (mixed face planes)");
    }
  }
  const Quad& first = S.faces.begin()->first;
  for (const auto& [q, sign] : S.faces)
    for (int a = 1; a <= S.dim; ++a)
      if (a != di && a != dj && q.base[a] != first.base[a])
        throw IoError("svg: surface is not a planar patch (offset bases)");

  int xmin = 1 << 30, xmax = -(1 << 30), ymin = 1 << 30, ymax = -(1 << 30);
  double vmin = 1e300, vmax = -1e300;
  for (const auto& [q, sign] : S.faces) {
    xmin = std::min(xmin, q.base[di]);
    xmax = std::max(xmax, q.base[di] + 1);
    ymin = std::min(ymin, q.base[dj]);
    ymax = std::max(ymax, q.base[dj] + 1);
    for (const auto& c : q.corners()) {
      double v = u.at(c).real();
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  }
  double span = (vmax > vmin) ? (vmax - vmin) : 1.0;
  const int cell = 24, margin = 10;
  int wpx = (xmax - xmin) * cell + 2 * margin;
  int hpx = (ymax - ymin) * cell + 2 * margin;

  auto color = [&](double v) {
    double t = (v - vmin) / span;  // 0 -> blue, 0.5 -> white, 1 -> red
    int r, g, b;
    if (t < 0.5) {
      double s = t * 2.0;
      r = static_cast<int>(255 * s);
      g = static_cast<int>(255 * s);
      b = 255;
    } else {
      double s = (t - 0.5) * 2.0;
      r = 255;
      g = static_cast<int>(255 * (1.0 - s));
      b = static_cast<int>(255 * (1.0 - s));
    }
    std::ostringstream os;
    os << "rgb(" << r << ',' << g << ',' << b << ')';
    return os.str();
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << wpx << "\" height=\"" << hpx
     << "\">\n";
  std::vector<const Quad*> keys;
  for (const auto& [q, s] : S.faces) keys.push_back(&q);
  std::sort(keys.begin(), keys.end(), [](const Quad* a, const Quad* b) {
    return a->base.coords < b->base.coords;
  });
  for (const Quad* q : keys) {
    double avg = 0;
    for (const auto& c : q->corners()) avg += u.at(c).real();
    avg *= 0.25;
    int px = margin + (q->base[di] - xmin) * cell;
    // SVG y axis points down; flip so larger lattice coordinates are higher.
    int py = margin + (ymax - 1 - q->base[dj]) * cell;
    os << "<rect x=\"" << px << "\" y=\"" << py << "\" width=\"" << cell << "\" height=\"" << cell
       << "\" fill=\"" << color(avg) << "\" stroke=\"#404040\" stroke-width=\"0.5\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

uint64_t fnv1a(const std::string& bytes) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open \"" + path + "\" for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open \"" + path + "\" for writing");
  out << content;
  if (!out) throw IoError("write to \"" + path + "\" failed");
}

Json load_json_file(const std::string& path) {
  std::string text = read_file(path);
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw IoError("\"" + path + "\": malformed JSON");
  return j;
}

Tolerances tolerances_from_env() {
  Tolerances tol;
  if (const char* env = std::getenv("PLURILATT_TOL")) {
    char* end = nullptr;
    double v = std::strtod(env, &end);
    if (end == env || v <= 0) throw IoError("PLURILATT_TOL must be a positive number");
    tol.consistency_rel = v;
  }
  return tol;
}

}  // namespace plurilatt
