#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "plurilatt/errors.hpp"

namespace plurilatt {

using Cx = std::complex<double>;

// Lattice point in Z^N. Axes are 1-based in every public interface;
// coords[a-1] stores the coordinate along axis a.
struct Point {
  std::vector<int> coords;

  Point() = default;
  explicit Point(std::vector<int> c) : coords(std::move(c)) {}

  int dim() const { return static_cast<int>(coords.size()); }

  int operator[](int axis) const { return coords[static_cast<size_t>(axis - 1)]; }
  int& operator[](int axis) { return coords[static_cast<size_t>(axis - 1)]; }

  Point shifted(int axis, int delta = 1) const {
    Point p = *this;
    p[axis] += delta;
    return p;
  }

  // 0 for even coordinate sum, 1 for odd. "Black" vertices are the even class.
  int parity() const {
    long s = 0;
    for (int c : coords) s += c;
    return static_cast<int>(((s % 2) + 2) % 2);
  }

  bool operator==(const Point& o) const { return coords == o.coords; }
  bool operator<(const Point& o) const { return coords < o.coords; }

  std::string str() const {
    std::ostringstream os;
    os << '(';
    for (size_t i = 0; i < coords.size(); ++i) os << (i ? "," : "") << coords[i];
    os << ')';
    return os.str();
  }
};

struct PointHash {
  size_t operator()(const Point& p) const {
    uint64_t h = 1469598103934665603ull;
    for (int c : p.coords) {
      uint64_t v = static_cast<uint64_t>(static_cast<int64_t>(c));
      for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xffu;
        h *= 1099511628211ull;
      }
    }
    return static_cast<size_t>(h);
  }
};

// Axis-aligned box [lo_1,hi_1] x ... x [lo_N,hi_N], inclusive bounds.
struct Box {
  Point lo, hi;

  int dim() const { return lo.dim(); }

  bool contains(const Point& p) const {
    for (int a = 1; a <= dim(); ++a)
      if (p[a] < lo[a] || p[a] > hi[a]) return false;
    return true;
  }

  // All lattice points of the box in lexicographic order.
  std::vector<Point> points() const {
    std::vector<Point> out;
    Point cur = lo;
    while (true) {
      out.push_back(cur);
      int a = dim();
      while (a >= 1) {
        if (cur[a] < hi[a]) {
          ++cur[a];
          for (int b = a + 1; b <= dim(); ++b) cur[b] = lo[b];
          break;
        }
        --a;
      }
      if (a == 0) break;
    }
    return out;
  }
};

// Complex scalar field on lattice vertices.
struct VertexField {
  int dim = 0;
  std::unordered_map<Point, Cx, PointHash> values;

  bool has(const Point& p) const { return values.count(p) != 0; }

  Cx at(const Point& p) const {
    auto it = values.find(p);
    if (it == values.end()) throw MissingFieldValue("no value at vertex " + p.str());
    return it->second;
  }

  void set(const Point& p, Cx v) { values[p] = v; }

  double max_abs() const {
    double m = 0;
    for (const auto& [p, v] : values) m = std::max(m, std::abs(v));
    return m;
  }
};

}  // namespace plurilatt
