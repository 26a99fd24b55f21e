#pragma once

#include <json.hpp>
#include <string>

#include "plurilatt/lagrangian.hpp"

namespace plurilatt {

using Json = nlohmann::ordered_json;

// Complex numbers are serialized as [re, im]; axis indices are 1-based.

Json surface_to_json(const QuadSurface& S);
QuadSurface surface_from_json(const Json& j);

Json weights_to_json(const TaggedWeightField& W);
TaggedWeightField weights_from_json(const Json& j);

Json field_to_json(const VertexField& f);
VertexField field_from_json(const Json& j);

Json boundary_to_json(const std::unordered_map<Point, Cx, PointHash>& b, int dim);
std::unordered_map<Point, Cx, PointHash> boundary_from_json(const Json& j, int* dim_out);

Json gram_to_json(const CubeGram& G);

// CSV: header n1..nN,re,im then one row per vertex in lex order.
std::string field_to_csv(const VertexField& f);

// Heatmap of Re(u) over a planar patch (all faces in one coordinate plane).
std::string svg_heatmap(const QuadSurface& S, const VertexField& u);

uint64_t fnv1a(const std::string& bytes);
std::string hex64(uint64_t v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
Json load_json_file(const std::string& path);

// Applies the PLURILATT_TOL override (consistency residual tolerance).
Tolerances tolerances_from_env();

}  // namespace plurilatt
