#pragma once

#include "tacsim/geometry.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tacsim {

// Vertices closer than this are welded into one.
inline constexpr double kStlWeldTolerance = 1e-9;

// Parses binary (80-byte header, uint32 count, 50-byte facets) or ASCII STL.
// Vertices are welded, faces keep file order, degenerate facets are dropped.
// Throws ParseError carrying the byte offset of the problem.
TriangleMesh parse_stl(std::span<const std::byte> payload);
TriangleMesh read_stl_file(const std::filesystem::path& path);

// Little-endian binary STL with per-facet normals.
std::vector<std::byte> serialize_stl_binary(const TriangleMesh& mesh, const std::string& header = "tacsim");

}  // namespace tacsim
