#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "sixdof/geometry.hpp"

namespace sixdof {

enum class PlyFormat { Ascii, BinaryLittleEndian };

// Reads the x, y, z vertex properties (float or double) of a PLY stream.
// Other properties and elements are skipped. Throws Parse on malformed input.
std::vector<Point3> read_ply_points(std::istream& in);
std::vector<Point3> read_ply_points(const std::filesystem::path& path);

// Writes x, y, z as float32.
void write_ply_points(std::ostream& out, const std::vector<Point3>& points, PlyFormat format);
void write_ply_points(const std::filesystem::path& path, const std::vector<Point3>& points,
                      PlyFormat format);

// *.ply files of a directory ordered by the integer at the end of their stem.
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir);

}  // namespace sixdof
