#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "shape_rerank/point_cloud.hpp"

namespace shape_rerank {

enum class CloudFormat { XyzText, PlyAscii };

/// ".ply" maps to PlyAscii; everything else to XyzText.
CloudFormat format_from_path(const std::filesystem::path& path);
std::optional<CloudFormat> parse_cloud_format(std::string_view name);

/// Reads a cloud; the id is the file stem. Errors carry path:line context.
PointCloud load_point_cloud(const std::filesystem::path& path, CloudFormat format);
PointCloud load_point_cloud(const std::filesystem::path& path);

// Stream readers; `source` only labels error messages.
PointCloud read_xyz(std::istream& in, std::string id, std::string_view source = "<stream>");
PointCloud read_ply_ascii(std::istream& in, std::string id, std::string_view source = "<stream>");

/// One point per line, shortest round-trip decimal representation, so that
/// reading the output back yields bit-identical coordinates.
void write_xyz(std::ostream& out, const PointCloud& cloud);
void save_xyz(const std::filesystem::path& path, const PointCloud& cloud);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace shape_rerank
