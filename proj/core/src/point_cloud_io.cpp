#include "shape_rerank/point_cloud_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "shape_rerank/errors.hpp"

namespace shape_rerank {
namespace {

std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

// from_chars does not accept a leading '+'. "nan"/"inf" parse here and are
// rejected later as non-finite coordinates.
double parse_number(std::string_view token, std::string_view source, std::size_t line) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    fail(ErrorKind::ParseError, where(source, line) + ": invalid number '" + std::string(token) + "'");
  }
  return value;
}

Vec3 checked_point(const std::array<double, 3>& xyz, std::string_view source, std::size_t line) {
  Vec3 p{xyz[0], xyz[1], xyz[2]};
  if (!is_finite(p)) fail(ErrorKind::NonFiniteCoordinate, where(source, line) + ": non-finite coordinate");
  return p;
}

PointCloud finish(std::string id, std::vector<Vec3> points, std::string_view source) {
  if (points.empty()) fail(ErrorKind::EmptyCloud, std::string(source) + ": no points");
  return PointCloud(std::move(id), std::move(points));
}

std::ifstream open_or_fail(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

CloudFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".ply" ? CloudFormat::PlyAscii : CloudFormat::XyzText;
}

std::optional<CloudFormat> parse_cloud_format(std::string_view name) {
  if (name == "xyz" || name == "xyz-text") return CloudFormat::XyzText;
  if (name == "ply" || name == "ply-ascii") return CloudFormat::PlyAscii;
  return std::nullopt;
}

PointCloud read_xyz(std::istream& in, std::string id, std::string_view source) {
  std::vector<Vec3> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (tokens.size() != 3) {
      fail(ErrorKind::ParseError,
           where(source, line_no) + ": expected 3 coordinates, got " + std::to_string(tokens.size()));
    }
    std::array<double, 3> xyz{};
    for (std::size_t k = 0; k < 3; ++k) xyz[k] = parse_number(tokens[k], source, line_no);
    points.push_back(checked_point(xyz, source, line_no));
  }
  return finish(std::move(id), std::move(points), source);
}

PointCloud read_ply_ascii(std::istream& in, std::string id, std::string_view source) {
  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
  };

  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") fail(ErrorKind::ParseError, where(source, 1) + ": missing 'ply' magic");

  std::vector<Element> elements;
  bool ascii = false;
  bool header_done = false;
  while (next_line()) {
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "end_header") {
      header_done = true;
      break;
    }
    if (tokens[0] == "comment" || tokens[0] == "obj_info") continue;
    if (tokens[0] == "format") {
      if (tokens.size() < 2 || tokens[1] != "ascii") {
        fail(ErrorKind::ParseError, where(source, line_no) + ": only ASCII PLY is supported");
      }
      ascii = true;
    } else if (tokens[0] == "element") {
      if (tokens.size() != 3) fail(ErrorKind::ParseError, where(source, line_no) + ": malformed element line");
      Element e;
      e.name = std::string(tokens[1]);
      auto [ptr, ec] = std::from_chars(tokens[2].data(), tokens[2].data() + tokens[2].size(), e.count);
      if (ec != std::errc() || ptr != tokens[2].data() + tokens[2].size()) {
        fail(ErrorKind::ParseError, where(source, line_no) + ": bad element count");
      }
      elements.push_back(std::move(e));
    } else if (tokens[0] == "property") {
      if (elements.empty()) fail(ErrorKind::ParseError, where(source, line_no) + ": property before element");
      if (tokens.size() < 3) fail(ErrorKind::ParseError, where(source, line_no) + ": malformed property line");
      elements.back().properties.emplace_back(tokens.back());
    } else {
      fail(ErrorKind::ParseError, where(source, line_no) + ": unknown header keyword '" + std::string(tokens[0]) + "'");
    }
  }
  if (!header_done) fail(ErrorKind::ParseError, std::string(source) + ": missing end_header");
  if (!ascii) fail(ErrorKind::ParseError, std::string(source) + ": missing format line");

  std::vector<Vec3> points;
  for (const auto& element : elements) {
    if (element.name != "vertex") {
      // Elements before the vertex block occupy one line per entry.
      for (std::size_t i = 0; i < element.count; ++i) {
        if (!next_line()) fail(ErrorKind::ParseError, std::string(source) + ": truncated body");
      }
      continue;
    }
    std::array<std::ptrdiff_t, 3> column{-1, -1, -1};
    for (std::size_t c = 0; c < element.properties.size(); ++c) {
      if (element.properties[c] == "x") column[0] = static_cast<std::ptrdiff_t>(c);
      if (element.properties[c] == "y") column[1] = static_cast<std::ptrdiff_t>(c);
      if (element.properties[c] == "z") column[2] = static_cast<std::ptrdiff_t>(c);
    }
    if (std::find(column.begin(), column.end(), -1) != column.end()) {
      fail(ErrorKind::ParseError, std::string(source) + ": vertex element lacks x/y/z properties");
    }
    points.reserve(element.count);
    for (std::size_t i = 0; i < element.count; ++i) {
      if (!next_line()) fail(ErrorKind::ParseError, std::string(source) + ": truncated vertex list");
      const auto tokens = split_ws(line);
      if (tokens.size() < element.properties.size()) {
        fail(ErrorKind::ParseError, where(source, line_no) + ": too few vertex values");
      }
      std::array<double, 3> xyz{};
      for (std::size_t k = 0; k < 3; ++k) {
        xyz[k] = parse_number(tokens[static_cast<std::size_t>(column[k])], source, line_no);
      }
      points.push_back(checked_point(xyz, source, line_no));
    }
    break;
  }
  return finish(std::move(id), std::move(points), source);
}

PointCloud load_point_cloud(const std::filesystem::path& path, CloudFormat format) {
  auto in = open_or_fail(path);
  const std::string source = path.string();
  std::string id = path.stem().string();
  return format == CloudFormat::PlyAscii ? read_ply_ascii(in, std::move(id), source)
                                         : read_xyz(in, std::move(id), source);
}

PointCloud load_point_cloud(const std::filesystem::path& path) {
  return load_point_cloud(path, format_from_path(path));
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  (void)ec;
  return std::string(buf.data(), ptr);
}

void write_xyz(std::ostream& out, const PointCloud& cloud) {
  for (const auto& p : cloud.points()) {
    out << format_double(p.x) << ' ' << format_double(p.y) << ' ' << format_double(p.z) << '\n';
  }
}

void save_xyz(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  write_xyz(out, cloud);
  if (!out) fail(ErrorKind::IoError, "write failed for '" + path.string() + "'");
}

}  // namespace shape_rerank
