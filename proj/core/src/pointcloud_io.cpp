// SPDX-License-Identifier: Apache-2.0
#include "dcmp/pointcloud_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dcmp {
namespace {

float read_f32_le(const std::uint8_t* p) {
  std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                    (static_cast<std::uint32_t>(p[1]) << 8) |
                    (static_cast<std::uint32_t>(p[2]) << 16) |
                    (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(u);
}

void write_f32_le(std::ostream& os, float v) {
  std::uint32_t u = std::bit_cast<std::uint32_t>(v);
  char b[4] = {static_cast<char>(u & 0xff), static_cast<char>((u >> 8) & 0xff),
               static_cast<char>((u >> 16) & 0xff), static_cast<char>((u >> 24) & 0xff)};
  os.write(b, 4);
}

bool finite3(float x, float y, float z) {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
}

PointCloud load_kitti_bin(std::span<const std::uint8_t> bytes, LoadStats* stats) {
  if (bytes.size() % 16 != 0)
    throw std::runtime_error("kitti-bin: truncated record (byte count not a multiple of 16)");
  PointCloud cloud;
  cloud.points.reserve(bytes.size() / 16);
  for (std::size_t off = 0; off < bytes.size(); off += 16) {
    const float x = read_f32_le(bytes.data() + off);
    const float y = read_f32_le(bytes.data() + off + 4);
    const float z = read_f32_le(bytes.data() + off + 8);
    const float i = read_f32_le(bytes.data() + off + 12);
    if (!finite3(x, y, z)) {
      if (stats) ++stats->rejected;
      continue;
    }
    cloud.points.emplace_back(x, y, z, i);
  }
  return cloud;
}

PointCloud load_pcd_ascii(const std::string& text, LoadStats* stats) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> fields;
  std::size_t count = 0;
  bool got_data = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "FIELDS") {
      std::string f;
      while (ls >> f) fields.push_back(f);
    } else if (tag == "POINTS") {
      ls >> count;
    } else if (tag == "DATA") {
      std::string kind;
      ls >> kind;
      if (kind != "ascii") throw std::runtime_error("pcd: only DATA ascii is supported");
      got_data = true;
      break;
    }
  }
  if (!got_data) throw std::runtime_error("pcd: missing DATA section");
  int xi = -1, yi = -1, zi = -1, ii = -1;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (fields[k] == "x") xi = static_cast<int>(k);
    if (fields[k] == "y") yi = static_cast<int>(k);
    if (fields[k] == "z") zi = static_cast<int>(k);
    if (fields[k] == "intensity") ii = static_cast<int>(k);
  }
  if (xi < 0 || yi < 0 || zi < 0) throw std::runtime_error("pcd: x/y/z fields required");

  PointCloud cloud;
  cloud.points.reserve(count);
  std::vector<double> row(fields.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    bool ok = true;
    for (auto& v : row)
      if (!(ls >> v)) { ok = false; break; }
    if (!ok) throw std::runtime_error("pcd: malformed data row");
    const double x = row[xi], y = row[yi], z = row[zi];
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      if (stats) ++stats->rejected;
      continue;
    }
    cloud.points.emplace_back(x, y, z, ii >= 0 ? static_cast<float>(row[ii]) : 0.0f);
  }
  return cloud;
}

PointCloud load_ply_ascii(const std::string& text, LoadStats* stats) {
  std::istringstream in(text);
  std::string line;
  std::size_t vertex_count = 0;
  std::vector<std::string> props;
  bool in_vertex = false, header_done = false;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0)
    throw std::runtime_error("ply: missing magic");
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "format") {
      std::string kind;
      ls >> kind;
      if (kind != "ascii") throw std::runtime_error("ply: only ascii format is supported");
    } else if (tag == "element") {
      std::string name;
      ls >> name >> vertex_count;
      in_vertex = (name == "vertex");
      if (!in_vertex) throw std::runtime_error("ply: only vertex elements are supported");
    } else if (tag == "property" && in_vertex) {
      std::string type, name;
      ls >> type >> name;
      props.push_back(name);
    } else if (tag == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw std::runtime_error("ply: missing end_header");
  int xi = -1, yi = -1, zi = -1;
  for (std::size_t k = 0; k < props.size(); ++k) {
    if (props[k] == "x") xi = static_cast<int>(k);
    if (props[k] == "y") yi = static_cast<int>(k);
    if (props[k] == "z") zi = static_cast<int>(k);
  }
  if (xi < 0 || yi < 0 || zi < 0) throw std::runtime_error("ply: x/y/z properties required");

  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  std::vector<double> row(props.size());
  for (std::size_t n = 0; n < vertex_count; ++n) {
    if (!std::getline(in, line)) throw std::runtime_error("ply: truncated vertex list");
    std::istringstream ls(line);
    for (auto& v : row)
      if (!(ls >> v)) throw std::runtime_error("ply: malformed vertex row");
    if (!std::isfinite(row[xi]) || !std::isfinite(row[yi]) || !std::isfinite(row[zi])) {
      if (stats) ++stats->rejected;
      continue;
    }
    cloud.points.emplace_back(row[xi], row[yi], row[zi]);
  }
  return cloud;
}

}  // namespace

CloudFormat cloud_format_from_path(const std::string& path) {
  auto dot = path.find_last_of('.');
  std::string ext = (dot == std::string::npos) ? "" : path.substr(dot);
  if (ext == ".bin") return CloudFormat::KittiBin;
  if (ext == ".pcd") return CloudFormat::PcdAscii;
  if (ext == ".ply") return CloudFormat::PlyAscii;
  throw std::runtime_error("unknown point cloud format for '" + path + "'");
}

PointCloud load_point_cloud(std::span<const std::uint8_t> bytes, CloudFormat format,
                            LoadStats* stats) {
  switch (format) {
    case CloudFormat::KittiBin:
      return load_kitti_bin(bytes, stats);
    case CloudFormat::PcdAscii:
      return load_pcd_ascii(std::string(bytes.begin(), bytes.end()), stats);
    case CloudFormat::PlyAscii:
      return load_ply_ascii(std::string(bytes.begin(), bytes.end()), stats);
  }
  throw std::runtime_error("unknown point cloud format");
}

PointCloud load_point_cloud_file(const std::string& path, CloudFormat format,
                                 LoadStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return load_point_cloud(bytes, format, stats);
}

PointCloud load_point_cloud_file(const std::string& path, LoadStats* stats) {
  return load_point_cloud_file(path, cloud_format_from_path(path), stats);
}

void save_point_cloud_file(const std::string& path, const PointCloud& cloud,
                           CloudFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  if (format == CloudFormat::KittiBin) {
    for (const Point3& p : cloud.points) {
      write_f32_le(out, static_cast<float>(p.x));
      write_f32_le(out, static_cast<float>(p.y));
      write_f32_le(out, static_cast<float>(p.z));
      write_f32_le(out, p.intensity);
    }
  } else if (format == CloudFormat::PcdAscii) {
    out << "# .PCD v0.7 - Point Cloud Data file format\nVERSION 0.7\n"
        << "FIELDS x y z intensity\nSIZE 4 4 4 4\nTYPE F F F F\nCOUNT 1 1 1 1\n"
        << "WIDTH " << cloud.size() << "\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\n"
        << "POINTS " << cloud.size() << "\nDATA ascii\n";
    out.precision(9);
    for (const Point3& p : cloud.points)
      out << p.x << ' ' << p.y << ' ' << p.z << ' ' << p.intensity << '\n';
  } else {
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
        << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
    out.precision(9);
    for (const Point3& p : cloud.points) out << p.x << ' ' << p.y << ' ' << p.z << '\n';
  }
}

}  // namespace dcmp
