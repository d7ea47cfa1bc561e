/*
Copyright 2026 The MTPCR Authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
you may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// Minimal PLY reader/writer for point clouds: vertex x, y, z only.

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "core/pointcloud.hpp"

namespace mtpcr {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary PLY support assumes a little-endian host");

enum class Scalar { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<Scalar> parse_scalar(std::string_view name) {
  if (name == "char" || name == "int8") return Scalar::Int8;
  if (name == "uchar" || name == "uint8") return Scalar::UInt8;
  if (name == "short" || name == "int16") return Scalar::Int16;
  if (name == "ushort" || name == "uint16") return Scalar::UInt16;
  if (name == "int" || name == "int32") return Scalar::Int32;
  if (name == "uint" || name == "uint32") return Scalar::UInt32;
  if (name == "float" || name == "float32") return Scalar::Float32;
  if (name == "double" || name == "float64") return Scalar::Float64;
  return std::nullopt;
}

std::size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::Int8:
    case Scalar::UInt8: return 1;
    case Scalar::Int16:
    case Scalar::UInt16: return 2;
    case Scalar::Int32:
    case Scalar::UInt32:
    case Scalar::Float32: return 4;
    case Scalar::Float64: return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  Scalar type = Scalar::Float32;
  bool is_list = false;
  Scalar count_type = Scalar::UInt8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

struct Header {
  bool ascii = true;
  std::vector<Element> elements;
};

[[noreturn]] void malformed(const std::filesystem::path& path, const std::string& why) {
  throw Error(ErrorCode::MalformedHeader, path.string() + ": " + why);
}

[[noreturn]] void truncated(const std::filesystem::path& path) {
  throw Error(ErrorCode::Io, path.string() + ": unexpected end of vertex data");
}

Header read_header(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply")
    malformed(path, "missing 'ply' magic");
  Header header;
  bool have_format = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream words(line);
    std::string keyword;
    words >> keyword;
    if (keyword.empty() || keyword == "comment" || keyword == "obj_info") continue;
    if (keyword == "end_header") {
      if (!have_format) malformed(path, "missing format line");
      return header;
    }
    if (keyword == "format") {
      std::string kind, version;
      words >> kind >> version;
      if (kind == "ascii") header.ascii = true;
      else if (kind == "binary_little_endian") header.ascii = false;
      else malformed(path, "unsupported format '" + kind + "'");
      have_format = true;
    } else if (keyword == "element") {
      Element e;
      long long count = -1;
      words >> e.name >> count;
      if (e.name.empty() || count < 0) malformed(path, "bad element line: " + line);
      e.count = static_cast<std::size_t>(count);
      header.elements.push_back(std::move(e));
    } else if (keyword == "property") {
      if (header.elements.empty()) malformed(path, "property before any element");
      Property p;
      std::string type;
      words >> type;
      if (type == "list") {
        std::string count_type, item_type;
        words >> count_type >> item_type >> p.name;
        auto ct = parse_scalar(count_type);
        auto it = parse_scalar(item_type);
        if (!ct || !it) malformed(path, "bad list property: " + line);
        p.is_list = true;
        p.count_type = *ct;
        p.type = *it;
      } else {
        auto t = parse_scalar(type);
        if (!t) malformed(path, "unknown property type '" + type + "'");
        p.type = *t;
        words >> p.name;
      }
      if (p.name.empty()) malformed(path, "property without a name");
      header.elements.back().properties.push_back(std::move(p));
    } else {
      malformed(path, "unexpected header line: " + line);
    }
  }
  malformed(path, "missing end_header");
}

double read_binary_scalar(std::istream& in, Scalar type,
                          const std::filesystem::path& path) {
  char buf[8];
  if (!in.read(buf, static_cast<std::streamsize>(scalar_size(type)))) truncated(path);
  switch (type) {
    case Scalar::Int8: { std::int8_t v; std::memcpy(&v, buf, 1); return v; }
    case Scalar::UInt8: { std::uint8_t v; std::memcpy(&v, buf, 1); return v; }
    case Scalar::Int16: { std::int16_t v; std::memcpy(&v, buf, 2); return v; }
    case Scalar::UInt16: { std::uint16_t v; std::memcpy(&v, buf, 2); return v; }
    case Scalar::Int32: { std::int32_t v; std::memcpy(&v, buf, 4); return v; }
    case Scalar::UInt32: { std::uint32_t v; std::memcpy(&v, buf, 4); return v; }
    case Scalar::Float32: { float v; std::memcpy(&v, buf, 4); return v; }
    case Scalar::Float64: { double v; std::memcpy(&v, buf, 8); return v; }
  }
  return 0.0;
}

double parse_ascii_number(std::string_view token, const std::filesystem::path& path) {
  double value = 0.0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec == std::errc::result_out_of_range) return std::copysign(HUGE_VAL, value);
  if (ec != std::errc() || ptr != end) {
    // from_chars rejects "inf"/"nan" spellings with a leading '+'; fall back
    // to strtod for those so they surface as non-finite rather than garbage.
    std::string copy(token);
    char* stop = nullptr;
    value = std::strtod(copy.c_str(), &stop);
    if (stop != copy.c_str() + copy.size())
      throw Error(ErrorCode::MalformedHeader,
                  path.string() + ": bad number '" + copy + "' in vertex data");
  }
  return value;
}

// Reads one element instance. Returns the scalar property values (lists are
// consumed and dropped).
void read_instance(std::istream& in, bool ascii, const Element& e,
                   std::vector<double>& values, const std::filesystem::path& path) {
  values.clear();
  if (ascii) {
    std::string line;
    do {
      if (!std::getline(in, line)) truncated(path);
      if (!line.empty() && line.back() == '\r') line.pop_back();
    } while (line.find_first_not_of(" \t") == std::string::npos);
    std::istringstream words(line);
    std::string token;
    for (const Property& p : e.properties) {
      if (p.is_list) {
        if (!(words >> token)) truncated(path);
        const auto count = static_cast<long long>(parse_ascii_number(token, path));
        for (long long k = 0; k < count; ++k)
          if (!(words >> token)) truncated(path);
        values.push_back(0.0);
        continue;
      }
      if (!(words >> token)) truncated(path);
      values.push_back(parse_ascii_number(token, path));
    }
    return;
  }
  for (const Property& p : e.properties) {
    if (p.is_list) {
      const auto count = static_cast<long long>(read_binary_scalar(in, p.count_type, path));
      if (count < 0) malformed(path, "negative list length");
      in.ignore(static_cast<std::streamsize>(count) *
                static_cast<std::streamsize>(scalar_size(p.type)));
      if (!in) truncated(path);
      values.push_back(0.0);
      continue;
    }
    values.push_back(read_binary_scalar(in, p.type, path));
  }
}

}  // namespace

PointCloud load_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  const Header header = read_header(in, path);

  std::vector<double> values;
  for (const Element& e : header.elements) {
    if (e.name != "vertex") {
      for (std::size_t i = 0; i < e.count; ++i) read_instance(in, header.ascii, e, values, path);
      continue;
    }
    int ix = -1, iy = -1, iz = -1;
    for (std::size_t k = 0; k < e.properties.size(); ++k) {
      const Property& p = e.properties[k];
      if (p.is_list) continue;
      if (p.name == "x") ix = static_cast<int>(k);
      if (p.name == "y") iy = static_cast<int>(k);
      if (p.name == "z") iz = static_cast<int>(k);
    }
    if (ix < 0 || iy < 0 || iz < 0) malformed(path, "vertex element lacks x, y or z");
    if (e.count == 0) throw Error(ErrorCode::EmptyCloud, path.string() + ": no vertices");

    std::vector<Vec3> points;
    points.reserve(e.count);
    for (std::size_t i = 0; i < e.count; ++i) {
      read_instance(in, header.ascii, e, values, path);
      Vec3 p(values[ix], values[iy], values[iz]);
      if (!p.allFinite())
        throw Error(ErrorCode::NonFiniteCoordinate,
                    path.string() + ": vertex " + std::to_string(i) + " is not finite");
      points.push_back(p);
    }
    return PointCloud(std::move(points));
  }
  throw Error(ErrorCode::MalformedHeader, path.string() + ": no vertex element");
}

void save_ply(const PointCloud& cloud, const std::filesystem::path& path,
              PlyFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  const bool ascii = format == PlyFormat::Ascii;
  out << "ply\n"
      << "format " << (ascii ? "ascii" : "binary_little_endian") << " 1.0\n"
      << "element vertex " << cloud.size() << "\n";
  const char* type = ascii ? "double" : "float64";
  out << "property " << type << " x\n"
      << "property " << type << " y\n"
      << "property " << type << " z\n"
      << "end_header\n";
  if (ascii) {
    char buf[32];
    for (const Vec3& p : cloud.points()) {
      for (int k = 0; k < 3; ++k) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), p[k],
                                       std::chars_format::general, 17);
        (void)ec;
        out.write(buf, end - buf);
        out.put(k == 2 ? '\n' : ' ');
      }
    }
  } else {
    for (const Vec3& p : cloud.points()) {
      const double xyz[3] = {p.x(), p.y(), p.z()};
      out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
    }
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace mtpcr
