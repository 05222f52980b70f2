#include "sixdof/ply.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "sixdof/error.hpp"

namespace sixdof {
namespace {

enum class Scalar { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<Scalar> parse_scalar(const std::string& name) {
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

enum class Encoding { Ascii, BinaryLE, BinaryBE };

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::Parse, "ply: " + msg); }

class BinaryReader {
 public:
  BinaryReader(std::istream& in, bool swap) : in_(in), swap_(swap) {}

  double read(Scalar s) {
    unsigned char buf[8];
    const std::size_t n = scalar_size(s);
    if (!in_.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n))) {
      fail("unexpected end of binary data");
    }
    if (swap_) std::reverse(buf, buf + n);
    switch (s) {
      case Scalar::Int8: return static_cast<double>(static_cast<std::int8_t>(buf[0]));
      case Scalar::UInt8: return static_cast<double>(buf[0]);
      case Scalar::Int16: return decode<std::int16_t>(buf);
      case Scalar::UInt16: return decode<std::uint16_t>(buf);
      case Scalar::Int32: return decode<std::int32_t>(buf);
      case Scalar::UInt32: return decode<std::uint32_t>(buf);
      case Scalar::Float32: return decode<float>(buf);
      case Scalar::Float64: return decode<double>(buf);
    }
    return 0.0;
  }

 private:
  template <typename T>
  static double decode(const unsigned char* buf) {
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return static_cast<double>(v);
  }

  std::istream& in_;
  bool swap_;
};

class AsciiReader {
 public:
  explicit AsciiReader(std::istream& in) : in_(in) {}

  double read() {
    std::string token;
    if (!(in_ >> token)) fail("unexpected end of ascii data");
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      fail(fmt::format("bad ascii value '{}'", token));
    }
    return v;
  }

 private:
  std::istream& in_;
};

template <typename Reader, typename ReadScalar>
std::vector<Point3> read_body(const std::vector<Element>& elements, Reader& reader,
                              ReadScalar read_scalar) {
  std::vector<Point3> points;
  for (const Element& el : elements) {
    const bool is_vertex = el.name == "vertex";
    int ix = -1, iy = -1, iz = -1;
    for (std::size_t p = 0; p < el.properties.size(); ++p) {
      const auto& prop = el.properties[p];
      if (prop.is_list) continue;
      if (prop.name == "x") ix = static_cast<int>(p);
      if (prop.name == "y") iy = static_cast<int>(p);
      if (prop.name == "z") iz = static_cast<int>(p);
    }
    if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) fail("vertex element lacks x/y/z");
    if (is_vertex) points.reserve(el.count);
    for (std::size_t row = 0; row < el.count; ++row) {
      Point3 pt;
      for (std::size_t p = 0; p < el.properties.size(); ++p) {
        const auto& prop = el.properties[p];
        if (prop.is_list) {
          const double count = read_scalar(reader, prop.count_type);
          if (count < 0) fail("negative list length");
          for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) {
            read_scalar(reader, prop.type);
          }
          continue;
        }
        const double v = read_scalar(reader, prop.type);
        const auto pi = static_cast<int>(p);
        if (pi == ix) pt.x = v;
        if (pi == iy) pt.y = v;
        if (pi == iz) pt.z = v;
      }
      if (is_vertex) {
        if (!is_finite(pt)) fail(fmt::format("non-finite vertex {}", row));
        points.push_back(pt);
      }
    }
  }
  return points;
}

}  // namespace

std::vector<Point3> read_ply_points(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply") fail("missing 'ply' magic");

  std::optional<Encoding> encoding;
  std::vector<Element> elements;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword.empty() || keyword == "comment" || keyword == "obj_info") continue;
    if (keyword == "format") {
      std::string fmt_name;
      ls >> fmt_name;
      if (fmt_name == "ascii") encoding = Encoding::Ascii;
      else if (fmt_name == "binary_little_endian") encoding = Encoding::BinaryLE;
      else if (fmt_name == "binary_big_endian") encoding = Encoding::BinaryBE;
      else fail("unknown format '" + fmt_name + "'");
    } else if (keyword == "element") {
      Element el;
      long long count = -1;
      ls >> el.name >> count;
      if (el.name.empty() || count < 0) fail("malformed element line: " + line);
      el.count = static_cast<std::size_t>(count);
      elements.push_back(std::move(el));
    } else if (keyword == "property") {
      if (elements.empty()) fail("property before any element");
      std::string type;
      ls >> type;
      Property prop;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type >> prop.name;
        auto ct = parse_scalar(count_type);
        auto it = parse_scalar(item_type);
        if (!ct || !it) fail("bad list property: " + line);
        prop.is_list = true;
        prop.count_type = *ct;
        prop.type = *it;
      } else {
        auto st = parse_scalar(type);
        if (!st) fail("unknown property type '" + type + "'");
        prop.type = *st;
        ls >> prop.name;
      }
      if (prop.name.empty()) fail("property without a name: " + line);
      elements.back().properties.push_back(prop);
    } else if (keyword == "end_header") {
      header_done = true;
      break;
    } else {
      fail("unexpected header line: " + line);
    }
  }
  if (!header_done) fail("missing end_header");
  if (!encoding) fail("missing format line");
  if (std::none_of(elements.begin(), elements.end(),
                   [](const Element& e) { return e.name == "vertex"; })) {
    fail("no vertex element");
  }

  if (*encoding == Encoding::Ascii) {
    AsciiReader reader(in);
    // Round to the declared width so ascii and binary files of the same cloud agree.
    return read_body(elements, reader, [](AsciiReader& r, Scalar s) {
      const double v = r.read();
      return s == Scalar::Float32 ? static_cast<double>(static_cast<float>(v)) : v;
    });
  }
  const bool host_little = std::endian::native == std::endian::little;
  const bool file_little = *encoding == Encoding::BinaryLE;
  BinaryReader reader(in, host_little != file_little);
  return read_body(elements, reader, [](BinaryReader& r, Scalar s) { return r.read(s); });
}

std::vector<Point3> read_ply_points(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open '{}'", path.string()));
  try {
    return read_ply_points(in);
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_ply_points(std::ostream& out, const std::vector<Point3>& points, PlyFormat format) {
  out << "ply\n"
      << (format == PlyFormat::Ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n")
      << "element vertex " << points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\nend_header\n";
  if (format == PlyFormat::Ascii) {
    for (const Point3& p : points) {
      out << fmt::format("{} {} {}\n", static_cast<float>(p.x), static_cast<float>(p.y),
                         static_cast<float>(p.z));
    }
    return;
  }
  for (const Point3& p : points) {
    for (double c : {p.x, p.y, p.z}) {
      const auto f = static_cast<float>(c);
      std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
      unsigned char buf[4];
      for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffu);
      out.write(reinterpret_cast<const char*>(buf), 4);
    }
  }
}

void write_ply_points(const std::filesystem::path& path, const std::vector<Point3>& points,
                      PlyFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", path.string()));
  write_ply_points(out, points, format);
  if (!out) throw Error(ErrorKind::Io, fmt::format("write failed for '{}'", path.string()));
}

std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw Error(ErrorKind::Io, fmt::format("cloud directory '{}' does not exist", dir.string()));
  }
  std::vector<std::pair<long long, fs::path>> numbered;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".ply") continue;
    const std::string stem = entry.path().stem().string();
    std::size_t end = stem.size();
    std::size_t begin = end;
    while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
    if (begin == end) {
      throw Error(ErrorKind::Parse,
                  fmt::format("frame file '{}' has no numeric suffix", entry.path().string()));
    }
    numbered.emplace_back(std::stoll(stem.substr(begin)), entry.path());
  }
  std::sort(numbered.begin(), numbered.end());
  for (std::size_t i = 1; i < numbered.size(); ++i) {
    if (numbered[i].first == numbered[i - 1].first) {
      throw Error(ErrorKind::Parse, fmt::format("duplicate frame number {} in '{}'",
                                                numbered[i].first, dir.string()));
    }
  }
  std::vector<fs::path> out;
  out.reserve(numbered.size());
  for (auto& [n, p] : numbered) out.push_back(std::move(p));
  return out;
}

}  // namespace sixdof
