#include "critmass/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "critmass/error.hpp"

namespace critmass {

namespace {

void put_le(std::ostream& os, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xffu);
  os.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_le(std::istream& is) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) {
    throw Error(ErrorKind::Io, "truncated field payload");
  }
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_field(std::ostream& os, const Field& f) {
  const Grid& g = f.grid();
  nlohmann::json header = {
      {"dim", g.dim()}, {"points_per_axis", g.points_per_axis()}, {"half_width", g.half_width()}};
  os << header.dump() << '\n';
  for (cplx v : f.values()) {
    put_le(os, v.real());
    put_le(os, v.imag());
  }
  if (!os) throw Error(ErrorKind::Io, "failed writing field");
}

Field read_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::Io, "missing field header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
    Grid grid(header.at("dim").get<int>(), header.at("points_per_axis").get<int>(),
              header.at("half_width").get<double>());
    Field f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double re = get_le(is);
      const double im = get_le(is);
      f[i] = cplx(re, im);
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, std::string("bad field header: ") + e.what());
  }
}

void save_field(const std::filesystem::path& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path.string());
  write_field(os, f);
}

Field load_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_field(is);
}

}  // namespace critmass
