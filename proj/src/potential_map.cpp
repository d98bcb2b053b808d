#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "oamdisc/errors.hpp"
#include "oamdisc/export.hpp"
#include "oamdisc/physics_field.hpp"

namespace oamdisc {

namespace {

constexpr const char* kMagic = "PMAP1";

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, const char* what) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0' || errno == ERANGE) {
    throw FormatError(std::string("PMAP1: cannot parse ") + what + " '" + token + "'");
  }
  return v;
}

}  // namespace

std::string format_potential_map(const SpecimenModel& specimen) {
  const GridSpec& g = specimen.grid();
  std::string out;
  out.reserve(g.size() * 24 + 64);
  out += kMagic;
  out += ' ';
  out += std::to_string(g.n());
  out += ' ';
  out += format_double(g.fov());
  out += '\n';
  const auto v = specimen.potential();
  for (int iy = 0; iy < g.n(); ++iy) {
    for (int ix = 0; ix < g.n(); ++ix) {
      if (ix) out += ' ';
      out += format_double(v[g.index(ix, iy)]);
    }
    out += '\n';
  }
  return out;
}

void save_potential_map(const SpecimenModel& specimen, const std::string& path) {
  write_file_atomic(path, format_potential_map(specimen));
}

SpecimenModel parse_potential_map(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw FormatError("PMAP1: empty file");
  std::istringstream hs(header);
  std::string magic, n_tok, fov_tok, extra;
  if (!(hs >> magic >> n_tok >> fov_tok) || (hs >> extra)) {
    throw FormatError("PMAP1: header must read 'PMAP1 <n> <fov_angstrom>'");
  }
  if (magic != kMagic) throw FormatError("PMAP1: bad magic '" + magic + "'");
  char* end = nullptr;
  const long long n = std::strtoll(n_tok.c_str(), &end, 10);
  if (*end != '\0' || n <= 0) throw FormatError("PMAP1: bad side length '" + n_tok + "'");
  if (n < 16 || !is_power_of_two(n)) {
    throw FormatError("PMAP1: side length must be a power of two >= 16, got " + n_tok);
  }
  if (n > (1 << 14)) throw FormatError("PMAP1: side length too large");
  const double fov = parse_double(fov_tok, "field of view");
  if (!(fov > 0.0) || !std::isfinite(fov)) throw FormatError("PMAP1: field of view must be positive");

  const std::size_t count = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  std::vector<double> potential;
  potential.reserve(count);
  std::string token;
  while (in >> token) {
    if (potential.size() == count) throw FormatError("PMAP1: more than n*n values (non-square data)");
    const double v = parse_double(token, "value");
    if (!std::isfinite(v)) throw FormatError("PMAP1: non-finite value");
    potential.push_back(v);
  }
  if (potential.size() != count) {
    throw FormatError("PMAP1: expected " + std::to_string(count) + " values, found " +
                      std::to_string(potential.size()) + " (non-square data)");
  }
  return SpecimenModel(GridSpec(static_cast<int>(n), fov), std::move(potential));
}

SpecimenModel load_potential_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("PMAP1: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_potential_map(ss.str());
}

}  // namespace oamdisc
