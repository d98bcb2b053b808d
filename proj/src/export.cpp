#include "oamdisc/export.hpp"

#include <png.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oamdisc/errors.hpp"

namespace oamdisc {

namespace fs = std::filesystem;

namespace {

std::string temp_name(const std::string& path) {
  static std::atomic<unsigned> counter{0};
  return path + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void commit(const std::string& tmp, const std::string& path) {
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot write " + path);
  }
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = temp_name(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write failed for " + path);
    }
  }
  commit(tmp, path);
}

std::string detector_image_csv(const DetectorImage& image) {
  std::ostringstream out;
  out << "m,bin,intensity\n";
  for (int m = -image.m_max; m <= image.m_max; ++m) {
    for (int b = 0; b < image.n_bins; ++b) out << m << ',' << b << ',' << fmt(image.intensity[image.cell(m, b)]) << '\n';
  }
  return out.str();
}

std::string histogram_csv(const OutcomeHistogram& hist, int m_max, int n_bins) {
  if (hist.counts.size() != static_cast<std::size_t>(2 * m_max + 1) * n_bins) {
    throw DomainError("histogram does not match the detector layout");
  }
  std::ostringstream out;
  out << "m,bin,count\n";
  std::size_t i = 0;
  for (int m = -m_max; m <= m_max; ++m) {
    for (int b = 0; b < n_bins; ++b) out << m << ',' << b << ',' << hist.counts[i++] << '\n';
  }
  return out.str();
}

std::string report_csv_header(std::span<const double> thresholds) {
  std::ostringstream out;
  out << "pair,overlap,p_max_pure,p_max_mixed,p_real_space,p_oam";
  for (double x : thresholds) out << ",N(" << x << ')';
  for (double x : thresholds) out << ",dose(" << x << ')';
  return out.str();
}

std::string report_csv_row(const DiscriminationReport& r) {
  std::ostringstream out;
  out << r.label << ',' << fmt(r.overlap) << ',' << fmt(r.p_max_pure) << ',' << fmt(r.p_max_mixed) << ','
      << fmt(r.p_real_space) << ',' << fmt(r.p_oam_physical);
  for (const auto& n : r.n_min_oam) {
    out << ',';
    if (n) {
      out << *n;
    } else {
      out << "unreachable";
    }
  }
  for (const auto& d : r.dose) {
    out << ',';
    if (d) {
      out << fmt(*d);
    } else {
      out << "unreachable";
    }
  }
  return out.str();
}

namespace {

nlohmann::json complex_arrays(std::span<const cplx> v) {
  std::vector<double> re(v.size()), im(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    re[i] = v[i].real();
    im[i] = v[i].imag();
  }
  return {{"re", re}, {"im", im}};
}

nlohmann::json radial_json(const RadialGrid& g) { return {{"n_r", g.n_r()}, {"r_max", g.r_max()}, {"dr", g.dr()}}; }

const char* kind_name(ChannelKind k) {
  switch (k) {
    case ChannelKind::Both:
      return "both";
    case ChannelKind::Collinear:
      return "collinear";
    case ChannelKind::OnlyHypothesis0:
      return "only_hypothesis_0";
    case ChannelKind::OnlyHypothesis1:
      return "only_hypothesis_1";
  }
  return "unknown";
}

template <class T>
nlohmann::json optionals(const std::vector<std::optional<T>>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& x : v) {
    if (x) {
      a.push_back(*x);
    } else {
      a.push_back("unreachable");
    }
  }
  return a;
}

}  // namespace

nlohmann::json to_json(const OamDecomposition& dec) {
  nlohmann::json channels = nlohmann::json::array();
  for (const OamChannel& c : dec.channels) {
    nlohmann::json ch = complex_arrays(c.chi);
    ch["m"] = c.m;
    ch["q"] = c.q;
    ch["alpha"] = c.alpha;
    channels.push_back(std::move(ch));
  }
  return {{"format", "oam-decomposition/1"},
          {"radial_grid", radial_json(dec.radial_grid)},
          {"m_max", dec.m_max},
          {"center", {dec.center.x, dec.center.y}},
          {"truncation_loss", dec.truncation_loss},
          {"captured_weight", dec.captured_weight},
          {"low_capture", dec.low_capture},
          {"channels", std::move(channels)}};
}

nlohmann::json to_json(const MeasurementScheme& scheme) {
  nlohmann::json channels = nlohmann::json::array();
  for (const SchemeChannel& c : scheme.channels) {
    channels.push_back({{"m", c.m},
                        {"kind", kind_name(c.kind)},
                        {"span_dimension", c.span_basis.size()},
                        {"outcome0_rank", c.outcome0.size()},
                        {"outcome1_rank", c.outcome1.size()},
                        {"complement_outcome", c.complement_outcome},
                        {"eigenvalues", {c.eigenvalues[0], c.eigenvalues[1]}},
                        {"designated_weight", c.designated_weight}});
  }
  return {{"radial_grid", radial_json(scheme.radial_grid)}, {"m_max", scheme.m_max}, {"channels", std::move(channels)}};
}

nlohmann::json to_json(const OutcomeRegions& regions) {
  nlohmann::json channels = nlohmann::json::array();
  for (int m = -regions.m_max; m <= regions.m_max; ++m) {
    channels.push_back({{"m", m}, {"outcome0_half_width", regions.half_width[m + regions.m_max]}});
  }
  return {{"n_bins", regions.n_bins}, {"zero_frequency_bin", regions.n_bins / 2}, {"channels", std::move(channels)}};
}

nlohmann::json to_json(const DiscriminationReport& r) {
  return {{"label", r.label},
          {"overlap", r.overlap},
          {"p_max_pure", r.p_max_pure},
          {"p_max_mixed", r.p_max_mixed},
          {"p_real_space", r.p_real_space},
          {"p_real_space_pure", r.p_real_space_pure},
          {"p_oam_exact", r.p_oam_exact},
          {"p_oam_physical", r.p_oam_physical},
          {"s0", r.s0},
          {"s1", r.s1},
          {"s0_physical", r.s0_physical},
          {"s1_physical", r.s1_physical},
          {"s0_real_space", r.s0_real_space},
          {"s1_real_space", r.s1_real_space},
          {"area", r.area},
          {"priors", {r.priors.p0(), r.priors.p1()}},
          {"thresholds", r.thresholds},
          {"n_min_oam", optionals(r.n_min_oam)},
          {"n_min_oam_exact", optionals(r.n_min_oam_exact)},
          {"n_min_real_space", optionals(r.n_min_real_space)},
          {"dose", optionals(r.dose)}};
}

nlohmann::json to_json(const OutcomeHistogram& hist, const Decision& decision) {
  return {{"N", hist.detected},     {"emitted", hist.emitted},         {"trial", hist.trial},
          {"truth", hist.truth},    {"decision", decision.hypothesis}, {"llr", decision.llr}};
}

nlohmann::json to_json(const CurveRow& row) {
  return {{"dose", row.dose},
          {"N", row.n},
          {"empirical", row.empirical},
          {"predicted", row.predicted},
          {"standard_error", row.standard_error}};
}

ImageScale write_png(const std::string& path, std::span<const double> values, int width, int height) {
  if (width <= 0 || height <= 0 || values.size() != static_cast<std::size_t>(width) * height) {
    throw DomainError("image dimensions do not match the data");
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const ImageScale scale{*lo_it, *hi_it};
  const double range = scale.max - scale.min;
  std::vector<png_byte> pixels(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = range > 0.0 ? (values[i] - scale.min) / range : 0.0;
    pixels[i] = static_cast<png_byte>(std::clamp(std::lround(t * 255.0), 0L, 255L));
  }

  const std::string tmp = temp_name(path);
  FILE* fp = std::fopen(tmp.c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot open " + tmp + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    std::remove(tmp.c_str());
    throw std::runtime_error("PNG encoding failed for " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) png_write_row(png, pixels.data() + static_cast<std::size_t>(y) * width);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(fp) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("write failed for " + path);
  }
  commit(tmp, path);

  write_file_atomic(path + ".scale.txt", "min " + fmt(scale.min) + "\nmax " + fmt(scale.max) + "\n");
  return scale;
}

}  // namespace oamdisc
