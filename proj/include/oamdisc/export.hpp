#pragma once

#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "oamdisc/discrimination.hpp"
#include "oamdisc/montecarlo.hpp"
#include "oamdisc/oam_decomp.hpp"
#include "oamdisc/sorter_sim.hpp"

namespace oamdisc {

/// Writes to a temporary file in the target directory, then renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

/// Header `m,bin,intensity`.
std::string detector_image_csv(const DetectorImage& image);
/// Header `m,bin,count`; the layout follows the detector image the histogram was drawn from.
std::string histogram_csv(const OutcomeHistogram& hist, int m_max, int n_bins);

/// Columns: pair, overlap, p_max_pure, p_max_mixed, p_real_space, p_oam, then N(x) for each
/// threshold, then dose(x) for each threshold. Missing N values read "unreachable".
std::string report_csv_header(std::span<const double> thresholds);
std::string report_csv_row(const DiscriminationReport& report);

nlohmann::json to_json(const OamDecomposition& dec);
nlohmann::json to_json(const MeasurementScheme& scheme);
/// Per-channel outcome-0 window half-widths (-1: no bins, n_bins: every bin).
nlohmann::json to_json(const OutcomeRegions& regions);
nlohmann::json to_json(const DiscriminationReport& report);
nlohmann::json to_json(const OutcomeHistogram& hist, const Decision& decision);
nlohmann::json to_json(const CurveRow& row);

struct ImageScale {
  double min;
  double max;
};

/// 8-bit grayscale PNG of a row-major width x height image, linearly scaled so min -> 0 and
/// max -> 255 (a constant image maps to 0). The scale is also written to `<path>.scale.txt`
/// as `min <value>` and `max <value>` lines.
ImageScale write_png(const std::string& path, std::span<const double> values, int width, int height);

}  // namespace oamdisc
