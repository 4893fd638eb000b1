#pragma once

#include <string>

namespace ntkm::bench {

// Renders final_losses.csv as a fixed 800x600 SVG line chart: final loss
// (eval when present, train otherwise) against log2 width, one polyline per
// model kind, medians across seeds. Hand-emitted markup with pinned number
// formatting, so identical input bytes always produce identical output bytes.
void emit_plot(const std::string& csv_path, const std::string& svg_path);

}  // namespace ntkm::bench
