#pragma once

#include <string>

#include "cpka/metrics.hpp"
#include "cpka/separators.hpp"
#include "cpka/signal_model.hpp"

namespace cpka {

// Full round-trip precision.
std::string fmt(double v);

// One column per channel (label_re,label_im pairs when complex); the last
// header cell reads sample_rate=<Hz>.
void write_sourceset_csv(const std::string& path, const SourceSet& s);
SourceSet read_sourceset_csv(const std::string& path);

// N rows of w0_re,w0_im,w1_re,w1_im,...; diagnostics go to <path>.json.
void write_unmixing_csv(const std::string& path, const UnmixingMatrix& w);
UnmixingMatrix read_unmixing_csv(const std::string& path);

std::string report_csv_header();
std::string report_csv_row(const SeparationReport& r);
std::string report_json(const SeparationReport& r);

}  // namespace cpka
