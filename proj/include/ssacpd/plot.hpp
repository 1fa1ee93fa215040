#pragma once

#include <string>

#include "ssacpd/evaluation.hpp"

namespace ssacpd {

// Minimal static SVG emitters for the two CSV outputs the CLI produces.
std::string svg_experiment_plot(const ExperimentResult& result, const std::string& title);
std::string svg_roc_plot(const RocCurve& roc, const std::string& title);

} // namespace ssacpd
