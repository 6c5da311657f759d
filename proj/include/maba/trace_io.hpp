#pragma once

#include <string>
#include <vector>

#include "maba/simulator.hpp"
#include "maba/solver.hpp"

namespace maba {

// CSV layout: `k,mean_regret,std,ci95,regret_over_logk`, preceded by comment
// lines carrying the config hash, seed and run metadata. Doubles are written
// with shortest-round-trip formatting, so parsing back is lossless.
std::string trace_to_csv(const RegretTrace& trace);
RegretTrace trace_from_csv(const std::string& text);

void write_trace_csv(const std::string& path, const RegretTrace& trace);
RegretTrace read_trace_csv(const std::string& path);

// Companion reference file for plot overlays: `constant,value` rows.
std::string bounds_to_csv(const BoundConstants& bc);
std::string bounds_to_csv(const GeneralBoundConstants& gb);
void write_text_file(const std::string& path, const std::string& text);

std::string format_double(double v);

}  // namespace maba
