// CSV emission helpers: locale-independent number formatting (12 significant
// digits, '.' decimal separator) and the per-agent allocation-curve trace.
#pragma once

#include <charconv>
#include <ostream>
#include <string>
#include <vector>

#include "incmech/mechanisms.hpp"

namespace incmech {

inline std::string format_number(double v, int significant = 12) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, significant);
  return std::string(buf, res.ptr);
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << cells[i];
  }
  os << '\n';
}

// Samples every agent's allocation curve on a uniform grid of their own
// contribution, the others held at the given profile.
// Columns: agent_id, m_i, piece_index, accuracy.
inline void write_allocation_trace(std::ostream& os, const MechanismSpec& mech,
                                   const AccuracyModel& model, const Population& pop,
                                   const std::vector<double>& profile,
                                   int samples_per_agent = 200) {
  write_csv_row(os, {"agent_id", "m_i", "piece_index", "accuracy"});
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const AllocationCurve curve =
        allocation_curve(mech, model, pop, i, others_total(profile, i));
    double hi = profile[i];
    for (double b : curve.breakpoints()) hi = std::max(hi, b);
    hi = 1.25 * std::max(hi, 1.0);
    for (int j = 0; j <= samples_per_agent; ++j) {
      const double m = hi * j / samples_per_agent;
      write_csv_row(os, {std::to_string(i), format_number(m),
                         std::to_string(curve.piece_index(m)),
                         format_number(curve(m))});
    }
  }
}

}  // namespace incmech
