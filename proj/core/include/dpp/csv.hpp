#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "dpp/trace.hpp"

namespace dpp {

/// Locale-independent general format at 17 significant digits; -0 prints as 0.
std::string format_number(double value);

/// Writes one comma-separated line. Fields are written verbatim.
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Row t (1-based) describes the t-th completed slot: the decision taken at
// slot t-1, queues Q(t) after the update and averages over the first t slots.

/// `t, event, option, y0, y1..yK, Q1..QK, avg_y0, avg_y1..avg_yK`
void write_stochastic_trace(std::ostream& out, const Trace& trace);

/// `t, x1..xN, y0..yK, w1..wM, Q1..QK, Z1..ZM, avg_y0..avg_yK, xbar1..xbarN`
void write_program_trace(std::ostream& out, const Trace& trace);

}  // namespace dpp
