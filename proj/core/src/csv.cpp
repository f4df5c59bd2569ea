#include "dpp/csv.hpp"

#include <charconv>
#include <cmath>

namespace dpp {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << fields[i];
  }
  out << '\n';
}

namespace {

void append_indexed(std::vector<std::string>& row, const char* prefix, std::size_t first, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) row.push_back(prefix + std::to_string(first + i));
}

void append_values(std::vector<std::string>& row, std::span<const double> values) {
  for (double v : values) row.push_back(format_number(v));
}

}  // namespace

void write_stochastic_trace(std::ostream& out, const Trace& trace) {
  const std::size_t k = trace.num_ineq();
  std::vector<std::string> header{"t", "event", "option"};
  append_indexed(header, "y", 0, k + 1);
  append_indexed(header, "Q", 1, k);
  append_indexed(header, "avg_y", 0, k + 1);
  write_csv_row(out, header);

  for (std::size_t slot = 0; slot < trace.length(); ++slot) {
    const auto t = static_cast<Slot>(slot + 1);
    std::vector<std::string> row{std::to_string(t)};
    const std::size_t event = trace.event(slot);
    if (event == Trace::kNone) {
      row.emplace_back();
    } else if (event < trace.event_labels.size()) {
      row.push_back(trace.event_labels[event]);
    } else {
      row.push_back(std::to_string(event));
    }
    const std::size_t option = trace.option(slot);
    row.push_back(option == Trace::kNone ? std::string() : std::to_string(option));
    append_values(row, trace.y(slot));
    append_values(row, trace.ineq_after(slot));
    for (std::size_t j = 0; j <= k; ++j) row.push_back(format_number(trace.time_average(t, j)));
    write_csv_row(out, row);
  }
}

void write_program_trace(std::ostream& out, const Trace& trace) {
  const std::size_t n = trace.dim(), k = trace.num_ineq(), m = trace.num_eq();
  std::vector<std::string> header{"t"};
  append_indexed(header, "x", 1, n);
  append_indexed(header, "y", 0, k + 1);
  append_indexed(header, "w", 1, m);
  append_indexed(header, "Q", 1, k);
  append_indexed(header, "Z", 1, m);
  append_indexed(header, "avg_y", 0, k + 1);
  append_indexed(header, "xbar", 1, n);
  write_csv_row(out, header);

  for (std::size_t slot = 0; slot < trace.length(); ++slot) {
    const auto t = static_cast<Slot>(slot + 1);
    std::vector<std::string> row{std::to_string(t)};
    append_values(row, trace.x(slot));
    append_values(row, trace.y(slot));
    append_values(row, trace.w(slot));
    append_values(row, trace.ineq_after(slot));
    append_values(row, trace.eq_after(slot));
    for (std::size_t j = 0; j <= k; ++j) row.push_back(format_number(trace.time_average(t, j)));
    append_values(row, trace.x_average(slot));
    write_csv_row(out, row);
  }
}

}  // namespace dpp
