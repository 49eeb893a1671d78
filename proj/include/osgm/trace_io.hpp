#pragma once

#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "osgm/dataio.hpp"
#include "osgm/error.hpp"
#include "osgm/solvers.hpp"

namespace osgm {

inline constexpr std::string_view kTraceHeader =
    "iter,f_gap,grad_norm,surrogate,oracle_accepted,grad_evals,time_ns";

namespace detail {

inline std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

inline double csv_parse_double(std::string_view s, std::size_t line) {
  if (s == "nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  if (!read_double(s, v)) {
    throw Error(ErrorCode::parse_error, "trace line " + std::to_string(line) + ": bad number '" +
                                            std::string(s) + "'");
  }
  return v;
}

inline long long csv_parse_int(std::string_view s, std::size_t line) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::parse_error, "trace line " + std::to_string(line) + ": bad integer '" +
                                            std::string(s) + "'");
  }
  return v;
}

}  // namespace detail

/// Trace CSV. Non-finite values are written as nan/inf; booleans as 0/1.
inline std::string trace_to_csv(const std::vector<TraceRecord>& trace) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const auto& r : trace) {
    out += std::to_string(r.iter);
    out += ',' + detail::csv_double(r.f_gap);
    out += ',' + detail::csv_double(r.grad_norm);
    out += ',' + detail::csv_double(r.surrogate);
    out += r.oracle_accepted ? ",1" : ",0";
    out += ',' + std::to_string(r.grad_evals);
    out += ',' + std::to_string(r.time_ns);
    out += '\n';
  }
  return out;
}

/// Inverse of trace_to_csv. f_value is not part of the schema and reads back as NaN.
inline std::vector<TraceRecord> trace_from_csv(std::string_view text) {
  std::vector<TraceRecord> trace;
  std::size_t start = 0;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kTraceHeader) {
        throw Error(ErrorCode::parse_error,
                    "trace line 1: expected header '" + std::string(kTraceHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    auto cells = detail::split(line, ',');
    if (cells.size() != 7) {
      throw Error(ErrorCode::parse_error, "trace line " + std::to_string(line_no) +
                                              ": expected 7 columns, got " +
                                              std::to_string(cells.size()));
    }
    TraceRecord r;
    r.iter = static_cast<long>(detail::csv_parse_int(cells[0], line_no));
    r.f_value = std::numeric_limits<double>::quiet_NaN();
    r.f_gap = detail::csv_parse_double(cells[1], line_no);
    r.grad_norm = detail::csv_parse_double(cells[2], line_no);
    r.surrogate = detail::csv_parse_double(cells[3], line_no);
    const auto acc = detail::csv_parse_int(cells[4], line_no);
    if (acc != 0 && acc != 1) {
      throw Error(ErrorCode::parse_error,
                  "trace line " + std::to_string(line_no) + ": oracle_accepted must be 0 or 1");
    }
    r.oracle_accepted = acc == 1;
    r.grad_evals = static_cast<long>(detail::csv_parse_int(cells[5], line_no));
    r.time_ns = detail::csv_parse_int(cells[6], line_no);
    trace.push_back(r);
  }
  if (!header_seen) throw Error(ErrorCode::parse_error, "trace: empty file");
  return trace;
}

inline std::vector<TraceRecord> load_trace(const std::string& path) {
  try {
    return trace_from_csv(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::parse_error) throw Error(ErrorCode::parse_error, path + ": " + e.what());
    throw;
  }
}

}  // namespace osgm
