#include "sigma/trace_io.hpp"

#include <cstdio>
#include <fstream>

namespace sigma {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRecord> trace) {
  out << kTraceHeader << '\n';
  char elapsed[32];
  for (const TraceRecord& r : trace) {
    std::snprintf(elapsed, sizeof elapsed, "%.6f", r.elapsed_s);
    out << r.iter << ',' << elapsed << ',' << format_real(r.f) << ','
        << format_real(r.grad_norm) << ',' << format_real(r.lambda_hat) << ','
        << (r.lambda ? format_real(*r.lambda) : std::string()) << ','
        << format_real(r.step) << ',' << to_string(r.direction) << ',' << r.backtracks
        << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRecord> trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  write_trace_csv(out, trace);
}

}  // namespace sigma
