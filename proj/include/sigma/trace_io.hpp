#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>

#include "sigma/solver.hpp"

namespace sigma {

inline constexpr const char* kTraceHeader =
    "iter,elapsed_s,f,grad_norm,lambda_hat,lambda,step,direction,backtracks";

/// One CSV row per record; reals use %.17g so identical runs give identical
/// bytes apart from elapsed_s. An absent lambda is an empty field.
void write_trace_csv(std::ostream& out, std::span<const TraceRecord> trace);
void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRecord> trace);

std::string format_real(double v);

}  // namespace sigma
