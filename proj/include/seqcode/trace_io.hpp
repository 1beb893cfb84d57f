#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "seqcode/experiment.hpp"
#include "seqcode/solver.hpp"

namespace seqcode {

inline constexpr const char* kTraceHeader = "run_id,algorithm,iteration,phase,iter_time,cum_time,objective,suboptimality";

// 17 significant digits; round-trips every double.
std::string format_double(double v);

void write_trace_header(std::ostream& out);
void write_trace_rows(std::ostream& out, int run_id, const RunTrace& trace);

struct TraceRow {
  int run_id = 0;
  std::string algorithm;
  IterationRecord record;
};

std::vector<TraceRow> read_trace_csv(std::istream& in);

std::string summary_header(const std::vector<double>& thresholds);
void write_summary_rows(std::ostream& out, const std::vector<RunSummary>& runs);
// Threshold columns are recovered from the header when `thresholds` is set.
std::vector<RunSummary> read_summary_csv(std::istream& in, std::vector<double>* thresholds = nullptr);

// Writes through a sibling temporary file and renames it into place.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace seqcode
