#include "seqcode/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string.hpp>

namespace seqcode {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

double parse_double(const std::string& text) {
  if (text == "nan") return std::nan("");
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size()) throw std::invalid_argument("malformed number in CSV: " + text);
  return v;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  boost::split(fields, line, boost::is_any_of(","));
  return fields;
}

const std::string kSummaryPrefix = "run_id,algorithm,iterations,final_time,final_suboptimality";

}  // namespace

void write_trace_header(std::ostream& out) { out << kTraceHeader << '\n'; }

void write_trace_rows(std::ostream& out, int run_id, const RunTrace& trace) {
  for (const auto& r : trace.records) {
    out << run_id << ',' << trace.algorithm << ',' << r.iteration << ',' << r.phase << ',' << format_double(r.iter_time)
        << ',' << format_double(r.cum_time) << ',' << format_double(r.objective) << ','
        << format_double(r.suboptimality) << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw std::invalid_argument("trace CSV has an unexpected header");
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 8) throw std::invalid_argument("trace CSV row has " + std::to_string(f.size()) + " fields");
    TraceRow row;
    row.run_id = std::stoi(f[0]);
    row.algorithm = f[1];
    row.record.iteration = std::stol(f[2]);
    row.record.phase = std::stoi(f[3]);
    row.record.iter_time = parse_double(f[4]);
    row.record.cum_time = parse_double(f[5]);
    row.record.objective = parse_double(f[6]);
    row.record.suboptimality = parse_double(f[7]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string summary_header(const std::vector<double>& thresholds) {
  std::string h = kSummaryPrefix;
  for (double t : thresholds) h += ",time_to_" + format_double(t);
  return h;
}

void write_summary_rows(std::ostream& out, const std::vector<RunSummary>& runs) {
  for (const auto& r : runs) {
    out << r.run_id << ',' << r.algorithm << ',' << r.iterations << ',' << format_double(r.final_time) << ','
        << format_double(r.final_suboptimality);
    for (const auto& t : r.time_to) out << ',' << (t ? format_double(*t) : std::string());
    out << '\n';
  }
}

std::vector<RunSummary> read_summary_csv(std::istream& in, std::vector<double>* thresholds) {
  std::string line;
  if (!std::getline(in, line) || !boost::starts_with(line, kSummaryPrefix)) {
    throw std::invalid_argument("summary CSV has an unexpected header");
  }
  const auto header = split_fields(line);
  const std::size_t fixed = 5;
  if (thresholds) {
    thresholds->clear();
    for (std::size_t c = fixed; c < header.size(); ++c) {
      if (!boost::starts_with(header[c], "time_to_")) throw std::invalid_argument("unexpected summary column " + header[c]);
      thresholds->push_back(parse_double(header[c].substr(8)));
    }
  }
  std::vector<RunSummary> runs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != header.size()) throw std::invalid_argument("summary CSV row width does not match its header");
    RunSummary r;
    r.run_id = std::stoi(f[0]);
    r.algorithm = f[1];
    r.iterations = std::stol(f[2]);
    r.final_time = parse_double(f[3]);
    r.final_suboptimality = parse_double(f[4]);
    for (std::size_t c = fixed; c < f.size(); ++c) {
      r.time_to.push_back(f[c].empty() ? std::nullopt : std::optional<double>(parse_double(f[c])));
    }
    runs.push_back(std::move(r));
  }
  return runs;
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("failed writing " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace seqcode
