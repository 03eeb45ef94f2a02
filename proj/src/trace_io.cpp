#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "bdca/solver.hpp"

namespace bdca {

void write_trace_csv(const Trace& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  out << std::setprecision(17);
  for (const TraceRecord& r : trace) {
    out << r.k << ',' << r.phi_x << ',' << r.phi_y << ',' << r.norm_d << ',' << r.lambda << ','
        << r.backtracks << ',' << r.inner_iters << ',' << r.elapsed_ms << '\n';
  }
}

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
  write_trace_csv(trace, out);
  if (!out) throw std::runtime_error("failed writing trace file: " + path);
}

Trace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw std::runtime_error("trace CSV line 1: unexpected header '" + line + "'");

  Trace trace;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8)
      throw std::runtime_error("trace CSV line " + std::to_string(lineno) + ": expected 8 fields, got " +
                               std::to_string(cells.size()));
    try {
      TraceRecord r;
      r.k = std::stoi(cells[0]);
      r.phi_x = std::stod(cells[1]);
      r.phi_y = std::stod(cells[2]);
      r.norm_d = std::stod(cells[3]);
      r.lambda = std::stod(cells[4]);
      r.backtracks = std::stoi(cells[5]);
      r.inner_iters = std::stoi(cells[6]);
      r.elapsed_ms = std::stod(cells[7]);
      trace.push_back(r);
    } catch (const std::logic_error&) {
      throw std::runtime_error("trace CSV line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return trace;
}

Trace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  return read_trace_csv(in);
}

}  // namespace bdca
