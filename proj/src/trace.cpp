#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "gsc/bench_io.hpp"
#include "gsc/errors.hpp"

namespace gsc {

namespace {

constexpr const char* kCsvHeader = "iter,phase,f,grad_norm,lambda,beta,d_k,tau,cum_time_s";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no inf or nan; those become null and read back as nan.
std::string json_number(double v) { return std::isfinite(v) ? fmt17(v) : "null"; }

double json_double(const nlohmann::json& v) {
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return v.get<double>();
}

Phase phase_from(const std::string& s) {
  if (s == "full") return Phase::full;
  if (s == "damped") return Phase::damped;
  throw ParseError("trace: unknown phase '" + s + "'", 0);
}

}  // namespace

std::string format_trace(const std::vector<IterRecord>& trace, TraceFormat format, bool include_timing) {
  std::string out;
  if (format == TraceFormat::csv) {
    out += kCsvHeader;
    out += '\n';
    for (const auto& r : trace) {
      out += std::to_string(r.k);
      out += ',';
      out += to_string(r.phase);
      for (double v : {r.f, r.grad_norm, r.lambda, r.beta, r.d_k, r.tau, include_timing ? r.cum_time : 0.0}) {
        out += ',';
        out += fmt17(v);
      }
      out += '\n';
    }
    return out;
  }
  out += "[";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& r = trace[i];
    out += i == 0 ? "\n  " : ",\n  ";
    out += "{\"iter\": " + std::to_string(r.k);
    out += ", \"phase\": \"" + std::string(to_string(r.phase)) + "\"";
    out += ", \"f\": " + json_number(r.f);
    out += ", \"grad_norm\": " + json_number(r.grad_norm);
    out += ", \"lambda\": " + json_number(r.lambda);
    out += ", \"beta\": " + json_number(r.beta);
    out += ", \"d_k\": " + json_number(r.d_k);
    out += ", \"tau\": " + json_number(r.tau);
    out += ", \"cum_time_s\": " + json_number(include_timing ? r.cum_time : 0.0) + "}";
  }
  out += trace.empty() ? "]\n" : "\n]\n";
  return out;
}

void write_trace(const std::vector<IterRecord>& trace, const std::string& path, TraceFormat format,
                 bool include_timing) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open trace file '" + path + "' for writing");
  out << format_trace(trace, format, include_timing);
  out.flush();
  if (!out) throw IoError("write failure on trace file '" + path + "'");
}

std::vector<IterRecord> parse_trace_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("trace json: ") + e.what(), 0);
  }
  if (!doc.is_array()) throw ParseError("trace json: top level must be an array", 0);
  std::vector<IterRecord> out;
  out.reserve(doc.size());
  for (const auto& item : doc) {
    IterRecord r;
    try {
      r.k = item.at("iter").get<int>();
      r.phase = phase_from(item.at("phase").get<std::string>());
      r.f = json_double(item.at("f"));
      r.grad_norm = json_double(item.at("grad_norm"));
      r.lambda = json_double(item.at("lambda"));
      r.beta = json_double(item.at("beta"));
      r.d_k = json_double(item.at("d_k"));
      r.tau = json_double(item.at("tau"));
      r.cum_time = json_double(item.at("cum_time_s"));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("trace json: ") + e.what(), out.size() + 1);
    }
    out.push_back(r);
  }
  return out;
}

std::vector<IterRecord> read_trace_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace file '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_trace_json(ss.str());
}

std::vector<IterRecord> parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ParseError("trace csv: bad header", 1);
  std::vector<IterRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw ParseError("trace csv: expected 9 columns", lineno);
    IterRecord r;
    try {
      r.k = std::stoi(cells[0]);
      r.phase = phase_from(cells[1]);
      r.f = std::stod(cells[2]);
      r.grad_norm = std::stod(cells[3]);
      r.lambda = std::stod(cells[4]);
      r.beta = std::stod(cells[5]);
      r.d_k = std::stod(cells[6]);
      r.tau = std::stod(cells[7]);
      r.cum_time = std::stod(cells[8]);
    } catch (const std::logic_error&) {
      throw ParseError("trace csv: bad number", lineno);
    }
    out.push_back(r);
  }
  return out;
}

TraceFormat trace_format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".json") return TraceFormat::json;
  return TraceFormat::csv;
}

}  // namespace gsc
