#include "gsc/bench_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "gsc/errors.hpp"

namespace gsc {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failure on '" + path + "'");
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Whole-token strtod; false on trailing garbage or empty input.
bool parse_double(const std::string& tok, double& out) {
  if (tok.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(tok.c_str(), &end);
  return end == tok.c_str() + tok.size() && errno != ERANGE;
}

bool parse_index(const std::string& tok, long long& out) {
  if (tok.empty()) return false;
  for (char ch : tok) {
    if (ch < '0' || ch > '9') return false;
  }
  errno = 0;
  char* end = nullptr;
  out = std::strtoll(tok.c_str(), &end, 10);
  return end == tok.c_str() + tok.size() && errno != ERANGE;
}

}  // namespace

Dataset parse_libsvm(const std::string& text, bool normalize, const std::string& name, Index min_cols) {
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> labels;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  long long max_index = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream tokens(line);
    std::string tok;
    tokens >> tok;
    double label = 0.0;
    if (!parse_double(tok, label) || !std::isfinite(label)) {
      throw ParseError(name + ":" + std::to_string(lineno) + ": bad label '" + tok + "'", lineno);
    }
    const auto row = static_cast<Index>(labels.size());
    long long prev = 0;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      long long idx = 0;
      double val = 0.0;
      if (colon == std::string::npos || !parse_index(tok.substr(0, colon), idx) ||
          !parse_double(tok.substr(colon + 1), val) || !std::isfinite(val)) {
        throw ParseError(name + ":" + std::to_string(lineno) + ": malformed feature '" + tok + "'", lineno);
      }
      if (idx < 1) throw ParseError(name + ":" + std::to_string(lineno) + ": indices are 1-based", lineno);
      if (idx <= prev) {
        throw ParseError(name + ":" + std::to_string(lineno) + ": indices not ascending at '" + tok + "'", lineno);
      }
      prev = idx;
      max_index = std::max(max_index, idx);
      trip.emplace_back(row, static_cast<Index>(idx - 1), val);
    }
    labels.push_back(label);
  }

  Dataset out;
  const auto n = static_cast<Index>(labels.size());
  const Index p = std::max<Index>(static_cast<Index>(max_index), min_cols);
  out.a.resize(n, p);
  out.a.setFromTriplets(trip.begin(), trip.end());
  out.a.makeCompressed();
  out.labels = Eigen::Map<const Vec>(labels.data(), n);
  const std::set<double> distinct(labels.begin(), labels.end());
  if (distinct.size() == 2) {
    const double lo = *distinct.begin();
    for (Index i = 0; i < n; ++i) out.labels(i) = out.labels(i) == lo ? -1.0 : 1.0;
  }
  if (normalize) {
    for (Index i = 0; i < out.a.outerSize(); ++i) {
      double s = 0.0;
      for (SpMat::InnerIterator it(out.a, i); it; ++it) s += it.value() * it.value();
      if (s == 0.0) continue;
      const double inv = 1.0 / std::sqrt(s);
      for (SpMat::InnerIterator it(out.a, i); it; ++it) it.valueRef() *= inv;
    }
  }
  out.meta = {name, n, p, normalize};
  if (n == 0) out.warnings.push_back(name + ": no data rows");
  return out;
}

Dataset read_libsvm(const std::string& path, bool normalize, Index min_cols) {
  return parse_libsvm(read_file(path), normalize, path, min_cols);
}

std::string format_libsvm(const Dataset& data) {
  std::string out;
  for (Index i = 0; i < data.a.outerSize(); ++i) {
    out += fmt17(data.labels(i));
    for (SpMat::InnerIterator it(data.a, i); it; ++it) {
      out += ' ';
      out += std::to_string(it.col() + 1);
      out += ':';
      out += fmt17(it.value());
    }
    out += '\n';
  }
  return out;
}

void write_libsvm(const Dataset& data, const std::string& path) { write_file(path, format_libsvm(data)); }

double Rng::uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

double Rng::normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

Mat gen_portfolio(Index n, Index p, std::uint64_t seed) {
  if (n < 1 || p < 1) throw InvalidArgument("gen_portfolio: n and p must be >= 1");
  Rng rng(seed);
  Mat w(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) w(i, j) = std::max(1e-3, 1.0 + 0.1 * rng.normal());
  }
  return w;
}

Dataset gen_logistic(Index n, Index p, std::uint64_t seed) {
  if (n < 1 || p < 1) throw InvalidArgument("gen_logistic: n and p must be >= 1");
  Rng rng(seed);
  Mat a(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) a(i, j) = rng.normal();
    a.row(i) /= a.row(i).norm();
  }
  Vec w_star(p);
  for (Index j = 0; j < p; ++j) w_star(j) = rng.normal();
  Vec labels(n);
  const Vec margin = a * w_star;
  for (Index i = 0; i < n; ++i) {
    const double prob = 1.0 / (1.0 + std::exp(-2.0 * margin(i)));
    labels(i) = rng.uniform() < prob ? 1.0 : -1.0;
  }
  Dataset out;
  out.a = a.sparseView();
  out.a.makeCompressed();
  out.labels = labels;
  out.meta = {"synthetic-logistic(n=" + std::to_string(n) + ",p=" + std::to_string(p) + ",seed=" +
                  std::to_string(seed) + ")",
              n, p, true};
  return out;
}

namespace {

SpMat label_folded(const Dataset& data) {
  if (data.labels.size() != data.a.rows()) throw InvalidArgument("dataset: labels and rows disagree");
  SpMat a = data.a;
  for (Index i = 0; i < a.outerSize(); ++i) {
    for (SpMat::InnerIterator it(a, i); it; ++it) it.valueRef() *= data.labels(i);
  }
  return a;
}

}  // namespace

GlmModel logistic_model(const Dataset& data, double gamma) {
  if (data.a.rows() == 0) throw InvalidArgument("logistic_model: empty dataset");
  return GlmModel::uniform(DesignMatrix(label_folded(data)), LossAtom::logistic(), gamma);
}

DwdModel dwd_model(const Dataset& data, double q, double gamma1, double gamma2, double gamma3) {
  if (data.a.rows() == 0) throw InvalidArgument("dwd_model: empty dataset");
  DwdModel m;
  m.a = DesignMatrix(label_folded(data));
  m.y = data.labels;
  m.c = Vec::Constant(data.a.rows(), 1.0 / static_cast<double>(data.a.rows()));
  m.q = q;
  m.gamma1 = gamma1;
  m.gamma2 = gamma2;
  m.gamma3 = gamma3;
  return m;
}

double training_error(const SpMat& a, const Vec& labels, const Vec& w) {
  const Index n = a.rows();
  if (n == 0) return 0.0;
  if (labels.size() != n || w.size() != a.cols()) throw InvalidArgument("training_error: shape mismatch");
  const Vec m = a * w;
  double s = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double v = labels(i) * m(i);
    const double sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    s += 1.0 - sign;
  }
  return s / (2.0 * static_cast<double>(n));
}

}  // namespace gsc
