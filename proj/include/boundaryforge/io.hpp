#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "boundaryforge/cloud.hpp"

namespace bforge {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Labeled point-cloud record backing the PCB1 text format.
// Optional channels: per-point part label (L), ground-truth boundary flag (B)
// and predicted boundary probability (P).
struct CloudRecord {
  PointCloud cloud;
  std::vector<int> labels;        // empty unless L
  std::vector<uint8_t> boundary;  // empty unless B
  std::vector<double> prob;       // empty unless P

  bool has_labels() const { return !labels.empty(); }
  bool has_boundary() const { return !boundary.empty(); }
  bool has_prob() const { return !prob.empty(); }
};

namespace detail {

inline std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline double parse_real(const std::string &tok, const std::string &file, int line) {
  size_t pos = 0;
  double v;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception &) {
    throw ParseError(file + ":" + std::to_string(line) + ": bad number '" + tok + "'");
  }
  if (pos != tok.size())
    throw ParseError(file + ":" + std::to_string(line) + ": trailing junk in '" + tok + "'");
  if (!std::isfinite(v))
    throw ParseError(file + ":" + std::to_string(line) + ": nonfinite value '" + tok + "'");
  return v;
}

inline long parse_int(const std::string &tok, const std::string &file, int line) {
  size_t pos = 0;
  long v;
  try {
    v = std::stol(tok, &pos);
  } catch (const std::exception &) {
    throw ParseError(file + ":" + std::to_string(line) + ": bad integer '" + tok + "'");
  }
  if (pos != tok.size())
    throw ParseError(file + ":" + std::to_string(line) + ": trailing junk in '" + tok + "'");
  return v;
}

inline std::vector<std::string> split_ws(const std::string &s) {
  std::istringstream iss(s);
  std::vector<std::string> out;
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

inline std::string read_line(std::istream &in, const std::string &file, int &line) {
  std::string s;
  if (!std::getline(in, s)) throw ParseError(file + ": unexpected end of file at line " + std::to_string(line + 1));
  ++line;
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PCB1

inline void write_pcb1(std::ostream &out, const CloudRecord &rec) {
  std::string flags;
  if (rec.has_labels()) flags += 'L';
  if (rec.has_boundary()) flags += 'B';
  if (rec.has_prob()) flags += 'P';
  if (flags.empty()) flags = "-";
  out << "PCB1 " << rec.cloud.size() << ' ' << flags << '\n';
  for (int i = 0; i < rec.cloud.size(); ++i) {
    const Vec3 &p = rec.cloud.positions[i];
    const Vec3 &n = rec.cloud.normals[i];
    out << detail::fmt9(p.x) << ' ' << detail::fmt9(p.y) << ' ' << detail::fmt9(p.z) << ' '
        << detail::fmt9(n.x) << ' ' << detail::fmt9(n.y) << ' ' << detail::fmt9(n.z);
    if (rec.has_labels()) out << ' ' << rec.labels[i];
    if (rec.has_boundary()) out << ' ' << int(rec.boundary[i]);
    if (rec.has_prob()) out << ' ' << detail::fmt9(rec.prob[i]);
    out << '\n';
  }
}

inline CloudRecord read_pcb1(std::istream &in, const std::string &file = "<pcb1>") {
  int line = 0;
  auto header = detail::split_ws(detail::read_line(in, file, line));
  if (header.size() != 3 || header[0] != "PCB1")
    throw ParseError(file + ":1: expected 'PCB1 <N> <flags>' header");
  long n = detail::parse_int(header[1], file, 1);
  if (n < 1) throw ParseError(file + ":1: N must be >= 1");
  std::string flags = header[2];
  if (flags == "-") flags.clear();
  bool has_l = false, has_b = false, has_p = false;
  for (char c : flags) {
    if (c == 'L') has_l = true;
    else if (c == 'B') has_b = true;
    else if (c == 'P') has_p = true;
    else throw ParseError(file + ":1: unknown flag '" + std::string(1, c) + "'");
  }
  CloudRecord rec;
  rec.cloud.positions.reserve(n);
  rec.cloud.normals.reserve(n);
  size_t want = 6 + has_l + has_b + has_p;
  for (long i = 0; i < n; ++i) {
    auto toks = detail::split_ws(detail::read_line(in, file, line));
    if (toks.size() != want)
      throw ParseError(file + ":" + std::to_string(line) + ": expected " + std::to_string(want) +
                       " fields, got " + std::to_string(toks.size()));
    size_t t = 0;
    Vec3 p{detail::parse_real(toks[0], file, line), detail::parse_real(toks[1], file, line),
           detail::parse_real(toks[2], file, line)};
    Vec3 nm{detail::parse_real(toks[3], file, line), detail::parse_real(toks[4], file, line),
            detail::parse_real(toks[5], file, line)};
    t = 6;
    rec.cloud.positions.push_back(p);
    rec.cloud.normals.push_back(nm);
    if (has_l) rec.labels.push_back(static_cast<int>(detail::parse_int(toks[t++], file, line)));
    if (has_b) {
      long b = detail::parse_int(toks[t++], file, line);
      if (b != 0 && b != 1)
        throw ParseError(file + ":" + std::to_string(line) + ": boundary flag must be 0 or 1");
      rec.boundary.push_back(static_cast<uint8_t>(b));
    }
    if (has_p) {
      double b = detail::parse_real(toks[t++], file, line);
      if (b < 0 || b > 1)
        throw ParseError(file + ":" + std::to_string(line) + ": probability out of [0,1]");
      rec.prob.push_back(b);
    }
  }
  return rec;
}

inline void save_pcb1(const std::string &path, const CloudRecord &rec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_pcb1(out, rec);
}

inline CloudRecord load_pcb1(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_pcb1(in, path);
}

// ---------------------------------------------------------------------------
// CRV1: dense ground-truth curve samples.

inline void write_crv1(std::ostream &out, const std::vector<Vec3> &samples) {
  out << "CRV1 " << samples.size() << '\n';
  for (const auto &p : samples)
    out << detail::fmt9(p.x) << ' ' << detail::fmt9(p.y) << ' ' << detail::fmt9(p.z) << '\n';
}

inline std::vector<Vec3> read_crv1(std::istream &in, const std::string &file = "<crv1>") {
  int line = 0;
  auto header = detail::split_ws(detail::read_line(in, file, line));
  if (header.size() != 2 || header[0] != "CRV1")
    throw ParseError(file + ":1: expected 'CRV1 <M>' header");
  long m = detail::parse_int(header[1], file, 1);
  std::vector<Vec3> out;
  out.reserve(m);
  for (long i = 0; i < m; ++i) {
    auto toks = detail::split_ws(detail::read_line(in, file, line));
    if (toks.size() != 3)
      throw ParseError(file + ":" + std::to_string(line) + ": expected 3 fields");
    out.push_back({detail::parse_real(toks[0], file, line), detail::parse_real(toks[1], file, line),
                   detail::parse_real(toks[2], file, line)});
  }
  return out;
}

inline void save_crv1(const std::string &path, const std::vector<Vec3> &samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_crv1(out, samples);
}

inline std::vector<Vec3> load_crv1(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_crv1(in, path);
}

// ---------------------------------------------------------------------------
// M1: labeled triangle soup.

struct LabeledTriangle {
  Vec3 a, b, c;
  int label = 0;
};

inline void write_m1(std::ostream &out, const std::vector<LabeledTriangle> &tris) {
  out << "M1 " << tris.size() << '\n';
  for (const auto &t : tris) {
    out << detail::fmt9(t.a.x) << ' ' << detail::fmt9(t.a.y) << ' ' << detail::fmt9(t.a.z) << ' '
        << detail::fmt9(t.b.x) << ' ' << detail::fmt9(t.b.y) << ' ' << detail::fmt9(t.b.z) << ' '
        << detail::fmt9(t.c.x) << ' ' << detail::fmt9(t.c.y) << ' ' << detail::fmt9(t.c.z) << ' '
        << t.label << '\n';
  }
}

inline std::vector<LabeledTriangle> read_m1(std::istream &in, const std::string &file = "<m1>") {
  int line = 0;
  auto header = detail::split_ws(detail::read_line(in, file, line));
  if (header.size() != 2 || header[0] != "M1")
    throw ParseError(file + ":1: expected 'M1 <T>' header");
  long t = detail::parse_int(header[1], file, 1);
  std::vector<LabeledTriangle> tris;
  tris.reserve(t);
  for (long i = 0; i < t; ++i) {
    auto toks = detail::split_ws(detail::read_line(in, file, line));
    if (toks.size() != 10)
      throw ParseError(file + ":" + std::to_string(line) + ": expected 10 fields");
    LabeledTriangle tri;
    tri.a = {detail::parse_real(toks[0], file, line), detail::parse_real(toks[1], file, line),
             detail::parse_real(toks[2], file, line)};
    tri.b = {detail::parse_real(toks[3], file, line), detail::parse_real(toks[4], file, line),
             detail::parse_real(toks[5], file, line)};
    tri.c = {detail::parse_real(toks[6], file, line), detail::parse_real(toks[7], file, line),
             detail::parse_real(toks[8], file, line)};
    tri.label = static_cast<int>(detail::parse_int(toks[9], file, line));
    tris.push_back(tri);
  }
  return tris;
}

inline std::vector<LabeledTriangle> load_m1(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_m1(in, path);
}

// ---------------------------------------------------------------------------
// UNR1: per-point label probability rows (external unary input).

inline void write_unr1(std::ostream &out, const std::vector<std::vector<double>> &probs) {
  size_t l = probs.empty() ? 0 : probs[0].size();
  out << "UNR1 " << probs.size() << ' ' << l << '\n';
  for (const auto &row : probs) {
    for (size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << detail::fmt9(row[j]);
    out << '\n';
  }
}

inline std::vector<std::vector<double>> read_unr1(std::istream &in,
                                                  const std::string &file = "<unr1>") {
  int line = 0;
  auto header = detail::split_ws(detail::read_line(in, file, line));
  if (header.size() != 3 || header[0] != "UNR1")
    throw ParseError(file + ":1: expected 'UNR1 <N> <L>' header");
  long n = detail::parse_int(header[1], file, 1);
  long l = detail::parse_int(header[2], file, 1);
  if (l < 1) throw ParseError(file + ":1: L must be >= 1");
  std::vector<std::vector<double>> probs;
  probs.reserve(n);
  for (long i = 0; i < n; ++i) {
    auto toks = detail::split_ws(detail::read_line(in, file, line));
    if (static_cast<long>(toks.size()) != l)
      throw ParseError(file + ":" + std::to_string(line) + ": expected " + std::to_string(l) +
                       " probabilities");
    std::vector<double> row;
    row.reserve(l);
    for (const auto &tok : toks) row.push_back(detail::parse_real(tok, file, line));
    probs.push_back(std::move(row));
  }
  return probs;
}

inline void save_unr1(const std::string &path, const std::vector<std::vector<double>> &probs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_unr1(out, probs);
}

inline std::vector<std::vector<double>> load_unr1(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_unr1(in, path);
}

// ---------------------------------------------------------------------------
// LBL1: one label id per point (-1 allowed, used for boundary points).

inline void write_lbl1(std::ostream &out, const std::vector<int> &labels) {
  out << "LBL1 " << labels.size() << '\n';
  for (int v : labels) out << v << '\n';
}

inline std::vector<int> read_lbl1(std::istream &in, const std::string &file = "<lbl1>") {
  int line = 0;
  auto header = detail::split_ws(detail::read_line(in, file, line));
  if (header.size() != 2 || header[0] != "LBL1")
    throw ParseError(file + ":1: expected 'LBL1 <N>' header");
  long n = detail::parse_int(header[1], file, 1);
  std::vector<int> labels;
  labels.reserve(n);
  for (long i = 0; i < n; ++i) {
    auto toks = detail::split_ws(detail::read_line(in, file, line));
    if (toks.size() != 1) throw ParseError(file + ":" + std::to_string(line) + ": expected 1 field");
    labels.push_back(static_cast<int>(detail::parse_int(toks[0], file, line)));
  }
  return labels;
}

inline void save_lbl1(const std::string &path, const std::vector<int> &labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_lbl1(out, labels);
}

inline std::vector<int> load_lbl1(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_lbl1(in, path);
}

}  // namespace bforge
