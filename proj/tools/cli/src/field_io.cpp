#include "hmrf_cli/field_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "hmrf/errors.hpp"

namespace hmrf::cli {
namespace {

constexpr long long kMaxFileSites = 1LL << 28;

struct LineReader {
  std::istream& in;
  int number = 0;

  // Next non-blank line; false at end of input.
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++number;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  }
};

LatticeDims read_header(LineReader& reader, const std::string& tag) {
  std::string line;
  if (!reader.next(line)) throw ParseError("missing header", reader.number + 1);
  std::istringstream ss(line);
  std::string word;
  LatticeDims dims;
  if (!(ss >> word) || word != tag) throw ParseError("expected header '" + tag + " <rows> <cols> <frames>'", reader.number);
  if (!(ss >> dims.rows >> dims.cols >> dims.frames)) throw ParseError("header needs rows, cols and frames", reader.number);
  if (ss >> word) throw ParseError("trailing text after header", reader.number);
  if (dims.rows < 1 || dims.cols < 1 || dims.frames < 1) throw ParseError("dimensions must be positive", reader.number);
  if (static_cast<long long>(dims.rows) * dims.cols * dims.frames > kMaxFileSites) {
    throw ParseError("lattice too large", reader.number);
  }
  return dims;
}

template <class T, class Convert>
std::vector<T> read_rows(LineReader& reader, const LatticeDims& dims, Convert convert) {
  std::vector<T> values;
  values.reserve(static_cast<std::size_t>(dims.site_count()));
  std::string line;
  const int rows = dims.rows * dims.frames;
  for (int r = 0; r < rows; ++r) {
    if (!reader.next(line)) throw ParseError("expected " + std::to_string(rows) + " rows, found " + std::to_string(r), reader.number + 1);
    std::istringstream ss(line);
    std::string token;
    int count = 0;
    while (ss >> token) {
      values.push_back(convert(token, reader.number));
      ++count;
    }
    if (count != dims.cols) {
      throw ParseError("row has " + std::to_string(count) + " values, expected " + std::to_string(dims.cols), reader.number);
    }
  }
  if (reader.next(line)) throw ParseError("unexpected content after the last row", reader.number);
  return values;
}

Spin to_spin(const std::string& token, int line) {
  if (token == "+1" || token == "1") return 1;
  if (token == "-1") return -1;
  throw ParseError("invalid spin '" + token + "'", line);
}

double to_real(const std::string& token, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ParseError("invalid number '" + token + "'", line);
  }
  if (used != token.size() || !std::isfinite(v)) throw ParseError("invalid number '" + token + "'", line);
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

}  // namespace

SpinField read_spin_field(std::istream& in) {
  LineReader reader{in};
  const LatticeDims dims = read_header(reader, "mrf");
  return SpinField(dims, read_rows<Spin>(reader, dims, to_spin));
}

ObservedField read_observed_field(std::istream& in) {
  LineReader reader{in};
  const LatticeDims dims = read_header(reader, "obs");
  return ObservedField(dims, read_rows<double>(reader, dims, to_real));
}

void write_spin_field(std::ostream& out, const SpinField& z) {
  const LatticeDims& d = z.dims();
  out << "mrf " << d.rows << ' ' << d.cols << ' ' << d.frames << '\n';
  std::string line;
  for (int r = 0; r < d.rows * d.frames; ++r) {
    line.clear();
    for (int c = 0; c < d.cols; ++c) {
      if (c > 0) line += ' ';
      line += z[r * d.cols + c] > 0 ? "+1" : "-1";
    }
    out << line << '\n';
  }
}

void write_observed_field(std::ostream& out, const ObservedField& y) {
  const LatticeDims& d = y.dims();
  out << "obs " << d.rows << ' ' << d.cols << ' ' << d.frames << '\n';
  char buf[40];
  for (int r = 0; r < d.rows * d.frames; ++r) {
    for (int c = 0; c < d.cols; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", y[r * d.cols + c]);
      if (c > 0) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

SpinField read_spin_field(const std::string& path) {
  auto in = open_input(path);
  return read_spin_field(in);
}

ObservedField read_observed_field(const std::string& path) {
  auto in = open_input(path);
  return read_observed_field(in);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void write_spin_field(const std::string& path, const SpinField& z) {
  auto out = open_output(path);
  write_spin_field(out, z);
}

void write_observed_field(const std::string& path, const ObservedField& y) {
  auto out = open_output(path);
  write_observed_field(out, y);
}

}  // namespace hmrf::cli
