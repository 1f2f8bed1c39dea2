#include "imtm/trace.hpp"

#include "imtm/error.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace imtm {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

double parse_double(const std::string& text, std::size_t row) {
  if (text.empty()) {
    throw TraceParseError(row, "empty numeric field");
  }
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE) {
    throw TraceParseError(row, "not a number: '" + text + "'");
  }
  return v;
}

std::size_t parse_index(const std::string& text, std::size_t row) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw TraceParseError(row, "not a non-negative integer: '" + text + "'");
  }
  return static_cast<std::size_t>(std::stoull(text));
}

}  // namespace

TraceParseError::TraceParseError(std::size_t row, const std::string& what)
    : Error("trace row " + std::to_string(row) + ": " + what), row_(row) {}

ChainTrace::ChainTrace(std::size_t chains, std::size_t dim) : chains_(chains), dim_(dim) {
  if (chains == 0 || dim == 0) {
    throw InvalidParameterError("ChainTrace needs at least one chain and one coordinate");
  }
}

void ChainTrace::append(const PopulationState& state) {
  if (state.chains() != chains_) {
    throw DimensionError("ChainTrace::append: chain count mismatch");
  }
  for (std::size_t i = 0; i < chains_; ++i) {
    append_row(i, state.positions[i], state.accepted[i] != 0, state.selected[i]);
  }
}

void ChainTrace::append_row(std::size_t chain, const Vector& x, bool accepted, std::size_t selected) {
  if (chain != rows() % chains_) {
    throw InvalidParameterError("ChainTrace::append_row: rows must be appended chain by chain");
  }
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw DimensionError("ChainTrace::append_row: dimension mismatch");
  }
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k])) {
      throw InvalidParameterError("ChainTrace::append_row: non-finite position");
    }
    values_.push_back(x[k]);
  }
  accepted_.push_back(accepted ? 1 : 0);
  selected_.push_back(selected);
}

Vector ChainTrace::position(std::size_t iteration, std::size_t chain) const {
  const std::size_t row = iteration * chains_ + chain;
  if (chain >= chains_ || row >= rows()) {
    throw InvalidParameterError("ChainTrace::position: index out of range");
  }
  return Eigen::Map<const Vector>(values_.data() + row * dim_, static_cast<Eigen::Index>(dim_));
}

double ChainTrace::value(std::size_t iteration, std::size_t chain, std::size_t coord) const {
  return values_.at((iteration * chains_ + chain) * dim_ + coord);
}

bool ChainTrace::accepted(std::size_t iteration, std::size_t chain) const {
  return accepted_.at(iteration * chains_ + chain) != 0;
}

std::size_t ChainTrace::selected(std::size_t iteration, std::size_t chain) const {
  return selected_.at(iteration * chains_ + chain);
}

std::vector<double> ChainTrace::series(std::size_t chain, std::size_t coord, std::size_t first) const {
  if (chain >= chains_ || coord >= dim_) {
    throw InvalidParameterError("ChainTrace::series: index out of range");
  }
  std::vector<double> out;
  for (std::size_t it = first; it < iterations(); ++it) {
    out.push_back(value(it, chain, coord));
  }
  return out;
}

std::vector<Vector> ChainTrace::pooled(std::size_t first) const {
  std::vector<Vector> out;
  for (std::size_t it = first; it < iterations(); ++it) {
    for (std::size_t i = 0; i < chains_; ++i) {
      out.push_back(position(it, i));
    }
  }
  return out;
}

std::vector<Vector> ChainTrace::chain_positions(std::size_t chain, std::size_t first) const {
  std::vector<Vector> out;
  for (std::size_t it = first; it < iterations(); ++it) {
    out.push_back(position(it, chain));
  }
  return out;
}

double ChainTrace::acceptance_rate(std::size_t chain) const {
  if (iterations() < 2) {
    return 0.0;
  }
  std::size_t hits = 0;
  for (std::size_t it = 1; it < iterations(); ++it) {
    hits += accepted(it, chain) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(iterations() - 1);
}

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void ChainTrace::write_csv(std::ostream& out) const {
  out << "iter,chain,accepted,J";
  for (std::size_t k = 0; k < dim_; ++k) {
    out << ",x_" << (k + 1);
  }
  out << '\n';
  for (std::size_t row = 0; row < rows(); ++row) {
    out << row / chains_ << ',' << row % chains_ << ',' << static_cast<int>(accepted_[row]) << ',' << selected_[row];
    for (std::size_t k = 0; k < dim_; ++k) {
      out << ',' << format_double(values_[row * dim_ + k]);
    }
    out << '\n';
  }
}

ChainTrace ChainTrace::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw TraceParseError(1, "missing header");
  }
  const auto header = split_csv(line);
  if (header.size() < 5 || header[0] != "iter" || header[1] != "chain" || header[2] != "accepted" || header[3] != "J") {
    throw TraceParseError(1, "header must be iter,chain,accepted,J,x_1..x_d");
  }
  const std::size_t dim = header.size() - 4;

  struct Row {
    std::size_t iter, chain;
    bool accepted;
    std::size_t selected;
    Vector x;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  std::size_t chains = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw TraceParseError(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                         std::to_string(fields.size()));
    }
    Row r{parse_index(fields[0], line_no), parse_index(fields[1], line_no), false, parse_index(fields[3], line_no),
          Vector(static_cast<Eigen::Index>(dim))};
    const std::size_t acc = parse_index(fields[2], line_no);
    if (acc > 1) {
      throw TraceParseError(line_no, "accepted must be 0 or 1");
    }
    r.accepted = acc == 1;
    for (std::size_t k = 0; k < dim; ++k) {
      r.x[static_cast<Eigen::Index>(k)] = parse_double(fields[4 + k], line_no);
      if (!std::isfinite(r.x[static_cast<Eigen::Index>(k)])) {
        throw TraceParseError(line_no, "non-finite position");
      }
    }
    if (r.iter == 0) {
      if (r.chain != chains) {
        throw TraceParseError(line_no, "rows out of order");
      }
      ++chains;
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) {
    throw TraceParseError(line_no, "trace has no rows");
  }
  ChainTrace trace(chains, dim);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Row& r = rows[k];
    if (r.iter != k / chains || r.chain != k % chains) {
      throw TraceParseError(k + 2, "rows out of order");
    }
    trace.append_row(r.chain, r.x, r.accepted, r.selected);
  }
  if (trace.rows() % chains != 0) {
    throw TraceParseError(line_no, "incomplete final iteration");
  }
  return trace;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot open '" + tmp.string() + "' for writing");
    }
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move '" + tmp.string() + "' to '" + path + "'");
  }
}

}  // namespace imtm
