#include "whitemetric/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "whitemetric/errors.hpp"

namespace whitemetric {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::ifstream open_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0, 0);
  return in;
}

Matrix numeric_block(const CsvTable& t, const std::vector<Index>& cols) {
  Matrix m(static_cast<Index>(t.rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto col = static_cast<std::size_t>(cols[c]);
      m(static_cast<Index>(r), static_cast<Index>(c)) =
          parse_cell(t.rows[r][col], t.lines[r], col + 1);
    }
  }
  return m;
}

}  // namespace

Index CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<Index>(it - header.begin());
}

CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    std::vector<std::string> cells = split_line(body);
    if (!have_header) {
      std::set<std::string> seen;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (cells[c].empty()) throw ParseError("empty column name", lineno, c + 1);
        if (!seen.insert(cells[c]).second) {
          throw ParseError("duplicate column '" + cells[c] + "'", lineno, c + 1);
        }
      }
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw ParseError("expected " + std::to_string(t.header.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       lineno, std::min(cells.size(), t.header.size()) + 1);
    }
    t.rows.push_back(std::move(cells));
    t.lines.push_back(lineno);
  }
  if (!have_header) throw ParseError("missing header row", lineno, 0);
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in = open_file(path);
  return parse_csv(in);
}

double parse_cell(const std::string& cell, std::size_t line, std::size_t column) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError("non-numeric cell '" + cell + "'", line, column);
  }
  return v;
}

EmpiricalMeasure measure_from_csv(const CsvTable& t) {
  if (t.rows.empty()) throw ParseError("no data rows", 0, 0);
  const Index wcol = t.column(kWeightColumn);
  const auto ncols = static_cast<Index>(t.header.size());
  if (wcol >= 0 && wcol != ncols - 1) {
    throw ParseError("__weight must be the final column", t.lines.empty() ? 0 : t.lines[0] - 1,
                     static_cast<std::size_t>(wcol) + 1);
  }
  std::vector<Index> cols;
  for (Index c = 0; c < ncols; ++c) {
    if (c != wcol) cols.push_back(c);
  }
  if (cols.empty()) throw ParseError("no coordinate columns", 0, 0);
  Matrix pts = numeric_block(t, cols);
  if (wcol < 0) return EmpiricalMeasure(std::move(pts));
  Vector w = numeric_block(t, {wcol}).col(0);
  for (Index i = 0; i < w.size(); ++i) {
    if (w(i) < 0.0) {
      throw ParseError("negative weight", t.lines[static_cast<std::size_t>(i)],
                       static_cast<std::size_t>(wcol) + 1);
    }
  }
  return EmpiricalMeasure::with_unnormalized_weights(std::move(pts), std::move(w));
}

EmpiricalMeasure read_measure(const std::string& path) {
  return measure_from_csv(read_csv_file(path));
}

GaussianMeasure gaussian_from_csv(const CsvTable& mean, const CsvTable& covariance) {
  if (mean.rows.size() != 1) throw ParseError("mean file must hold exactly one row", 0, 0);
  const auto d = static_cast<Index>(mean.header.size());
  if (covariance.header.size() != mean.header.size() ||
      covariance.rows.size() != mean.header.size()) {
    throw DimensionMismatch("covariance file must be " + std::to_string(d) + "x" +
                            std::to_string(d));
  }
  std::vector<Index> cols(static_cast<std::size_t>(d));
  for (Index c = 0; c < d; ++c) cols[static_cast<std::size_t>(c)] = c;
  const Vector m = numeric_block(mean, cols).row(0).transpose();
  const Matrix s = numeric_block(covariance, cols);
  return GaussianMeasure(m, s);
}

GaussianMeasure read_gaussian(const std::string& mean_path, const std::string& covariance_path) {
  return gaussian_from_csv(read_csv_file(mean_path), read_csv_file(covariance_path));
}

RegressionDataset dataset_from_csv(const CsvTable& t) {
  auto need = [&](const std::string& name) {
    const Index c = t.column(name);
    if (c < 0) throw ParseError("missing column '" + name + "'", 0, 0);
    return c;
  };
  std::vector<Index> score_cols;
  for (const std::string& n : RegressionDataset::score_columns()) score_cols.push_back(need(n));
  std::vector<Index> resp_cols;
  for (const std::string& n : RegressionDataset::response_columns()) resp_cols.push_back(need(n));
  const auto sector_col = static_cast<std::size_t>(need("sector"));
  if (t.rows.empty()) throw ParseError("no data rows", 0, 0);

  RegressionDataset d;
  d.scores = numeric_block(t, score_cols);
  d.responses = numeric_block(t, resp_cols);
  std::set<std::string> labels;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r][sector_col].empty()) {
      throw ParseError("empty sector label", t.lines[r], sector_col + 1);
    }
    labels.insert(t.rows[r][sector_col]);
  }
  d.sector_names.assign(labels.begin(), labels.end());
  std::map<std::string, Index> code;
  for (std::size_t k = 0; k < d.sector_names.size(); ++k) {
    code[d.sector_names[k]] = static_cast<Index>(k);
  }
  for (const auto& row : t.rows) d.sector.push_back(code.at(row[sector_col]));
  d.validate();
  return d;
}

RegressionDataset read_dataset(const std::string& path) {
  return dataset_from_csv(read_csv_file(path));
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_measure_csv(std::ostream& out, const EmpiricalMeasure& m,
                       const std::vector<std::string>& names,
                       const std::vector<std::string>& comment) {
  if (static_cast<Index>(names.size()) != m.dim()) {
    throw DimensionMismatch("one column name per coordinate");
  }
  for (const std::string& c : comment) out << "# " << c << '\n';
  const bool weighted = !m.is_uniform();
  for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k];
  if (weighted) out << ',' << kWeightColumn;
  out << '\n';
  for (Index i = 0; i < m.size(); ++i) {
    for (Index k = 0; k < m.dim(); ++k) out << (k ? "," : "") << format_number(m.points()(i, k));
    if (weighted) out << ',' << format_number(m.weights()(i));
    out << '\n';
  }
}

}  // namespace whitemetric
