#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "whitemetric/model_eval.hpp"
#include "whitemetric/stats_core.hpp"

namespace whitemetric {

/// Header plus string cells. Blank lines and lines starting with '#' are
/// skipped; every data row must have as many cells as the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based line number of each data row in the source.
  std::vector<std::size_t> lines;

  /// Index of a header column or -1.
  Index column(const std::string& name) const;
};

CsvTable parse_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Strict decimal parse of one cell; ParseError with the cell location.
double parse_cell(const std::string& cell, std::size_t line, std::size_t column);

inline constexpr const char* kWeightColumn = "__weight";

/// Point cloud from a numeric CSV. A final `__weight` column, when present,
/// holds nonnegative weights that are normalised to sum to one.
EmpiricalMeasure measure_from_csv(const CsvTable& t);
EmpiricalMeasure read_measure(const std::string& path);

/// Mean file: header and one row. Covariance file: header and d rows.
GaussianMeasure gaussian_from_csv(const CsvTable& mean, const CsvTable& covariance);
GaussianMeasure read_gaussian(const std::string& mean_path, const std::string& covariance_path);

/// Columns esg, e_sc, s_sc, g_sc, sector, tass, sfnd, tovr in any order;
/// other columns are ignored. Sector labels are sorted, the first being the
/// regression baseline.
RegressionDataset dataset_from_csv(const CsvTable& t);
RegressionDataset read_dataset(const std::string& path);

/// Shortest form that prints 17 significant digits.
std::string format_number(double v);

/// Points (and weights if not uniform) with the given column names.
/// `comment` lines are written first, each prefixed with '#'.
void write_measure_csv(std::ostream& out, const EmpiricalMeasure& m,
                       const std::vector<std::string>& names,
                       const std::vector<std::string>& comment = {});

}  // namespace whitemetric
