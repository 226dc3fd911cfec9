#include "agl/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace agl {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "na" || cell == "NaN" || cell == "nan" || cell == "null";
}

}  // namespace

CsvLoad parse_csv(const std::string& text, const std::string& response_column) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::parse_error, "CSV input is empty");
  const std::vector<std::string> header = split(line);

  std::ptrdiff_t response = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == response_column) response = static_cast<std::ptrdiff_t>(c);
  }
  if (response < 0) throw Error(ErrorCode::missing_column, "response column '" + response_column + "' not found");

  std::vector<std::vector<double>> rows;
  std::size_t row_number = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row_number;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::parse_error, "row " + std::to_string(row_number) + " has " + std::to_string(cells.size()) +
                                              " cells, expected " + std::to_string(header.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      if (is_missing(cell)) {
        throw Error(ErrorCode::missing_value,
                    "missing value at row " + std::to_string(row_number) + ", column " + header[c]);
      }
      const char* begin = cell.data();
      const char* end = cell.data() + cell.size();
      if (*begin == '+') ++begin;
      auto [ptr, ec] = std::from_chars(begin, end, values[c]);
      if (ec != std::errc() || ptr != end || !std::isfinite(values[c])) {
        throw Error(ErrorCode::parse_error, "non-numeric value '" + cell + "' at row " + std::to_string(row_number) +
                                                ", column " + header[c]);
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(ErrorCode::parse_error, "CSV input has no data rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  CsvLoad out;
  out.dataset.y.resize(n);
  std::vector<std::size_t> kept;
  Eigen::Index position = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (static_cast<std::ptrdiff_t>(c) == response) continue;
    ++position;
    bool constant = true;
    for (const auto& r : rows) constant = constant && r[c] == rows.front()[c];
    if (constant) {
      out.excluded_constant.push_back(header[c]);
      continue;
    }
    kept.push_back(c);
    out.columns.push_back(position);
    out.dataset.names.push_back(header[c]);
  }
  out.dataset.x.resize(n, static_cast<Eigen::Index>(kept.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    out.dataset.y(i) = r[static_cast<std::size_t>(response)];
    for (std::size_t k = 0; k < kept.size(); ++k) out.dataset.x(i, static_cast<Eigen::Index>(k)) = r[kept[k]];
  }
  return out;
}

CsvLoad load_csv(const std::string& path, const std::string& response_column) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), response_column);
}

void write_csv(const Dataset& data, const std::string& path, const std::string& response_name) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
  out << response_name;
  for (Eigen::Index j = 0; j < data.p(); ++j) out << ',' << data.name(j);
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << data.y(i);
    for (Eigen::Index j = 0; j < data.p(); ++j) out << ',' << data.x(i, j);
    out << '\n';
  }
}

}  // namespace agl
