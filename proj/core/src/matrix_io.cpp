#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "superrad/coupling.hpp"
#include "superrad/errors.hpp"

namespace superrad {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end)
    throw ParseError("line " + std::to_string(line) + ": cannot parse '" + std::string(field) +
                     "' as a number");
  return value;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows, const char* what) {
  if (!rows.is_array()) throw ParseError(std::string(what) + " must be an array of rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw ParseError(std::string(what) + ": non-square matrix");
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number()) throw ParseError(std::string(what) + ": non-numeric entry");
      m(i, j) = v.get<double>();
    }
  }
  return m;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

ImportedMatrices read_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("gamma")) throw ParseError("JSON matrix needs a 'gamma' field");
  ImportedMatrices out;
  out.decay = DecayMatrix(matrix_from_json(doc["gamma"], "gamma"));
  if (doc.contains("n")) {
    if (!doc["n"].is_number_integer() || doc["n"].get<std::size_t>() != out.decay.size())
      throw ParseError("'n' does not match the gamma matrix dimension");
  }
  if (doc.contains("delta") && !doc["delta"].is_null()) {
    auto delta = matrix_from_json(doc["delta"], "delta");
    if (static_cast<std::size_t>(delta.rows()) != out.decay.size())
      throw ParseError("delta and gamma dimensions differ");
    try {
      out.coupling = CouplingMatrix(std::move(delta));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what());
    }
  }
  if (doc.contains("units")) {
    const auto units = doc["units"].get<std::string>();
    if (units == "gamma0")
      out.units = RateUnits::Gamma0;
    else if (units == "per_second")
      out.units = RateUnits::PerSecond;
    else
      throw ParseError("unknown units '" + units + "'");
  }
  return out;
}

}  // namespace

Eigen::MatrixXd parse_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      row.push_back(parse_double(body.substr(start, comma - start), line_no));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty matrix file");
  const auto n = rows.size();
  for (const auto& r : rows)
    if (r.size() != n)
      throw ParseError("non-square matrix: " + std::to_string(n) + " rows but a row has " +
                       std::to_string(r.size()) + " columns");
  const auto k = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

ImportedMatrices import_decay_matrix_csv(std::istream& in) {
  ImportedMatrices out;
  out.decay = DecayMatrix(parse_matrix_csv(in));
  require_physical(out.decay);
  return out;
}

ImportedMatrices import_decay_matrix_json(std::istream& in) {
  auto out = read_json(in);
  require_physical(out.decay);
  return out;
}

ImportedMatrices read_decay_matrix(const std::filesystem::path& path,
                                   const std::optional<std::filesystem::path>& coupling_csv) {
  auto in = open_or_throw(path);
  ImportedMatrices out;
  if (path.extension() == ".json") {
    out = read_json(in);
  } else {
    out.decay = DecayMatrix(parse_matrix_csv(in));
  }
  if (coupling_csv) {
    auto cin = open_or_throw(*coupling_csv);
    auto delta = parse_matrix_csv(cin);
    if (static_cast<std::size_t>(delta.rows()) != out.decay.size())
      throw ParseError("coupling matrix shape differs from decay matrix");
    try {
      out.coupling = CouplingMatrix(std::move(delta));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what());
    }
  }
  return out;
}

ImportedMatrices import_decay_matrix(const std::filesystem::path& path,
                                     const std::optional<std::filesystem::path>& coupling_csv) {
  auto out = read_decay_matrix(path, coupling_csv);
  require_physical(out.decay);
  return out;
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace superrad
