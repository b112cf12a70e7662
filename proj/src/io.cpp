#include "dspp/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dspp {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string format12(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

MatrixXd parse_csv_matrix(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const std::string token = trim(field);
      double value = 0.0;
      const char* end = token.data() + token.size();
      const auto [ptr, ec] = std::from_chars(token.data(), end, value);
      if (token.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw InputError(source + ":" + std::to_string(line_no) + ": not a finite number: '" + token + "'");
      }
      row.push_back(value);
    }
    if (!line.empty() && line.back() == ',') {
      throw InputError(source + ":" + std::to_string(line_no) + ": trailing comma");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError(source + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(rows.front().size()) + " fields, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw InputError(source + ": no data");
  }
  MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

MatrixXd read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open " + path);
  }
  return parse_csv_matrix(in, path);
}

void write_csv_matrix(std::ostream& out, const MatrixXd& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      out << (j ? "," : "") << format12(m(i, j));
    }
    out << '\n';
  }
}

void write_csv_matrix(const std::string& path, const MatrixXd& m) {
  std::ofstream out(path);
  if (!out) {
    throw InputError("cannot write " + path);
  }
  write_csv_matrix(out, m);
}

double round12(double x) {
  if (!std::isfinite(x)) {
    return x;
  }
  return std::stod(format12(x));
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open " + path);
  }
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) {
    throw InputError("cannot write " + path);
  }
  out << j.dump(2) << '\n';
}

MatrixXd matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw InputError(what + ": expected a non-empty array of arrays");
  }
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.front().size());
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw InputError(what + ": row " + std::to_string(i) + " has the wrong length");
    }
    for (Index c = 0; c < cols; ++c) {
      const Json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) {
        throw InputError(what + ": entry (" + std::to_string(i) + ", " + std::to_string(c) + ") is not a number");
      }
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

Json matrix_to_json(const MatrixXd& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      row.push_back(round12(m(i, j)));
    }
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

VectorXd vector_from_json(const Json& j, Index size, const std::string& what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != size) {
    throw InputError(what + ": expected an array of " + std::to_string(size) + " numbers");
  }
  VectorXd v(size);
  for (Index i = 0; i < size; ++i) {
    const Json& e = j[static_cast<std::size_t>(i)];
    if (!e.is_number()) {
      throw InputError(what + ": entry " + std::to_string(i) + " is not a number");
    }
    v(i) = e.get<double>();
  }
  return v;
}

Index size_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() < 1) {
    throw InputError(std::string("energy: \"") + key + "\" must be a positive integer");
  }
  return j[key].get<Index>();
}

}  // namespace

EnergySpec energy_from_json(const Json& j) {
  if (!j.is_object()) {
    throw InputError("energy: expected a JSON object");
  }
  try {
    EnergySpec base = [&]() -> EnergySpec {
      if (j.contains("builder")) {
        const MetricData m{matrix_from_json(j.at("source"), "energy source"),
                           matrix_from_json(j.at("target"), "energy target")};
        const double sigma = j.value("sigma", 0.2);
        return metric_energy(m, parse_metric_energy(j.at("builder").get<std::string>()), sigma);
      }
      const Index k = size_field(j, "k");
      const Index n = size_field(j, "n");
      if (!j.contains("W")) {
        throw InputError("energy: missing \"W\" or \"builder\"");
      }
      const MatrixXd w = matrix_from_json(j.at("W"), "energy W");
      if (w.rows() != k * n || w.cols() != k * n) {
        throw DimensionError("energy: W must be " + std::to_string(k * n) + "x" + std::to_string(k * n));
      }
      if (!w.allFinite()) {
        throw InputError("energy: W has non-finite entries");
      }
      return {k, n, QuadraticOperator::dense(w)};
    }();
    VectorXd c = base.linear();
    if (j.contains("c")) {
      c = vector_from_json(j.at("c"), base.dim(), "energy c");
    }
    const double d = j.value("d", 0.0);
    return {base.rows(), base.cols(), base.quadratic(), std::move(c), d};
  } catch (const Json::exception& e) {
    throw InputError(std::string("energy: ") + e.what());
  }
}

EnergySpec read_energy_json(const std::string& path) { return energy_from_json(read_json_file(path)); }

Assignment assignment_from_json(const Json& j) {
  const Json& arr = j.is_object() && j.contains("assignment") ? j.at("assignment") : j;
  if (!arr.is_array()) {
    throw InputError("assignment: expected an array of target indices");
  }
  Assignment a;
  for (const Json& t : arr) {
    if (!t.is_number_integer() || t.get<long long>() < 0) {
      throw InputError("assignment: targets must be nonnegative integers");
    }
    a.targets.push_back(t.get<int>());
  }
  return a;
}

Json assignment_to_json(const Assignment& a) { return Json(a.targets); }

UserConstraints constraints_from_json(const Json& j) {
  const Json& arr = j.is_object() && j.contains("pairs") ? j.at("pairs") : j;
  if (!arr.is_array()) {
    throw InputError("pins: expected an array of [source, target] pairs");
  }
  UserConstraints u;
  for (const Json& pair : arr) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number_integer()) {
      throw InputError("pins: every entry must be a [source, target] pair of integers");
    }
    u.pairs.emplace_back(pair[0].get<int>(), pair[1].get<int>());
  }
  if (j.is_object() && j.contains("weight")) {
    if (!j["weight"].is_number()) {
      throw InputError("pins: weight must be a number");
    }
    u.weight = j["weight"].get<double>();
  }
  return u;
}

}  // namespace dspp
