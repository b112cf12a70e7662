#pragma once

#include "dspp/core.hpp"
#include "dspp/energies.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace dspp {

using Json = nlohmann::json;

/// Headerless CSV of reals, one matrix row per line. Blank lines are
/// skipped. Throws InputError naming `source` on malformed or ragged input.
MatrixXd parse_csv_matrix(std::istream& in, const std::string& source = "<stream>");
MatrixXd read_csv_matrix(const std::string& path);

void write_csv_matrix(std::ostream& out, const MatrixXd& m);
void write_csv_matrix(const std::string& path, const MatrixXd& m);

/// x rounded to 12 significant digits, so that JSON output stays short.
double round12(double x);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

/// Matrix from a JSON array of equally long arrays of numbers.
MatrixXd matrix_from_json(const Json& j, const std::string& what);
Json matrix_to_json(const MatrixXd& m);

/// Energy description:
///   {"k": k, "n": n, "W": [[...], ...] (kn x kn, row-major), "c": [...], "d": d}
/// or a builder on distance matrices:
///   {"builder": "gw" | "loggw" | "gauss", "source": [[...]], "target": [[...]], "sigma": s}
/// "c" and "d" are optional in both forms.
EnergySpec energy_from_json(const Json& j);
EnergySpec read_energy_json(const std::string& path);

/// {"assignment": [t_0, t_1, ...]} with 0-based targets, or a bare array.
Assignment assignment_from_json(const Json& j);
Json assignment_to_json(const Assignment& a);

/// {"pairs": [[s, t], ...], "weight": w} or a bare array of pairs.
UserConstraints constraints_from_json(const Json& j);

}  // namespace dspp
