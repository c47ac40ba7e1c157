#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "fracra/aaa.hpp"
#include "fracra/experiments.hpp"
#include "fracra/krylov.hpp"
#include "fracra/pencil.hpp"

namespace fracra {

constexpr int schema_version = 1;

/// Coordinate text format with a Matrix Market header, 1-based indices. Symmetric matrices store
/// the lower triangle.
void write_matrix_market(std::ostream& os, const SparseMatrix& m, bool symmetric = true);
void write_matrix_market(const std::string& path, const SparseMatrix& m, bool symmetric = true);
SparseMatrix read_matrix_market(std::istream& is);
SparseMatrix read_matrix_market(const std::string& path);

nlohmann::json to_json(const PoleAudit& audit);
nlohmann::json to_json(const PartialFraction<double>& pf);
PartialFraction<double> partial_fraction_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SolveReport& report);

/// RFC-4180 field quoting: fields containing a comma, quote, CR or LF are quoted, quotes doubled.
std::string csv_escape(const std::string& field);
void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);

/// Fixed column order shared by every sweep.
const std::vector<std::string>& sweep_csv_header();
std::vector<std::string> sweep_csv_fields(const SweepRecord& r);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records);

const std::vector<std::string>& solve_report_csv_header();
std::vector<std::string> solve_report_csv_fields(const SolveReport& r);

/// Shortest round-trip decimal form; NaN prints as an empty field.
std::string format_number(double v);

}  // namespace fracra
