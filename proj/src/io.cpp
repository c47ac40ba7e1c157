#include "fracra/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fracra/errors.hpp"

namespace fracra {

using nlohmann::json;

void write_matrix_market(std::ostream& os, const SparseMatrix& m, bool symmetric)
{
    std::vector<Eigen::Triplet<double>> entries;
    for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
            if (symmetric && it.row() < it.col()) continue;
            entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
    }
    os << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << "\n";
    os << m.rows() << " " << m.cols() << " " << entries.size() << "\n";
    for (const auto& e : entries) os << e.row() + 1 << " " << e.col() + 1 << " " << format_number(e.value()) << "\n";
}

void write_matrix_market(const std::string& path, const SparseMatrix& m, bool symmetric)
{
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open " + path + " for writing");
    write_matrix_market(os, m, symmetric);
}

SparseMatrix read_matrix_market(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("empty matrix file");
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate")
        throw ValidationError("not a coordinate Matrix Market file");
    if (field != "real" && field != "integer") throw ValidationError("unsupported Matrix Market field '" + field + "'");
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general") throw ValidationError("unsupported Matrix Market symmetry '" + symmetry + "'");
    do {
        if (!std::getline(is, line)) throw ValidationError("missing Matrix Market size line");
    } while (!line.empty() && line[0] == '%');
    long rows = 0, cols = 0, nnz = 0;
    std::istringstream size_line(line);
    if (!(size_line >> rows >> cols >> nnz) || rows <= 0 || cols <= 0 || nnz < 0)
        throw ValidationError("malformed Matrix Market size line");
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
    for (long k = 0; k < nnz; ++k) {
        long i = 0, j = 0;
        double v = 0.0;
        if (!(is >> i >> j >> v)) throw ValidationError("truncated Matrix Market entry list");
        if (i < 1 || i > rows || j < 1 || j > cols) throw ValidationError("Matrix Market index out of range");
        entries.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
        if (symmetric && i != j) entries.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
    }
    SparseMatrix m(rows, cols);
    m.setFromTriplets(entries.begin(), entries.end());
    m.makeCompressed();
    return m;
}

SparseMatrix read_matrix_market(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open " + path);
    return read_matrix_market(is);
}

json to_json(const PoleAudit& a)
{
    return json{{"real_negative", a.real_negative},
                {"real_zero", a.real_zero},
                {"real_positive", a.real_positive},
                {"complex", a.complex},
                {"near_coincident", a.near_coincident}};
}

json to_json(const PartialFraction<double>& pf)
{
    json poles = json::array();
    json residues = json::array();
    for (std::size_t i = 0; i < pf.poles.size(); ++i) {
        poles.push_back({pf.poles[i].real(), pf.poles[i].imag()});
        residues.push_back({pf.residues[i].real(), pf.residues[i].imag()});
    }
    return json{{"schema_version", schema_version},
                {"c0", pf.c0},
                {"degree", pf.degree()},
                {"poles", poles},
                {"residues", residues},
                {"tolerance", pf.tolerance},
                {"achieved_error", pf.achieved_error},
                {"audit", to_json(pf.audit)}};
}

PartialFraction<double> partial_fraction_from_json(const json& j)
{
    try {
        PartialFraction<double> pf;
        pf.c0 = j.at("c0").get<double>();
        const auto& poles = j.at("poles");
        const auto& residues = j.at("residues");
        if (!poles.is_array() || !residues.is_array() || poles.size() != residues.size())
            throw ValidationError("poles and residues must be arrays of equal length");
        for (std::size_t i = 0; i < poles.size(); ++i) {
            pf.poles.emplace_back(poles[i].at(0).get<double>(), poles[i].at(1).get<double>());
            pf.residues.emplace_back(residues[i].at(0).get<double>(), residues[i].at(1).get<double>());
        }
        pf.tolerance = j.value("tolerance", 0.0);
        pf.achieved_error = j.value("achieved_error", 0.0);
        pf.audit = audit_poles(pf.poles, 1e-10);
        return pf;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed partial fraction JSON: ") + e.what());
    }
}

json to_json(const SolveReport& r)
{
    return json{{"schema_version", schema_version},
                {"method", r.method},
                {"iterations", r.iterations},
                {"converged", r.converged},
                {"status", to_string(r.status)},
                {"tolerance", r.tolerance},
                {"stop", r.stop == StopMode::Absolute ? "absolute" : "relative"},
                {"preconditioned_residual_history", r.preconditioned_residual_history},
                {"wall_time", r.wall_time},
                {"inner_solve_total", r.inner_solve_total}};
}

std::string csv_escape(const std::string& field)
{
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << csv_escape(fields[i]);
    }
    os << "\r\n";
}

std::string format_number(double v)
{
    if (std::isnan(v)) return "";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string format_int(int v) { return v < 0 ? std::string() : std::to_string(v); }

}  // namespace

const std::vector<std::string>& sweep_csv_header()
{
    static const std::vector<std::string> header{
        "sweep",         "s",               "t",          "alpha",         "beta",          "mu",
        "K",             "cells",           "h",          "tolerance",     "N",             "fit_error",
        "pf_error",      "data_scale",      "fit_converged", "real_negative", "real_zero",   "real_positive",
        "complex",       "near_coincident", "iterations_pcg", "converged_pcg", "iterations_minres", "converged_minres",
        "residual_minres", "setup_seconds", "factor_seconds", "apply_seconds", "solve_seconds", "warnings",
        "status"};
    return header;
}

std::vector<std::string> sweep_csv_fields(const SweepRecord& r)
{
    const bool has_fit = r.N >= 0;
    auto audit_field = [&](int v) { return has_fit ? std::to_string(v) : std::string(); };
    return {r.sweep,
            format_number(r.s),
            format_number(r.t),
            format_number(r.alpha),
            format_number(r.beta),
            format_number(r.mu),
            format_number(r.K),
            format_int(r.cells),
            format_number(r.h),
            format_number(r.tolerance),
            format_int(r.N),
            format_number(r.fit_error),
            format_number(r.pf_error),
            format_number(r.data_scale),
            format_int(r.fit_converged),
            audit_field(r.audit.real_negative),
            audit_field(r.audit.real_zero),
            audit_field(r.audit.real_positive),
            audit_field(r.audit.complex),
            audit_field(r.audit.near_coincident),
            format_int(r.iterations_pcg),
            format_int(r.converged_pcg),
            format_int(r.iterations_minres),
            format_int(r.converged_minres),
            format_number(r.residual_minres),
            format_number(r.setup_seconds),
            format_number(r.factor_seconds),
            format_number(r.apply_seconds),
            format_number(r.solve_seconds),
            std::to_string(r.warnings),
            r.status};
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records)
{
    write_csv_row(os, sweep_csv_header());
    for (const auto& r : records) write_csv_row(os, sweep_csv_fields(r));
}

const std::vector<std::string>& solve_report_csv_header()
{
    static const std::vector<std::string> header{"method", "iterations", "converged", "status", "tolerance",
                                                 "final_residual", "wall_time", "inner_solve_total"};
    return header;
}

std::vector<std::string> solve_report_csv_fields(const SolveReport& r)
{
    const double last = r.preconditioned_residual_history.empty() ? nan_value : r.preconditioned_residual_history.back();
    return {r.method,
            std::to_string(r.iterations),
            r.converged ? "true" : "false",
            to_string(r.status),
            format_number(r.tolerance),
            format_number(last),
            format_number(r.wall_time),
            std::to_string(r.inner_solve_total)};
}

}  // namespace fracra
