#include "doctest.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "fracra/io.hpp"

using namespace fracra;

TEST_CASE("Matrix Market round trip")
{
    for (const auto& p : {assemble_interval(7, true), assemble_unit_square(4)}) {
        for (const SparseMatrix* m : {&p.A, &p.M}) {
            std::stringstream ss;
            write_matrix_market(ss, *m);
            const SparseMatrix back = read_matrix_market(ss);
            CHECK(back.rows() == m->rows());
            CHECK((Eigen::MatrixXd(back) - Eigen::MatrixXd(*m)).norm() == 0.0);
        }
    }
    const auto p = assemble_interval(5, false);
    std::stringstream ss;
    write_matrix_market(ss, p.A, false);
    CHECK((Eigen::MatrixXd(read_matrix_market(ss)) - Eigen::MatrixXd(p.A)).norm() == 0.0);
}

TEST_CASE("Matrix Market header and indexing")
{
    SparseMatrix m(2, 2);
    m.insert(0, 0) = 2.0;
    m.insert(1, 0) = -1.0;
    m.insert(0, 1) = -1.0;
    m.insert(1, 1) = 0.5;
    std::ostringstream os;
    write_matrix_market(os, m);
    CHECK(os.str() == "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 2\n2 1 -1\n2 2 0.5\n");

    std::istringstream comments("%%MatrixMarket matrix coordinate real general\n% a comment\n2 2 1\n2 1 3.5\n");
    const SparseMatrix r = read_matrix_market(comments);
    CHECK(r.coeff(1, 0) == 3.5);
    CHECK(r.coeff(0, 1) == 0.0);
}

TEST_CASE("Matrix Market rejects malformed input")
{
    std::istringstream empty("");
    CHECK_THROWS_AS(read_matrix_market(empty), ValidationError);
    std::istringstream array("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n");
    CHECK_THROWS_AS(read_matrix_market(array), ValidationError);
    std::istringstream range("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
    CHECK_THROWS_AS(read_matrix_market(range), ValidationError);
    std::istringstream zero_based("%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1.0\n");
    CHECK_THROWS_AS(read_matrix_market(zero_based), ValidationError);
    std::istringstream truncated("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n");
    CHECK_THROWS_AS(read_matrix_market(truncated), ValidationError);
    CHECK_THROWS_AS(read_matrix_market(std::string("/nonexistent/file.mtx")), ValidationError);
}

TEST_CASE("partial fraction JSON round trip is exact")
{
    const auto res = fit_function(make_function(1.0, 1e-2, -0.5, 0.5, 1e3));
    const auto j = to_json(res.pf);
    CHECK(j.at("schema_version") == schema_version);
    CHECK(j.at("degree") == res.pf.degree());
    const auto back = partial_fraction_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.c0 == res.pf.c0);
    CHECK(back.poles == res.pf.poles);
    CHECK(back.residues == res.pf.residues);
    CHECK(back.tolerance == res.pf.tolerance);
    CHECK(back.audit.total() == res.pf.audit.total());
    for (double x : {0.1, 10.0, 999.0}) CHECK(eval_pf(back, x) == eval_pf(res.pf, x));
}

TEST_CASE("partial fraction JSON rejects malformed documents")
{
    CHECK_THROWS_AS(partial_fraction_from_json(nlohmann::json::parse(R"({"poles": [], "residues": []})")), ValidationError);
    CHECK_THROWS_AS(partial_fraction_from_json(nlohmann::json::parse(R"({"c0": 1, "poles": [[0, 0]], "residues": []})")),
                    ValidationError);
    CHECK_THROWS_AS(partial_fraction_from_json(nlohmann::json::parse(R"({"c0": "x", "poles": [], "residues": []})")),
                    ValidationError);
}

TEST_CASE("solve report JSON")
{
    SolveReport r;
    r.method = "minres";
    r.iterations = 2;
    r.converged = true;
    r.status = SolveStatus::Converged;
    r.preconditioned_residual_history = {1.0, 1e-3, 1e-11};
    r.tolerance = 1e-10;
    const auto j = to_json(r);
    CHECK(j.at("status") == "converged");
    CHECK(j.at("stop") == "absolute");
    CHECK(j.at("preconditioned_residual_history").size() == 3);
    CHECK(j.at("iterations") == 2);
    const auto fields = solve_report_csv_fields(r);
    CHECK(fields.size() == solve_report_csv_header().size());
}

TEST_CASE("CSV escaping")
{
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("") == "");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_escape("line\nbreak") == "\"line\nbreak\"");
    std::ostringstream os;
    write_csv_row(os, {"x", "1,2", ""});
    CHECK(os.str() == "x,\"1,2\",\r\n");
}

TEST_CASE("number formatting round-trips")
{
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()).empty());
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1e-12) == "1e-12");
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("sweep CSV has one row per record under a fixed header")
{
    SweepRecord a;
    a.sweep = "poles";
    a.s = -0.5;
    a.t = 0.5;
    a.N = 3;
    a.audit.real_negative = 3;
    SweepRecord b;
    b.sweep = "robustness";
    b.mu = 1.0;
    b.status = "error: bad, \"thing\"";
    std::ostringstream os;
    write_sweep_csv(os, {a, b});
    std::istringstream is(os.str());
    std::string line;
    int lines = 0;
    while (std::getline(is, line)) ++lines;
    CHECK(lines == 3);
    CHECK(sweep_csv_fields(a).size() == sweep_csv_header().size());
    CHECK(os.str().rfind("sweep,s,t,alpha,beta,mu,K,cells", 0) == 0);
    CHECK(os.str().find("\"error: bad, \"\"thing\"\"\"") != std::string::npos);
    // Unset fields stay empty rather than printing sentinels.
    const auto fb = sweep_csv_fields(b);
    CHECK(fb[1].empty());
    CHECK(fb[7].empty());
}
