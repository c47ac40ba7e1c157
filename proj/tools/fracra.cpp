// fracra: fit rational approximations of (alpha x^s + beta x^t)^{-1}, apply them to pencils,
// solve the interface problem and run the sweeps.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fracra/aaa.hpp"
#include "fracra/errors.hpp"
#include "fracra/experiments.hpp"
#include "fracra/io.hpp"
#include "fracra/krylov.hpp"
#include "fracra/pencil.hpp"
#include "fracra/raop.hpp"

using namespace fracra;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 2;
constexpr int exit_numerical = 3;

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot open " + path + " for writing");
    os << text;
}

std::string audit_line(const PoleAudit& a)
{
    std::ostringstream os;
    os << "real_negative=" << a.real_negative << " real_zero=" << a.real_zero << " real_positive=" << a.real_positive
       << " complex=" << a.complex << " near_coincident=" << a.near_coincident;
    return os.str();
}

Eigen::VectorXd read_vector(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open " + path);
    std::vector<double> v;
    double x;
    while (is >> x) v.push_back(x);
    if (!is.eof()) throw ValidationError("malformed vector file " + path);
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct FitArgs {
    double alpha = 0, beta = 0, s = 0, t = 0, tol = 0;
    double upper = 1.0;
    int max_degree = 30;
    int grid_points = 4096;
    double floor_ratio = 0.0;
    int tail_points = 128;
    std::string out;
};

int run_fit(const FitArgs& a)
{
    const auto f = make_function(a.alpha, a.beta, a.s, a.t, a.upper);
    FitOptions opts;
    opts.aaa.tolerance = a.tol;
    opts.aaa.max_degree = a.max_degree;
    opts.grid.uniform_points = a.grid_points;
    if (a.floor_ratio > 0.0) {
        detail::require(a.floor_ratio < 1.0, "floor ratio must lie in (0, 1)");
        opts.grid.tail_points = a.tail_points;
        opts.grid.tail_floor_ratio = a.floor_ratio;
    }
    const auto res = fit_function(f, opts);
    json j = to_json(res.pf);
    j["function"] = {{"alpha", a.alpha}, {"beta", a.beta}, {"s", a.s}, {"t", a.t}, {"interval_upper", a.upper}};
    j["normalization"] = {{"gamma", res.normalized.gamma},
                          {"leading_weight", res.normalized.leading_weight},
                          {"swapped", res.normalized.swapped}};
    j["fit"] = {{"converged", res.barycentric.converged},
                {"barycentric_error", res.barycentric.achieved_error},
                {"partial_fraction_error", res.unit.achieved_error},
                {"data_scale", res.barycentric.data_scale},
                {"grid_points", res.barycentric.grid_x.size()}};
    if (!a.out.empty()) write_text(a.out, j.dump(2) + "\n");

    std::cout << "N=" << res.pf.degree() << " c0=" << format_number(res.pf.c0)
              << " achieved_error=" << format_number(res.barycentric.achieved_error)
              << " pf_error=" << format_number(res.unit.achieved_error) << " converged=" << (res.barycentric.converged ? "true" : "false")
              << "\n";
    std::cout << "audit " << audit_line(res.pf.audit) << "\n";
    for (std::size_t i = 0; i < res.pf.poles.size(); ++i)
        std::cout << "  p" << i + 1 << "=" << format_number(res.pf.poles[i].real()) << (res.pf.poles[i].imag() < 0 ? "-" : "+")
                  << format_number(std::abs(res.pf.poles[i].imag())) << "i  c" << i + 1 << "="
                  << format_number(res.pf.residues[i].real()) << (res.pf.residues[i].imag() < 0 ? "-" : "+")
                  << format_number(std::abs(res.pf.residues[i].imag())) << "i\n";
    if (a.out.empty()) std::cout << j.dump(2) << "\n";
    if (!res.barycentric.converged) {
        std::cerr << "fit did not reach tolerance " << a.tol << " within degree " << a.max_degree << "\n";
        return exit_numerical;
    }
    return exit_ok;
}

struct SolveArgs {
    double mu = 0, K = 0, tol_ra = 0, tol_krylov = 0;
    int cells = 0;
    std::string method = "minres";
    std::string system = "auto";
    std::uint64_t seed = 2024;
    int max_iter = 500;
    std::string out;
    std::string csv;
};

int run_solve(const SolveArgs& a)
{
    detail::require(a.tol_ra > 0.0 && a.tol_krylov > 0.0, "tolerances must be positive");
    const InterfaceProblem prob = make_interface_problem(a.mu, a.K, a.cells);
    const auto fit = fit_preconditioner(prob, a.tol_ra);
    const RationalOperator prec(fit.pf, prob.pencil);

    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> sys_op;
    std::unique_ptr<DenseInterfaceSystem> dense;
    std::unique_ptr<CirculantInterfaceSystem> fft;
    const bool use_dense = a.system == "dense" || (a.system == "auto" && a.cells <= 1024);
    if (use_dense) {
        dense = std::make_unique<DenseInterfaceSystem>(std::make_shared<const DenseSpectrum>(dense_spectrum(prob.pencil)), prob);
        sys_op = [&](const Eigen::VectorXd& x) { return dense->apply(x); };
    } else {
        fft = std::make_unique<CirculantInterfaceSystem>(prob);
        sys_op = [&](const Eigen::VectorXd& x) { return fft->apply(x); };
    }
    auto pre_op = [&](const Eigen::VectorXd& x) { return prec.apply(x); };
    const Eigen::VectorXd g = interface_rhs(prob.pencil, a.seed);
    KrylovOptions ko;
    ko.tolerance = a.tol_krylov;
    ko.max_iterations = a.max_iter;
    auto res = a.method == "pcg" ? pcg<double>(sys_op, pre_op, g, ko) : minres<double>(sys_op, pre_op, g, ko);
    res.report.inner_solve_total = prec.inner_solve_count();

    json j = to_json(res.report);
    j["problem"] = {{"mu", a.mu}, {"K", a.K}, {"cells", a.cells}, {"seed", a.seed}, {"system", use_dense ? "dense" : "fft"}};
    j["preconditioner"] = {{"tol_ra", a.tol_ra},
                           {"N", fit.pf.degree()},
                           {"rho_bound", prob.pencil.rho_bound},
                           {"setup_seconds", fit.seconds},
                           {"factor_seconds", prec.setup_seconds()},
                           {"per_shift_seconds", prec.per_shift_seconds()},
                           {"warnings", prec.warnings()},
                           {"audit", to_json(fit.pf.audit)}};
    if (!a.out.empty()) write_text(a.out, j.dump(2) + "\n");
    if (!a.csv.empty()) {
        std::ostringstream os;
        write_csv_row(os, solve_report_csv_header());
        write_csv_row(os, solve_report_csv_fields(res.report));
        write_text(a.csv, os.str());
    }
    std::cout << "iterations=" << res.report.iterations << " converged=" << (res.report.converged ? "true" : "false")
              << " status=" << to_string(res.report.status) << " N=" << fit.pf.degree()
              << " final_residual=" << format_number(res.report.preconditioned_residual_history.back()) << "\n";
    return res.report.converged ? exit_ok : exit_numerical;
}

struct SweepArgs {
    std::string out;
    std::string summary;
    double tol = 1e-12;
    std::vector<double> s_grid, t_grid, alpha_grid, beta_grid;
    double tol_ra = 1e-12;
    double tol_krylov = 1e-10;
    std::vector<double> mu_grid, K_grid, tol_grid;
    std::vector<int> mesh_grid;
    double mu = 1e-2, K = 1e-6;
    int repeats = 3;
    std::uint64_t seed = 2024;
};

template <typename T>
void override_if(std::vector<T>& target, const std::vector<T>& given)
{
    if (!given.empty()) target = given;
}

json grid_json(const std::vector<double>& g) { return json(g); }

int run_sweep(const std::string& which, const SweepArgs& a)
{
    std::vector<SweepRecord> records;
    json summary;
    summary["schema_version"] = schema_version;
    summary["sweep"] = which;
    summary["environment"] = {{"compiler", __VERSION__}, {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                                        std::to_string(EIGEN_MINOR_VERSION)}};
    if (which == "poles") {
        PoleSweepConfig cfg;
        cfg.tolerance = a.tol;
        override_if(cfg.s_grid, a.s_grid);
        override_if(cfg.t_grid, a.t_grid);
        override_if(cfg.alpha_grid, a.alpha_grid);
        override_if(cfg.beta_grid, a.beta_grid);
        summary["grid"] = {{"s", cfg.s_grid}, {"t", cfg.t_grid}, {"alpha", cfg.alpha_grid}, {"beta", cfg.beta_grid}, {"tolerance", cfg.tolerance}};
        records = pole_sweep(cfg);
        int max_n = 0, unconverged = 0, all_real_nonpos = 0;
        for (const auto& r : records) {
            max_n = std::max(max_n, r.N);
            unconverged += r.fit_converged != 1;
            all_real_nonpos += r.N >= 0 && r.audit.all_real_nonpositive();
        }
        summary["max_N"] = max_n;
        summary["unconverged"] = unconverged;
        summary["all_real_nonpositive_fraction"] = records.empty() ? 0.0 : double(all_real_nonpos) / double(records.size());
        std::cout << "rows=" << records.size() << " max_N=" << max_n << " unconverged=" << unconverged
                  << " all_real_nonpositive=" << all_real_nonpos << "/" << records.size() << "\n";
    } else if (which == "robustness") {
        RobustnessConfig cfg;
        cfg.tolerance = a.tol_ra;
        cfg.krylov.tolerance = a.tol_krylov;
        cfg.seed = a.seed;
        override_if(cfg.mu_grid, a.mu_grid);
        override_if(cfg.K_grid, a.K_grid);
        override_if(cfg.mesh_grid, a.mesh_grid);
        summary["grid"] = {{"mu", cfg.mu_grid}, {"K", cfg.K_grid}, {"cells", cfg.mesh_grid}, {"tol_ra", cfg.tolerance},
                           {"tol_krylov", cfg.krylov.tolerance}};
        summary["seed"] = cfg.seed;
        records = robustness_sweep(cfg);
        int max_it = 0, min_it = 1 << 30, failures = 0;
        for (const auto& r : records) {
            if (r.iterations_minres >= 0) {
                max_it = std::max(max_it, r.iterations_minres);
                min_it = std::min(min_it, r.iterations_minres);
            }
            failures += r.status != "ok";
        }
        summary["max_iterations_minres"] = max_it;
        summary["failures"] = failures;
        std::cout << "rows=" << records.size() << " minres_iterations=[" << min_it << ", " << max_it << "] failures=" << failures << "\n";
    } else {
        ComplexityConfig cfg;
        cfg.mu = a.mu;
        cfg.K = a.K;
        cfg.repeats = a.repeats;
        cfg.seed = a.seed;
        cfg.krylov.tolerance = a.tol_krylov;
        override_if(cfg.mesh_grid, a.mesh_grid);
        override_if(cfg.tolerance_grid, a.tol_grid);
        summary["grid"] = {{"cells", cfg.mesh_grid}, {"tol_ra", cfg.tolerance_grid}, {"mu", cfg.mu}, {"K", cfg.K}};
        summary["seed"] = cfg.seed;
        records = complexity_study(cfg);
        double setup_min = INFINITY, setup_max = 0.0;
        std::vector<double> n, total;
        for (const auto& r : records) {
            setup_min = std::min(setup_min, r.setup_seconds);
            setup_max = std::max(setup_max, r.setup_seconds);
            n.push_back(r.cells);
            total.push_back(r.factor_seconds + r.solve_seconds);
        }
        summary["setup_seconds_min"] = setup_min;
        summary["setup_seconds_max"] = setup_max;
        std::cout << "rows=" << records.size() << " setup_seconds=[" << format_number(setup_min) << ", " << format_number(setup_max)
                  << "]";
        if (cfg.tolerance_grid.size() == 1 && records.size() >= 2) {
            const double slope = loglog_slope(n, total);
            summary["solve_time_slope"] = slope;
            std::cout << " solve_time_slope=" << format_number(slope);
        }
        std::cout << "\n";
    }
    summary["rows"] = records.size();
    std::ostringstream csv;
    write_sweep_csv(csv, records);
    write_text(a.out.empty() ? "sweep_" + which + ".csv" : a.out, csv.str());
    if (!a.summary.empty()) write_text(a.summary, summary.dump(2) + "\n");
    return exit_ok;
}

struct ApplyArgs {
    std::string pf, a_path, m_path, rhs, out;
    int dimension = 1;
};

int run_apply(const ApplyArgs& a)
{
    std::ifstream is(a.pf);
    if (!is) throw ValidationError("cannot open " + a.pf);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed JSON in ") + a.pf + ": " + e.what());
    }
    OperatorPencil pencil;
    pencil.A = read_matrix_market(a.a_path);
    pencil.M = read_matrix_market(a.m_path);
    pencil.dimension = a.dimension;
    rho_upper_bound(pencil);
    const RationalOperator op(partial_fraction_from_json(j), pencil);
    const Eigen::VectorXd r = read_vector(a.rhs);
    detail::require(r.size() == pencil.size(), "right-hand side length does not match the pencil");
    const Eigen::VectorXd z = op.apply(r);
    std::ostringstream os;
    os.precision(17);
    for (Eigen::Index i = 0; i < z.size(); ++i) os << z[i] << "\n";
    write_text(a.out, os.str());
    for (const auto& w : op.warnings()) std::cerr << "warning: " << w << "\n";
    return exit_ok;
}

struct PencilArgs {
    std::string kind = "periodic";
    int cells = 0;
    double shift = 0.0;
    std::string prefix = "pencil";
};

int run_pencil(const PencilArgs& a)
{
    OperatorPencil p;
    if (a.kind == "periodic") {
        p = assemble_interval(a.cells, true);
    } else if (a.kind == "dirichlet") {
        p = assemble_interval(a.cells, false);
    } else {
        p = assemble_unit_square(a.cells);
    }
    if (a.shift != 0.0) p = shift_pencil(p, a.shift);
    write_matrix_market(a.prefix + "_A.mtx", p.A);
    write_matrix_market(a.prefix + "_M.mtx", p.M);
    std::cout << "n=" << p.size() << " rho_bound=" << format_number(p.rho_bound) << "\n";
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Rational approximation preconditioners for fractional operators"};
    app.require_subcommand(1);

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "Fit (alpha x^s + beta x^t)^{-1} and print its partial fractions");
    fit->add_option("--alpha", fa.alpha)->required();
    fit->add_option("--beta", fa.beta)->required();
    fit->add_option("--s", fa.s)->required();
    fit->add_option("--t", fa.t)->required();
    fit->add_option("--tol", fa.tol)->required();
    fit->add_option("--interval-upper", fa.upper, "Upper end of the fit interval (0, rho]");
    fit->add_option("--max-degree", fa.max_degree)->check(CLI::PositiveNumber);
    fit->add_option("--grid-points", fa.grid_points, "Uniform fit nodes")->check(CLI::Range(2, 1 << 22));
    fit->add_option("--floor-ratio", fa.floor_ratio, "Add a log-spaced tail down to this fraction of the interval");
    fit->add_option("--tail-points", fa.tail_points)->check(CLI::Range(2, 1 << 20));
    fit->add_option("--out", fa.out, "JSON output file");

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve-interface", "Solve S x = g with the RA preconditioner");
    solve->add_option("--mu", sa.mu)->required();
    solve->add_option("--K", sa.K)->required();
    solve->add_option("--cells", sa.cells)->required();
    solve->add_option("--tol-ra", sa.tol_ra)->required();
    solve->add_option("--tol-krylov", sa.tol_krylov)->required();
    solve->add_option("--method", sa.method)->check(CLI::IsMember({"pcg", "minres"}));
    solve->add_option("--system", sa.system)->check(CLI::IsMember({"auto", "dense", "fft"}));
    solve->add_option("--seed", sa.seed);
    solve->add_option("--max-iter", sa.max_iter)->check(CLI::PositiveNumber);
    solve->add_option("--out", sa.out, "SolveReport JSON file");
    solve->add_option("--csv", sa.csv, "SolveReport CSV file");

    SweepArgs wa;
    std::string sweep_name;
    auto* sweep = app.add_subcommand("sweep", "Run a full-grid sweep and write CSV");
    sweep->add_option("name", sweep_name)->required()->check(CLI::IsMember({"poles", "robustness", "complexity"}));
    sweep->add_option("--out", wa.out, "CSV output (default sweep_<name>.csv, '-' for stdout)");
    sweep->add_option("--summary", wa.summary, "JSON summary output");
    sweep->add_option("--tol", wa.tol, "Fit tolerance (poles)");
    sweep->add_option("--s-grid", wa.s_grid)->delimiter(',');
    sweep->add_option("--t-grid", wa.t_grid)->delimiter(',');
    sweep->add_option("--alpha-grid", wa.alpha_grid)->delimiter(',');
    sweep->add_option("--beta-grid", wa.beta_grid)->delimiter(',');
    sweep->add_option("--tol-ra", wa.tol_ra, "RA tolerance (robustness)");
    sweep->add_option("--tol-krylov", wa.tol_krylov);
    sweep->add_option("--mu-grid", wa.mu_grid)->delimiter(',');
    sweep->add_option("--K-grid", wa.K_grid)->delimiter(',');
    sweep->add_option("--mesh-grid", wa.mesh_grid)->delimiter(',');
    sweep->add_option("--tol-grid", wa.tol_grid, "RA tolerances (complexity)")->delimiter(',');
    sweep->add_option("--mu", wa.mu, "Viscosity (complexity)");
    sweep->add_option("--K", wa.K, "Permeability (complexity)");
    sweep->add_option("--repeats", wa.repeats)->check(CLI::PositiveNumber);
    sweep->add_option("--seed", wa.seed);

    ApplyArgs aa;
    auto* apply = app.add_subcommand("apply", "Apply a fitted partial fraction to a pencil read from Matrix Market files");
    apply->add_option("--pf", aa.pf)->required();
    apply->add_option("--A", aa.a_path)->required();
    apply->add_option("--M", aa.m_path)->required();
    apply->add_option("--rhs", aa.rhs, "Whitespace-separated vector")->required();
    apply->add_option("--dimension", aa.dimension)->check(CLI::Range(1, 3));
    apply->add_option("--out", aa.out, "Output vector file (default stdout)");

    PencilArgs pa;
    auto* pencil = app.add_subcommand("pencil", "Assemble a pencil and export A and M");
    pencil->add_option("--kind", pa.kind)->check(CLI::IsMember({"periodic", "dirichlet", "square"}));
    pencil->add_option("--cells", pa.cells)->required();
    pencil->add_option("--shift", pa.shift);
    pencil->add_option("--prefix", pa.prefix);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_validation;
    }

    try {
        if (*fit) return run_fit(fa);
        if (*solve) return run_solve(sa);
        if (*sweep) return run_sweep(sweep_name, wa);
        if (*apply) return run_apply(aa);
        if (*pencil) return run_pencil(pa);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_ok;
}
