#include "doctest.h"

#include <cmath>
#include <memory>

#include "fracra/experiments.hpp"

using namespace fracra;
using Eigen::VectorXd;

TEST_CASE("interface problem setup")
{
    const auto prob = make_interface_problem(1e-2, 1e-6, 64);
    CHECK(prob.pencil.size() == 64);
    CHECK(prob.pencil.lambda_min_bound == 1.0);
    CHECK(prob.pencil.rho_bound == doctest::Approx(12.0 * 64 * 64 + 1.0 * 12.0).epsilon(0.2));
    CHECK(prob.system_symbol(4.0) == doctest::Approx(1e2 * 0.5 + 1e-4 * 2.0));
    const auto f = prob.preconditioner_function();
    CHECK(f.interval_upper == prob.pencil.rho_bound);
    CHECK(eval(f, 4.0) == doctest::Approx(1.0 / prob.system_symbol(4.0)).epsilon(1e-14));

    CHECK_THROWS_AS(make_interface_problem(0.0, 1.0, 64), ValidationError);
    CHECK_THROWS_AS(make_interface_problem(1.0, -1.0, 64), ValidationError);
    CHECK_THROWS_AS(make_interface_problem(1.0, 1.0, 2), ValidationError);
}

TEST_CASE("preconditioner grid reaches the bottom of the spectrum")
{
    const auto prob = make_interface_problem(1.0, 1.0, 128);
    const auto spec = preconditioner_grid(prob.pencil);
    CHECK(spec.tail_points == 128);
    CHECK(spec.tail_floor_ratio == doctest::Approx(1.0 / prob.pencil.rho_bound));
}

TEST_CASE("FFT and dense realizations of S agree")
{
    for (int n : {16, 64, 100}) {
        const auto prob = make_interface_problem(1e-2, 1.0, n);
        auto spectrum = std::make_shared<const DenseSpectrum>(dense_spectrum(prob.pencil));
        const DenseInterfaceSystem dense(spectrum, prob);
        const CirculantInterfaceSystem fft(prob);
        const VectorXd x = interface_rhs(prob.pencil, 7) + VectorXd::Ones(n);
        const VectorXd a = dense.apply(x), b = fft.apply(x);
        CHECK((a - b).norm() <= 1e-10 * a.norm());
        CHECK((dense.solve(a) - x).norm() <= 1e-10 * x.norm());
        CHECK(fft.symbol().size() == n);
        CHECK(fft.symbol().minCoeff() > 0.0);
    }
}

TEST_CASE("interface right-hand side")
{
    const auto prob = make_interface_problem(1.0, 1.0, 50);
    const VectorXd g = interface_rhs(prob.pencil, 2024);
    CHECK(g.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs((prob.pencil.M * VectorXd::Ones(50)).dot(g)) <= 1e-15);
    CHECK(g == interface_rhs(prob.pencil, 2024));
    CHECK(g != interface_rhs(prob.pencil, 2025));
}

TEST_CASE("RA-preconditioned solves converge in a few iterations")
{
    const auto prob = make_interface_problem(1.0, 1e-2, 128);
    const auto fit = fit_preconditioner(prob, 1e-12);
    CHECK(fit.pf.degree() <= 30);
    const RationalOperator prec(fit.pf, prob.pencil);
    const CirculantInterfaceSystem sys(prob);
    const VectorXd g = interface_rhs(prob.pencil, 1);
    auto sys_op = [&](const VectorXd& x) { return sys.apply(x); };
    auto pre_op = [&](const VectorXd& x) { return prec.apply(x); };
    const auto m = minres<double>(sys_op, pre_op, g);
    const auto c = pcg<double>(sys_op, pre_op, g);
    CHECK(m.report.converged);
    CHECK(c.report.converged);
    CHECK(m.report.iterations <= 10);
    CHECK((m.x - c.x).norm() <= 1e-8 * c.x.norm());
}

TEST_CASE("pole sweep enumerates its grid")
{
    PoleSweepConfig cfg;
    CHECK(cfg.s_grid.size() == 11);
    CHECK(cfg.s_grid.front() == -1.0);
    CHECK(cfg.s_grid[5] == 0.0);
    CHECK(cfg.s_grid.back() == 1.0);
    cfg.s_grid = {-0.4, 1.0};
    cfg.t_grid = {0.6};
    cfg.alpha_grid = {1.0, 1e-3};
    const auto recs = pole_sweep(cfg);
    REQUIRE(recs.size() == 2 * 1 * 2 * 4);
    CHECK(recs[0].s == -0.4);
    CHECK(recs[0].alpha == 1.0);
    CHECK(recs[0].beta == 1e-10);
    CHECK(recs[1].beta == 1e-6);
    CHECK(recs[4].alpha == 1e-3);
    CHECK(recs[8].s == 1.0);
    for (const auto& r : recs) {
        CHECK(r.status == "ok");
        CHECK(r.N >= 0);
        CHECK(r.N <= 30);
        CHECK(r.audit.total() == r.N);
        CHECK(r.fit_error <= 1e-12 * std::max(1.0, r.data_scale));
    }
}

TEST_CASE("robustness sweep on a small grid")
{
    RobustnessConfig cfg;
    cfg.mu_grid = {1e-2, 1.0};
    cfg.K_grid = {1e-6};
    cfg.mesh_grid = {32, 64};
    const auto recs = robustness_sweep(cfg);
    REQUIRE(recs.size() == 4);
    CHECK(recs[0].mu == 1e-2);
    CHECK(recs[0].cells == 32);
    CHECK(recs[1].cells == 64);
    CHECK(recs[2].mu == 1.0);
    for (const auto& r : recs) {
        CHECK(r.status == "ok");
        CHECK(r.converged_minres == 1);
        CHECK(r.converged_pcg == 1);
        CHECK(r.iterations_minres <= 40);
        CHECK(r.residual_minres <= 1e-10);
    }

    cfg.mesh_grid = {4000};
    CHECK_THROWS_AS(robustness_sweep(cfg), ValidationError);
}

TEST_CASE("complexity study records timings")
{
    ComplexityConfig cfg;
    cfg.mesh_grid = {32, 64};
    cfg.repeats = 1;
    const auto recs = complexity_study(cfg);
    REQUIRE(recs.size() == 2);
    for (const auto& r : recs) {
        CHECK(r.status == "ok");
        CHECK(r.setup_seconds > 0.0);
        CHECK(r.factor_seconds > 0.0);
        CHECK(r.solve_seconds > 0.0);
        CHECK(r.converged_minres == 1);
        CHECK(r.mu == 1e-2);
        CHECK(r.K == 1e-6);
    }
}

TEST_CASE("loglog slope")
{
    const std::vector<double> x{1, 2, 4, 8, 16};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * std::pow(v, 1.5));
    CHECK(loglog_slope(x, y) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), ValidationError);
    CHECK_THROWS_AS(loglog_slope({1.0, 0.0}, {1.0, 2.0}), ValidationError);
}
