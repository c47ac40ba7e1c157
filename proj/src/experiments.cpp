#include "fracra/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <tuple>

#include <unsupported/Eigen/FFT>

#include "fracra/errors.hpp"

namespace fracra {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

}  // namespace

double InterfaceProblem::system_symbol(double lambda) const
{
    return std::pow(lambda, -0.5) / mu + K / mu * std::sqrt(lambda);
}

FractionalSumFunction<double> InterfaceProblem::preconditioner_function() const
{
    return make_function(1.0 / mu, K / mu, -0.5, 0.5, pencil.rho_bound);
}

InterfaceProblem make_interface_problem(double mu, double K, int cells)
{
    detail::require(std::isfinite(mu) && mu > 0.0, "viscosity mu must be positive");
    detail::require(std::isfinite(K) && K > 0.0, "permeability K must be positive");
    detail::require(cells >= 3, "interface mesh needs at least 3 cells");
    InterfaceProblem p;
    p.mu = mu;
    p.K = K;
    p.cells = cells;
    p.pencil = shift_pencil(assemble_interval(cells, true), 1.0);
    return p;
}

GridSpec preconditioner_grid(const OperatorPencil& pencil, int tail_points)
{
    GridSpec g;
    if (pencil.lambda_min_bound > 0.0 && pencil.rho_bound > 0.0) {
        g.tail_points = tail_points;
        g.tail_floor_ratio = pencil.lambda_min_bound / pencil.rho_bound;
    }
    return g;
}

FitResult<double> fit_preconditioner(const InterfaceProblem& problem, double tol_ra, int max_degree)
{
    FitOptions opts;
    opts.aaa.tolerance = tol_ra;
    opts.aaa.max_degree = max_degree;
    opts.grid = preconditioner_grid(problem.pencil);
    return fit_function(problem.preconditioner_function(), opts);
}

DenseInterfaceSystem::DenseInterfaceSystem(std::shared_ptr<const DenseSpectrum> spectrum, const InterfaceProblem& problem)
    : spectrum_(std::move(spectrum))
{
    detail::require(spectrum_ != nullptr, "dense system needs a spectrum");
    symbol_.resize(spectrum_->lambda.size());
    for (Eigen::Index i = 0; i < symbol_.size(); ++i) symbol_[i] = problem.system_symbol(spectrum_->lambda[i]);
}

Eigen::VectorXd DenseInterfaceSystem::apply(const Eigen::VectorXd& x) const
{
    const Eigen::VectorXd coeff = spectrum_->MU.transpose() * x;
    return spectrum_->MU * symbol_.cwiseProduct(coeff);
}

Eigen::VectorXd DenseInterfaceSystem::solve(const Eigen::VectorXd& b) const
{
    const Eigen::VectorXd coeff = spectrum_->U.transpose() * b;
    return spectrum_->U * coeff.cwiseQuotient(symbol_);
}

struct CirculantInterfaceSystem::Fft {
    mutable Eigen::FFT<double> engine;
};

CirculantInterfaceSystem::CirculantInterfaceSystem(const InterfaceProblem& problem) : fft_(std::make_unique<Fft>())
{
    const int n = problem.cells;
    const double h = 1.0 / n;
    symbol_.resize(n);
    for (int k = 0; k < n; ++k) {
        const double c = std::cos(2.0 * std::numbers::pi * k / n);
        const double m_k = h / 6.0 * (4.0 + 2.0 * c);
        const double a_k = 2.0 / h * (1.0 - c) + m_k;
        symbol_[k] = m_k * problem.system_symbol(a_k / m_k);
    }
}

CirculantInterfaceSystem::~CirculantInterfaceSystem() = default;
CirculantInterfaceSystem::CirculantInterfaceSystem(CirculantInterfaceSystem&&) noexcept = default;

Eigen::VectorXd CirculantInterfaceSystem::apply(const Eigen::VectorXd& x) const
{
    detail::require(x.size() == symbol_.size(), "vector size does not match the interface mesh");
    std::vector<double> in(x.data(), x.data() + x.size());
    std::vector<std::complex<double>> spec;
    fft_->engine.fwd(spec, in);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= symbol_[static_cast<Eigen::Index>(k)];
    std::vector<double> out;
    fft_->engine.inv(out, spec);
    return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

Eigen::VectorXd interface_rhs(const OperatorPencil& pencil, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd g(pencil.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = normal(rng);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.size());
    const Eigen::VectorXd m_ones = pencil.M * ones;
    g -= (m_ones.dot(g) / m_ones.dot(ones)) * ones;
    return g / g.norm();
}

std::vector<double> default_exponent_grid()
{
    std::vector<double> g;
    for (int k = -5; k <= 5; ++k) g.push_back(k / 5.0);
    return g;
}

PoleSweepConfig::PoleSweepConfig() : s_grid(default_exponent_grid()), t_grid(default_exponent_grid()) {}

std::vector<SweepRecord> pole_sweep(const PoleSweepConfig& cfg)
{
    detail::require(cfg.tolerance > 0.0, "sweep tolerance must be positive");
    std::vector<SweepRecord> out;
    out.reserve(cfg.s_grid.size() * cfg.t_grid.size() * cfg.alpha_grid.size() * cfg.beta_grid.size());
    FitOptions fit = cfg.fit;
    fit.aaa.tolerance = cfg.tolerance;
    for (double s : cfg.s_grid) {
        for (double t : cfg.t_grid) {
            for (double a : cfg.alpha_grid) {
                for (double b : cfg.beta_grid) {
                    SweepRecord r;
                    r.sweep = "poles";
                    r.s = s;
                    r.t = t;
                    r.alpha = a;
                    r.beta = b;
                    r.tolerance = cfg.tolerance;
                    try {
                        const auto res = fit_function(make_function(a, b, s, t, 1.0), fit);
                        r.N = res.unit.degree();
                        r.fit_error = res.barycentric.achieved_error;
                        r.pf_error = res.unit.achieved_error;
                        r.data_scale = res.barycentric.data_scale;
                        r.fit_converged = res.barycentric.converged ? 1 : 0;
                        r.audit = res.unit.audit;
                        r.setup_seconds = res.seconds;
                        if (!res.barycentric.converged) r.status = "not_converged";
                    } catch (const std::exception& e) {
                        r.status = std::string("error: ") + e.what();
                    }
                    out.push_back(std::move(r));
                }
            }
        }
    }
    return out;
}

std::vector<SweepRecord> robustness_sweep(const RobustnessConfig& cfg)
{
    detail::require(!cfg.mu_grid.empty() && !cfg.K_grid.empty() && !cfg.mesh_grid.empty(), "robustness grids must be nonempty");
    detail::require(cfg.tolerance > 0.0, "RA tolerance must be positive");
    for (int n : cfg.mesh_grid) detail::require(n >= 3 && n <= cfg.dense_cap, "mesh size outside [3, dense cap]");

    std::map<int, std::shared_ptr<const DenseSpectrum>> spectra;
    for (int n : cfg.mesh_grid) {
        if (!spectra.count(n))
            spectra[n] = std::make_shared<const DenseSpectrum>(dense_spectrum(make_interface_problem(1.0, 1.0, n).pencil, cfg.dense_cap));
    }

    std::vector<SweepRecord> out;
    for (double mu : cfg.mu_grid) {
        for (double K : cfg.K_grid) {
            for (int n : cfg.mesh_grid) {
                SweepRecord r;
                r.sweep = "robustness";
                r.mu = mu;
                r.K = K;
                r.cells = n;
                r.h = 1.0 / n;
                r.tolerance = cfg.tolerance;
                try {
                    const InterfaceProblem prob = make_interface_problem(mu, K, n);
                    const auto fit = fit_preconditioner(prob, cfg.tolerance);
                    r.N = fit.pf.degree();
                    r.fit_error = fit.barycentric.achieved_error;
                    r.pf_error = fit.unit.achieved_error;
                    r.data_scale = fit.barycentric.data_scale;
                    r.fit_converged = fit.barycentric.converged ? 1 : 0;
                    r.audit = fit.pf.audit;
                    r.setup_seconds = fit.seconds;
                    const RationalOperator prec(fit.pf, prob.pencil);
                    r.factor_seconds = prec.setup_seconds();
                    r.warnings = static_cast<int>(prec.warnings().size());
                    const DenseInterfaceSystem sys(spectra.at(n), prob);
                    const Eigen::VectorXd g = interface_rhs(prob.pencil, cfg.seed);
                    auto sys_op = [&](const Eigen::VectorXd& x) { return sys.apply(x); };
                    auto pre_op = [&](const Eigen::VectorXd& x) { return prec.apply(x); };
                    if (cfg.run_pcg) {
                        const auto res = pcg<double>(sys_op, pre_op, g, cfg.krylov);
                        r.iterations_pcg = res.report.iterations;
                        r.converged_pcg = res.report.converged ? 1 : 0;
                    }
                    if (cfg.run_minres) {
                        const auto res = minres<double>(sys_op, pre_op, g, cfg.krylov);
                        r.iterations_minres = res.report.iterations;
                        r.converged_minres = res.report.converged ? 1 : 0;
                        r.residual_minres = res.report.preconditioned_residual_history.back();
                        r.solve_seconds = res.report.wall_time;
                        if (!res.report.converged) r.status = std::string("minres ") + to_string(res.report.status);
                    }
                    if (r.converged_pcg == 0 && r.status == "ok") r.status = "pcg not converged";
                } catch (const std::exception& e) {
                    r.status = std::string("error: ") + e.what();
                }
                out.push_back(std::move(r));
            }
        }
    }
    return out;
}

std::vector<SweepRecord> complexity_study(const ComplexityConfig& cfg)
{
    detail::require(!cfg.mesh_grid.empty() && !cfg.tolerance_grid.empty(), "complexity grids must be nonempty");
    detail::require(cfg.repeats >= 1, "repeats must be at least 1");
    std::vector<SweepRecord> out;
    for (double tol : cfg.tolerance_grid) {
        for (int n : cfg.mesh_grid) {
            SweepRecord r;
            r.sweep = "complexity";
            r.mu = cfg.mu;
            r.K = cfg.K;
            r.cells = n;
            r.h = 1.0 / n;
            r.tolerance = tol;
            try {
                const InterfaceProblem prob = make_interface_problem(cfg.mu, cfg.K, n);
                const CirculantInterfaceSystem sys(prob);
                const Eigen::VectorXd g = interface_rhs(prob.pencil, cfg.seed);
                double best_setup = INFINITY, best_factor = INFINITY, best_solve = INFINITY, best_apply = INFINITY;
                for (int rep = 0; rep < cfg.repeats; ++rep) {
                    const auto fit = fit_preconditioner(prob, tol);
                    best_setup = std::min(best_setup, fit.seconds);
                    const auto t0 = Clock::now();
                    const RationalOperator prec(fit.pf, prob.pencil);
                    best_factor = std::min(best_factor, seconds_since(t0));
                    auto sys_op = [&](const Eigen::VectorXd& x) { return sys.apply(x); };
                    auto pre_op = [&](const Eigen::VectorXd& x) { return prec.apply(x); };
                    const auto t1 = Clock::now();
                    const auto res = minres<double>(sys_op, pre_op, g, cfg.krylov);
                    best_solve = std::min(best_solve, seconds_since(t1));
                    double apply_total = 0.0;
                    for (double s : prec.per_shift_seconds()) apply_total += s;
                    best_apply = std::min(best_apply, apply_total / std::max<std::int64_t>(prec.apply_count(), 1));
                    r.N = fit.pf.degree();
                    r.fit_error = fit.barycentric.achieved_error;
                    r.pf_error = fit.unit.achieved_error;
                    r.data_scale = fit.barycentric.data_scale;
                    r.fit_converged = fit.barycentric.converged ? 1 : 0;
                    r.audit = fit.pf.audit;
                    r.iterations_minres = res.report.iterations;
                    r.converged_minres = res.report.converged ? 1 : 0;
                    r.residual_minres = res.report.preconditioned_residual_history.back();
                    r.warnings = static_cast<int>(prec.warnings().size());
                }
                r.setup_seconds = best_setup;
                r.factor_seconds = best_factor;
                r.solve_seconds = best_solve;
                r.apply_seconds = best_apply;
            } catch (const std::exception& e) {
                r.status = std::string("error: ") + e.what();
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    detail::require(x.size() == y.size() && x.size() >= 2, "slope needs at least two paired points");
    Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), 2);
    Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        detail::require(x[i] > 0.0 && y[i] > 0.0, "log-log slope needs positive data");
        a(static_cast<Eigen::Index>(i), 0) = 1.0;
        a(static_cast<Eigen::Index>(i), 1) = std::log(x[i]);
        b[static_cast<Eigen::Index>(i)] = std::log(y[i]);
    }
    return a.colPivHouseholderQr().solve(b)[1];
}

}  // namespace fracra
