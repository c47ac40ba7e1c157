#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracra/aaa.hpp"
#include "fracra/krylov.hpp"
#include "fracra/pencil.hpp"
#include "fracra/raop.hpp"

namespace fracra {

/// S = mu^{-1} L^{-1/2} + K mu^{-1} L^{1/2} with L the shifted periodic pencil (A + M, M).
struct InterfaceProblem {
    double mu = 1.0;
    double K = 1.0;
    int cells = 0;
    OperatorPencil pencil;

    /// F(lambda) = mu^{-1} lambda^{-1/2} + K mu^{-1} lambda^{1/2}.
    double system_symbol(double lambda) const;
    /// f = 1 / F on (0, rho_bound], as a fractional-sum function.
    FractionalSumFunction<double> preconditioner_function() const;
};

InterfaceProblem make_interface_problem(double mu, double K, int cells);

/// Fit grid for a preconditioner on a pencil: the default uniform grid plus a log tail reaching
/// down to lambda_min_bound / rho_bound.
GridSpec preconditioner_grid(const OperatorPencil& pencil, int tail_points = 128);

FitResult<double> fit_preconditioner(const InterfaceProblem& problem, double tol_ra, int max_degree = 30);

/// Dense realization M U F(Lambda) U^T M, applied in O(n^2) from a shared eigendecomposition.
class DenseInterfaceSystem {
public:
    DenseInterfaceSystem(std::shared_ptr<const DenseSpectrum> spectrum, const InterfaceProblem& problem);
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return apply(x); }
    /// Exact inverse U F(Lambda)^{-1} U^T b.
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

private:
    std::shared_ptr<const DenseSpectrum> spectrum_;
    Eigen::VectorXd symbol_;
};

/// The same operator diagonalized by the discrete Fourier transform (uniform periodic mesh only):
/// symbol m_k F(a_k / m_k) on the circulant eigenvalues a_k, m_k of A + M and M.
class CirculantInterfaceSystem {
public:
    explicit CirculantInterfaceSystem(const InterfaceProblem& problem);
    ~CirculantInterfaceSystem();
    CirculantInterfaceSystem(CirculantInterfaceSystem&&) noexcept;
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return apply(x); }
    const Eigen::VectorXd& symbol() const { return symbol_; }

private:
    struct Fft;
    Eigen::VectorXd symbol_;
    std::unique_ptr<Fft> fft_;
};

/// Seeded standard-normal vector, M-orthogonalized against constants, unit Euclidean norm.
Eigen::VectorXd interface_rhs(const OperatorPencil& pencil, std::uint64_t seed);

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

/// One row of any sweep. Fields a sweep does not produce stay NaN / -1 / empty.
struct SweepRecord {
    std::string sweep;
    double s = nan_value;
    double t = nan_value;
    double alpha = nan_value;
    double beta = nan_value;
    double mu = nan_value;
    double K = nan_value;
    int cells = -1;
    double h = nan_value;
    double tolerance = nan_value;
    int N = -1;
    /// AAA error on the normalized, unit-interval fit grid.
    double fit_error = nan_value;
    /// Partial-fraction error on the same grid.
    double pf_error = nan_value;
    /// max |normalized symbol| on the fit grid.
    double data_scale = nan_value;
    int fit_converged = -1;
    PoleAudit audit;
    int iterations_pcg = -1;
    int converged_pcg = -1;
    int iterations_minres = -1;
    int converged_minres = -1;
    double residual_minres = nan_value;
    double setup_seconds = nan_value;
    double factor_seconds = nan_value;
    double apply_seconds = nan_value;
    double solve_seconds = nan_value;
    int warnings = 0;
    std::string status = "ok";
};

struct PoleSweepConfig {
    double tolerance = 1e-12;
    std::vector<double> s_grid;
    std::vector<double> t_grid;
    std::vector<double> alpha_grid{1e-9, 1e-6, 1e-3, 1.0};
    std::vector<double> beta_grid{1e-10, 1e-6, 1e-2, 1e2};
    FitOptions fit;

    PoleSweepConfig();
};

/// Exponents -1, -0.8, ..., 1.
std::vector<double> default_exponent_grid();

std::vector<SweepRecord> pole_sweep(const PoleSweepConfig& cfg);

struct RobustnessConfig {
    std::vector<double> mu_grid{1e-6, 1e-4, 1e-2, 1.0, 1e2};
    std::vector<double> K_grid{1e-6, 1e-4, 1e-2, 1.0};
    std::vector<int> mesh_grid{64, 128, 256, 512};
    double tolerance = 1e-12;
    KrylovOptions krylov;
    bool run_pcg = true;
    bool run_minres = true;
    std::uint64_t seed = 2024;
    int dense_cap = default_dense_cap;
};

std::vector<SweepRecord> robustness_sweep(const RobustnessConfig& cfg);

struct ComplexityConfig {
    std::vector<int> mesh_grid{32, 64, 128, 256, 512, 1024};
    std::vector<double> tolerance_grid{1e-12};
    double mu = 1e-2;
    double K = 1e-6;
    KrylovOptions krylov;
    /// Timings are the minimum over this many repetitions.
    int repeats = 3;
    std::uint64_t seed = 2024;
};

/// setup_seconds: fit and pole extraction. factor_seconds: shifted factorizations.
/// solve_seconds: MINRES with S applied by FFT. apply_seconds: mean preconditioner apply.
std::vector<SweepRecord> complexity_study(const ComplexityConfig& cfg);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fracra
