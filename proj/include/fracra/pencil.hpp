#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace fracra {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Symmetric stiffness/mass pair (A, M) from P1 elements.
struct OperatorPencil {
    SparseMatrix A;
    SparseMatrix M;
    /// Upper bound on the largest generalized eigenvalue of A u = lambda M u.
    double rho_bound = 0.0;
    /// Spatial dimension entering the bound (1 or 2).
    int dimension = 1;
    /// Lower bound on the generalized spectrum (0 when A may be singular).
    double lambda_min_bound = 0.0;
    std::string kind;

    Eigen::Index size() const { return A.rows(); }
};

/// P1 stiffness and consistent mass on a uniform mesh of [0, 1]. periodic closes the mesh into a
/// circle (n_cells unknowns); otherwise homogeneous Dirichlet nodes are eliminated (n_cells - 1 unknowns).
OperatorPencil assemble_interval(int n_cells, bool periodic);

/// P1 on the unit square, each grid cell split into two right triangles, boundary rows eliminated.
OperatorPencil assemble_unit_square(int n_cells_per_side);

/// (A + sigma M, M): shifts the spectrum by sigma.
OperatorPencil shift_pencil(const OperatorPencil& p, double sigma = 1.0);

/// d (d + 1) * max_i 1 / M_ii * ||A||_inf.
double compute_rho_bound(const SparseMatrix& A, const SparseMatrix& M, int dimension);

/// Computes the bound and stores it in p.rho_bound.
double rho_upper_bound(OperatorPencil& p);

/// Full generalized eigendecomposition A U = M U Lambda, U^T M U = I.
struct DenseSpectrum {
    Eigen::VectorXd lambda;
    Eigen::MatrixXd U;
    /// M * U, kept for applying M U G(Lambda) U^T M.
    Eigen::MatrixXd MU;
};

constexpr int default_dense_cap = 2000;

DenseSpectrum dense_spectrum(const OperatorPencil& p, int dense_cap = default_dense_cap);

using ScalarFunction = std::function<double(double)>;

/// M U g(Lambda) U^T M r.
Eigen::VectorXd dense_fractional_apply(const DenseSpectrum& spec, const ScalarFunction& g, const Eigen::VectorXd& r);
Eigen::VectorXd dense_fractional_apply(const OperatorPencil& p, const ScalarFunction& g, const Eigen::VectorXd& r,
                                       int dense_cap = default_dense_cap);

/// U f(Lambda) U^T b.
Eigen::VectorXd dense_inverse_fractional_apply(const DenseSpectrum& spec, const ScalarFunction& f, const Eigen::VectorXd& b);
Eigen::VectorXd dense_inverse_fractional_apply(const OperatorPencil& p, const ScalarFunction& f, const Eigen::VectorXd& b,
                                               int dense_cap = default_dense_cap);

}  // namespace fracra
