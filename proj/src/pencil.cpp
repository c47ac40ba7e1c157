#include "fracra/pencil.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fracra/errors.hpp"

namespace fracra {

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(Eigen::Index n, const std::vector<Triplet>& t)
{
    SparseMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    m.prune(0.0);
    m.makeCompressed();
    return m;
}

double inf_norm(const SparseMatrix& a)
{
    Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(a.rows());
    for (Eigen::Index k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it) row_sums[it.row()] += std::abs(it.value());
    return row_sums.size() ? row_sums.maxCoeff() : 0.0;
}

}  // namespace

OperatorPencil assemble_interval(int n_cells, bool periodic)
{
    detail::require(n_cells >= 3, "interval mesh needs at least 3 cells");
    const double h = 1.0 / n_cells;
    const int n = periodic ? n_cells : n_cells - 1;
    // Global node k sits at x = k h; Dirichlet drops nodes 0 and n_cells.
    auto index = [&](int node) -> int {
        if (periodic) return node % n_cells;
        return (node == 0 || node == n_cells) ? -1 : node - 1;
    };
    const double ka[2][2] = {{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}};
    const double ma[2][2] = {{2.0 * h / 6.0, h / 6.0}, {h / 6.0, 2.0 * h / 6.0}};
    std::vector<Triplet> ta, tm;
    for (int e = 0; e < n_cells; ++e) {
        const int nodes[2] = {index(e), index(e + 1)};
        for (int i = 0; i < 2; ++i) {
            if (nodes[i] < 0) continue;
            for (int j = 0; j < 2; ++j) {
                if (nodes[j] < 0) continue;
                ta.emplace_back(nodes[i], nodes[j], ka[i][j]);
                tm.emplace_back(nodes[i], nodes[j], ma[i][j]);
            }
        }
    }
    OperatorPencil p;
    p.A = from_triplets(n, ta);
    p.M = from_triplets(n, tm);
    p.dimension = 1;
    p.kind = periodic ? "interval-periodic" : "interval-dirichlet";
    p.lambda_min_bound = 0.0;
    rho_upper_bound(p);
    return p;
}

OperatorPencil assemble_unit_square(int n_cells_per_side)
{
    detail::require(n_cells_per_side >= 2, "square mesh needs at least 2 cells per side");
    const int n = n_cells_per_side;
    const double h = 1.0 / n;
    const int interior = n - 1;
    auto index = [&](int i, int j) -> int {
        if (i <= 0 || j <= 0 || i >= n || j >= n) return -1;
        return (j - 1) * interior + (i - 1);
    };
    // Right triangle with the right angle at the first vertex; the local stiffness is independent of h.
    const double k_loc[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
    const double area = 0.5 * h * h;
    std::vector<Triplet> ta, tm;
    auto add = [&](const int (&v)[3]) {
        for (int a = 0; a < 3; ++a) {
            if (v[a] < 0) continue;
            for (int b = 0; b < 3; ++b) {
                if (v[b] < 0) continue;
                ta.emplace_back(v[a], v[b], k_loc[a][b]);
                tm.emplace_back(v[a], v[b], area / 12.0 * (a == b ? 2.0 : 1.0));
            }
        }
    };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int lower[3] = {index(i, j), index(i + 1, j), index(i, j + 1)};
            const int upper[3] = {index(i + 1, j + 1), index(i, j + 1), index(i + 1, j)};
            add(lower);
            add(upper);
        }
    }
    OperatorPencil p;
    p.A = from_triplets(static_cast<Eigen::Index>(interior) * interior, ta);
    p.M = from_triplets(static_cast<Eigen::Index>(interior) * interior, tm);
    p.dimension = 2;
    p.kind = "square-dirichlet";
    rho_upper_bound(p);
    return p;
}

OperatorPencil shift_pencil(const OperatorPencil& p, double sigma)
{
    detail::require(std::isfinite(sigma) && sigma >= 0.0, "shift must be finite and nonnegative");
    OperatorPencil out = p;
    out.A = (p.A + sigma * p.M).pruned();
    out.A.makeCompressed();
    out.lambda_min_bound = p.lambda_min_bound + sigma;
    out.kind = p.kind + "-shifted";
    rho_upper_bound(out);
    return out;
}

double compute_rho_bound(const SparseMatrix& A, const SparseMatrix& M, int dimension)
{
    detail::require(A.rows() == A.cols() && M.rows() == M.cols() && A.rows() == M.rows(), "pencil matrices must be square and of equal size");
    detail::require(dimension == 1 || dimension == 2 || dimension == 3, "spatial dimension must be 1, 2 or 3");
    const Eigen::VectorXd diag = M.diagonal();
    detail::require(diag.size() > 0 && (diag.array() > 0.0).all(), "mass matrix diagonal must be positive");
    const double inv_diag = diag.cwiseInverse().maxCoeff();
    return dimension * (dimension + 1) * inv_diag * inf_norm(A);
}

double rho_upper_bound(OperatorPencil& p)
{
    p.rho_bound = compute_rho_bound(p.A, p.M, p.dimension);
    return p.rho_bound;
}

DenseSpectrum dense_spectrum(const OperatorPencil& p, int dense_cap)
{
    detail::require(p.size() <= dense_cap, "pencil of size " + std::to_string(p.size()) + " exceeds the dense cap " +
                                               std::to_string(dense_cap));
    const Eigen::MatrixXd a = Eigen::MatrixXd(p.A);
    const Eigen::MatrixXd m = Eigen::MatrixXd(p.M);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, m, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) throw NumericalError("dense generalized eigensolver failed");
    DenseSpectrum s;
    // Singular A (periodic, unshifted) yields roundoff-negative eigenvalues; fractional powers need >= 0.
    s.lambda = es.eigenvalues().cwiseMax(0.0);
    s.U = es.eigenvectors();
    s.MU = m * s.U;
    return s;
}

namespace {

Eigen::VectorXd apply_symbol(const Eigen::VectorXd& lambda, const ScalarFunction& g)
{
    Eigen::VectorXd out(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) out[i] = g(lambda[i]);
    return out;
}

}  // namespace

Eigen::VectorXd dense_fractional_apply(const DenseSpectrum& spec, const ScalarFunction& g, const Eigen::VectorXd& r)
{
    detail::require(r.size() == spec.U.rows(), "vector size does not match the pencil");
    const Eigen::VectorXd coeff = spec.MU.transpose() * r;
    return spec.MU * apply_symbol(spec.lambda, g).cwiseProduct(coeff);
}

Eigen::VectorXd dense_fractional_apply(const OperatorPencil& p, const ScalarFunction& g, const Eigen::VectorXd& r, int dense_cap)
{
    return dense_fractional_apply(dense_spectrum(p, dense_cap), g, r);
}

Eigen::VectorXd dense_inverse_fractional_apply(const DenseSpectrum& spec, const ScalarFunction& f, const Eigen::VectorXd& b)
{
    detail::require(b.size() == spec.U.rows(), "vector size does not match the pencil");
    const Eigen::VectorXd coeff = spec.U.transpose() * b;
    return spec.U * apply_symbol(spec.lambda, f).cwiseProduct(coeff);
}

Eigen::VectorXd dense_inverse_fractional_apply(const OperatorPencil& p, const ScalarFunction& f, const Eigen::VectorXd& b,
                                               int dense_cap)
{
    return dense_inverse_fractional_apply(dense_spectrum(p, dense_cap), f, b);
}

}  // namespace fracra
