#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "fracra/errors.hpp"
#include "fracra/pencil.hpp"

using namespace fracra;

namespace {

Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
    return v;
}

double max_generalized_eigenvalue(const OperatorPencil& p)
{
    const Eigen::MatrixXd A(p.A), M(p.M);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M);
    return es.eigenvalues().maxCoeff();
}

}  // namespace

TEST_CASE("periodic P1 rows on four cells")
{
    const auto p = assemble_interval(4, true);
    REQUIRE(p.size() == 4);
    const double h = 0.25;
    const Eigen::MatrixXd A(p.A), M(p.M);
    for (int i = 0; i < 4; ++i) {
        const int l = (i + 3) % 4, r = (i + 1) % 4;
        CHECK(A(i, i) == doctest::Approx(2.0 / h));
        CHECK(A(i, l) == doctest::Approx(-1.0 / h));
        CHECK(A(i, r) == doctest::Approx(-1.0 / h));
        CHECK(A(i, (i + 2) % 4) == 0.0);
        CHECK(M(i, i) == doctest::Approx(4.0 * h / 6.0));
        CHECK(M(i, l) == doctest::Approx(h / 6.0));
        CHECK(M(i, r) == doctest::Approx(h / 6.0));
    }
    CHECK(p.dimension == 1);
}

TEST_CASE("periodic stiffness annihilates constants and mass sums to one")
{
    for (int n : {3, 4, 7, 64, 257}) {
        const auto p = assemble_interval(n, true);
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
        CHECK((p.A * ones).cwiseAbs().maxCoeff() == 0.0);
        CHECK(ones.dot(p.M * ones) == doctest::Approx(1.0).epsilon(1e-13));
    }
    // Dirichlet: mass of the interior basis functions only.
    const auto d = assemble_interval(8, false);
    CHECK(d.size() == 7);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(7);
    CHECK(ones.dot(d.M * ones) < 1.0);
}

TEST_CASE("assembly rejects degenerate meshes")
{
    CHECK_THROWS_AS(assemble_interval(2, true), ValidationError);
    CHECK_THROWS_AS(assemble_interval(0, false), ValidationError);
    CHECK_THROWS_AS(assemble_unit_square(1), ValidationError);
}

TEST_CASE("unit square pencil")
{
    const auto two = assemble_unit_square(2);
    CHECK(two.size() == 1);
    CHECK(two.dimension == 2);
    for (int n : {2, 3, 8, 16}) {
        const auto p = assemble_unit_square(n);
        CHECK(p.size() == (n - 1) * (n - 1));
        const Eigen::MatrixXd A(p.A);
        CHECK((A - A.transpose()).norm() == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
        CHECK(Eigen::VectorXd::Ones(p.size()).dot(p.M * Eigen::VectorXd::Ones(p.size())) <= 1.0);
    }
}

TEST_CASE("mass matrices are positive definite")
{
    for (const auto& p : {assemble_interval(10, true), assemble_interval(10, false), assemble_unit_square(6)}) {
        const Eigen::MatrixXd M(p.M);
        Eigen::LLT<Eigen::MatrixXd> llt(M);
        CHECK(llt.info() == Eigen::Success);
    }
}

TEST_CASE("rho bound on the periodic mesh is 12/h^2 and attained")
{
    for (int n : {4, 16, 64, 200, 400}) {
        auto p = assemble_interval(n, true);
        const double h = 1.0 / n;
        CHECK(rho_upper_bound(p) == doctest::Approx(12.0 / (h * h)).epsilon(1e-12));
        CHECK(p.rho_bound == doctest::Approx(12.0 / (h * h)).epsilon(1e-12));
        // Even n: the alternating mode lambda = 12/h^2 is an exact eigenvector.
        CHECK(std::abs(max_generalized_eigenvalue(p) - p.rho_bound) <= 1e-8 * p.rho_bound);
    }
}

TEST_CASE("rho bound dominates the dense spectrum on every test pencil")
{
    std::vector<OperatorPencil> pencils;
    for (int n : {3, 5, 17, 100, 400}) {
        pencils.push_back(assemble_interval(n, true));
        pencils.push_back(assemble_interval(n, false));
    }
    for (int n : {2, 4, 9, 21}) pencils.push_back(assemble_unit_square(n));
    pencils.push_back(shift_pencil(assemble_interval(50, true), 1.0));
    for (auto& p : pencils) {
        rho_upper_bound(p);
        // The even periodic meshes attain the bound exactly; allow the eigensolver's own roundoff.
        CHECK_MESSAGE(p.rho_bound >= max_generalized_eigenvalue(p) * (1.0 - 1e-12), p.kind, " n=", p.size());
    }
}

TEST_CASE("doubling the 1D mesh multiplies the bound by four")
{
    for (int n : {8, 32, 100}) {
        auto a = assemble_interval(n, true);
        auto b = assemble_interval(2 * n, true);
        CHECK(rho_upper_bound(b) == doctest::Approx(4.0 * rho_upper_bound(a)).epsilon(1e-12));
    }
}

TEST_CASE("rho bound rejects a zero mass diagonal")
{
    auto p = assemble_interval(6, true);
    SparseMatrix M = p.M;
    M.coeffRef(2, 2) = 0.0;
    CHECK_THROWS_AS(compute_rho_bound(p.A, M, 1), ValidationError);
}

TEST_CASE("shifted periodic pencil is SPD with unit lower bound")
{
    const auto p = shift_pencil(assemble_interval(128, true), 1.0);
    CHECK(p.lambda_min_bound == 1.0);
    const auto spec = dense_spectrum(p);
    CHECK(spec.lambda.minCoeff() >= 1.0 - 1e-10);
    CHECK(spec.lambda.maxCoeff() <= p.rho_bound);
}

TEST_CASE("dense spectrum residuals")
{
    for (const auto& p : {assemble_interval(400, true), assemble_interval(150, false), assemble_unit_square(12)}) {
        const auto spec = dense_spectrum(p);
        const Eigen::MatrixXd A(p.A), M(p.M);
        const double anorm = A.norm();
        CHECK((A * spec.U - M * spec.U * spec.lambda.asDiagonal()).norm() <= 1e-8 * anorm);
        CHECK((spec.U.transpose() * M * spec.U - Eigen::MatrixXd::Identity(p.size(), p.size())).norm() <= 1e-8);
        CHECK((spec.MU - M * spec.U).norm() <= 1e-12 * spec.MU.norm());
    }
}

TEST_CASE("dense cap is enforced")
{
    CHECK_THROWS_AS(dense_spectrum(assemble_interval(64, true), 32), ValidationError);
}

TEST_CASE("dense_fractional_apply identities")
{
    const auto p = assemble_interval(120, true);
    const auto spec = dense_spectrum(p);
    const Eigen::VectorXd r = random_vector(p.size(), 1);
    const Eigen::VectorXd Ar = p.A * r, Mr = p.M * r;
    CHECK((dense_fractional_apply(spec, [](double l) { return l; }, r) - Ar).norm() <= 1e-10 * Ar.norm());
    CHECK((dense_fractional_apply(spec, [](double) { return 1.0; }, r) - Mr).norm() <= 1e-12 * Mr.norm());

    // Semigroup: A^{1/2} M^{-1} A^{1/2} = A.
    const auto q = assemble_interval(200, false);
    const auto qs = dense_spectrum(q);
    const Eigen::VectorXd s = random_vector(q.size(), 2);
    auto half = [](double l) { return std::sqrt(l); };
    const Eigen::VectorXd y = dense_fractional_apply(qs, half, s);
    Eigen::SimplicialLLT<SparseMatrix> mass(q.M);
    const Eigen::VectorXd z = dense_fractional_apply(qs, half, mass.solve(y));
    const Eigen::VectorXd As = q.A * s;
    CHECK((z - As).norm() <= 1e-8 * As.norm());
}

TEST_CASE("dense_inverse_fractional_apply identities")
{
    const auto p = shift_pencil(assemble_interval(200, true), 1.0);
    const auto spec = dense_spectrum(p);
    const Eigen::VectorXd r = random_vector(p.size(), 3);
    auto F = [](double l) { return 1e-2 / std::sqrt(l) + 1e-4 * std::sqrt(l); };
    const Eigen::VectorXd back =
        dense_inverse_fractional_apply(spec, [&](double l) { return 1.0 / F(l); }, dense_fractional_apply(spec, F, r));
    CHECK((back - r).norm() <= 1e-10 * r.norm());

    Eigen::SimplicialLLT<SparseMatrix> mass(p.M);
    CHECK((dense_inverse_fractional_apply(spec, [](double) { return 1.0; }, r) - mass.solve(r)).norm() <=
          1e-10 * mass.solve(r).norm());

    const auto sq = assemble_unit_square(10);
    const Eigen::VectorXd b = random_vector(sq.size(), 4);
    Eigen::SimplicialLDLT<SparseMatrix> stiff(sq.A);
    const Eigen::VectorXd exact = stiff.solve(b);
    CHECK((dense_inverse_fractional_apply(sq, [](double l) { return 1.0 / l; }, b) - exact).norm() <= 1e-10 * exact.norm());
}
