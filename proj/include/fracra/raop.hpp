#pragma once

#include <atomic>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracra/aaa.hpp"
#include "fracra/pencil.hpp"

namespace fracra {

enum class InnerBackend { Direct, Iterative };
enum class InnerPreconditioner { Diagonal, IncompleteCholesky };

struct RaopOptions {
    InnerBackend backend = InnerBackend::Direct;
    InnerPreconditioner inner_preconditioner = InnerPreconditioner::Diagonal;
    /// Relative residual tolerance of iterative inner solves.
    double inner_tolerance = 1e-10;
    int inner_max_iterations = 20000;
    /// Real poles with p > nonpositive_slack * rho_bound are reported as positive. Every real shift is
    /// first factored as SPD; only a failed SPD factorization falls back to sparse LU.
    double nonpositive_slack = 1e-10;
};

/// z = c0 M^{-1} r + sum_i c_i (A - p_i M)^{-1} r, with one prepared solver per real pole, one per
/// conjugate pair, and one for M. Immutable after construction; apply may be called concurrently.
class RationalOperator {
public:
    RationalOperator(PartialFraction<double> pf, OperatorPencil pencil, RaopOptions opts = {});
    ~RationalOperator();
    RationalOperator(RationalOperator&&) noexcept;
    RationalOperator& operator=(RationalOperator&&) noexcept;

    Eigen::VectorXd apply(const Eigen::VectorXd& r) const;
    Eigen::VectorXd operator()(const Eigen::VectorXd& r) const { return apply(r); }

    const PartialFraction<double>& partial_fraction() const { return pf_; }
    const OperatorPencil& pencil() const { return pencil_; }
    Eigen::Index size() const { return pencil_.size(); }

    /// Shifted solvers (real poles plus conjugate pairs), excluding the mass solver.
    int shifted_solver_count() const;
    /// Shifted solvers of which are complex (one per conjugate pair).
    int complex_solver_count() const;
    /// Shifted solvers plus the mass solver.
    int factorization_count() const { return shifted_solver_count() + 1; }

    const std::vector<std::string>& warnings() const { return warnings_; }
    double setup_seconds() const { return setup_seconds_; }

    std::int64_t apply_count() const { return apply_count_.load(); }
    std::int64_t inner_solve_count() const { return inner_solves_.load(); }
    /// Accumulated wall time per shifted term (pole order), then the mass solve last.
    std::vector<double> per_shift_seconds() const;

private:
    struct Impl;
    PartialFraction<double> pf_;
    OperatorPencil pencil_;
    RaopOptions opts_;
    std::unique_ptr<Impl> impl_;
    std::vector<std::string> warnings_;
    double setup_seconds_ = 0.0;
    mutable std::atomic<std::int64_t> apply_count_{0};
    mutable std::atomic<std::int64_t> inner_solves_{0};
};

struct SpdAuditReport {
    int trials = 0;
    /// min over trials of r^T z / r^T r with z = apply(r).
    double min_rayleigh = 0.0;
    double max_rayleigh = 0.0;
    /// max |<apply(r), q> - <r, apply(q)>| over unit random pairs.
    double symmetry_defect = 0.0;
    /// symmetry_defect relative to |<apply(r), q>| + |<r, apply(q)>|.
    double relative_symmetry_defect = 0.0;
    bool positive_definite() const { return min_rayleigh > 0.0; }
};

SpdAuditReport spd_audit(const RationalOperator& op, int trials, std::uint64_t seed = 12345);

}  // namespace fracra
