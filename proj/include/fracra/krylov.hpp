#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracra/errors.hpp"

namespace fracra {

enum class StopMode { Absolute, Relative };
enum class SolveStatus { Converged, MaxIterations, Breakdown };

inline const char* to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Breakdown: return "breakdown";
    }
    return "unknown";
}

struct KrylovOptions {
    double tolerance = 1e-10;
    int max_iterations = 500;
    StopMode stop = StopMode::Absolute;
};

struct SolveReport {
    std::string method;
    int iterations = 0;
    bool converged = false;
    SolveStatus status = SolveStatus::MaxIterations;
    /// Preconditioned residual norms sqrt(r^T P r), starting with the initial residual.
    std::vector<double> preconditioned_residual_history;
    double wall_time = 0.0;
    std::int64_t inner_solve_total = 0;
    double tolerance = 0.0;
    StopMode stop = StopMode::Absolute;
};

template <typename Scalar>
struct KrylovResult {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
    SolveReport report;
};

namespace detail {

template <typename Scalar>
Scalar stop_threshold(const KrylovOptions& opts, Scalar initial)
{
    return opts.stop == StopMode::Absolute ? Scalar(opts.tolerance) : Scalar(opts.tolerance) * initial;
}

inline void validate_krylov(const KrylovOptions& opts)
{
    require(opts.tolerance > 0.0, "Krylov tolerance must be positive");
    require(opts.max_iterations >= 1, "Krylov max iterations must be at least 1");
}

}  // namespace detail

/// Preconditioned conjugate gradients from a zero initial guess. Stops on sqrt(r^T P r).
/// Nonpositive curvature p^T A p <= 0 or r^T P r < 0 ends with SolveStatus::Breakdown.
template <typename Scalar, typename SystemOp, typename PrecondOp>
KrylovResult<Scalar> pcg(const SystemOp& system, const PrecondOp& precond, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
                         const KrylovOptions& opts = {})
{
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using std::sqrt;
    detail::validate_krylov(opts);
    const auto start = std::chrono::steady_clock::now();
    KrylovResult<Scalar> out;
    SolveReport& rep = out.report;
    rep.method = "pcg";
    rep.tolerance = opts.tolerance;
    rep.stop = opts.stop;

    Vector x = Vector::Zero(b.size());
    Vector r = b;
    Vector z = precond(r);
    Scalar rz = r.dot(z);
    if (rz < Scalar(0)) {
        rep.status = SolveStatus::Breakdown;
    } else {
        const Scalar threshold = detail::stop_threshold(opts, sqrt(rz));
        rep.preconditioned_residual_history.push_back(double(sqrt(rz)));
        Vector p = z;
        if (sqrt(rz) <= threshold) {
            rep.status = SolveStatus::Converged;
        }
        while (rep.status != SolveStatus::Converged && rep.iterations < opts.max_iterations) {
            const Vector ap = system(p);
            const Scalar curvature = p.dot(ap);
            if (!(curvature > Scalar(0))) {
                rep.status = SolveStatus::Breakdown;
                break;
            }
            const Scalar step = rz / curvature;
            x += step * p;
            r -= step * ap;
            z = precond(r);
            const Scalar rz_next = r.dot(z);
            ++rep.iterations;
            if (rz_next < Scalar(0) || !std::isfinite(double(rz_next))) {
                rep.status = SolveStatus::Breakdown;
                break;
            }
            rep.preconditioned_residual_history.push_back(double(sqrt(rz_next)));
            if (sqrt(rz_next) <= threshold) {
                rep.status = SolveStatus::Converged;
                break;
            }
            p = z + (rz_next / rz) * p;
            rz = rz_next;
        }
    }
    rep.converged = rep.status == SolveStatus::Converged;
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.x = std::move(x);
    return out;
}

/// Preconditioned MINRES (Lanczos in the P-inner product with Givens QR) from a zero initial guess.
/// |eta| tracks the preconditioned residual norm sqrt(r^T P r) and is non-increasing.
template <typename Scalar, typename SystemOp, typename PrecondOp>
KrylovResult<Scalar> minres(const SystemOp& system, const PrecondOp& precond, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
                            const KrylovOptions& opts = {})
{
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using std::abs;
    using std::sqrt;
    detail::validate_krylov(opts);
    const auto start = std::chrono::steady_clock::now();
    KrylovResult<Scalar> out;
    SolveReport& rep = out.report;
    rep.method = "minres";
    rep.tolerance = opts.tolerance;
    rep.stop = opts.stop;

    const Eigen::Index n = b.size();
    Vector x = Vector::Zero(n);
    Vector v_prev = Vector::Zero(n);
    Vector v = b;
    Vector z = precond(v);
    Scalar gamma = z.dot(v);
    if (gamma < Scalar(0)) {
        rep.status = SolveStatus::Breakdown;
        rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.x = std::move(x);
        return out;
    }
    gamma = sqrt(gamma);
    Scalar gamma_prev(1);
    Scalar eta = gamma;
    Scalar s_prev(0), s(0), c_prev(1), c(1);
    Vector w_prev = Vector::Zero(n);
    Vector w = Vector::Zero(n);
    const Scalar threshold = detail::stop_threshold(opts, gamma);
    rep.preconditioned_residual_history.push_back(double(abs(eta)));
    if (abs(eta) <= threshold) rep.status = SolveStatus::Converged;

    while (rep.status != SolveStatus::Converged && rep.iterations < opts.max_iterations) {
        if (!(gamma > Scalar(0))) {
            rep.status = SolveStatus::Breakdown;
            break;
        }
        z /= gamma;
        const Vector az = system(z);
        const Scalar delta = az.dot(z);
        Vector v_next = az - (delta / gamma) * v - (gamma / gamma_prev) * v_prev;
        Vector z_next = precond(v_next);
        Scalar gamma_next = z_next.dot(v_next);
        if (gamma_next < Scalar(0) || !std::isfinite(double(gamma_next))) {
            rep.status = SolveStatus::Breakdown;
            break;
        }
        gamma_next = sqrt(gamma_next);

        const Scalar a0 = c * delta - c_prev * s * gamma;
        const Scalar a1 = sqrt(a0 * a0 + gamma_next * gamma_next);
        const Scalar a2 = s * delta + c_prev * c * gamma;
        const Scalar a3 = s_prev * gamma;
        if (!(a1 > Scalar(0))) {
            rep.status = SolveStatus::Breakdown;
            break;
        }
        const Scalar c_next = a0 / a1;
        const Scalar s_next = gamma_next / a1;
        Vector w_next = (z - a3 * w_prev - a2 * w) / a1;
        x += c_next * eta * w_next;
        eta = -s_next * eta;
        ++rep.iterations;
        rep.preconditioned_residual_history.push_back(double(abs(eta)));

        v_prev = std::move(v);
        v = std::move(v_next);
        z = std::move(z_next);
        w_prev = std::move(w);
        w = std::move(w_next);
        gamma_prev = gamma;
        gamma = gamma_next;
        c_prev = c;
        c = c_next;
        s_prev = s;
        s = s_next;

        if (abs(eta) <= threshold) rep.status = SolveStatus::Converged;
    }
    rep.converged = rep.status == SolveStatus::Converged;
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.x = std::move(x);
    return out;
}

}  // namespace fracra
