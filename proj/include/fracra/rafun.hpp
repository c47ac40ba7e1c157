#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fracra/errors.hpp"

namespace fracra {

/// The scalar symbol f(x) = 1 / (alpha * x^s + beta * x^t) on (0, interval_upper].
template <typename Scalar = double>
struct FractionalSumFunction {
    Scalar alpha{1};
    Scalar beta{0};
    Scalar s{0};
    Scalar t{0};
    Scalar interval_upper{1};

    /// Denominator alpha * x^s + beta * x^t. Terms with a zero weight are skipped so 0 * inf never appears.
    Scalar denominator(Scalar x) const
    {
        using std::pow;
        Scalar d{0};
        if (alpha != Scalar(0)) d += alpha * pow(x, s);
        if (beta != Scalar(0)) d += beta * pow(x, t);
        return d;
    }
};

template <typename Scalar>
struct NormalizedFunction {
    FractionalSumFunction<Scalar> base;
    /// Unit-leading-weight copy: weights divided by leading_weight.
    FractionalSumFunction<Scalar> unit;
    Scalar gamma{0};
    Scalar leading_weight{1};
    /// True when beta was the larger weight and got divided out.
    bool swapped{false};
};

template <typename Scalar>
FractionalSumFunction<Scalar> make_function(Scalar alpha, Scalar beta, Scalar s, Scalar t, Scalar interval_upper = Scalar(1))
{
    using std::isfinite;
    detail::require(isfinite(alpha) && isfinite(beta) && isfinite(s) && isfinite(t) && isfinite(interval_upper),
                    "function parameters must be finite");
    detail::require(alpha >= Scalar(0) && beta >= Scalar(0), "weights must be nonnegative");
    detail::require(alpha + beta > Scalar(0), "at least one weight must be positive");
    detail::require(s >= Scalar(-1) && s <= Scalar(1), "exponent s must lie in [-1, 1]");
    detail::require(t >= Scalar(-1) && t <= Scalar(1), "exponent t must lie in [-1, 1]");
    detail::require(interval_upper > Scalar(0), "interval upper bound must be positive");
    return FractionalSumFunction<Scalar>{alpha, beta, s, t, interval_upper};
}

inline FractionalSumFunction<double> make_function(double alpha, double beta, double s, double t, double interval_upper = 1.0)
{
    return make_function<double>(alpha, beta, s, t, interval_upper);
}

template <typename Scalar>
Scalar eval(const FractionalSumFunction<Scalar>& f, Scalar x)
{
    detail::require(x > Scalar(0), "evaluation point must be positive");
    detail::require(x <= f.interval_upper, "evaluation point exceeds the interval upper bound");
    return Scalar(1) / f.denominator(x);
}

template <typename Scalar>
NormalizedFunction<Scalar> normalize(const FractionalSumFunction<Scalar>& f)
{
    NormalizedFunction<Scalar> n;
    n.base = f;
    n.swapped = f.beta > f.alpha;
    n.leading_weight = n.swapped ? f.beta : f.alpha;
    n.unit = f;
    if (n.swapped) {
        n.unit.beta = Scalar(1);
        n.unit.alpha = f.alpha / f.beta;
        n.gamma = n.unit.alpha;
    } else {
        n.unit.alpha = Scalar(1);
        n.unit.beta = f.beta / f.alpha;
        n.gamma = n.unit.beta;
    }
    return n;
}

template <typename Scalar>
Scalar eval(const NormalizedFunction<Scalar>& n, Scalar x)
{
    return eval(n.unit, x);
}

/// Same symbol on the unit interval: g(y) = f(rho * y), rho = interval_upper.
template <typename Scalar>
FractionalSumFunction<Scalar> rescale_to_unit(const FractionalSumFunction<Scalar>& f)
{
    using std::pow;
    const Scalar rho = f.interval_upper;
    FractionalSumFunction<Scalar> g = f;
    if (g.alpha != Scalar(0)) g.alpha = f.alpha * pow(rho, f.s);
    if (g.beta != Scalar(0)) g.beta = f.beta * pow(rho, f.t);
    g.interval_upper = Scalar(1);
    return g;
}

template <typename Scalar>
using Samples = std::vector<std::pair<Scalar, Scalar>>;

/// Log-spaced abscissae on [floor_ratio * upper, upper] paired with exact evaluations.
template <typename Scalar>
Samples<Scalar> sample_grid(const FractionalSumFunction<Scalar>& f, int n_points, Scalar floor_ratio)
{
    using std::log;
    using std::exp;
    detail::require(n_points >= 2, "a sample grid needs at least two points");
    detail::require(floor_ratio > Scalar(0) && floor_ratio < Scalar(1), "floor ratio must lie in (0, 1)");
    const Scalar lo = floor_ratio * f.interval_upper;
    const Scalar log_lo = log(lo);
    const Scalar log_hi = log(f.interval_upper);
    Samples<Scalar> out;
    out.reserve(static_cast<std::size_t>(n_points));
    for (int k = 0; k < n_points; ++k) {
        Scalar x;
        if (k == 0) {
            x = lo;
        } else if (k == n_points - 1) {
            x = f.interval_upper;
        } else {
            x = exp(log_lo + (log_hi - log_lo) * Scalar(k) / Scalar(n_points - 1));
        }
        out.emplace_back(x, eval(f, x));
    }
    return out;
}

/// Uniform abscissae k * upper / n_points, k = 1..n_points (the singular endpoint 0 excluded).
template <typename Scalar>
Samples<Scalar> uniform_grid(const FractionalSumFunction<Scalar>& f, int n_points)
{
    detail::require(n_points >= 2, "a sample grid needs at least two points");
    Samples<Scalar> out;
    out.reserve(static_cast<std::size_t>(n_points));
    for (int k = 1; k <= n_points; ++k) {
        const Scalar x = (k == n_points) ? f.interval_upper : f.interval_upper * Scalar(k) / Scalar(n_points);
        out.emplace_back(x, eval(f, x));
    }
    return out;
}

/// Grid used for fitting: uniform nodes, optionally refined below the first node by a log-spaced tail
/// reaching down to tail_floor_ratio * upper.
struct GridSpec {
    int uniform_points = 4096;
    int tail_points = 0;
    double tail_floor_ratio = 1e-14;
};

template <typename Scalar>
Samples<Scalar> fit_grid(const FractionalSumFunction<Scalar>& f, const GridSpec& spec)
{
    Samples<Scalar> out = uniform_grid(f, spec.uniform_points);
    const Scalar first = out.front().first;
    const Scalar floor_x = Scalar(spec.tail_floor_ratio) * f.interval_upper;
    if (spec.tail_points >= 2 && floor_x < first) {
        // Tail spans [floor, first) with the last log node dropped (it coincides with the first uniform node).
        FractionalSumFunction<Scalar> tail_fn = f;
        tail_fn.interval_upper = first;
        Samples<Scalar> tail = sample_grid(tail_fn, spec.tail_points + 1, floor_x / first);
        tail.pop_back();
        for (auto& [x, y] : tail) y = eval(f, x);
        tail.insert(tail.end(), out.begin(), out.end());
        out = std::move(tail);
    }
    return out;
}

}  // namespace fracra
