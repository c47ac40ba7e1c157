#pragma once

#include <algorithm>
#include <optional>
#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "fracra/errors.hpp"
#include "fracra/rafun.hpp"

namespace fracra {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// r(x) = sum_j w_j f_j / (x - z_j)  /  sum_j w_j / (x - z_j)
template <typename Scalar>
struct BarycentricForm {
    VectorX<Scalar> support_points;
    VectorX<Scalar> support_values;
    VectorX<Scalar> weights;
    /// max |y - r(x)| over the fit samples.
    Scalar achieved_error{0};
    /// max |y| over the fit samples.
    Scalar data_scale{0};
    Scalar tolerance{0};
    bool converged{false};
    /// Best error seen after each greedy step (non-increasing).
    std::vector<Scalar> error_history;
    /// Fit samples, sorted by abscissa. Kept for residue refinement and validation.
    VectorX<Scalar> grid_x;
    VectorX<Scalar> grid_y;

    int degree() const { return static_cast<int>(support_points.size()) - 1; }

    Scalar operator()(Scalar x) const
    {
        Scalar num{0};
        Scalar den{0};
        for (Eigen::Index j = 0; j < support_points.size(); ++j) {
            if (x == support_points[j]) return support_values[j];
            const Scalar c = weights[j] / (x - support_points[j]);
            num += c * support_values[j];
            den += c;
        }
        return num / den;
    }

    /// Value at infinity, finite for the (m-1, m-1) barycentric type.
    Scalar value_at_infinity() const
    {
        return weights.dot(support_values) / weights.sum();
    }
};

struct AaaOptions {
    double tolerance = 1e-12;
    int max_degree = 30;
    /// Stop once the error reaches noise_factor * eps * max|y|, whichever of this and tolerance is larger.
    double noise_factor = 64.0;
};

namespace detail {

template <typename Scalar>
VectorX<Scalar> smallest_right_singular_vector(const MatrixX<Scalar>& a)
{
    const Eigen::Index cols = a.cols();
    if (a.rows() >= cols) {
        // Thin QR first: the SVD then runs on a cols x cols triangle instead of the tall matrix.
        Eigen::HouseholderQR<MatrixX<Scalar>> qr(a);
        MatrixX<Scalar> r = qr.matrixQR().topRows(cols).template triangularView<Eigen::Upper>();
        Eigen::JacobiSVD<MatrixX<Scalar>> svd(r, Eigen::ComputeFullV);
        return svd.matrixV().col(cols - 1);
    }
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(a, Eigen::ComputeFullV);
    return svd.matrixV().col(cols - 1);
}

}  // namespace detail

/// Greedy AAA fit on real samples. Support points are chosen where the current error is largest
/// (ties go to the smallest abscissa); weights span the smallest right singular vector of the
/// Loewner matrix restricted to the remaining samples. Returns the best iterate encountered.
/// AAA with a hook: once an iterate meets the target it is offered to accept(); if rejected the greedy
/// iteration continues for up to extra_steps further steps, returning the first accepted iterate that
/// still meets the target, or else the first converged one.
template <typename Scalar, typename Accept>
BarycentricForm<Scalar> aaa_fit(const Samples<Scalar>& samples, const AaaOptions& opts, Accept&& accept, int extra_steps)
{
    using std::abs;
    using std::isfinite;
    using std::max;
    detail::require(samples.size() >= 2, "AAA needs at least two samples");
    detail::require(opts.tolerance > 0.0, "AAA tolerance must be positive");
    detail::require(opts.max_degree >= 1, "AAA max degree must be at least 1");

    Samples<Scalar> sorted = samples;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const Eigen::Index n_samples = static_cast<Eigen::Index>(sorted.size());
    VectorX<Scalar> x(n_samples);
    VectorX<Scalar> y(n_samples);
    for (Eigen::Index i = 0; i < n_samples; ++i) {
        x[i] = sorted[static_cast<std::size_t>(i)].first;
        y[i] = sorted[static_cast<std::size_t>(i)].second;
        detail::require(isfinite(x[i]) && isfinite(y[i]), "AAA samples must be finite");
        if (i > 0) detail::require(x[i] > x[i - 1], "AAA sample abscissae must be pairwise distinct");
    }

    const Scalar scale = y.cwiseAbs().maxCoeff();
    const Scalar noise = Scalar(opts.noise_factor) * std::numeric_limits<Scalar>::epsilon() * scale;
    const Scalar target = max(Scalar(opts.tolerance), noise);
    const Eigen::Index max_support = std::min<Eigen::Index>(opts.max_degree + 1, n_samples);

    MatrixX<Scalar> cauchy = MatrixX<Scalar>::Zero(n_samples, max_support);
    std::vector<bool> is_support(static_cast<std::size_t>(n_samples), false);
    std::vector<Eigen::Index> support_idx;
    VectorX<Scalar> approx = VectorX<Scalar>::Constant(n_samples, y.mean());

    BarycentricForm<Scalar> best;
    best.achieved_error = std::numeric_limits<Scalar>::infinity();
    std::vector<Scalar> history;
    std::optional<BarycentricForm<Scalar>> first_converged;
    int steps_after = 0;

    while (static_cast<Eigen::Index>(support_idx.size()) < max_support) {
        Eigen::Index pick = -1;
        Scalar pick_err = Scalar(-1);
        for (Eigen::Index i = 0; i < n_samples; ++i) {
            if (is_support[static_cast<std::size_t>(i)]) continue;
            const Scalar e = abs(y[i] - approx[i]);
            const Scalar key = isfinite(e) ? e : std::numeric_limits<Scalar>::max();
            if (key > pick_err) {
                pick_err = key;
                pick = i;
            }
        }
        if (pick < 0) break;

        const Eigen::Index m = static_cast<Eigen::Index>(support_idx.size());
        support_idx.push_back(pick);
        is_support[static_cast<std::size_t>(pick)] = true;
        for (Eigen::Index i = 0; i < n_samples; ++i)
            cauchy(i, m) = (i == pick) ? Scalar(0) : Scalar(1) / (x[i] - x[pick]);

        const Eigen::Index cols = m + 1;
        VectorX<Scalar> f_support(cols);
        for (Eigen::Index k = 0; k < cols; ++k) f_support[k] = y[support_idx[static_cast<std::size_t>(k)]];

        MatrixX<Scalar> loewner(n_samples - cols, cols);
        Eigen::Index row = 0;
        for (Eigen::Index i = 0; i < n_samples; ++i) {
            if (is_support[static_cast<std::size_t>(i)]) continue;
            for (Eigen::Index k = 0; k < cols; ++k) loewner(row, k) = (y[i] - f_support[k]) * cauchy(i, k);
            ++row;
        }

        VectorX<Scalar> w;
        if (loewner.rows() == 0) {
            w = VectorX<Scalar>::Ones(cols) / std::sqrt(Scalar(cols));
        } else {
            w = detail::smallest_right_singular_vector(loewner);
        }
        if (!w.allFinite() || w.cwiseAbs().maxCoeff() == Scalar(0))
            throw NumericalError("AAA: degenerate barycentric weight solve at degree " + std::to_string(m));

        const VectorX<Scalar> num = cauchy.leftCols(cols) * w.cwiseProduct(f_support);
        const VectorX<Scalar> den = cauchy.leftCols(cols) * w;
        Scalar err{0};
        for (Eigen::Index i = 0; i < n_samples; ++i) {
            approx[i] = is_support[static_cast<std::size_t>(i)] ? y[i] : num[i] / den[i];
            const Scalar e = abs(y[i] - approx[i]);
            err = isfinite(e) ? max(err, e) : std::numeric_limits<Scalar>::infinity();
        }

        if (err < best.achieved_error) {
            best.support_points.resize(cols);
            best.support_values = f_support;
            best.weights = w;
            for (Eigen::Index k = 0; k < cols; ++k) best.support_points[k] = x[support_idx[static_cast<std::size_t>(k)]];
            best.achieved_error = err;
        }
        history.push_back(best.achieved_error);
        if (err <= target) {
            BarycentricForm<Scalar> cand;
            cand.support_points.resize(cols);
            for (Eigen::Index k = 0; k < cols; ++k) cand.support_points[k] = x[support_idx[static_cast<std::size_t>(k)]];
            cand.support_values = f_support;
            cand.weights = w;
            cand.achieved_error = err;
            cand.data_scale = scale;
            cand.tolerance = Scalar(opts.tolerance);
            cand.converged = true;
            cand.error_history = history;
            cand.grid_x = x;
            cand.grid_y = y;
            if (accept(static_cast<const BarycentricForm<Scalar>&>(cand))) return cand;
            if (!first_converged) first_converged = std::move(cand);
        }
        if (first_converged && steps_after++ >= extra_steps) break;
    }
    if (first_converged) return std::move(*first_converged);

    if (best.support_points.size() == 0)
        throw NumericalError("AAA: no finite iterate was produced");
    best.data_scale = scale;
    best.tolerance = Scalar(opts.tolerance);
    best.converged = best.achieved_error <= target;
    best.error_history = std::move(history);
    best.grid_x = std::move(x);
    best.grid_y = std::move(y);
    return best;
}

template <typename Scalar>
BarycentricForm<Scalar> aaa_fit(const Samples<Scalar>& samples, const AaaOptions& opts)
{
    return aaa_fit(samples, opts, [](const BarycentricForm<Scalar>&) { return true; }, 0);
}

template <typename Scalar>
BarycentricForm<Scalar> aaa_fit(const Samples<Scalar>& samples, double tolerance, int max_degree)
{
    AaaOptions opts;
    opts.tolerance = tolerance;
    opts.max_degree = max_degree;
    return aaa_fit(samples, opts);
}

struct PoleAudit {
    int real_negative = 0;
    int real_zero = 0;
    int real_positive = 0;
    /// Poles with nonzero imaginary part (both members of each conjugate pair are counted).
    int complex = 0;
    /// Pole pairs closer than 1e-8 relative distance.
    int near_coincident = 0;

    int total() const { return real_negative + real_zero + real_positive + complex; }
    bool all_real_nonpositive() const { return real_positive == 0 && complex == 0; }
};

/// R(x) = c0 + sum_i c_i / (x - p_i). Poles are stored ascending by |p|, conjugate pairs adjacent
/// with the upper half-plane member first.
template <typename Scalar>
struct PartialFraction {
    using Complex = std::complex<Scalar>;
    Scalar c0{0};
    std::vector<Complex> residues;
    std::vector<Complex> poles;
    Scalar tolerance{0};
    /// max |y - R(x)| on the fit samples, measured after conversion.
    Scalar achieved_error{0};
    PoleAudit audit;

    int degree() const { return static_cast<int>(poles.size()); }
};

enum class ResidueMethod { Limit, LeastSquares };

struct PoleOptions {
    ResidueMethod residues = ResidueMethod::LeastSquares;
    /// Poles whose |residue| falls below this fraction of the largest |residue| are dropped.
    double froissart_threshold = 1e-13;
    /// |p| at or below this counts as a zero pole in the audit.
    double zero_tolerance = 1e-10;
    /// Reweighted least-squares passes after the plain residue solve (0 = plain least squares).
    int lawson_passes = 10;
    /// Try dropping poles off the nonpositive real axis; kept only if the refit still meets the tolerance.
    bool prune_inadmissible = true;
};

template <typename Scalar>
PoleAudit audit_poles(const std::vector<std::complex<Scalar>>& poles, Scalar zero_tolerance)
{
    using std::abs;
    PoleAudit audit;
    for (const auto& p : poles) {
        if (p.imag() != Scalar(0)) {
            ++audit.complex;
        } else if (abs(p.real()) <= zero_tolerance) {
            ++audit.real_zero;
        } else if (p.real() < Scalar(0)) {
            ++audit.real_negative;
        } else {
            ++audit.real_positive;
        }
    }
    for (std::size_t i = 0; i < poles.size(); ++i) {
        for (std::size_t j = i + 1; j < poles.size(); ++j) {
            if (poles[i] == std::conj(poles[j]) && poles[i].imag() != Scalar(0)) continue;
            const Scalar scale = std::max({abs(poles[i]), abs(poles[j]), Scalar(zero_tolerance)});
            if (abs(poles[i] - poles[j]) <= Scalar(1e-8) * scale) ++audit.near_coincident;
        }
    }
    return audit;
}

template <typename Scalar>
Scalar eval_pf(const PartialFraction<Scalar>& pf, Scalar x)
{
    Scalar value = pf.c0;
    for (std::size_t i = 0; i < pf.poles.size(); ++i) {
        const auto& p = pf.poles[i];
        if (p.imag() == Scalar(0)) {
            if (x == p.real()) throw ValidationError("partial fraction evaluated at a pole");
            value += pf.residues[i].real() / (x - p.real());
        } else if (p.imag() > Scalar(0)) {
            value += Scalar(2) * (pf.residues[i] / (std::complex<Scalar>(x) - p)).real();
        }
    }
    return value;
}

namespace detail {

template <typename Scalar>
std::complex<Scalar> denominator_at(const BarycentricForm<Scalar>& b, std::complex<Scalar> x, std::complex<Scalar>* derivative)
{
    std::complex<Scalar> d{0}, dd{0};
    for (Eigen::Index j = 0; j < b.weights.size(); ++j) {
        const std::complex<Scalar> inv = Scalar(1) / (x - b.support_points[j]);
        d += b.weights[j] * inv;
        dd -= b.weights[j] * inv * inv;
    }
    if (derivative) *derivative = dd;
    return d;
}

template <typename Scalar>
std::complex<Scalar> refine_pole(const BarycentricForm<Scalar>& b, std::complex<Scalar> p)
{
    using std::abs;
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    const bool real = p.imag() == Scalar(0);
    std::complex<Scalar> dd;
    std::complex<Scalar> d = denominator_at(b, p, &dd);
    for (int it = 0; it < 30; ++it) {
        if (!std::isfinite(abs(d)) || dd == std::complex<Scalar>(0)) break;
        std::complex<Scalar> step = d / dd;
        if (real) step.imag(Scalar(0));
        const std::complex<Scalar> next = p - step;
        std::complex<Scalar> dd_next;
        const std::complex<Scalar> d_next = denominator_at(b, next, &dd_next);
        if (!(abs(d_next) < abs(d))) break;
        p = next;
        d = d_next;
        dd = dd_next;
        if (abs(step) <= Scalar(4) * eps * abs(p)) break;
    }
    return p;
}

/// Least-squares c0 and residues for fixed poles on the fit samples. Conjugate pairs enter
/// through Re/Im parts so the fitted residues come out exactly conjugate. Lawson passes stop
/// once the max residual reaches target.
template <typename Scalar>
bool least_squares_residues(const BarycentricForm<Scalar>& b, const std::vector<std::complex<Scalar>>& poles,
                            Scalar target, int lawson_passes, Scalar& c0, std::vector<std::complex<Scalar>>& residues)
{
    using Complex = std::complex<Scalar>;
    std::vector<Eigen::Index> column_of(poles.size(), -1);
    Eigen::Index cols = 1;
    for (std::size_t i = 0; i < poles.size(); ++i) {
        if (poles[i].imag() < Scalar(0)) continue;
        column_of[i] = cols;
        cols += poles[i].imag() == Scalar(0) ? 1 : 2;
    }
    const Eigen::Index n = b.grid_x.size();
    MatrixX<Scalar> a(n, cols);
    VectorX<Scalar> rhs(n);
    Eigen::Index rows = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
        const Scalar xr = b.grid_x[r];
        a(rows, 0) = Scalar(1);
        bool ok = true;
        for (std::size_t i = 0; i < poles.size() && ok; ++i) {
            const Eigen::Index c = column_of[i];
            if (c < 0) continue;
            const Complex inv = Scalar(1) / (Complex(xr) - poles[i]);
            if (poles[i].imag() == Scalar(0)) {
                a(rows, c) = inv.real();
            } else {
                a(rows, c) = Scalar(2) * inv.real();
                a(rows, c + 1) = Scalar(-2) * inv.imag();
            }
            ok = std::isfinite(inv.real()) && std::isfinite(inv.imag());
        }
        if (!ok) continue;
        rhs[rows] = b.grid_y[r];
        ++rows;
    }
    if (rows < cols) return false;
    MatrixX<Scalar> lhs = a.topRows(rows);
    const VectorX<Scalar> col_scale = lhs.cwiseAbs().colwise().maxCoeff().transpose();
    for (Eigen::Index c = 0; c < cols; ++c)
        if (col_scale[c] > Scalar(0)) lhs.col(c) /= col_scale[c];
    const VectorX<Scalar> y = rhs.head(rows);

    // Plain least squares, then a few Lawson reweightings to push the max error down.
    VectorX<Scalar> row_weight = VectorX<Scalar>::Ones(rows);
    VectorX<Scalar> sol;
    Scalar best_err = std::numeric_limits<Scalar>::infinity();
    for (int pass = 0; pass <= lawson_passes; ++pass) {
        const VectorX<Scalar> sw = row_weight.cwiseSqrt();
        Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(sw.asDiagonal() * lhs);
        const VectorX<Scalar> trial = qr.solve(sw.cwiseProduct(y));
        if (!trial.allFinite()) break;
        const VectorX<Scalar> err = (lhs * trial - y).cwiseAbs();
        const Scalar e = err.maxCoeff();
        if (e < best_err) {
            best_err = e;
            sol = trial;
        }
        if (best_err <= target || !(e > Scalar(0))) break;
        row_weight = row_weight.cwiseProduct(err);
        row_weight /= row_weight.sum();
    }
    if (sol.size() == 0) return false;
    for (Eigen::Index c = 0; c < cols; ++c)
        if (col_scale[c] > Scalar(0)) sol[c] /= col_scale[c];
    if (!sol.allFinite()) return false;

    c0 = sol[0];
    residues.assign(poles.size(), Complex(0));
    for (std::size_t i = 0; i < poles.size(); ++i) {
        const Eigen::Index c = column_of[i];
        if (c < 0) continue;
        if (poles[i].imag() == Scalar(0)) {
            residues[i] = Complex(sol[c], Scalar(0));
        } else {
            residues[i] = Complex(sol[c], sol[c + 1]);
        }
    }
    for (std::size_t i = 0; i < poles.size(); ++i) {
        if (poles[i].imag() >= Scalar(0)) continue;
        for (std::size_t j = 0; j < poles.size(); ++j)
            if (poles[j] == std::conj(poles[i])) residues[i] = std::conj(residues[j]);
    }
    return true;
}

template <typename Scalar>
Scalar grid_error(const BarycentricForm<Scalar>& b, const PartialFraction<Scalar>& pf)
{
    using std::abs;
    Scalar err{0};
    for (Eigen::Index i = 0; i < b.grid_x.size(); ++i) {
        Scalar v;
        try {
            v = eval_pf(pf, b.grid_x[i]);
        } catch (const ValidationError&) {
            return std::numeric_limits<Scalar>::infinity();
        }
        const Scalar e = abs(v - b.grid_y[i]);
        if (!std::isfinite(e)) return std::numeric_limits<Scalar>::infinity();
        err = std::max(err, e);
    }
    return err;
}

/// Sort ascending by |p|, pairs adjacent (upper half-plane first). Residues follow their poles.
template <typename Scalar>
void order_terms(std::vector<std::complex<Scalar>>& poles, std::vector<std::complex<Scalar>>& residues)
{
    std::vector<std::size_t> idx(poles.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const Scalar ma = std::abs(poles[a]);
        const Scalar mb = std::abs(poles[b]);
        if (ma != mb) return ma < mb;
        if (poles[a].real() != poles[b].real()) return poles[a].real() < poles[b].real();
        return poles[a].imag() > poles[b].imag();
    });
    std::vector<std::complex<Scalar>> p2, r2;
    for (auto i : idx) {
        p2.push_back(poles[i]);
        r2.push_back(residues[i]);
    }
    poles = std::move(p2);
    residues = std::move(residues.empty() ? residues : r2);
}

/// Poles of a barycentric form (m >= 2) with their limit residues n(p)/d'(p).
template <typename Scalar>
void barycentric_poles(const BarycentricForm<Scalar>& b, std::vector<std::complex<Scalar>>& poles,
                       std::vector<std::complex<Scalar>>& limit)
{
    using Complex = std::complex<Scalar>;
    using std::abs;
    const Eigen::Index m = b.support_points.size();
    // When the weights sum to ~0 the interpolant grows at infinity (e.g. exactly linear data). The
    // corresponding pole leaves every finite window; it is dropped below and the fit error records the loss.
    MatrixX<Scalar> e = MatrixX<Scalar>::Zero(m + 1, m + 1);
    MatrixX<Scalar> bm = MatrixX<Scalar>::Identity(m + 1, m + 1);
    bm(0, 0) = Scalar(0);
    for (Eigen::Index j = 0; j < m; ++j) {
        e(0, j + 1) = b.weights[j];
        e(j + 1, 0) = Scalar(1);
        e(j + 1, j + 1) = b.support_points[j];
    }
    Eigen::GeneralizedEigenSolver<MatrixX<Scalar>> ges(e, bm, false);
    if (ges.info() != Eigen::Success) throw NumericalError("partial fraction: pole eigenproblem did not converge");

    // m + 1 eigenvalues, two of them infinite; keep the m - 1 of smallest magnitude.
    std::vector<Complex> candidates;
    for (Eigen::Index k = 0; k < m + 1; ++k) {
        const Complex alpha = ges.alphas()[k];
        const Scalar beta = ges.betas()[k];
        candidates.push_back(beta == Scalar(0) ? Complex(std::numeric_limits<Scalar>::infinity()) : alpha / beta);
    }
    std::sort(candidates.begin(), candidates.end(), [](const Complex& a, const Complex& c) {
        const Scalar ma = std::isfinite(abs(a)) ? abs(a) : std::numeric_limits<Scalar>::infinity();
        const Scalar mc = std::isfinite(abs(c)) ? abs(c) : std::numeric_limits<Scalar>::infinity();
        return ma < mc;
    });
    const Scalar support_scale = std::max(b.support_points.cwiseAbs().maxCoeff(), Scalar(1));
    poles.clear();
    for (Eigen::Index k = 0; k < m - 1; ++k) {
        const Complex p = candidates[static_cast<std::size_t>(k)];
        if (!std::isfinite(abs(p)) || abs(p) > Scalar(1e12) * support_scale) continue;
        poles.push_back(p);
    }

    // Newton polish; conjugate pairs are refined once and mirrored.
    std::vector<Complex> refined;
    for (const auto& p : poles) {
        if (p.imag() < Scalar(0)) continue;
        const Complex q = detail::refine_pole(b, p);
        if (p.imag() == Scalar(0)) {
            refined.push_back(q);
        } else {
            const Complex upper(q.real(), abs(q.imag()));
            refined.push_back(upper);
            refined.push_back(std::conj(upper));
        }
    }
    poles = std::move(refined);

    limit.assign(poles.size(), Complex(0));
    for (std::size_t i = 0; i < poles.size(); ++i) {
        Complex dd;
        detail::denominator_at(b, poles[i], &dd);
        Complex num{0};
        for (Eigen::Index j = 0; j < m; ++j) num += b.weights[j] * b.support_values[j] / (poles[i] - b.support_points[j]);
        limit[i] = num / dd;
        if (poles[i].imag() == Scalar(0)) limit[i].imag(Scalar(0));
    }
    for (std::size_t i = 0; i < poles.size(); ++i) {
        if (poles[i].imag() >= Scalar(0)) continue;
        for (std::size_t j = 0; j < poles.size(); ++j)
            if (poles[j] == std::conj(poles[i])) limit[i] = std::conj(limit[j]);
    }
}

}  // namespace detail

/// Converts a barycentric interpolant to c0 + sum c_i / (x - p_i).
/// Poles are the finite eigenvalues of the arrowhead pencil of the barycentric denominator,
/// polished by Newton steps on the denominator itself.
template <typename Scalar>
PartialFraction<Scalar> to_partial_fraction(const BarycentricForm<Scalar>& b, const PoleOptions& opts = {})
{
    using Complex = std::complex<Scalar>;
    using std::abs;
    detail::require(b.weights.size() == b.support_points.size() && b.support_points.size() == b.support_values.size(),
                    "barycentric form arrays must have equal length");
    detail::require(b.weights.size() >= 1, "barycentric form has no support points");

    PartialFraction<Scalar> pf;
    pf.tolerance = b.tolerance;
    const Eigen::Index m = b.support_points.size();

    if (m == 1) {
        pf.c0 = b.support_values[0];
        pf.achieved_error = b.grid_x.size() ? detail::grid_error(b, pf) : Scalar(0);
        return pf;
    }

    std::vector<Complex> poles, limit;
    detail::barycentric_poles(b, poles, limit);
    const Scalar limit_c0 = b.value_at_infinity();

    // The barycentric form itself already reaches achieved_error; Lawson need not do better.
    const Scalar lawson_target = std::max(Scalar(0.5) * b.tolerance, b.achieved_error);
    auto assemble = [&](const std::vector<Complex>& keep_poles, const std::vector<Complex>& fallback_residues) {
        PartialFraction<Scalar> out;
        out.tolerance = b.tolerance;
        out.poles = keep_poles;
        out.residues = fallback_residues;
        out.c0 = limit_c0;
        if (opts.residues == ResidueMethod::LeastSquares && b.grid_x.size() > 0) {
            Scalar c0;
            std::vector<Complex> res;
            if (detail::least_squares_residues(b, keep_poles, lawson_target, opts.lawson_passes, c0, res)) {
                PartialFraction<Scalar> trial = out;
                trial.c0 = c0;
                trial.residues = res;
                const Scalar e_trial = detail::grid_error(b, trial);
                const Scalar e_limit = detail::grid_error(b, out);
                if (!(e_limit < e_trial)) out = trial;
            }
        }
        return out;
    };

    pf = assemble(poles, limit);

    // Froissart cleanup: drop negligible residues, refit the rest.
    Scalar max_res{0};
    for (const auto& r : pf.residues) max_res = std::max(max_res, abs(r));
    std::vector<Complex> kept_poles, kept_limit;
    for (std::size_t i = 0; i < pf.poles.size(); ++i) {
        if (abs(pf.residues[i]) >= Scalar(opts.froissart_threshold) * max_res) {
            kept_poles.push_back(pf.poles[i]);
            kept_limit.push_back(limit[i]);
        }
    }
    if (kept_poles.size() != pf.poles.size() && b.grid_x.size() > 0) {
        // Re-validate: a large far-away residue can make genuine poles look negligible.
        PartialFraction<Scalar> cleaned = assemble(kept_poles, kept_limit);
        const Scalar e_before = detail::grid_error(b, pf);
        if (detail::grid_error(b, cleaned) <= std::max(Scalar(2) * e_before, b.tolerance)) pf = std::move(cleaned);
    } else if (kept_poles.size() != pf.poles.size()) {
        pf = assemble(kept_poles, kept_limit);
    }

    // Poles with positive real part or nonzero imaginary part that the data does not need.
    if (opts.prune_inadmissible && b.grid_x.size() > 0) {
        const Scalar zero_tol = Scalar(opts.zero_tolerance);
        auto inadmissible = [&](const Complex& p) { return p.imag() != Scalar(0) || p.real() > zero_tol; };
        auto limit_of = [&](const Complex& p) {
            for (std::size_t i = 0; i < poles.size(); ++i)
                if (poles[i] == p) return limit[i];
            return Complex(0);
        };
        auto without = [&](const std::vector<Complex>& drop) {
            std::vector<Complex> keep, lim;
            for (const auto& p : pf.poles) {
                if (std::find(drop.begin(), drop.end(), p) != drop.end()) continue;
                keep.push_back(p);
                lim.push_back(limit_of(p));
            }
            return assemble(keep, lim);
        };
        const Scalar budget = std::max(Scalar(2) * detail::grid_error(b, pf), b.tolerance);
        std::vector<Complex> bad;
        for (const auto& p : pf.poles)
            if (inadmissible(p)) bad.push_back(p);
        if (!bad.empty()) {
            PartialFraction<Scalar> all = without(bad);
            if (detail::grid_error(b, all) <= budget) {
                pf = std::move(all);
            } else {
                for (const auto& p : bad) {
                    if (p.imag() < Scalar(0)) continue;
                    std::vector<Complex> drop{p};
                    if (p.imag() > Scalar(0)) drop.push_back(std::conj(p));
                    PartialFraction<Scalar> trial = without(drop);
                    if (detail::grid_error(b, trial) <= budget) pf = std::move(trial);
                }
            }
        }
    }

    detail::order_terms(pf.poles, pf.residues);
    pf.achieved_error = b.grid_x.size() ? detail::grid_error(b, pf) : Scalar(0);
    pf.audit = audit_poles(pf.poles, Scalar(opts.zero_tolerance));
    return pf;
}

template <typename Scalar>
Scalar sup_error(const PartialFraction<Scalar>& pf, const FractionalSumFunction<Scalar>& f, const std::vector<Scalar>& grid)
{
    using std::abs;
    Scalar err{0};
    for (const Scalar x : grid) err = std::max(err, abs(eval(f, x) - eval_pf(pf, x)));
    return err;
}

/// Poles and residues of a fit on (0, 1] mapped to (0, rho]: c_i -> rho c_i, p_i -> rho p_i.
template <typename Scalar>
PartialFraction<Scalar> scale_to_interval(const PartialFraction<Scalar>& pf, Scalar rho)
{
    detail::require(rho > Scalar(0), "interval scale must be positive");
    PartialFraction<Scalar> out = pf;
    for (auto& c : out.residues) c *= rho;
    for (auto& p : out.poles) p *= rho;
    return out;
}

/// Undo the unit-leading-weight normalization: R = R_unit / leading_weight.
template <typename Scalar>
PartialFraction<Scalar> denormalize(const PartialFraction<Scalar>& pf, Scalar leading_weight)
{
    detail::require(leading_weight > Scalar(0), "leading weight must be positive");
    PartialFraction<Scalar> out = pf;
    out.c0 /= leading_weight;
    for (auto& c : out.residues) c /= leading_weight;
    out.achieved_error /= leading_weight;
    return out;
}

struct FitOptions {
    AaaOptions aaa;
    GridSpec grid;
    PoleOptions poles;
    /// Extra greedy steps allowed past convergence in search of an iterate whose poles are all real and
    /// nonpositive (0 disables the search).
    int admissible_extra_steps = 6;
};

template <typename Scalar>
struct FitResult {
    NormalizedFunction<Scalar> normalized;
    BarycentricForm<Scalar> barycentric;
    /// Approximant of the normalized symbol on (0, 1].
    PartialFraction<Scalar> unit;
    /// Approximant of f itself on (0, interval_upper].
    PartialFraction<Scalar> pf;
    double seconds = 0.0;
};

/// Rescale to (0, 1], normalize, fit, extract poles, then map back to f on (0, interval_upper].
template <typename Scalar>
FitResult<Scalar> fit_function(const FractionalSumFunction<Scalar>& f, const FitOptions& opts = {})
{
    const auto start = std::chrono::steady_clock::now();
    FitResult<Scalar> out;
    out.normalized = normalize(rescale_to_unit(f));
    const auto samples = fit_grid(out.normalized.unit, opts.grid);
    // Converged iterates whose poles leave the nonpositive real axis are passed over for a few more
    // greedy steps, provided the partial fraction stays as accurate as the first converged one.
    std::optional<PartialFraction<Scalar>> first_pf, accepted_pf;
    auto accept = [&](const BarycentricForm<Scalar>& b) {
        if (first_pf && b.support_points.size() >= 2) {
            // Cheap screen on the raw poles before a full conversion.
            std::vector<std::complex<Scalar>> poles, limit;
            detail::barycentric_poles(b, poles, limit);
            Scalar max_res{0};
            for (const auto& r : limit) max_res = std::max(max_res, std::abs(r));
            for (std::size_t i = 0; i < poles.size(); ++i) {
                if (std::abs(limit[i]) < Scalar(opts.poles.froissart_threshold) * max_res) continue;
                if (poles[i].imag() != Scalar(0) || poles[i].real() > Scalar(opts.poles.zero_tolerance)) return false;
            }
        }
        auto pf = to_partial_fraction(b, opts.poles);
        if (!first_pf) {
            first_pf = pf;
            if (pf.audit.all_real_nonpositive()) {
                accepted_pf = std::move(pf);
                return true;
            }
            return false;
        }
        const Scalar budget = std::max(first_pf->achieved_error, Scalar(opts.aaa.tolerance));
        if (pf.audit.all_real_nonpositive() && pf.achieved_error <= budget) {
            accepted_pf = std::move(pf);
            return true;
        }
        return false;
    };
    out.barycentric = aaa_fit(samples, opts.aaa, accept, opts.admissible_extra_steps);
    if (accepted_pf) {
        out.unit = std::move(*accepted_pf);
    } else if (first_pf) {
        out.unit = std::move(*first_pf);
    } else {
        out.unit = to_partial_fraction(out.barycentric, opts.poles);
    }
    out.pf = scale_to_interval(denormalize(out.unit, out.normalized.leading_weight), f.interval_upper);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace fracra
