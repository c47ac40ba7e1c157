#include "fracra/raop.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "fracra/errors.hpp"

namespace fracra {

namespace {

using Complex = std::complex<double>;
using ComplexSparse = Eigen::SparseMatrix<Complex>;
using Clock = std::chrono::steady_clock;

std::string pole_string(std::size_t index, Complex p)
{
    std::ostringstream os;
    os.precision(17);
    os << "pole " << index << " (" << p.real() << (p.imag() < 0 ? " - " : " + ") << std::abs(p.imag()) << "i)";
    return os.str();
}

}  // namespace

struct RationalOperator::Impl {
    enum class Kind { Spd, Indefinite, Pair };
    struct Term {
        Kind kind;
        std::size_t pole_index;
        Complex p;
        Complex c;
        std::size_t slot;
    };

    std::vector<Term> terms;
    Eigen::SimplicialLLT<SparseMatrix> mass;

    std::vector<std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>>> ldlt;
    std::vector<std::unique_ptr<Eigen::SparseLU<SparseMatrix>>> lu;
    std::vector<std::unique_ptr<Eigen::SparseLU<ComplexSparse>>> clu;

    // Iterative solvers keep a reference to their matrix, so the matrices live here at stable addresses.
    std::vector<std::unique_ptr<SparseMatrix>> real_mats;
    std::vector<std::unique_ptr<ComplexSparse>> complex_mats;
    std::vector<std::unique_ptr<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper>>> cg_diag;
    std::vector<std::unique_ptr<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                                                         Eigen::IncompleteCholesky<double>>>> cg_ic;
    std::vector<std::unique_ptr<Eigen::BiCGSTAB<ComplexSparse>>> bicg;
    bool iterative = false;
    bool use_ic = false;

    mutable std::mutex timing_mutex;
    mutable std::vector<double> seconds;
};

RationalOperator::RationalOperator(PartialFraction<double> pf, OperatorPencil pencil, RaopOptions opts)
    : pf_(std::move(pf)), pencil_(std::move(pencil)), opts_(opts), impl_(std::make_unique<Impl>())
{
    const auto start = Clock::now();
    detail::require(pf_.poles.size() == pf_.residues.size(), "partial fraction poles and residues differ in length");
    detail::require(pencil_.A.rows() == pencil_.M.rows() && pencil_.A.rows() > 0, "pencil matrices must be nonempty and equal-sized");
    detail::require(opts_.inner_tolerance > 0.0, "inner tolerance must be positive");

    Impl& im = *impl_;
    im.iterative = opts_.backend == InnerBackend::Iterative;
    im.use_ic = opts_.inner_preconditioner == InnerPreconditioner::IncompleteCholesky;

    im.mass.compute(pencil_.M);
    if (im.mass.info() != Eigen::Success) throw NumericalError("mass matrix factorization failed (M not positive definite)");

    const double slack = opts_.nonpositive_slack * std::max(pencil_.rho_bound, 1.0);
    const std::size_t n_poles = pf_.poles.size();
    for (std::size_t i = 0; i < n_poles; ++i) {
        const Complex p = pf_.poles[i];
        const Complex c = pf_.residues[i];
        if (p.imag() < 0.0) {
            bool paired = false;
            for (std::size_t j = 0; j < n_poles; ++j) paired = paired || pf_.poles[j] == std::conj(p);
            if (!paired) throw ValidationError(pole_string(i, p) + " has no conjugate partner");
            continue;
        }
        if (p.imag() > 0.0) {
            ComplexSparse shifted = pencil_.A.cast<Complex>() - p * pencil_.M.cast<Complex>();
            shifted.makeCompressed();
            if (im.iterative) {
                im.complex_mats.push_back(std::make_unique<ComplexSparse>(std::move(shifted)));
                auto solver = std::make_unique<Eigen::BiCGSTAB<ComplexSparse>>();
                solver->setTolerance(opts_.inner_tolerance);
                solver->setMaxIterations(opts_.inner_max_iterations);
                solver->compute(*im.complex_mats.back());
                if (solver->info() != Eigen::Success) throw NumericalError("inner solver setup failed at " + pole_string(i, p));
                im.terms.push_back({Impl::Kind::Pair, i, p, c, im.bicg.size()});
                im.bicg.push_back(std::move(solver));
            } else {
                auto solver = std::make_unique<Eigen::SparseLU<ComplexSparse>>();
                solver->compute(shifted);
                if (solver->info() != Eigen::Success) throw NumericalError("complex factorization failed at " + pole_string(i, p));
                im.terms.push_back({Impl::Kind::Pair, i, p, c, im.clu.size()});
                im.clu.push_back(std::move(solver));
            }
            continue;
        }

        SparseMatrix shifted = (pencil_.A - p.real() * pencil_.M).pruned();
        shifted.makeCompressed();
        bool spd = false;
        const bool positive = p.real() > slack;
        {
            // Positive shifts always go through the direct SPD check; CG setup cannot detect indefiniteness.
            if (im.iterative && !positive) {
                im.real_mats.push_back(std::make_unique<SparseMatrix>(shifted));
                const SparseMatrix& mat = *im.real_mats.back();
                if (im.use_ic) {
                    auto solver = std::make_unique<typename decltype(im.cg_ic)::value_type::element_type>();
                    solver->setTolerance(opts_.inner_tolerance);
                    solver->setMaxIterations(opts_.inner_max_iterations);
                    solver->compute(mat);
                    spd = solver->info() == Eigen::Success;
                    if (spd) {
                        im.terms.push_back({Impl::Kind::Spd, i, p, c, im.cg_ic.size()});
                        im.cg_ic.push_back(std::move(solver));
                    }
                } else {
                    auto solver = std::make_unique<typename decltype(im.cg_diag)::value_type::element_type>();
                    solver->setTolerance(opts_.inner_tolerance);
                    solver->setMaxIterations(opts_.inner_max_iterations);
                    solver->compute(mat);
                    spd = solver->info() == Eigen::Success;
                    if (spd) {
                        im.terms.push_back({Impl::Kind::Spd, i, p, c, im.cg_diag.size()});
                        im.cg_diag.push_back(std::move(solver));
                    }
                }
                if (!spd) im.real_mats.pop_back();
            } else {
                auto solver = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>();
                solver->compute(shifted);
                spd = solver->info() == Eigen::Success && solver->vectorD().minCoeff() > 0.0;
                if (spd) {
                    im.terms.push_back({Impl::Kind::Spd, i, p, c, im.ldlt.size()});
                    im.ldlt.push_back(std::move(solver));
                }
            }
            if (!spd) {
                warnings_.push_back(pole_string(i, p) + (positive ? ": positive real pole" : ": nonpositive real pole") +
                                    "; shifted matrix is not positive definite, solved by sparse LU");
            } else if (positive) {
                warnings_.push_back(pole_string(i, p) + ": positive real pole below the spectrum; shifted matrix is positive definite");
            }
        }
        if (!spd) {
            auto solver = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
            solver->compute(shifted);
            if (solver->info() != Eigen::Success) throw NumericalError("factorization failed at " + pole_string(i, p));
            im.terms.push_back({Impl::Kind::Indefinite, i, p, c, im.lu.size()});
            im.lu.push_back(std::move(solver));
        }
    }
    im.seconds.assign(im.terms.size() + 1, 0.0);
    setup_seconds_ = std::chrono::duration<double>(Clock::now() - start).count();
}

RationalOperator::~RationalOperator() = default;

RationalOperator::RationalOperator(RationalOperator&& other) noexcept
    : pf_(std::move(other.pf_)),
      pencil_(std::move(other.pencil_)),
      opts_(other.opts_),
      impl_(std::move(other.impl_)),
      warnings_(std::move(other.warnings_)),
      setup_seconds_(other.setup_seconds_),
      apply_count_(other.apply_count_.load()),
      inner_solves_(other.inner_solves_.load())
{
}

RationalOperator& RationalOperator::operator=(RationalOperator&& other) noexcept
{
    pf_ = std::move(other.pf_);
    pencil_ = std::move(other.pencil_);
    opts_ = other.opts_;
    impl_ = std::move(other.impl_);
    warnings_ = std::move(other.warnings_);
    setup_seconds_ = other.setup_seconds_;
    apply_count_ = other.apply_count_.load();
    inner_solves_ = other.inner_solves_.load();
    return *this;
}

int RationalOperator::shifted_solver_count() const { return static_cast<int>(impl_->terms.size()); }

int RationalOperator::complex_solver_count() const
{
    int n = 0;
    for (const auto& t : impl_->terms) n += t.kind == Impl::Kind::Pair;
    return n;
}

std::vector<double> RationalOperator::per_shift_seconds() const
{
    std::lock_guard<std::mutex> lock(impl_->timing_mutex);
    return impl_->seconds;
}

Eigen::VectorXd RationalOperator::apply(const Eigen::VectorXd& r) const
{
    detail::require(r.size() == size(), "vector size does not match the pencil");
    const Impl& im = *impl_;
    std::vector<double> local_seconds(im.terms.size() + 1, 0.0);

    auto check_iterative = [&](auto& solver, const Impl::Term& t) {
        if (solver.info() != Eigen::Success)
            throw NumericalError("inner solve did not converge at " + pole_string(t.pole_index, t.p) +
                                 " (relative residual " + std::to_string(solver.error()) + ")");
    };

    auto start = Clock::now();
    Eigen::VectorXd z = pf_.c0 == 0.0 ? Eigen::VectorXd::Zero(r.size()) : Eigen::VectorXd(pf_.c0 * im.mass.solve(r));
    local_seconds.back() = std::chrono::duration<double>(Clock::now() - start).count();
    std::int64_t solves = pf_.c0 == 0.0 ? 0 : 1;

    for (std::size_t k = 0; k < im.terms.size(); ++k) {
        const Impl::Term& t = im.terms[k];
        start = Clock::now();
        switch (t.kind) {
        case Impl::Kind::Spd: {
            Eigen::VectorXd w;
            if (!im.iterative) {
                w = im.ldlt[t.slot]->solve(r);
            } else if (im.use_ic) {
                w = im.cg_ic[t.slot]->solve(r);
                check_iterative(*im.cg_ic[t.slot], t);
            } else {
                w = im.cg_diag[t.slot]->solve(r);
                check_iterative(*im.cg_diag[t.slot], t);
            }
            z += t.c.real() * w;
            break;
        }
        case Impl::Kind::Indefinite:
            z += t.c.real() * im.lu[t.slot]->solve(r);
            break;
        case Impl::Kind::Pair: {
            const Eigen::VectorXcd rc = r.cast<Complex>();
            Eigen::VectorXcd w;
            if (im.iterative) {
                w = im.bicg[t.slot]->solve(rc);
                check_iterative(*im.bicg[t.slot], t);
            } else {
                w = im.clu[t.slot]->solve(rc);
            }
            // c w + conj(c w) from the conjugate partner.
            z += 2.0 * (t.c * w).real();
            break;
        }
        }
        ++solves;
        local_seconds[k] = std::chrono::duration<double>(Clock::now() - start).count();
    }

    apply_count_.fetch_add(1);
    inner_solves_.fetch_add(solves);
    {
        std::lock_guard<std::mutex> lock(im.timing_mutex);
        for (std::size_t k = 0; k < local_seconds.size(); ++k) im.seconds[k] += local_seconds[k];
    }
    return z;
}

SpdAuditReport spd_audit(const RationalOperator& op, int trials, std::uint64_t seed)
{
    detail::require(trials >= 1, "audit needs at least one trial");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto random_unit = [&]() {
        Eigen::VectorXd v(op.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
        return Eigen::VectorXd(v / v.norm());
    };
    SpdAuditReport rep;
    rep.trials = trials;
    rep.min_rayleigh = std::numeric_limits<double>::infinity();
    rep.max_rayleigh = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < trials; ++k) {
        const Eigen::VectorXd r = random_unit();
        const Eigen::VectorXd q = random_unit();
        const Eigen::VectorXd zr = op.apply(r);
        const Eigen::VectorXd zq = op.apply(q);
        const double rq = r.dot(zr);
        rep.min_rayleigh = std::min(rep.min_rayleigh, rq);
        rep.max_rayleigh = std::max(rep.max_rayleigh, rq);
        const double lhs = zr.dot(q);
        const double rhs = r.dot(zq);
        const double defect = std::abs(lhs - rhs);
        rep.symmetry_defect = std::max(rep.symmetry_defect, defect);
        const double scale = std::abs(lhs) + std::abs(rhs);
        if (scale > 0.0) rep.relative_symmetry_defect = std::max(rep.relative_symmetry_defect, defect / scale);
    }
    return rep;
}

}  // namespace fracra
