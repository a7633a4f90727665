#include "lp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <vector>

#include "errors.hpp"

namespace storval::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite_bound(double v) { return std::abs(v) < kInfinity; }

double normalize_bound(double v) {
    if (v >= kInfinity) return kInf;
    if (v <= -kInfinity) return -kInf;
    return v;
}

// Dense LU of the basis (partial pivoting) followed by a product-form eta
// file. FTRAN/BTRAN apply the etas on top of the last factorization.
class BasisFactor {
public:
    void factor(const Matrix& basis) {
        const Eigen::Index p = basis.rows();
        lu_ = basis;
        perm_.resize(static_cast<std::size_t>(p));
        for (Eigen::Index i = 0; i < p; ++i) perm_[static_cast<std::size_t>(i)] = i;
        for (Eigen::Index k = 0; k < p; ++k) {
            Eigen::Index piv = k;
            double best = std::abs(lu_(k, k));
            for (Eigen::Index i = k + 1; i < p; ++i) {
                if (std::abs(lu_(i, k)) > best) {
                    best = std::abs(lu_(i, k));
                    piv = i;
                }
            }
            if (best < 1e-13) throw LpFailure("basis matrix is numerically singular");
            if (piv != k) {
                lu_.row(k).swap(lu_.row(piv));
                std::swap(perm_[static_cast<std::size_t>(k)], perm_[static_cast<std::size_t>(piv)]);
            }
            for (Eigen::Index i = k + 1; i < p; ++i) {
                lu_(i, k) /= lu_(k, k);
                const double lik = lu_(i, k);
                if (lik == 0.0) continue;
                for (Eigen::Index j = k + 1; j < p; ++j) lu_(i, j) -= lik * lu_(k, j);
            }
        }
        etas_.clear();
    }

    Vector ftran(const Vector& a) const {
        const Eigen::Index p = lu_.rows();
        Vector x(p);
        for (Eigen::Index i = 0; i < p; ++i) x(i) = a(perm_[static_cast<std::size_t>(i)]);
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = 0; j < i; ++j) x(i) -= lu_(i, j) * x(j);
        for (Eigen::Index i = p - 1; i >= 0; --i) {
            for (Eigen::Index j = i + 1; j < p; ++j) x(i) -= lu_(i, j) * x(j);
            x(i) /= lu_(i, i);
        }
        for (const Eta& e : etas_) {
            const double xr = x(e.row) / e.column(e.row);
            for (Eigen::Index i = 0; i < p; ++i)
                if (i != e.row) x(i) -= e.column(i) * xr;
            x(e.row) = xr;
        }
        return x;
    }

    Vector btran(const Vector& c) const {
        const Eigen::Index p = lu_.rows();
        Vector y = c;
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double acc = y(it->row);
            for (Eigen::Index i = 0; i < p; ++i)
                if (i != it->row) acc -= it->column(i) * y(i);
            y(it->row) = acc / it->column(it->row);
        }
        // U' s = y
        Vector s(p);
        for (Eigen::Index i = 0; i < p; ++i) {
            double acc = y(i);
            for (Eigen::Index j = 0; j < i; ++j) acc -= lu_(j, i) * s(j);
            s(i) = acc / lu_(i, i);
        }
        // L' t = s
        for (Eigen::Index i = p - 1; i >= 0; --i)
            for (Eigen::Index j = i + 1; j < p; ++j) s(i) -= lu_(j, i) * s(j);
        Vector out(p);
        for (Eigen::Index i = 0; i < p; ++i) out(perm_[static_cast<std::size_t>(i)]) = s(i);
        return out;
    }

    void update(Eigen::Index row, Vector column) { etas_.push_back({row, std::move(column)}); }
    std::size_t update_count() const { return etas_.size(); }

private:
    struct Eta {
        Eigen::Index row;
        Vector column;
    };
    Matrix lu_;
    std::vector<Eigen::Index> perm_;
    std::vector<Eta> etas_;
};

enum class VarState { Basic, AtLower, AtUpper, FreeZero };

class Simplex {
public:
    Simplex(const LinearProgram& lp, const LpOptions& options)
        : lp_(lp), opt_(options), n_(static_cast<Eigen::Index>(lp.variable_count())),
          p_(static_cast<Eigen::Index>(lp.row_count())) {
        const Eigen::Index total = n_ + p_;
        lo_.resize(total);
        hi_.resize(total);
        x_ = Vector::Zero(total);
        state_.assign(static_cast<std::size_t>(total), VarState::AtLower);
        art_sign_ = Vector::Ones(p_);
        for (Eigen::Index j = 0; j < n_; ++j) {
            lo_(j) = normalize_bound(lp.lower_bounds(j));
            hi_(j) = normalize_bound(lp.upper_bounds(j));
            if (std::isfinite(lo_(j))) {
                x_(j) = lo_(j);
                state_[idx(j)] = VarState::AtLower;
            } else if (std::isfinite(hi_(j))) {
                x_(j) = hi_(j);
                state_[idx(j)] = VarState::AtUpper;
            } else {
                x_(j) = 0.0;
                state_[idx(j)] = VarState::FreeZero;
            }
        }
        Vector residual = lp.eq_rhs - lp.eq_matrix * x_.head(n_);
        head_.resize(static_cast<std::size_t>(p_));
        for (Eigen::Index i = 0; i < p_; ++i) {
            art_sign_(i) = residual(i) < 0.0 ? -1.0 : 1.0;
            const Eigen::Index a = n_ + i;
            lo_(a) = 0.0;
            hi_(a) = kInf;
            x_(a) = std::abs(residual(i));
            state_[idx(a)] = VarState::Basic;
            head_[idx(i)] = a;
        }
        pivot_limit_bland_ = 10 * static_cast<std::size_t>(n_ + p_);
        pivot_limit_hard_ = pivot_limit_bland_ + 100 * static_cast<std::size_t>((n_ + p_) * (n_ + p_)) + 10000;
        refactor();
    }

    LpSolution run() {
        LpSolution sol;
        // Phase one: minimize the sum of artificials.
        cost_ = Vector::Zero(n_ + p_);
        cost_.tail(p_).setOnes();
        if (iterate() == Outcome::Unbounded)
            throw LpFailure("phase one reported unbounded on LP '" + lp_.name + "'");
        const double infeasibility = x_.tail(p_).sum();
        const double scale = std::max(1.0, lp_.eq_rhs.size() ? lp_.eq_rhs.cwiseAbs().maxCoeff() : 0.0);
        if (infeasibility > opt_.feasibility_tol * scale) {
            sol.status = LpStatus::Infeasible;
            sol.certificate = duals();
            sol.primal = x_.head(n_);
            sol.iterations = iterations_;
            return sol;
        }

        // Phase two: artificials pinned at zero.
        for (Eigen::Index i = 0; i < p_; ++i) {
            const Eigen::Index a = n_ + i;
            hi_(a) = 0.0;
            if (state_[idx(a)] != VarState::Basic) {
                x_(a) = 0.0;
                state_[idx(a)] = VarState::AtLower;
            }
        }
        cost_.head(n_) = lp_.objective;
        cost_.tail(p_).setZero();
        refactor();
        if (iterate() == Outcome::Unbounded) {
            sol.status = LpStatus::Unbounded;
            sol.certificate = ray_.head(n_);
            sol.primal = x_.head(n_);
            sol.iterations = iterations_;
            return sol;
        }

        refactor();
        sol.status = LpStatus::Optimal;
        sol.primal = x_.head(n_);
        for (Eigen::Index j = 0; j < n_; ++j) {
            // Snap nonbasic values to their bounds exactly.
            if (state_[idx(j)] == VarState::AtLower) sol.primal(j) = lo_(j);
            if (state_[idx(j)] == VarState::AtUpper) sol.primal(j) = hi_(j);
        }
        sol.objective_value = lp_.objective.dot(sol.primal);
        sol.eq_duals = duals();
        sol.reduced_costs = lp_.objective - lp_.eq_matrix.transpose() * sol.eq_duals;
        sol.iterations = iterations_;
        if (opt_.dump_tableau) sol.tableau = tableau();
        return sol;
    }

private:
    enum class Outcome { Optimal, Unbounded };

    static std::size_t idx(Eigen::Index i) { return static_cast<std::size_t>(i); }

    Vector column(Eigen::Index j) const {
        if (j < n_) return lp_.eq_matrix.col(j);
        Vector e = Vector::Zero(p_);
        e(j - n_) = art_sign_(j - n_);
        return e;
    }

    void refactor() {
        Matrix basis(p_, p_);
        for (Eigen::Index i = 0; i < p_; ++i) basis.col(i) = column(head_[idx(i)]);
        factor_.factor(basis);
        Vector rhs = lp_.eq_rhs;
        for (Eigen::Index j = 0; j < n_ + p_; ++j)
            if (state_[idx(j)] != VarState::Basic && x_(j) != 0.0) rhs -= column(j) * x_(j);
        const Vector xb = factor_.ftran(rhs);
        for (Eigen::Index i = 0; i < p_; ++i) x_(head_[idx(i)]) = xb(i);
    }

    Vector duals() const {
        Vector cb(p_);
        for (Eigen::Index i = 0; i < p_; ++i) cb(i) = cost_(head_[idx(i)]);
        return factor_.btran(cb);
    }

    Outcome iterate() {
        for (;;) {
            if (factor_.update_count() >= opt_.refactor_interval) refactor();
            const bool bland = iterations_ >= pivot_limit_bland_;
            const Vector y = duals();

            Eigen::Index enter = -1;
            double enter_score = 0.0;
            double direction = 0.0;
            for (Eigen::Index j = 0; j < n_ + p_; ++j) {
                const VarState s = state_[idx(j)];
                if (s == VarState::Basic || lo_(j) == hi_(j)) continue;
                const double d = cost_(j) - column(j).dot(y);
                double dir = 0.0;
                if ((s == VarState::AtLower || s == VarState::FreeZero) && d < -opt_.optimality_tol)
                    dir = 1.0;
                else if ((s == VarState::AtUpper || s == VarState::FreeZero) && d > opt_.optimality_tol)
                    dir = -1.0;
                if (dir == 0.0) continue;
                if (bland) {
                    enter = j;
                    direction = dir;
                    break;
                }
                if (std::abs(d) > enter_score) {
                    enter_score = std::abs(d);
                    enter = j;
                    direction = dir;
                }
            }
            if (enter < 0) return Outcome::Optimal;

            const Vector w = factor_.ftran(column(enter));
            double step = hi_(enter) - lo_(enter);  // bound flip distance (inf if unbounded)
            Eigen::Index leave_row = -1;
            double leave_pivot = 0.0;
            for (Eigen::Index i = 0; i < p_; ++i) {
                if (std::abs(w(i)) <= opt_.pivot_tol) continue;
                const Eigen::Index b = head_[idx(i)];
                const double rate = -direction * w(i);
                double ratio;
                if (rate < 0.0 && std::isfinite(lo_(b)))
                    ratio = (x_(b) - lo_(b)) / (-rate);
                else if (rate > 0.0 && std::isfinite(hi_(b)))
                    ratio = (hi_(b) - x_(b)) / rate;
                else
                    continue;
                ratio = std::max(ratio, 0.0);
                bool take = false;
                if (ratio < step - 1e-12) {
                    take = true;
                } else if (leave_row >= 0 && ratio <= step + 1e-12) {
                    take = bland ? b < head_[idx(leave_row)] : std::abs(w(i)) > leave_pivot;
                }
                if (take) {
                    step = std::min(step, ratio);
                    leave_row = i;
                    leave_pivot = std::abs(w(i));
                }
            }

            if (!std::isfinite(step)) {
                ray_ = Vector::Zero(n_ + p_);
                ray_(enter) = direction;
                for (Eigen::Index i = 0; i < p_; ++i) ray_(head_[idx(i)]) = -direction * w(i);
                return Outcome::Unbounded;
            }

            x_(enter) += direction * step;
            for (Eigen::Index i = 0; i < p_; ++i) x_(head_[idx(i)]) -= direction * step * w(i);

            if (leave_row < 0) {
                state_[idx(enter)] = direction > 0 ? VarState::AtUpper : VarState::AtLower;
                x_(enter) = direction > 0 ? hi_(enter) : lo_(enter);
            } else {
                const Eigen::Index leaving = head_[idx(leave_row)];
                const double rate = -direction * w(leave_row);
                if (rate < 0.0) {
                    x_(leaving) = lo_(leaving);
                    state_[idx(leaving)] = VarState::AtLower;
                } else {
                    x_(leaving) = hi_(leaving);
                    state_[idx(leaving)] = VarState::AtUpper;
                }
                state_[idx(enter)] = VarState::Basic;
                head_[idx(leave_row)] = enter;
                factor_.update(leave_row, w);
            }

            if (++iterations_ > pivot_limit_hard_)
                throw LpFailure("cycling guard exceeded after " + std::to_string(iterations_) +
                                " pivots on LP '" + lp_.name + "'");
        }
    }

    std::string tableau() const {
        std::ostringstream out;
        char buf[64];
        out << "LP '" << lp_.name << "' final tableau (" << p_ << " rows, " << n_ << " columns)\n";
        out << "basis";
        for (Eigen::Index j = 0; j < n_; ++j) out << "\tx" << j;
        out << "\trhs\n";
        Matrix body(p_, n_);
        for (Eigen::Index j = 0; j < n_; ++j) body.col(j) = factor_.ftran(lp_.eq_matrix.col(j));
        for (Eigen::Index i = 0; i < p_; ++i) {
            const Eigen::Index b = head_[idx(i)];
            out << (b < n_ ? "x" + std::to_string(b) : "a" + std::to_string(b - n_));
            for (Eigen::Index j = 0; j < n_; ++j) {
                std::snprintf(buf, sizeof buf, "\t%.6g", body(i, j));
                out << buf;
            }
            std::snprintf(buf, sizeof buf, "\t%.6g\n", x_(b));
            out << buf;
        }
        const Vector y = duals();
        out << "d";
        for (Eigen::Index j = 0; j < n_; ++j) {
            std::snprintf(buf, sizeof buf, "\t%.6g", cost_(j) - lp_.eq_matrix.col(j).dot(y));
            out << buf;
        }
        out << "\n";
        return out.str();
    }

    const LinearProgram& lp_;
    LpOptions opt_;
    Eigen::Index n_, p_;
    Vector lo_, hi_, x_, cost_, art_sign_, ray_;
    std::vector<VarState> state_;
    std::vector<Eigen::Index> head_;
    BasisFactor factor_;
    std::size_t iterations_ = 0;
    std::size_t pivot_limit_bland_ = 0;
    std::size_t pivot_limit_hard_ = 0;
};

}  // namespace

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "Optimal";
        case LpStatus::Infeasible: return "Infeasible";
        case LpStatus::Unbounded: return "Unbounded";
    }
    return "Unknown";
}

void LinearProgram::validate() const {
    const auto n = objective.size();
    const auto p = eq_rhs.size();
    if (eq_matrix.rows() != p || eq_matrix.cols() != n || lower_bounds.size() != n ||
        upper_bounds.size() != n)
        throw InvalidInput("LP '" + name + "': inconsistent dimensions");
    for (Eigen::Index i = 0; i < p; ++i)
        if (!std::isfinite(eq_rhs(i)) || std::abs(eq_rhs(i)) >= kInfinity)
            throw InvalidInput("LP '" + name + "': right-hand side entry " + std::to_string(i) +
                               " is infinite");
    for (Eigen::Index j = 0; j < n; ++j) {
        if (!std::isfinite(objective(j)))
            throw InvalidInput("LP '" + name + "': non-finite cost");
        if (std::isnan(lower_bounds(j)) || std::isnan(upper_bounds(j)) ||
            lower_bounds(j) > upper_bounds(j))
            throw InvalidInput("LP '" + name + "': lower bound exceeds upper bound at " +
                               std::to_string(j));
    }
    if (!eq_matrix.allFinite()) throw InvalidInput("LP '" + name + "': non-finite constraint entry");
}

LpSolution solve(const LinearProgram& lp, const LpOptions& options) {
    lp.validate();
    Simplex simplex(lp, options);
    return simplex.run();
}

KktResiduals kkt_residuals(const LinearProgram& lp, const LpSolution& sol) {
    KktResiduals r;
    const Vector& x = sol.primal;
    const Vector row_res = lp.eq_matrix * x - lp.eq_rhs;
    r.primal = row_res.size() ? row_res.cwiseAbs().maxCoeff() : 0.0;
    const Vector d = lp.objective - lp.eq_matrix.transpose() * sol.eq_duals;
    double dual_obj = lp.eq_rhs.dot(sol.eq_duals);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double lo = lp.lower_bounds(j), hi = lp.upper_bounds(j);
        if (finite_bound(lo)) r.primal = std::max(r.primal, lo - x(j));
        if (finite_bound(hi)) r.primal = std::max(r.primal, x(j) - hi);
        if (d(j) > 0.0) {
            if (finite_bound(lo)) {
                r.complementarity = std::max(r.complementarity, d(j) * std::abs(x(j) - lo));
                dual_obj += d(j) * lo;
            } else {
                r.dual = std::max(r.dual, d(j));
            }
        } else if (d(j) < 0.0) {
            if (finite_bound(hi)) {
                r.complementarity = std::max(r.complementarity, -d(j) * std::abs(hi - x(j)));
                dual_obj += d(j) * hi;
            } else {
                r.dual = std::max(r.dual, -d(j));
            }
        }
    }
    r.gap = std::abs(lp.objective.dot(x) - dual_obj);
    return r;
}

}  // namespace storval::lp
