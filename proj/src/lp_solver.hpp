#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

namespace storval::lp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Bounds at or beyond this magnitude are treated as infinite.
inline constexpr double kInfinity = 1e30;

// minimize c'x  subject to  A x = b,  lower <= x <= upper.
struct LinearProgram {
    std::string name;  // used in diagnostics only
    Vector objective;
    Matrix eq_matrix;
    Vector eq_rhs;
    Vector lower_bounds;
    Vector upper_bounds;

    std::size_t variable_count() const { return static_cast<std::size_t>(objective.size()); }
    std::size_t row_count() const { return static_cast<std::size_t>(eq_rhs.size()); }

    // Throws InvalidInput on inconsistent dimensions, lower > upper, or a
    // non-finite / sentinel-sized right-hand side.
    void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    Vector primal;
    double objective_value = 0.0;
    Vector eq_duals;       // multipliers y of A x = b, so d(objective)/d(b) = y
    Vector reduced_costs;  // c - A'y
    // Infeasible: phase-one row multipliers. Unbounded: improving ray in x.
    Vector certificate;
    std::size_t iterations = 0;
    std::string tableau;   // filled only when LpOptions::dump_tableau is set
};

struct LpOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-11;
    std::size_t refactor_interval = 50;
    bool dump_tableau = false;
};

// Bounded-variable primal simplex (two phases, Dantzig pricing with a switch
// to Bland's rule after 10*(n+p) pivots). Deterministic for identical input.
// Throws LpFailure if the pivot guard is exhausted or the basis degenerates.
LpSolution solve(const LinearProgram& lp, const LpOptions& options = {});

struct KktResiduals {
    double primal = 0.0;           // max |Ax-b|, bound violations
    double dual = 0.0;             // max wrong-sign reduced cost
    double complementarity = 0.0;  // max |d_j| * distance of x_j from the bound d_j prices
    double gap = 0.0;              // |primal objective - dual objective|
};

KktResiduals kkt_residuals(const LinearProgram& lp, const LpSolution& solution);

}  // namespace storval::lp
