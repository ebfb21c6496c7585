#ifndef STOCLEAR_LP_HPP
#define STOCLEAR_LP_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace stoclear {

enum class RowSense { Eq, Le, Ge };

struct LpVariable {
  std::string name;
  double lower;
  double upper;
};

struct LpRow {
  std::string name;
  std::vector<std::pair<int, double>> coeffs;  // (column, value), sparse
  RowSense sense = RowSense::Eq;
  double rhs = 0.0;
};

/// Sparse LP, always a minimization.
struct LpModel {
  std::vector<LpVariable> vars;
  std::vector<LpRow> rows;
  std::vector<double> obj;  // one entry per variable

  int add_variable(std::string name, double lower, double upper,
                   double cost = 0.0);
  int add_row(std::string name, RowSense sense, double rhs);
  void add_coeff(int row, int col, double value);
  void add_obj(int col, double value) { obj[static_cast<size_t>(col)] += value; }

  std::size_t num_vars() const { return vars.size(); }
  std::size_t num_rows() const { return rows.size(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

struct LpSolution {
  LpStatus status = LpStatus::NumericalFailure;
  std::vector<double> primal;         // per variable
  std::vector<double> duals;          // per row, d(objective)/d(rhs)
  std::vector<double> reduced_costs;  // per variable
  double objective = 0.0;
  int iterations = 0;
};

// Self-contained bounded-variable primal simplex. Deterministic pivoting
// (Dantzig with index tie-break, Bland fallback), explicit basis inverse
// with periodic refactorization.
LpSolution solve_lp(const LpModel& model);

struct KktReport {
  double max_primal_residual = 0.0;
  double max_dual_residual = 0.0;
  double max_complementarity = 0.0;
  double duality_gap = 0.0;
  bool pass = false;
  std::string worst_constraint;  // name of the worst primal violation, if any
};

KktReport check_kkt(const LpModel& model, const LpSolution& sol, double tol);

// CPLEX LP text format, 12 significant digits.
void write_lp_format(const LpModel& model, std::ostream& os);

// Adds i.i.d. jitter of magnitude <= rel*|c| to every nonzero objective
// coefficient. Used to break dual degeneracy in the property suites only.
void perturb_objective(LpModel& model, std::uint64_t seed, double rel = 1e-7);

// Re-selects the row duals of an optimal solution. The optimal dual vectors
// for a fixed optimal primal form a polyhedron (dual feasibility plus
// complementary slackness); among them this picks the one minimizing
// sum_r row_weight[r] * y_r, then, on that face, the one closest (L1) to the
// duals already in `sol`. Reduced costs are recomputed to match. Because the
// minimizer depends only on the optimal set and the weights, structurally
// equivalent models built in different ways agree on the weighted rows'
// duals. Each entry of `preserve_sums` lists rows whose dual sum is kept at
// its original value (within a small tolerance) during the reselection.
// Returns `sol` unchanged if any step fails.
LpSolution select_optimal_duals(
    const LpModel& model, const LpSolution& sol,
    const std::vector<double>& row_weight,
    const std::vector<std::vector<int>>& preserve_sums = {});

}  // namespace stoclear

#endif
