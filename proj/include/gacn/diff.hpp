#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gacn/sparse.hpp"

// Reverse-mode differentiation over dense row-major matrices and CSR operators.
//
// A Tape records every operation applied to Vars. Tape::backward seeds d(loss)=1
// and runs the recorded closures in reverse order, accumulating into the grad
// buffer of every node that requires gradients. Nodes whose inputs do not
// require gradients are treated as constants and skipped.
namespace gacn::diff {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

// Lower/upper clamp applied wherever a probability feeds a logarithm.
inline constexpr double kProbFloor = 1e-12;
inline constexpr double kProbCeil = 1.0 - 1e-12;

class Tape;

// Handle to one node of a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  // Gradient of the last backward pass; zeros if the node received none.
  Matrix grad() const;
  bool requires_grad() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  double scalar() const;  // value of a 1x1 node

  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* t, std::size_t id) : tape_(t), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  // Receives the upstream gradient and the node's own forward value.
  using Backward = std::function<void(Tape&, const Matrix& upstream, const Matrix& output)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Matrix value, bool requires_grad = false);
  Var constant(Matrix value) { return leaf(std::move(value), false); }
  Var scalar(double v);

  // Records an op node. `value` is checked for NaN/Inf (NumericError naming `op`).
  // `backward` may be empty when no input requires gradients.
  Var record(Matrix value, const char* op, std::span<const Var> inputs, Backward backward);

  // Adds `delta` into the grad buffer of `v` (no-op when v needs no gradient).
  void accumulate(Var v, const Matrix& delta);
  void accumulate_at(Var v, Index r, Index c, double delta);

  void backward(Var loss);
  void zero_grad();

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  friend class Var;
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool has_grad = false;
    Backward backward;
  };
  Node& node(std::size_t id) { return nodes_[id]; }
  const Node& node(std::size_t id) const { return nodes_[id]; }
  void ensure_grad(Node& n);

  std::deque<Node> nodes_;
};

// Weighted sparse operator whose values live on a tape (one value per CSR entry,
// stored as an nnz x 1 Var).
struct SparseVar {
  std::shared_ptr<const CsrPattern> pattern;
  Var values;
};

// Plain weighted CSR matrix.
struct SparseMatrix {
  std::shared_ptr<const CsrPattern> pattern;
  std::vector<double> values;

  std::size_t n_rows() const { return pattern->n_rows; }
  std::size_t n_cols() const { return pattern->n_cols; }
  Matrix to_dense() const;
};

// ---- dense ops ------------------------------------------------------------

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
// Adds a 1 x cols row vector to every row of `a`.
Var add_row(Var a, Var row);
Var sigmoid(Var a);
Var log_sigmoid(Var a);  // log(sigmoid(a)), stable for large |a|
Var log(Var a);          // requires strictly positive input
Var exp(Var a);
Var abs(Var a);          // subgradient 0 at 0
Var relu(Var a);
// Values clamped to [lo, hi]; gradient passes only where lo < a < hi.
Var clamp(Var a, double lo, double hi);
Var sum(Var a);   // 1x1
Var mean(Var a);  // 1x1
// Column-wise concatenation [a | b]; row counts must match.
Var concat(Var a, Var b);
// Reductions over the row axis: 1 x cols results.
Var row_mean(Var a);
Var row_max(Var a);  // gradient goes to the first arg-max row of each column
Var softmax_rows(Var a);
Var logsumexp_rows(Var a);  // n x 1, max-shifted
Var dot_rows(Var a, Var b);  // n x 1 row-wise inner products
Var gather_rows(Var a, std::span<const std::size_t> rows);
// Element gather over a column vector: out[k] = a[idx[k]].
Var gather(Var a, std::span<const std::size_t> idx);

// ---- sparse ops -----------------------------------------------------------

// S * d, differentiable in both the sparse values and the dense input.
Var spmm(const SparseVar& s, Var d);
Matrix spmm(const SparseMatrix& s, const Matrix& d);

// D^-1/2 A D^-1/2 with D the row sums of A. Zero-degree rows stay zero.
// Weights must be non-negative (ContractViolation otherwise). A positive
// `degree_floor` replaces row sums below it, so that rows carrying almost no
// weight propagate almost nothing instead of being rescaled to unit degree.
SparseVar normalize_adjacency(const SparseVar& adj, double degree_floor = 0.0);
SparseMatrix normalize_adjacency(const SparseMatrix& adj, double degree_floor = 0.0);

// ---- text I/O ---------------------------------------------------------------

// "rows cols" then one line per row, 17 significant digits (exact round trip).
void write_matrix(std::ostream& os, const Matrix& m);
Matrix read_matrix(std::istream& is, const std::string& source);

// ---- gradient verification -------------------------------------------------

struct GradCheckOptions {
  double eps = 1e-4;
  double tol = 1e-3;
  // Coordinates sampled per parameter (0 = all).
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
  // Denominator floor of the relative error.
  double abs_floor = 1e-6;
  // A coordinate is a kink (skipped) when the forward and backward one-sided
  // differences disagree by more than this, relative to their magnitude.
  double kink_tol = 0.25;
};

struct GradCheckReport {
  bool passed = true;
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  Index worst_row = 0;
  Index worst_col = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
};

using ScalarFn = std::function<Var(Tape&, std::span<const Var> params)>;

// Central finite differences (f(x+eps) - f(x-eps)) / (2 eps) against the tape's
// gradient. `f` must be deterministic in its parameters.
GradCheckReport gradient_check(const ScalarFn& f, const std::vector<Matrix>& params,
                               const GradCheckOptions& options = {});

}  // namespace gacn::diff
