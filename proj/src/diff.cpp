#include "gacn/diff.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <numeric>
#include <random>

#include "gacn/error.hpp"

namespace gacn::diff {

// ---- Var / Tape ------------------------------------------------------------

const Matrix& Var::value() const { return tape_->node(id_).value; }

Matrix Var::grad() const {
  const auto& n = tape_->node(id_);
  if (!n.has_grad) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

bool Var::requires_grad() const { return tape_->node(id_).requires_grad; }

double Var::scalar() const {
  const Matrix& v = value();
  require(v.rows() == 1 && v.cols() == 1, "scalar(): node is not 1x1");
  return v(0, 0);
}

Var Tape::leaf(Matrix value, bool requires_grad) {
  if (!value.allFinite()) throw NumericError("leaf");
  nodes_.push_back(Node{std::move(value), Matrix(), requires_grad, false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::scalar(double v) { return leaf(Matrix::Constant(1, 1, v)); }

Var Tape::record(Matrix value, const char* op, std::span<const Var> inputs, Backward backward) {
  if (!value.allFinite()) throw NumericError(op);
  bool needs = false;
  for (const Var& in : inputs) {
    require(in.tape_ == this, std::string(op) + ": input belongs to another tape");
    needs = needs || node(in.id_).requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Matrix(), needs, false, needs ? std::move(backward) : nullptr});
  return Var(this, nodes_.size() - 1);
}

void Tape::ensure_grad(Node& n) {
  if (!n.has_grad) {
    n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
}

void Tape::accumulate(Var v, const Matrix& delta) {
  Node& n = node(v.id_);
  if (!n.requires_grad) return;
  ensure_grad(n);
  n.grad += delta;
}

void Tape::accumulate_at(Var v, Index r, Index c, double delta) {
  Node& n = node(v.id_);
  if (!n.requires_grad) return;
  ensure_grad(n);
  n.grad(r, c) += delta;
}

void Tape::backward(Var loss) {
  require(loss.tape_ == this, "backward: loss belongs to another tape");
  Node& root = node(loss.id_);
  require(root.value.size() == 1, "backward: loss must be 1x1");
  if (!root.requires_grad) return;
  ensure_grad(root);
  root.grad(0, 0) += 1.0;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.has_grad && n.backward) n.backward(*this, n.grad, n.value);
  }
}

void Tape::zero_grad() {
  for (Node& n : nodes_) {
    n.grad.resize(0, 0);
    n.has_grad = false;
  }
}

Matrix SparseMatrix::to_dense() const {
  Matrix out = Matrix::Zero(static_cast<Index>(pattern->n_rows), static_cast<Index>(pattern->n_cols));
  for (std::size_t r = 0; r < pattern->n_rows; ++r) {
    for (std::size_t k = pattern->row_ptr[r]; k < pattern->row_ptr[r + 1]; ++k) {
      out(static_cast<Index>(r), pattern->col[k]) += values[k];
    }
  }
  return out;
}

// ---- dense ops ---------------------------------------------------------------

namespace {

void same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractViolation(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()) + ")");
  }
}

Tape& tape_of(const Var& a) {
  require(a.valid(), "operation on an empty Var");
  return *a.tape();
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw ContractViolation("matmul: inner dimensions differ");
  Matrix out = a.value() * b.value();
  const Var in[] = {a, b};
  return tape_of(a).record(std::move(out), "matmul", in, [a, b](Tape& t, const Matrix& g, const Matrix&) {
    if (a.requires_grad()) t.accumulate(a, g * b.value().transpose());
    if (b.requires_grad()) t.accumulate(b, a.value().transpose() * g);
  });
}

Var transpose(Var a) {
  Matrix out = a.value().transpose();
  const Var in[] = {a};
  return tape_of(a).record(std::move(out), "transpose", in,
                           [a](Tape& t, const Matrix& g, const Matrix&) { t.accumulate(a, g.transpose()); });
}

Var add(Var a, Var b) {
  same_shape(a, b, "add");
  const Var in[] = {a, b};
  return tape_of(a).record(a.value() + b.value(), "add", in, [a, b](Tape& t, const Matrix& g, const Matrix&) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  same_shape(a, b, "sub");
  const Var in[] = {a, b};
  return tape_of(a).record(a.value() - b.value(), "sub", in, [a, b](Tape& t, const Matrix& g, const Matrix&) {
    t.accumulate(a, g);
    if (b.requires_grad()) t.accumulate(b, -g);
  });
}

Var mul(Var a, Var b) {
  same_shape(a, b, "mul");
  const Var in[] = {a, b};
  return tape_of(a).record(a.value().cwiseProduct(b.value()), "mul", in, [a, b](Tape& t, const Matrix& g, const Matrix&) {
    if (a.requires_grad()) t.accumulate(a, g.cwiseProduct(b.value()));
    if (b.requires_grad()) t.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var scale(Var a, double c) {
  const Var in[] = {a};
  return tape_of(a).record(a.value() * c, "scale", in,
                           [a, c](Tape& t, const Matrix& g, const Matrix&) { t.accumulate(a, g * c); });
}

Var add_scalar(Var a, double c) {
  const Var in[] = {a};
  Matrix out = a.value().array() + c;
  return tape_of(a).record(std::move(out), "add_scalar", in,
                           [a](Tape& t, const Matrix& g, const Matrix&) { t.accumulate(a, g); });
}

Var add_row(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw ContractViolation("add_row: row must be 1 x cols(a)");
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  const Var in[] = {a, row};
  return tape_of(a).record(std::move(out), "add_row", in, [a, row](Tape& t, const Matrix& g, const Matrix&) {
    t.accumulate(a, g);
    if (row.requires_grad()) t.accumulate(row, g.colwise().sum());
  });
}

Var sigmoid(Var a) {
  Matrix out = a.value().unaryExpr(&sigmoid_scalar);
  const Var in[] = {a};
  return tape_of(a).record(std::move(out), "sigmoid", in, [a](Tape& t, const Matrix& g, const Matrix& s) {
    t.accumulate(a, g.cwiseProduct(s.cwiseProduct((1.0 - s.array()).matrix())));
  });
}

Var log_sigmoid(Var a) {
  Matrix out = a.value().unaryExpr([](double x) { return std::min(x, 0.0) - std::log1p(std::exp(-std::abs(x))); });
  const Var in[] = {a};
  return tape_of(a).record(std::move(out), "log_sigmoid", in, [a](Tape& t, const Matrix& g, const Matrix&) {
    t.accumulate(a, g.cwiseProduct(a.value().unaryExpr([](double x) { return sigmoid_scalar(-x); })));
  });
}

Var log(Var a) {
  if ((a.value().array() <= 0.0).any()) throw ContractViolation("log: input must be strictly positive");
  Matrix out = a.value().array().log();
  const Var in[] = {a};
  return tape_of(a).record(std::move(out), "log", in, [a](Tape& t, const Matrix& g, const Matrix&) {
    t.accumulate(a, g.cwiseQuotient(a.value()));
  });
}

Var exp(Var a) {
  Matrix out = a.value().array().exp();
  const Var in[] = {a};
  return tape_of(a).record(std::move(out), "exp", in, [a](Tape& t, const Matrix& g, const Matrix& y) {
    t.accumulate(a, g.cwiseProduct(y));
  });
}

Var abs(Var a) {
  Matrix out = a.value().cwiseAbs();
  const Var in[] = {a};
  return tape_of(a).record(std::move(out), "abs", in, [a](Tape& t, const Matrix& g, const Matrix&) {
    Matrix sign = a.value().unaryExpr([](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
    t.accumulate(a, g.cwiseProduct(sign));
  });
}

Var relu(Var a) {
  Matrix out = a.value().cwiseMax(0.0);
  const Var in[] = {a};
  return tape_of(a).record(std::move(out), "relu", in, [a](Tape& t, const Matrix& g, const Matrix&) {
    Matrix mask = a.value().unaryExpr([](double x) { return x > 0 ? 1.0 : 0.0; });
    t.accumulate(a, g.cwiseProduct(mask));
  });
}

Var clamp(Var a, double lo, double hi) {
  Matrix out = a.value().cwiseMax(lo).cwiseMin(hi);
  const Var in[] = {a};
  return tape_of(a).record(std::move(out), "clamp", in, [a, lo, hi](Tape& t, const Matrix& g, const Matrix&) {
    Matrix mask = a.value().unaryExpr([lo, hi](double x) { return (x > lo && x < hi) ? 1.0 : 0.0; });
    t.accumulate(a, g.cwiseProduct(mask));
  });
}

Var sum(Var a) {
  const Var in[] = {a};
  return tape_of(a).record(Matrix::Constant(1, 1, a.value().sum()), "sum", in, [a](Tape& t, const Matrix& g, const Matrix&) {
    t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var mean(Var a) {
  require(a.value().size() > 0, "mean: empty input");
  const double n = static_cast<double>(a.value().size());
  return scale(sum(a), 1.0 / n);
}

Var concat(Var a, Var b) {
  if (a.rows() != b.rows()) throw ContractViolation("concat: row counts differ");
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  const Var in[] = {a, b};
  return tape_of(a).record(std::move(out), "concat", in, [a, b](Tape& t, const Matrix& g, const Matrix&) {
    if (a.requires_grad()) t.accumulate(a, g.leftCols(a.cols()));
    if (b.requires_grad()) t.accumulate(b, g.rightCols(b.cols()));
  });
}

Var row_mean(Var a) {
  require(a.rows() > 0, "row_mean: no rows");
  Matrix out = a.value().colwise().mean();
  const Var in[] = {a};
  return tape_of(a).record(std::move(out), "row_mean", in, [a](Tape& t, const Matrix& g, const Matrix&) {
    Matrix d = g.replicate(a.rows(), 1) / static_cast<double>(a.rows());
    t.accumulate(a, d);
  });
}

Var row_max(Var a) {
  require(a.rows() > 0, "row_max: no rows");
  const Matrix& x = a.value();
  std::vector<Index> arg(static_cast<std::size_t>(x.cols()), 0);
  Matrix out(1, x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    Index best = 0;
    for (Index r = 1; r < x.rows(); ++r) {
      if (x(r, c) > x(best, c)) best = r;
    }
    arg[static_cast<std::size_t>(c)] = best;
    out(0, c) = x(best, c);
  }
  const Var in[] = {a};
  return tape_of(a).record(std::move(out), "row_max", in, [a, arg = std::move(arg)](Tape& t, const Matrix& g, const Matrix&) {
    for (std::size_t c = 0; c < arg.size(); ++c) t.accumulate_at(a, arg[c], static_cast<Index>(c), g(0, static_cast<Index>(c)));
  });
}

Var softmax_rows(Var a) {
  Matrix y = a.value();
  for (Index r = 0; r < y.rows(); ++r) {
    const double m = y.row(r).maxCoeff();
    y.row(r) = (y.row(r).array() - m).exp();
    y.row(r) /= y.row(r).sum();
  }
  const Var in[] = {a};
  return tape_of(a).record(std::move(y), "softmax_rows", in, [a](Tape& t, const Matrix& g, const Matrix& s) {
    Matrix gs = g.cwiseProduct(s);
    Eigen::VectorXd dotv = gs.rowwise().sum();
    Matrix d = gs - (s.array().colwise() * dotv.array()).matrix();
    t.accumulate(a, d);
  });
}

Var logsumexp_rows(Var a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), 1);
  for (Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    out(r, 0) = m + std::log((x.row(r).array() - m).exp().sum());
  }
  const Var in[] = {a};
  return tape_of(a).record(std::move(out), "logsumexp_rows", in, [a](Tape& t, const Matrix& g, const Matrix& lse) {
    const Matrix& x = a.value();
    Matrix d = x;
    for (Index r = 0; r < x.rows(); ++r) {
      d.row(r) = (x.row(r).array() - lse(r, 0)).exp() * g(r, 0);
    }
    t.accumulate(a, d);
  });
}

Var dot_rows(Var a, Var b) {
  same_shape(a, b, "dot_rows");
  Matrix out = a.value().cwiseProduct(b.value()).rowwise().sum();
  const Var in[] = {a, b};
  return tape_of(a).record(std::move(out), "dot_rows", in, [a, b](Tape& t, const Matrix& g, const Matrix&) {
    if (a.requires_grad()) t.accumulate(a, (b.value().array().colwise() * g.col(0).array()).matrix());
    if (b.requires_grad()) t.accumulate(b, (a.value().array().colwise() * g.col(0).array()).matrix());
  });
}

Var gather_rows(Var a, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Index>(rows.size()), a.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    require(rows[k] < static_cast<std::size_t>(a.rows()), "gather_rows: index out of range");
    out.row(static_cast<Index>(k)) = a.value().row(static_cast<Index>(rows[k]));
  }
  const Var in[] = {a};
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return tape_of(a).record(std::move(out), "gather_rows", in, [a, idx = std::move(idx)](Tape& t, const Matrix& g, const Matrix&) {
    Matrix d = Matrix::Zero(a.rows(), a.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) d.row(static_cast<Index>(idx[k])) += g.row(static_cast<Index>(k));
    t.accumulate(a, d);
  });
}

Var gather(Var a, std::span<const std::size_t> idx) {
  require(a.cols() == 1, "gather: input must be a column vector");
  Matrix out(static_cast<Index>(idx.size()), 1);
  const Matrix& x = a.value();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    require(idx[k] < static_cast<std::size_t>(x.rows()), "gather: index out of range");
    out(static_cast<Index>(k), 0) = x(static_cast<Index>(idx[k]), 0);
  }
  const Var in[] = {a};
  std::vector<std::size_t> copy(idx.begin(), idx.end());
  return tape_of(a).record(std::move(out), "gather", in, [a, copy = std::move(copy)](Tape& t, const Matrix& g, const Matrix&) {
    Matrix d = Matrix::Zero(a.rows(), 1);
    for (std::size_t k = 0; k < copy.size(); ++k) d(static_cast<Index>(copy[k]), 0) += g(static_cast<Index>(k), 0);
    t.accumulate(a, d);
  });
}

// ---- sparse ops ---------------------------------------------------------------

namespace {

void spmm_into(const CsrPattern& p, const double* vals, const Matrix& d, Matrix& out) {
  out.setZero(static_cast<Index>(p.n_rows), d.cols());
  const Index cols = d.cols();
  for (std::size_t r = 0; r < p.n_rows; ++r) {
    double* o = out.data() + static_cast<Index>(r) * cols;
    for (std::size_t k = p.row_ptr[r]; k < p.row_ptr[r + 1]; ++k) {
      const double w = vals[k];
      if (w == 0.0) continue;
      const double* x = d.data() + static_cast<Index>(p.col[k]) * cols;
      for (Index c = 0; c < cols; ++c) o[c] += w * x[c];
    }
  }
}

// Also reports, per row, whether the floor replaced the row sum.
std::vector<double> inv_sqrt_degrees(const CsrPattern& p, const double* vals, double floor,
                                     std::vector<char>* floored = nullptr) {
  std::vector<double> r(p.n_rows, 0.0);
  if (floored) floored->assign(p.n_rows, 0);
  for (std::size_t i = 0; i < p.n_rows; ++i) {
    double deg = 0.0;
    for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) deg += vals[k];
    if (deg < floor) {
      deg = floor;
      if (floored) (*floored)[i] = 1;
    }
    r[i] = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  return r;
}

}  // namespace

Var spmm(const SparseVar& s, Var d) {
  const CsrPattern& p = *s.pattern;
  if (static_cast<Index>(p.n_cols) != d.rows()) throw ContractViolation("spmm: operator columns != input rows");
  require(static_cast<std::size_t>(s.values.rows()) == p.nnz() && s.values.cols() == 1, "spmm: values must be nnz x 1");
  Matrix out;
  spmm_into(p, s.values.value().data(), d.value(), out);
  const Var in[] = {s.values, d};
  auto pattern = s.pattern;
  Var vals = s.values;
  return tape_of(d).record(std::move(out), "spmm", in, [pattern, vals, d](Tape& t, const Matrix& g, const Matrix&) {
    const CsrPattern& p = *pattern;
    const Index cols = g.cols();
    const double* w = vals.value().data();
    if (d.requires_grad()) {
      Matrix dd = Matrix::Zero(d.rows(), cols);
      for (std::size_t r = 0; r < p.n_rows; ++r) {
        const double* gr = g.data() + static_cast<Index>(r) * cols;
        for (std::size_t k = p.row_ptr[r]; k < p.row_ptr[r + 1]; ++k) {
          if (w[k] == 0.0) continue;
          double* o = dd.data() + static_cast<Index>(p.col[k]) * cols;
          for (Index c = 0; c < cols; ++c) o[c] += w[k] * gr[c];
        }
      }
      t.accumulate(d, dd);
    }
    if (vals.requires_grad()) {
      Matrix dv(static_cast<Index>(p.nnz()), 1);
      const Matrix& x = d.value();
      for (std::size_t r = 0; r < p.n_rows; ++r) {
        const double* gr = g.data() + static_cast<Index>(r) * cols;
        for (std::size_t k = p.row_ptr[r]; k < p.row_ptr[r + 1]; ++k) {
          const double* xr = x.data() + static_cast<Index>(p.col[k]) * cols;
          double acc = 0.0;
          for (Index c = 0; c < cols; ++c) acc += gr[c] * xr[c];
          dv(static_cast<Index>(k), 0) = acc;
        }
      }
      t.accumulate(vals, dv);
    }
  });
}

Matrix spmm(const SparseMatrix& s, const Matrix& d) {
  if (s.n_cols() != static_cast<std::size_t>(d.rows())) throw ContractViolation("spmm: operator columns != input rows");
  Matrix out;
  spmm_into(*s.pattern, s.values.data(), d, out);
  return out;
}

SparseVar normalize_adjacency(const SparseVar& adj, double degree_floor) {
  const CsrPattern& p = *adj.pattern;
  const Matrix& v = adj.values.value();
  require(static_cast<std::size_t>(v.rows()) == p.nnz() && v.cols() == 1, "normalize_adjacency: values must be nnz x 1");
  if ((v.array() < 0.0).any()) throw ContractViolation("normalize_adjacency: negative edge weight");
  require(degree_floor >= 0.0, "normalize_adjacency: degree floor must be >= 0");
  std::vector<char> floored;
  std::vector<double> r = inv_sqrt_degrees(p, v.data(), degree_floor, &floored);
  Matrix out(v.rows(), 1);
  for (std::size_t i = 0; i < p.n_rows; ++i) {
    for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) {
      out(static_cast<Index>(k), 0) = v(static_cast<Index>(k), 0) * r[i] * r[p.col[k]];
    }
  }
  const Var in[] = {adj.values};
  auto pattern = adj.pattern;
  Var vals = adj.values;
  Var res = tape_of(vals).record(std::move(out), "normalize_adjacency", in,
                                 [pattern, vals, r = std::move(r), floored = std::move(floored)](Tape& t, const Matrix& g, const Matrix&) {
    const CsrPattern& p = *pattern;
    const Matrix& v = vals.value();
    std::vector<double> dr(p.n_rows, 0.0);
    Matrix dv(v.rows(), 1);
    for (std::size_t i = 0; i < p.n_rows; ++i) {
      for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) {
        const std::size_t j = p.col[k];
        const double gk = g(static_cast<Index>(k), 0);
        const double vk = v(static_cast<Index>(k), 0);
        dv(static_cast<Index>(k), 0) = gk * r[i] * r[j];
        dr[i] += gk * vk * r[j];
        dr[j] += gk * vk * r[i];
      }
    }
    // r = deg^-1/2  =>  dr/ddeg = -r^3 / 2; deg_i is the sum of row i.
    for (std::size_t i = 0; i < p.n_rows; ++i) {
      if (r[i] == 0.0 || floored[i]) continue;
      const double ddeg = -0.5 * r[i] * r[i] * r[i] * dr[i];
      for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) dv(static_cast<Index>(k), 0) += ddeg;
    }
    t.accumulate(vals, dv);
  });
  return SparseVar{adj.pattern, res};
}

SparseMatrix normalize_adjacency(const SparseMatrix& adj, double degree_floor) {
  const CsrPattern& p = *adj.pattern;
  require(adj.values.size() == p.nnz(), "normalize_adjacency: values must match pattern");
  for (double w : adj.values) {
    if (w < 0.0) throw ContractViolation("normalize_adjacency: negative edge weight");
  }
  require(degree_floor >= 0.0, "normalize_adjacency: degree floor must be >= 0");
  std::vector<double> r = inv_sqrt_degrees(p, adj.values.data(), degree_floor);
  SparseMatrix out{adj.pattern, std::vector<double>(p.nnz())};
  for (std::size_t i = 0; i < p.n_rows; ++i) {
    for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) out.values[k] = adj.values[k] * r[i] * r[p.col[k]];
  }
  return out;
}

// ---- text I/O -------------------------------------------------------------------

void write_matrix(std::ostream& os, const Matrix& m) {
  const auto old = os.precision(17);
  os << m.rows() << ' ' << m.cols() << '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) os << (c ? " " : "") << m(r, c);
    os << '\n';
  }
  os.precision(old);
}

Matrix read_matrix(std::istream& is, const std::string& source) {
  Index r = 0, c = 0;
  if (!(is >> r >> c) || r < 0 || c < 0) throw ParseError(source, 0, "bad matrix shape");
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i)
    if (!(is >> m.data()[i])) throw ParseError(source, 0, "truncated matrix");
  return m;
}

// ---- gradient check ------------------------------------------------------------

namespace {

double evaluate(const ScalarFn& f, const std::vector<Matrix>& params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const Matrix& p : params) vars.push_back(tape.leaf(p, false));
  return f(tape, vars).scalar();
}

}  // namespace

GradCheckReport gradient_check(const ScalarFn& f, const std::vector<Matrix>& params, const GradCheckOptions& options) {
  std::vector<Matrix> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const Matrix& p : params) vars.push_back(tape.leaf(p, true));
    Var loss = f(tape, vars);
    tape.backward(loss);
    for (const Var& v : vars) analytic.push_back(v.grad());
  }

  GradCheckReport report;
  std::mt19937_64 rng(options.seed);
  std::vector<Matrix> work = params;
  const double f0 = evaluate(f, work);

  auto shifted = [&](std::size_t pi, Index k, double h) {
    double& x = work[pi].data()[k];
    const double saved = x;
    x = saved + h;
    const double v = evaluate(f, work);
    x = saved;
    return v;
  };

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const Index n = params[pi].size();
    std::vector<Index> coords(static_cast<std::size_t>(n));
    std::iota(coords.begin(), coords.end(), Index{0});
    if (options.max_coords_per_param && coords.size() > options.max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_param);
    }
    for (Index k : coords) {
      const double h = options.eps;
      const double fp = shifted(pi, k, h);
      const double fm = shifted(pi, k, -h);
      const double fwd = (fp - f0) / h;
      const double bwd = (f0 - fm) / h;
      const double gap = std::abs(fwd - bwd);
      if (gap > options.kink_tol * std::max({std::abs(fwd), std::abs(bwd), 1e-8})) {
        // Smooth functions halve the gap when the step halves; kinks do not.
        const double fp2 = shifted(pi, k, h / 2);
        const double fm2 = shifted(pi, k, -h / 2);
        const double gap2 = std::abs((fp2 - f0) / (h / 2) - (f0 - fm2) / (h / 2));
        if (gap2 > 0.75 * gap) {
          ++report.skipped_kinks;
          continue;
        }
      }
      const double numeric = (fp - fm) / (2 * h);
      const double a = analytic[pi].data()[k];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), options.abs_floor});
      ++report.checked;
      if (rel > report.max_rel_error || report.checked == 1) {
        if (rel >= report.max_rel_error) {
          report.max_rel_error = rel;
          report.worst_param = pi;
          report.worst_row = k / params[pi].cols();
          report.worst_col = k % params[pi].cols();
          report.worst_analytic = a;
          report.worst_numeric = numeric;
        }
      }
    }
  }
  report.passed = report.max_rel_error < options.tol;
  return report;
}

}  // namespace gacn::diff
