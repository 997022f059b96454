#include "gacn/discriminator.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "gacn/error.hpp"

namespace gacn {

MlpParams init_mlp(Index in_width, Index hidden, int layers, Rng& rng) {
  require(in_width >= 1 && hidden >= 1 && layers >= 1, "init_mlp: widths and layer count must be positive");
  MlpParams mlp;
  std::normal_distribution<double> normal(0.0, 1.0);
  Index in = in_width;
  for (int l = 0; l < layers; ++l) {
    const bool last = l + 1 == layers;
    const Index out = last ? 1 : hidden;
    Matrix w = Matrix::Zero(in, out);
    if (!last) {
      const double sd = std::sqrt(2.0 / static_cast<double>(in));
      for (Index i = 0; i < w.size(); ++i) w.data()[i] = sd * normal(rng);
    }
    mlp.weights.push_back(std::move(w));
    mlp.biases.push_back(Matrix::Zero(1, out));
    in = out;
  }
  return mlp;
}

MlpVars bind_mlp(diff::Tape& tape, const MlpParams& mlp, bool requires_grad) {
  MlpVars v;
  for (std::size_t l = 0; l < mlp.n_layers(); ++l) {
    v.weights.push_back(tape.leaf(mlp.weights[l], requires_grad));
    v.biases.push_back(tape.leaf(mlp.biases[l], requires_grad));
  }
  return v;
}

diff::Var pool_graph(diff::Var final) {
  require(final.rows() >= 1, "pool_graph: empty graph");
  return diff::concat(diff::row_mean(final), diff::row_max(final));
}

Discrimination discriminate(diff::Var d_g, const MlpVars& mlp) {
  require(!mlp.weights.empty(), "discriminate: empty network");
  require(d_g.rows() == 1 && d_g.cols() == mlp.weights.front().rows(), "discriminate: input width mismatch");
  diff::Var h = d_g;
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    h = diff::add_row(diff::matmul(h, mlp.weights[l]), mlp.biases[l]);
    if (l + 1 < mlp.weights.size()) h = diff::relu(h);
  }
  require(h.cols() == 1, "discriminate: last layer must have one output");
  return {h, diff::clamp(diff::sigmoid(h), diff::kProbFloor, diff::kProbCeil)};
}

diff::Var bce_loss(diff::Var p, int y) {
  require(y == 0 || y == 1, "bce_loss: label must be 0 or 1");
  diff::Var pc = diff::clamp(p, diff::kProbFloor, diff::kProbCeil);
  if (y == 1) return diff::scale(diff::sum(diff::log(pc)), -1.0);
  return diff::scale(diff::sum(diff::log(diff::add_scalar(diff::scale(pc, -1.0), 1.0))), -1.0);
}

diff::Var bce_with_logit(diff::Var logit, int y) {
  require(y == 0 || y == 1, "bce_with_logit: label must be 0 or 1");
  return diff::scale(diff::sum(diff::log_sigmoid(y == 1 ? logit : diff::scale(logit, -1.0))), -1.0);
}

diff::Var adversarial_loss(diff::Var p) { return bce_loss(p, 1); }

void save_mlp(std::ostream& os, const MlpParams& mlp) {
  os.precision(17);
  os << "gacn-mlp 1\nlayers " << mlp.n_layers() << '\n';
  auto put = [&](const Matrix& m) {
    os << m.rows() << ' ' << m.cols() << '\n';
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) os << (c ? " " : "") << m(r, c);
      os << '\n';
    }
  };
  for (std::size_t l = 0; l < mlp.n_layers(); ++l) {
    put(mlp.weights[l]);
    put(mlp.biases[l]);
  }
}

MlpParams load_mlp(std::istream& is, const std::string& source) {
  std::string tag, key;
  int version = 0;
  std::size_t layers = 0;
  if (!(is >> tag >> version >> key >> layers) || tag != "gacn-mlp" || version != 1 || key != "layers") {
    throw ParseError(source, 0, "bad discriminator header");
  }
  auto get = [&]() {
    Index r = 0, c = 0;
    if (!(is >> r >> c) || r < 1 || c < 1) throw ParseError(source, 0, "bad matrix shape");
    Matrix m(r, c);
    for (Index i = 0; i < m.size(); ++i)
      if (!(is >> m.data()[i])) throw ParseError(source, 0, "truncated matrix");
    return m;
  };
  MlpParams mlp;
  for (std::size_t l = 0; l < layers; ++l) {
    mlp.weights.push_back(get());
    mlp.biases.push_back(get());
    require(mlp.biases.back().rows() == 1 && mlp.biases.back().cols() == mlp.weights.back().cols(),
            "discriminator: bias shape mismatch");
    if (l > 0) require(mlp.weights[l].rows() == mlp.weights[l - 1].cols(), "discriminator: layer shape mismatch");
  }
  return mlp;
}

}  // namespace gacn
