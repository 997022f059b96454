#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gacn/diff.hpp"
#include "gacn/encoder.hpp"
#include "gacn/rng.hpp"

namespace gacn {

// Graph-level classifier h: layers x -> x W_i + b_i with ReLU between layers
// and a single output logit. W_i is in x out, b_i is 1 x out.
struct MlpParams {
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;

  std::size_t n_layers() const noexcept { return weights.size(); }
  Index in_width() const { return weights.front().rows(); }
};

// He-normal hidden layers, zero biases, and a zero output layer so that an
// untrained discriminator scores every view at exactly 0.5.
MlpParams init_mlp(Index in_width, Index hidden, int layers, Rng& rng);

struct MlpVars {
  std::vector<diff::Var> weights;
  std::vector<diff::Var> biases;
};
MlpVars bind_mlp(diff::Tape& tape, const MlpParams& mlp, bool requires_grad);

// [mean over nodes | max over nodes], 1 x 2D.
diff::Var pool_graph(diff::Var final);
inline diff::Var pool_graph(const EncoderOutput& enc) { return pool_graph(enc.final); }

struct Discrimination {
  diff::Var logit;
  diff::Var p;  // sigmoid(logit), clamped
};
Discrimination discriminate(diff::Var d_g, const MlpVars& mlp);

// -y log p - (1 - y) log(1 - p), p clamped first.
diff::Var bce_loss(diff::Var p, int y);
// Same loss from the logit, via log-sigmoid; gradients do not vanish when the
// probability saturates.
diff::Var bce_with_logit(diff::Var logit, int y);

// -log p, i.e. bce_loss(p, 1).
diff::Var adversarial_loss(diff::Var p);
inline diff::Var adversarial_loss_with_logit(diff::Var logit) { return bce_with_logit(logit, 1); }

void save_mlp(std::ostream& os, const MlpParams& mlp);
MlpParams load_mlp(std::istream& is, const std::string& source = "discriminator");

}  // namespace gacn
