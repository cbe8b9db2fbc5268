#pragma once

#include "polyc/types.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace polyc::nn {

enum class Activation { tanh, relu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Intermediate values of one forward pass, kept for reverse mode.
struct Tape {
  std::vector<Vec> inputs;  // inputs[l] feeds layer l; inputs[0] is x
  std::vector<Vec> pre;     // pre-activation of layer l
};

/**
 * Dense feed-forward network. Hidden layers apply the activation; the output
 * layer is affine. All parameters live in one flat vector laid out layer by
 * layer as [W_0 (column-major, out x in), b_0, W_1, b_1, ...], so optimizers
 * and finite-difference checks can treat the network as a single vector.
 */
class Mlp {
 public:
  Mlp() = default;
  /// Zero-initialized network.
  Mlp(std::vector<int> layer_widths, Activation activation);

  /// Glorot-uniform weights, zero biases.
  static Mlp glorot(std::vector<int> layer_widths, Activation activation, Rng& rng);

  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  int num_layers() const { return static_cast<int>(widths_.size()) - 1; }
  const std::vector<int>& layer_widths() const { return widths_; }
  Activation activation() const { return activation_; }

  Eigen::Index num_params() const { return params_.size(); }
  const Vec& params() const { return params_; }
  /// Replaces all parameters; rejects wrong size or non-finite values.
  void set_params(const Vec& p);

  Eigen::Map<const Mat> weight(int layer) const;
  Eigen::Map<Mat> weight(int layer);
  Eigen::Map<const Vec> bias(int layer) const;
  Eigen::Map<Vec> bias(int layer);

  Vec forward(const Vec& x) const;
  Vec forward(const Vec& x, Tape& tape) const;

  /// Scalar-output convenience.
  double value(const Vec& x) const;

  /**
   * Reverse-mode pass for the scalar upstream . output. Parameter gradients are
   * ADDED into `param_grad` (size num_params()), so minibatch losses can be
   * accumulated without temporaries. Returns the gradient with respect to x.
   */
  Vec backward(const Tape& tape, const Vec& upstream, Eigen::Ref<Vec> param_grad) const;

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

 private:
  Eigen::Index weight_offset(int layer) const { return offsets_[static_cast<std::size_t>(layer)]; }
  Eigen::Index bias_offset(int layer) const;

  std::vector<int> widths_;
  Activation activation_ = Activation::tanh;
  std::vector<Eigen::Index> offsets_;
  Vec params_;
};

}  // namespace polyc::nn
