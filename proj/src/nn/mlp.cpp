#include "polyc/nn/mlp.hpp"

#include <cmath>

namespace polyc::nn {

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

Mlp::Mlp(std::vector<int> layer_widths, Activation activation)
    : widths_(std::move(layer_widths)), activation_(activation) {
  if (widths_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output widths");
  for (int w : widths_) {
    if (w <= 0) throw std::invalid_argument("Mlp layer widths must be positive");
  }
  Eigen::Index total = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offsets_.push_back(total);
    auto in = widths_[static_cast<std::size_t>(l)];
    auto out = widths_[static_cast<std::size_t>(l) + 1];
    total += static_cast<Eigen::Index>(in) * out + out;
  }
  params_ = Vec::Zero(total);
}

Mlp Mlp::glorot(std::vector<int> layer_widths, Activation activation, Rng& rng) {
  Mlp net(std::move(layer_widths), activation);
  for (int l = 0; l < net.num_layers(); ++l) {
    auto w = net.weight(l);
    double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    // Row-major fill order so the draw sequence matches the serialized layout.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
  }
  return net;
}

void Mlp::set_params(const Vec& p) {
  require_dim(p.size(), params_.size(), "Mlp::set_params");
  if (!p.allFinite()) throw NumericalError("Mlp::set_params: non-finite parameters");
  params_ = p;
}

Eigen::Index Mlp::bias_offset(int layer) const {
  auto in = widths_[static_cast<std::size_t>(layer)];
  auto out = widths_[static_cast<std::size_t>(layer) + 1];
  return weight_offset(layer) + static_cast<Eigen::Index>(in) * out;
}

Eigen::Map<const Mat> Mlp::weight(int layer) const {
  auto in = widths_[static_cast<std::size_t>(layer)];
  auto out = widths_[static_cast<std::size_t>(layer) + 1];
  return {params_.data() + weight_offset(layer), out, in};
}

Eigen::Map<Mat> Mlp::weight(int layer) {
  auto in = widths_[static_cast<std::size_t>(layer)];
  auto out = widths_[static_cast<std::size_t>(layer) + 1];
  return {params_.data() + weight_offset(layer), out, in};
}

Eigen::Map<const Vec> Mlp::bias(int layer) const {
  return {params_.data() + bias_offset(layer), widths_[static_cast<std::size_t>(layer) + 1]};
}

Eigen::Map<Vec> Mlp::bias(int layer) {
  return {params_.data() + bias_offset(layer), widths_[static_cast<std::size_t>(layer) + 1]};
}

Vec Mlp::forward(const Vec& x) const {
  require_dim(x.size(), input_dim(), "Mlp::forward");
  Vec h = x;
  for (int l = 0; l < num_layers(); ++l) {
    Vec z = weight(l) * h + bias(l);
    if (l + 1 < num_layers()) {
      h = activation_ == Activation::tanh ? Vec(z.array().tanh()) : Vec(z.cwiseMax(0.0));
    } else {
      h = std::move(z);
    }
  }
  return h;
}

Vec Mlp::forward(const Vec& x, Tape& tape) const {
  require_dim(x.size(), input_dim(), "Mlp::forward");
  tape.inputs.resize(static_cast<std::size_t>(num_layers()));
  tape.pre.resize(static_cast<std::size_t>(num_layers()));
  Vec h = x;
  for (int l = 0; l < num_layers(); ++l) {
    auto k = static_cast<std::size_t>(l);
    tape.inputs[k] = h;
    tape.pre[k] = weight(l) * h + bias(l);
    if (l + 1 < num_layers()) {
      h = activation_ == Activation::tanh ? Vec(tape.pre[k].array().tanh())
                                          : Vec(tape.pre[k].cwiseMax(0.0));
    } else {
      h = tape.pre[k];
    }
  }
  return h;
}

double Mlp::value(const Vec& x) const {
  if (output_dim() != 1) throw DimensionError("Mlp::value: network output is not scalar");
  return forward(x)[0];
}

Vec Mlp::backward(const Tape& tape, const Vec& upstream, Eigen::Ref<Vec> param_grad) const {
  require_dim(upstream.size(), output_dim(), "Mlp::backward upstream");
  require_dim(param_grad.size(), num_params(), "Mlp::backward param_grad");
  if (static_cast<int>(tape.pre.size()) != num_layers()) {
    throw DimensionError("Mlp::backward: tape does not belong to this network");
  }
  Vec delta = upstream;  // dL/d(pre-activation) of the current layer
  for (int l = num_layers() - 1; l >= 0; --l) {
    auto k = static_cast<std::size_t>(l);
    if (l + 1 < num_layers()) {
      if (activation_ == Activation::tanh) {
        // The next layer's input is tanh of this pre-activation.
        delta = delta.array() * (1.0 - tape.inputs[k + 1].array().square());
      } else {
        delta = delta.array() * (tape.pre[k].array() > 0.0).cast<double>();
      }
    }
    auto in = widths_[k];
    auto out = widths_[k + 1];
    Eigen::Map<Mat> dw(param_grad.data() + weight_offset(l), out, in);
    Eigen::Map<Vec> db(param_grad.data() + bias_offset(l), out);
    dw.noalias() += delta * tape.inputs[k].transpose();
    db += delta;
    delta = weight(l).transpose() * delta;
  }
  return delta;
}

nlohmann::json Mlp::to_json() const {
  nlohmann::json j;
  j["layer_widths"] = widths_;
  j["activation"] = to_string(activation_);
  auto weights = nlohmann::json::array();
  auto biases = nlohmann::json::array();
  for (int l = 0; l < num_layers(); ++l) {
    auto w = weight(l);
    auto rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(w.cols()));
      for (Eigen::Index c = 0; c < w.cols(); ++c) row[static_cast<std::size_t>(c)] = w(r, c);
      rows.push_back(row);
    }
    weights.push_back(rows);
    auto b = bias(l);
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  j["weights"] = weights;
  j["biases"] = biases;
  return j;
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  Mlp net(j.at("layer_widths").get<std::vector<int>>(),
          activation_from_string(j.at("activation").get<std::string>()));
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (static_cast<int>(weights.size()) != net.num_layers() ||
      static_cast<int>(biases.size()) != net.num_layers()) {
    throw DimensionError("Mlp::from_json: layer count mismatch");
  }
  for (int l = 0; l < net.num_layers(); ++l) {
    auto k = static_cast<std::size_t>(l);
    auto w = net.weight(l);
    const auto& rows = weights[k];
    if (static_cast<Eigen::Index>(rows.size()) != w.rows()) throw DimensionError("Mlp::from_json: weight rows");
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      const auto& row = rows[static_cast<std::size_t>(r)];
      if (static_cast<Eigen::Index>(row.size()) != w.cols()) throw DimensionError("Mlp::from_json: weight cols");
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    auto b = net.bias(l);
    const auto& bj = biases[k];
    if (static_cast<Eigen::Index>(bj.size()) != b.size()) throw DimensionError("Mlp::from_json: bias size");
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = bj[static_cast<std::size_t>(i)].get<double>();
  }
  if (!net.params().allFinite()) throw NumericalError("Mlp::from_json: non-finite parameters");
  return net;
}

}  // namespace polyc::nn
