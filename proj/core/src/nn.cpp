#include "prefopt/nn.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "prefopt/errors.hpp"

namespace prefopt {

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

std::size_t MlpSpec::param_count() const {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    total += static_cast<std::size_t>(layer_sizes[l + 1]) * (static_cast<std::size_t>(layer_sizes[l]) + 1);
  }
  return total;
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw std::invalid_argument("MlpSpec needs at least input and output sizes");
  for (int s : layer_sizes) {
    if (s < 1) throw std::invalid_argument("MlpSpec layer sizes must be >= 1");
  }
}

ParamVector::ParamVector(std::vector<double> values, std::vector<TensorShape> shapes)
    : values_(std::move(values)), shapes_(std::move(shapes)) {
  std::size_t total = 0;
  for (const auto& s : shapes_) total += s.size();
  if (total != values_.size()) {
    throw std::invalid_argument("ParamVector: shapes describe " + std::to_string(total) + " values, got " +
                                std::to_string(values_.size()));
  }
}

ParamVector ParamVector::zeros(std::vector<TensorShape> shapes) {
  std::size_t total = 0;
  for (const auto& s : shapes) total += s.size();
  return ParamVector(std::vector<double>(total, 0.0), std::move(shapes));
}

ParamVector ParamVector::zeros(const MlpSpec& spec) { return zeros(mlp_shapes(spec)); }

ParamVector ParamVector::flat(std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  return ParamVector(std::move(values), {TensorShape{n, 1}});
}

bool ParamVector::all_finite() const noexcept {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double ParamVector::norm() const noexcept {
  return std::sqrt(std::inner_product(values_.begin(), values_.end(), values_.begin(), 0.0));
}

std::vector<TensorShape> mlp_shapes(const MlpSpec& spec) {
  spec.validate();
  std::vector<TensorShape> shapes;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    shapes.push_back({spec.layer_sizes[l + 1], spec.layer_sizes[l]});
    shapes.push_back({spec.layer_sizes[l + 1], 1});
  }
  return shapes;
}

ParamVector init_fan_in_uniform(const MlpSpec& spec, RngStream& rng) {
  ParamVector p = ParamVector::zeros(spec);
  std::size_t off = 0;
  for (std::size_t l = 0; l < spec.num_weight_layers(); ++l) {
    const int fan_in = spec.layer_sizes[l];
    const int fan_out = spec.layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    const std::size_t count = static_cast<std::size_t>(fan_out) * (static_cast<std::size_t>(fan_in) + 1);
    for (std::size_t i = 0; i < count; ++i) p[off + i] = rng.uniform(-bound, bound);
    off += count;
  }
  return p;
}

namespace {

using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using MatMap = Eigen::Map<Eigen::MatrixXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

void check_param_length(const MlpSpec& spec, std::size_t n) {
  if (n != spec.param_count()) {
    throw std::invalid_argument("parameter vector length " + std::to_string(n) + " does not match MlpSpec (" +
                                std::to_string(spec.param_count()) + ")");
  }
}

}  // namespace

void forward_batch(const MlpSpec& spec, std::span<const double> params, const Eigen::MatrixXd& inputs,
                   MlpTape& tape) {
  spec.validate();
  check_param_length(spec, params.size());
  if (inputs.rows() != spec.input_size()) {
    throw std::invalid_argument("forward: input has " + std::to_string(inputs.rows()) + " rows, expected " +
                                std::to_string(spec.input_size()));
  }
  const std::size_t layers = spec.num_weight_layers();
  tape.pre.resize(layers);
  tape.post.resize(layers + 1);
  tape.weights.resize(layers);
  tape.post[0] = inputs;

  const double* p = params.data();
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = spec.layer_sizes[l];
    const int out = spec.layer_sizes[l + 1];
    auto& w = tape.weights[l];
    w = ConstMatMap(p, out, in);
    p += static_cast<std::ptrdiff_t>(out) * in;
    ConstVecMap b(p, out);
    p += out;

    auto& z = tape.pre[l];
    z.noalias() = w * tape.post[l];
    z.colwise() += b;

    auto& a = tape.post[l + 1];
    if (l + 1 == layers) {
      a = z;
    } else if (spec.activation == Activation::relu) {
      a = z.cwiseMax(0.0);
    } else {
      a = z.array().tanh().matrix();
    }
    if (!a.allFinite()) {
      throw NumericError("numeric overflow: non-finite output at layer " + std::to_string(l));
    }
  }
}

void backward_batch(const MlpSpec& spec, std::span<const double> params, const MlpTape& tape,
                    const Eigen::MatrixXd& upstream, std::span<double> grad, Eigen::MatrixXd* input_grad) {
  check_param_length(spec, params.size());
  if (grad.size() != params.size()) throw std::invalid_argument("backward: gradient buffer has wrong length");
  const std::size_t layers = spec.num_weight_layers();
  if (tape.pre.size() != layers || tape.weights.size() != layers) throw std::invalid_argument("backward: tape does not match spec");
  if (upstream.rows() != spec.output_size() || upstream.cols() != tape.post[0].cols()) {
    throw std::invalid_argument("backward: upstream gradient shape mismatch");
  }

  // Offsets of each layer's block.
  std::vector<std::size_t> offsets(layers);
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = off;
    off += static_cast<std::size_t>(spec.layer_sizes[l + 1]) * (static_cast<std::size_t>(spec.layer_sizes[l]) + 1);
  }

  Eigen::MatrixXd delta = upstream;
  for (std::size_t li = layers; li-- > 0;) {
    const int in = spec.layer_sizes[li];
    const int out = spec.layer_sizes[li + 1];
    Eigen::MatrixXd gw_owned;
    gw_owned.noalias() = delta * tape.post[li].transpose();
    MatMap(grad.data() + offsets[li], out, in) = gw_owned;
    const Eigen::VectorXd gb = delta.rowwise().sum();
    VecMap(grad.data() + offsets[li] + static_cast<std::size_t>(out) * in, out) = gb;

    if (li == 0 && input_grad == nullptr) break;
    const Eigen::MatrixXd& w = tape.weights[li];
    Eigen::MatrixXd back = w.transpose() * delta;
    if (li == 0) {
      *input_grad = std::move(back);
      break;
    }
    const auto& z = tape.pre[li - 1];
    if (spec.activation == Activation::relu) {
      delta = (z.array() > 0.0).select(back, 0.0);
    } else {
      const auto& a = tape.post[li];
      delta = back.array() * (1.0 - a.array().square());
    }
  }
}

std::vector<double> forward(const MlpSpec& spec, const ParamVector& params, std::span<const double> input) {
  MlpTape tape;
  Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<long>(input.size()));
  forward_batch(spec, params.data(), x, tape);
  const auto& y = tape.output();
  return std::vector<double>(y.data(), y.data() + y.size());
}

MlpGradient backward(const MlpSpec& spec, const ParamVector& params, std::span<const double> input,
                     std::span<const double> upstream_grad) {
  MlpTape tape;
  Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<long>(input.size()));
  forward_batch(spec, params.data(), x, tape);
  if (upstream_grad.size() != static_cast<std::size_t>(spec.output_size())) {
    throw std::invalid_argument("backward: upstream gradient length mismatch");
  }
  Eigen::MatrixXd up = Eigen::Map<const Eigen::VectorXd>(upstream_grad.data(), spec.output_size());
  MlpGradient g{ParamVector::zeros(spec), {}};
  Eigen::MatrixXd gin;
  backward_batch(spec, params.data(), tape, up, g.params.data(), &gin);
  g.input.assign(gin.data(), gin.data() + gin.size());
  return g;
}

std::vector<std::uint8_t> activation_pattern(const MlpSpec& spec, const MlpTape& tape) {
  std::vector<std::uint8_t> out;
  if (spec.activation != Activation::relu) return out;
  for (std::size_t l = 0; l + 1 < tape.pre.size(); ++l) {
    const auto& z = tape.pre[l];
    for (long i = 0; i < z.size(); ++i) out.push_back(z.data()[i] > 0.0 ? 1 : 0);
  }
  return out;
}

}  // namespace prefopt
