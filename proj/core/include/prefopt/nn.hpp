#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "prefopt/rng.hpp"

namespace prefopt {

enum class Activation { relu, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Dense network: layer_sizes = (input, hidden..., output). The activation
// applies to hidden layers; the output layer is affine.
struct MlpSpec {
  std::vector<int> layer_sizes;
  Activation activation = Activation::relu;

  std::size_t num_weight_layers() const noexcept {
    return layer_sizes.empty() ? 0 : layer_sizes.size() - 1;
  }
  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  std::size_t param_count() const;

  // Throws std::invalid_argument unless there are >= 2 sizes, all >= 1.
  void validate() const;

  bool operator==(const MlpSpec&) const = default;
};

struct TensorShape {
  int rows = 0;
  int cols = 1;

  std::size_t size() const noexcept { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
  bool operator==(const TensorShape&) const = default;
};

// Flat parameter storage with shape metadata. For an MLP the layout is
// W_0 (column-major, out x in), b_0, W_1, b_1, ...
class ParamVector {
 public:
  ParamVector() = default;
  ParamVector(std::vector<double> values, std::vector<TensorShape> shapes);

  static ParamVector zeros(std::vector<TensorShape> shapes);
  static ParamVector zeros(const MlpSpec& spec);
  // A single column tensor holding `values`.
  static ParamVector flat(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<double> data() noexcept { return values_; }
  std::span<const double> data() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  const std::vector<TensorShape>& shapes() const noexcept { return shapes_; }

  bool all_finite() const noexcept;
  double norm() const noexcept;
  ParamVector zeros_like() const { return zeros(shapes_); }

  bool operator==(const ParamVector&) const = default;

 private:
  std::vector<double> values_;
  std::vector<TensorShape> shapes_;
};

std::vector<TensorShape> mlp_shapes(const MlpSpec& spec);

// Weights and biases uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], drawn
// layer by layer (weights column-major, then biases).
ParamVector init_fan_in_uniform(const MlpSpec& spec, RngStream& rng);

// Activations cached by a batched forward pass. Columns are samples.
struct MlpTape {
  std::vector<Eigen::MatrixXd> pre;   // pre[l]: affine output of layer l
  std::vector<Eigen::MatrixXd> post;  // post[0]: input; post[l+1]: output of layer l
  std::vector<Eigen::MatrixXd> weights;

  const Eigen::MatrixXd& output() const { return post.back(); }
};

// Throws NumericError naming the first layer whose output is non-finite.
void forward_batch(const MlpSpec& spec, std::span<const double> params, const Eigen::MatrixXd& inputs,
                   MlpTape& tape);

// Reverse pass for sum_j upstream(:,j) . output(:,j). Overwrites `grad`
// (length param_count); writes the input gradient when `input_grad` is set.
void backward_batch(const MlpSpec& spec, std::span<const double> params, const MlpTape& tape,
                    const Eigen::MatrixXd& upstream, std::span<double> grad,
                    Eigen::MatrixXd* input_grad = nullptr);

std::vector<double> forward(const MlpSpec& spec, const ParamVector& params, std::span<const double> input);

struct MlpGradient {
  ParamVector params;
  std::vector<double> input;
};

MlpGradient backward(const MlpSpec& spec, const ParamVector& params, std::span<const double> input,
                     std::span<const double> upstream_grad);

// One byte per hidden unit per sample: 1 where a relu unit is active. Empty
// for tanh networks. Used to keep finite-difference probes off kinks.
std::vector<std::uint8_t> activation_pattern(const MlpSpec& spec, const MlpTape& tape);

}  // namespace prefopt
