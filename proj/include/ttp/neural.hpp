#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ttp::neural {

enum class Activation { ReLU, Sigmoid, Tanh, Identity };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// One fully connected layer: activation(weights * x + bias).
struct DenseLayer {
  Matrix weights;             // [out x in]
  std::vector<double> bias;   // [out]
  Activation activation = Activation::Identity;

  std::size_t inputs() const { return weights.cols; }
  std::size_t outputs() const { return weights.rows; }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Throws ShapeError when |x| != layer inputs.
std::vector<double> dense_forward(const DenseLayer& layer, std::span<const double> x);

// Nested composition of the layers. The last layer must be 1 wide with
// Identity activation.
double mlp_forward(std::span<const DenseLayer> layers, std::span<const double> x);

// Gate slots inside LstmCell, in storage order.
enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kCandidate = 3 };
inline constexpr std::size_t kGateCount = 4;

// Input / forget / output gates use the logistic sigmoid, the candidate uses tanh.
struct LstmCell {
  std::array<Matrix, kGateCount> input_weights;      // [hidden x in]
  std::array<Matrix, kGateCount> recurrent_weights;  // [hidden x hidden]
  std::array<std::vector<double>, kGateCount> biases;  // [hidden]

  std::size_t inputs() const { return input_weights[0].cols; }
  std::size_t hidden() const { return input_weights[0].rows; }
  friend bool operator==(const LstmCell&, const LstmCell&) = default;
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
  static LstmState zeros(std::size_t hidden) { return {std::vector<double>(hidden, 0.0), std::vector<double>(hidden, 0.0)}; }
};

// c_t = f * c_prev + i * candidate;  h_t = o * tanh(c_t)
LstmState lstm_step(const LstmCell& cell, std::span<const double> x, const LstmState& prev);

enum class ModelKind { Ann, Mlp, Lstm };
const char* to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

// Stacked LSTM layers (possibly none), then ReLU dense layers, then a
// 1-wide linear output.
struct Architecture {
  ModelKind kind = ModelKind::Mlp;
  std::size_t input_dim = 12;
  std::vector<std::size_t> lstm_units;
  std::vector<std::size_t> dense_units;

  static Architecture ann(std::size_t input_dim = 12);   // 256 ReLU
  static Architecture mlp(std::size_t input_dim = 12);   // 64 -> 32 ReLU
  static Architecture lstm(std::size_t input_dim = 12);  // 2 x 64 LSTM, 64 ReLU head
  static Architecture builtin(ModelKind kind, std::size_t input_dim = 12);
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

// A sample is a sequence of timesteps; dense-only models take exactly one.
using Sequence = std::vector<std::vector<double>>;

struct Model {
  Architecture arch;
  std::vector<LstmCell> lstm;
  std::vector<DenseLayer> dense;
  // Training targets are z-scored with these; predictions are mapped back.
  double target_mean = 0.0;
  double target_std = 1.0;
  friend bool operator==(const Model&, const Model&) = default;
};

// Glorot-uniform weights, zero biases, LSTM forget-gate bias 1.
Model init_model(const Architecture& arch, std::uint64_t seed);

// Same shapes, every parameter zero. Gradients use this layout.
Model zeros_like(const Model& m);

// Calls fn(std::span<double>) for every parameter block in a fixed order.
template <typename Fn>
void for_each_block(Model& m, Fn&& fn) {
  for (auto& cell : m.lstm) {
    for (std::size_t g = 0; g < kGateCount; ++g) {
      fn(std::span<double>(cell.input_weights[g].data));
      fn(std::span<double>(cell.recurrent_weights[g].data));
      fn(std::span<double>(cell.biases[g]));
    }
  }
  for (auto& layer : m.dense) {
    fn(std::span<double>(layer.weights.data));
    fn(std::span<double>(layer.bias));
  }
}

std::size_t parameter_count(const Model& m);
std::vector<double> flatten(const Model& m);
void unflatten(Model& m, std::span<const double> values);

// Raw network output, in the scaled target space.
double forward(const Model& m, const Sequence& x);
// forward() mapped back through the target scaling.
double predict(const Model& m, const Sequence& x);

// Mean squared error of forward() against targets (scaled space).
double mse_loss(const Model& m, std::span<const Sequence> xs, std::span<const double> targets);

struct Gradients {
  Model grad;   // zeros_like(model) layout
  double loss = 0.0;
};

// Exact gradients of mse_loss for every parameter (backprop through time for
// LSTM layers). The ReLU derivative at 0 is taken as 0.
Gradients backward(const Model& m, std::span<const Sequence> xs, std::span<const double> targets);

enum class OptimizerKind { Adam, Sgd };

struct TrainConfig {
  std::size_t batch_size = 128;
  int epochs = 200;
  double learning_rate = 1e-3;
  std::uint64_t seed = 42;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // batch 128, 200 epochs for ANN/MLP, 50 for LSTM
  static TrainConfig defaults_for(ModelKind kind);
  void validate() const;
};

struct TrainResult {
  Model model;
  std::vector<double> loss_history;  // mean training loss per epoch
};

// Initialises from config.seed and fits. Targets are raw seconds; the model
// learns them z-scored. Throws TrainingDiverged on a non-finite epoch loss.
TrainResult train(const Architecture& arch, std::span<const Sequence> xs,
                  std::span<const double> targets_s, const TrainConfig& config);

// Fits an existing model in place; target scaling is refitted from targets_s.
std::vector<double> fit(Model& model, std::span<const Sequence> xs,
                        std::span<const double> targets_s, const TrainConfig& config);

double rmse(std::span<const double> y_true, std::span<const double> y_pred);
double mae(std::span<const double> y_true, std::span<const double> y_pred);

nlohmann::json to_json(const Model& m);
Model model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace ttp::neural
