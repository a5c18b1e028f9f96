#include "ttp/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ttp/error.hpp"
#include "ttp/rng.hpp"

namespace ttp::neural {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double activate(Activation a, double z) {
  switch (a) {
    case Activation::ReLU: return z > 0.0 ? z : 0.0;
    case Activation::Sigmoid: return sigmoid(z);
    case Activation::Tanh: return std::tanh(z);
    case Activation::Identity: return z;
  }
  return z;
}

// Derivative expressed through the activation output y = activate(z).
double slope_from_output(Activation a, double y) {
  switch (a) {
    case Activation::ReLU: return y > 0.0 ? 1.0 : 0.0;
    case Activation::Sigmoid: return y * (1.0 - y);
    case Activation::Tanh: return 1.0 - y * y;
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

void shape_check(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

void check_dense(const DenseLayer& l) {
  shape_check(l.weights.data.size() == l.weights.rows * l.weights.cols,
              "dense weight storage does not match its shape");
  shape_check(l.bias.size() == l.weights.rows, "dense bias length differs from output width");
}

void check_cell(const LstmCell& c) {
  const std::size_t h = c.hidden();
  const std::size_t in = c.inputs();
  for (std::size_t g = 0; g < kGateCount; ++g) {
    shape_check(c.input_weights[g].rows == h && c.input_weights[g].cols == in &&
                    c.input_weights[g].data.size() == h * in,
                "lstm input weights have inconsistent shapes");
    shape_check(c.recurrent_weights[g].rows == h && c.recurrent_weights[g].cols == h &&
                    c.recurrent_weights[g].data.size() == h * h,
                "lstm recurrent weights have inconsistent shapes");
    shape_check(c.biases[g].size() == h, "lstm bias length differs from hidden width");
  }
}

void check_model(const Model& m) {
  std::size_t width = m.arch.input_dim;
  for (const auto& c : m.lstm) {
    check_cell(c);
    shape_check(c.inputs() == width, "lstm layer input width does not chain");
    width = c.hidden();
  }
  shape_check(!m.dense.empty(), "model needs an output layer");
  for (const auto& l : m.dense) {
    check_dense(l);
    shape_check(l.inputs() == width, "dense layer input width does not chain");
    width = l.outputs();
  }
  shape_check(width == 1 && m.dense.back().activation == Activation::Identity,
              "model output must be a single linear unit");
}

// z = W x + b (accumulated into out, which must hold b or zero)
void gemv_add(const Matrix& w, std::span<const double> x, std::span<double> out) {
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double* row = w.data.data() + r * w.cols;
    double s = 0.0;
    for (std::size_t c = 0; c < w.cols; ++c) s += row[c] * x[c];
    out[r] += s;
  }
}

// out += W^T d
void gemv_t_add(const Matrix& w, std::span<const double> d, std::span<double> out) {
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double dr = d[r];
    if (dr == 0.0) continue;
    const double* row = w.data.data() + r * w.cols;
    for (std::size_t c = 0; c < w.cols; ++c) out[c] += row[c] * dr;
  }
}

// G += d x^T
void outer_add(Matrix& g, std::span<const double> d, std::span<const double> x) {
  for (std::size_t r = 0; r < g.rows; ++r) {
    const double dr = d[r];
    if (dr == 0.0) continue;
    double* row = g.data.data() + r * g.cols;
    for (std::size_t c = 0; c < g.cols; ++c) row[c] += dr * x[c];
  }
}

struct StepCache {
  std::vector<double> x;
  std::vector<double> h_prev;
  std::vector<double> c_prev;
  std::array<std::vector<double>, kGateCount> gate;  // activated gate values
  std::vector<double> c;
  std::vector<double> tanh_c;
  std::vector<double> h;
};

// Per-sample forward record reused across the samples of a batch.
struct Workspace {
  std::vector<std::vector<StepCache>> steps;  // [layer][t]
  std::vector<std::vector<double>> dense_in;
  std::vector<std::vector<double>> dense_out;
};

void lstm_step_cached(const LstmCell& cell, std::span<const double> x,
                      std::span<const double> h_prev, std::span<const double> c_prev,
                      StepCache& s) {
  const std::size_t n = cell.hidden();
  s.x.assign(x.begin(), x.end());
  s.h_prev.assign(h_prev.begin(), h_prev.end());
  s.c_prev.assign(c_prev.begin(), c_prev.end());
  for (std::size_t g = 0; g < kGateCount; ++g) {
    auto& v = s.gate[g];
    v.assign(cell.biases[g].begin(), cell.biases[g].end());
    gemv_add(cell.input_weights[g], x, v);
    gemv_add(cell.recurrent_weights[g], h_prev, v);
    for (auto& z : v) z = g == kCandidate ? std::tanh(z) : sigmoid(z);
  }
  s.c.resize(n);
  s.tanh_c.resize(n);
  s.h.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    s.c[k] = s.gate[kForgetGate][k] * c_prev[k] + s.gate[kInputGate][k] * s.gate[kCandidate][k];
    s.tanh_c[k] = std::tanh(s.c[k]);
    s.h[k] = s.gate[kOutputGate][k] * s.tanh_c[k];
  }
}

double forward_cached(const Model& m, const Sequence& xs, Workspace& ws) {
  shape_check(!xs.empty(), "input sequence is empty");
  for (const auto& x : xs) shape_check(x.size() == m.arch.input_dim, "input width mismatch");
  std::span<const double> top;
  if (m.lstm.empty()) {
    shape_check(xs.size() == 1, "dense models take a single timestep");
    top = xs[0];
  } else {
    ws.steps.resize(m.lstm.size());
    const std::size_t T = xs.size();
    for (std::size_t l = 0; l < m.lstm.size(); ++l) {
      const auto& cell = m.lstm[l];
      auto& steps = ws.steps[l];
      steps.resize(T);
      const std::vector<double> zeros(cell.hidden(), 0.0);
      for (std::size_t t = 0; t < T; ++t) {
        std::span<const double> in = l == 0 ? std::span<const double>(xs[t])
                                            : std::span<const double>(ws.steps[l - 1][t].h);
        std::span<const double> hp = t == 0 ? std::span<const double>(zeros)
                                            : std::span<const double>(steps[t - 1].h);
        std::span<const double> cp = t == 0 ? std::span<const double>(zeros)
                                            : std::span<const double>(steps[t - 1].c);
        lstm_step_cached(cell, in, hp, cp, steps[t]);
      }
    }
    top = ws.steps.back().back().h;
  }
  ws.dense_in.resize(m.dense.size());
  ws.dense_out.resize(m.dense.size());
  for (std::size_t l = 0; l < m.dense.size(); ++l) {
    const auto& layer = m.dense[l];
    auto& in = ws.dense_in[l];
    in.assign(top.begin(), top.end());
    auto& out = ws.dense_out[l];
    out.assign(layer.bias.begin(), layer.bias.end());
    gemv_add(layer.weights, in, out);
    for (auto& z : out) z = activate(layer.activation, z);
    top = out;
  }
  return ws.dense_out.back()[0];
}

// Accumulates d(loss)/d(params) for one sample given d(loss)/d(output).
void backward_sample(const Model& m, const Workspace& ws, double d_out, Model& g) {
  std::vector<double> upstream{d_out};
  std::vector<double> delta;
  std::vector<double> down;
  for (std::size_t l = m.dense.size(); l-- > 0;) {
    const auto& layer = m.dense[l];
    const auto& out = ws.dense_out[l];
    delta.resize(out.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
      delta[k] = upstream[k] * slope_from_output(layer.activation, out[k]);
    }
    auto& gl = g.dense[l];
    outer_add(gl.weights, delta, ws.dense_in[l]);
    for (std::size_t k = 0; k < delta.size(); ++k) gl.bias[k] += delta[k];
    if (l == 0 && m.lstm.empty()) break;
    down.assign(layer.inputs(), 0.0);
    gemv_t_add(layer.weights, delta, down);
    upstream.swap(down);
  }
  if (m.lstm.empty()) return;

  // Backprop through time, top layer first. dh_from_above[t] is the gradient
  // reaching h_t of the current layer from the layer above (or the dense head).
  const std::size_t T = ws.steps.back().size();
  std::vector<std::vector<double>> dh_from_above(T);
  dh_from_above[T - 1] = upstream;
  for (std::size_t t = 0; t + 1 < T; ++t) dh_from_above[t].assign(m.lstm.back().hidden(), 0.0);

  std::array<std::vector<double>, kGateCount> da;
  for (std::size_t l = m.lstm.size(); l-- > 0;) {
    const auto& cell = m.lstm[l];
    auto& gc = g.lstm[l];
    const std::size_t n = cell.hidden();
    std::vector<double> dh_next(n, 0.0);
    std::vector<double> dc_next(n, 0.0);
    std::vector<std::vector<double>> dx(T, std::vector<double>(cell.inputs(), 0.0));
    for (std::size_t t = T; t-- > 0;) {
      const StepCache& s = ws.steps[l][t];
      for (auto& v : da) v.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        const double dh = dh_from_above[t][k] + dh_next[k];
        const double i = s.gate[kInputGate][k];
        const double f = s.gate[kForgetGate][k];
        const double o = s.gate[kOutputGate][k];
        const double cand = s.gate[kCandidate][k];
        const double dc = dc_next[k] + dh * o * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
        da[kOutputGate][k] = dh * s.tanh_c[k] * o * (1.0 - o);
        da[kInputGate][k] = dc * cand * i * (1.0 - i);
        da[kForgetGate][k] = dc * s.c_prev[k] * f * (1.0 - f);
        da[kCandidate][k] = dc * i * (1.0 - cand * cand);
        dc_next[k] = dc * f;
      }
      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      for (std::size_t gi = 0; gi < kGateCount; ++gi) {
        outer_add(gc.input_weights[gi], da[gi], s.x);
        outer_add(gc.recurrent_weights[gi], da[gi], s.h_prev);
        for (std::size_t k = 0; k < n; ++k) gc.biases[gi][k] += da[gi][k];
        if (l > 0) gemv_t_add(cell.input_weights[gi], da[gi], dx[t]);
        if (t > 0) gemv_t_add(cell.recurrent_weights[gi], da[gi], dh_next);
      }
    }
    if (l > 0) dh_from_above = std::move(dx);
  }
}

// Sum (not mean) of squared residuals over the selected samples; gradients are
// accumulated with the 2 r / scale factor.
double accumulate_batch(const Model& m, std::span<const Sequence> xs,
                        std::span<const double> targets, std::span<const std::size_t> idx,
                        double scale, Model& g, Workspace& ws) {
  double sse = 0.0;
  for (std::size_t i : idx) {
    const double y = forward_cached(m, xs[i], ws);
    const double r = y - targets[i];
    sse += r * r;
    backward_sample(m, ws, 2.0 * r / scale, g);
  }
  return sse;
}

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix w(rows, cols);
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (auto& v : w.data) v = rng.uniform(-limit, limit);
  return w;
}

void require_data(std::span<const Sequence> xs, std::span<const double> targets) {
  if (xs.empty()) throw InvalidInput("training set is empty");
  if (xs.size() != targets.size()) throw ShapeError("inputs and targets differ in length");
}

}  // namespace

const char* to_string(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity") return Activation::Identity;
  throw InvalidInput("unknown activation '" + s + "'");
}

std::vector<double> dense_forward(const DenseLayer& layer, std::span<const double> x) {
  check_dense(layer);
  shape_check(x.size() == layer.inputs(), "dense input width mismatch: got " +
                                              std::to_string(x.size()) + ", expected " +
                                              std::to_string(layer.inputs()));
  std::vector<double> out(layer.bias);
  gemv_add(layer.weights, x, out);
  for (auto& z : out) z = activate(layer.activation, z);
  return out;
}

double mlp_forward(std::span<const DenseLayer> layers, std::span<const double> x) {
  shape_check(!layers.empty(), "network has no layers");
  shape_check(layers.back().outputs() == 1 && layers.back().activation == Activation::Identity,
              "final layer must be a single linear unit");
  std::vector<double> a(x.begin(), x.end());
  for (const auto& layer : layers) a = dense_forward(layer, a);
  return a[0];
}

LstmState lstm_step(const LstmCell& cell, std::span<const double> x, const LstmState& prev) {
  check_cell(cell);
  shape_check(x.size() == cell.inputs(), "lstm input width mismatch");
  shape_check(prev.h.size() == cell.hidden() && prev.c.size() == cell.hidden(),
              "lstm state width mismatch");
  StepCache s;
  lstm_step_cached(cell, x, prev.h, prev.c, s);
  return {std::move(s.h), std::move(s.c)};
}

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Ann: return "ann";
    case ModelKind::Mlp: return "mlp";
    case ModelKind::Lstm: return "lstm";
  }
  return "mlp";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "ann") return ModelKind::Ann;
  if (s == "mlp") return ModelKind::Mlp;
  if (s == "lstm") return ModelKind::Lstm;
  throw InvalidInput("unknown model kind '" + s + "' (expected ann, mlp or lstm)");
}

Architecture Architecture::ann(std::size_t input_dim) {
  return {ModelKind::Ann, input_dim, {}, {256}};
}
Architecture Architecture::mlp(std::size_t input_dim) {
  return {ModelKind::Mlp, input_dim, {}, {64, 32}};
}
Architecture Architecture::lstm(std::size_t input_dim) {
  return {ModelKind::Lstm, input_dim, {64, 64}, {64}};
}
Architecture Architecture::builtin(ModelKind kind, std::size_t input_dim) {
  switch (kind) {
    case ModelKind::Ann: return ann(input_dim);
    case ModelKind::Mlp: return mlp(input_dim);
    case ModelKind::Lstm: return lstm(input_dim);
  }
  return mlp(input_dim);
}

Model init_model(const Architecture& arch, std::uint64_t seed) {
  if (arch.input_dim == 0) throw InvalidInput("input dimension must be positive");
  Rng rng(seed);
  Model m;
  m.arch = arch;
  std::size_t width = arch.input_dim;
  for (std::size_t units : arch.lstm_units) {
    if (units == 0) throw InvalidInput("lstm layer width must be positive");
    LstmCell cell;
    for (std::size_t g = 0; g < kGateCount; ++g) {
      cell.input_weights[g] = glorot(units, width, rng);
      cell.recurrent_weights[g] = glorot(units, units, rng);
      cell.biases[g].assign(units, g == kForgetGate ? 1.0 : 0.0);
    }
    m.lstm.push_back(std::move(cell));
    width = units;
  }
  auto add_dense = [&](std::size_t units, Activation act) {
    DenseLayer layer{glorot(units, width, rng), std::vector<double>(units, 0.0), act};
    m.dense.push_back(std::move(layer));
    width = units;
  };
  for (std::size_t units : arch.dense_units) {
    if (units == 0) throw InvalidInput("dense layer width must be positive");
    add_dense(units, Activation::ReLU);
  }
  add_dense(1, Activation::Identity);
  return m;
}

Model zeros_like(const Model& m) {
  Model z = m;
  for_each_block(z, [](std::span<double> b) { std::fill(b.begin(), b.end(), 0.0); });
  return z;
}

std::size_t parameter_count(const Model& m) {
  std::size_t n = 0;
  for_each_block(const_cast<Model&>(m), [&](std::span<double> b) { n += b.size(); });
  return n;
}

std::vector<double> flatten(const Model& m) {
  std::vector<double> out;
  out.reserve(parameter_count(m));
  for_each_block(const_cast<Model&>(m),
                 [&](std::span<double> b) { out.insert(out.end(), b.begin(), b.end()); });
  return out;
}

void unflatten(Model& m, std::span<const double> values) {
  if (values.size() != parameter_count(m)) throw ShapeError("parameter vector has wrong length");
  std::size_t off = 0;
  for_each_block(m, [&](std::span<double> b) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(off), b.size(), b.begin());
    off += b.size();
  });
}

double forward(const Model& m, const Sequence& x) {
  check_model(m);
  Workspace ws;
  return forward_cached(m, x, ws);
}

double predict(const Model& m, const Sequence& x) {
  return forward(m, x) * m.target_std + m.target_mean;
}

double mse_loss(const Model& m, std::span<const Sequence> xs, std::span<const double> targets) {
  require_data(xs, targets);
  check_model(m);
  Workspace ws;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = forward_cached(m, xs[i], ws) - targets[i];
    sse += r * r;
  }
  return sse / static_cast<double>(xs.size());
}

Gradients backward(const Model& m, std::span<const Sequence> xs, std::span<const double> targets) {
  require_data(xs, targets);
  check_model(m);
  Gradients out{zeros_like(m), 0.0};
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  Workspace ws;
  const double n = static_cast<double>(xs.size());
  out.loss = accumulate_batch(m, xs, targets, idx, n, out.grad, ws) / n;
  return out;
}

TrainConfig TrainConfig::defaults_for(ModelKind kind) {
  TrainConfig c;
  c.epochs = kind == ModelKind::Lstm ? 50 : 200;
  return c;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw InvalidInput("batch size must be at least 1");
  if (epochs < 1) throw InvalidInput("epochs must be at least 1");
  if (!std::isfinite(learning_rate) || learning_rate < 0.0) {
    throw InvalidInput("learning rate must be finite and non-negative");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw InvalidInput("invalid Adam hyperparameters");
  }
}

std::vector<double> fit(Model& model, std::span<const Sequence> xs,
                        std::span<const double> targets_s, const TrainConfig& config) {
  config.validate();
  require_data(xs, targets_s);
  check_model(model);

  const double n = static_cast<double>(targets_s.size());
  double mean = 0.0;
  for (double t : targets_s) mean += t;
  mean /= n;
  double var = 0.0;
  for (double t : targets_s) var += (t - mean) * (t - mean);
  const double sd = std::sqrt(var / n);
  model.target_mean = mean;
  model.target_std = sd > 0.0 ? sd : 1.0;
  std::vector<double> targets(targets_s.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    targets[i] = (targets_s[i] - model.target_mean) / model.target_std;
  }

  Model grad = zeros_like(model);
  std::vector<std::span<double>> params;
  std::vector<std::span<double>> grads;
  for_each_block(model, [&](std::span<double> b) { params.push_back(b); });
  for_each_block(grad, [&](std::span<double> b) { grads.push_back(b); });
  const std::size_t count = parameter_count(model);
  std::vector<double> m1(count, 0.0);
  std::vector<double> m2(count, 0.0);
  double beta1_t = 1.0;
  double beta2_t = 1.0;

  Rng rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  Workspace ws;
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double epoch_sse = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, stop - start);
      for (auto& b : grads) std::fill(b.begin(), b.end(), 0.0);
      epoch_sse += accumulate_batch(model, xs, targets, batch,
                                    static_cast<double>(batch.size()), grad, ws);

      if (config.optimizer == OptimizerKind::Adam) {
        beta1_t *= config.beta1;
        beta2_t *= config.beta2;
        std::size_t off = 0;
        for (std::size_t b = 0; b < params.size(); ++b) {
          auto p = params[b];
          auto g = grads[b];
          for (std::size_t k = 0; k < p.size(); ++k, ++off) {
            m1[off] = config.beta1 * m1[off] + (1.0 - config.beta1) * g[k];
            m2[off] = config.beta2 * m2[off] + (1.0 - config.beta2) * g[k] * g[k];
            const double mhat = m1[off] / (1.0 - beta1_t);
            const double vhat = m2[off] / (1.0 - beta2_t);
            p[k] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
          }
        }
      } else {
        for (std::size_t b = 0; b < params.size(); ++b) {
          auto p = params[b];
          auto g = grads[b];
          for (std::size_t k = 0; k < p.size(); ++k) p[k] -= config.learning_rate * g[k];
        }
      }
    }
    const double loss = epoch_sse / n;
    if (!std::isfinite(loss)) {
      throw TrainingDiverged(epoch + 1, "training diverged at epoch " + std::to_string(epoch + 1));
    }
    history.push_back(loss);
  }
  return history;
}

TrainResult train(const Architecture& arch, std::span<const Sequence> xs,
                  std::span<const double> targets_s, const TrainConfig& config) {
  TrainResult r{init_model(arch, config.seed), {}};
  r.loss_history = fit(r.model, xs, targets_s, config);
  return r;
}

double rmse(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.empty()) throw InvalidInput("rmse of an empty set");
  if (y_true.size() != y_pred.size()) throw InvalidInput("rmse inputs differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double r = y_pred[i] - y_true[i];
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(y_true.size()));
}

double mae(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.empty()) throw InvalidInput("mae of an empty set");
  if (y_true.size() != y_pred.size()) throw InvalidInput("mae inputs differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) s += std::fabs(y_pred[i] - y_true[i]);
  return s / static_cast<double>(y_true.size());
}

nlohmann::json to_json(const Model& m) {
  nlohmann::json lstm = nlohmann::json::array();
  for (const auto& c : m.lstm) {
    nlohmann::json u = nlohmann::json::array();
    nlohmann::json w = nlohmann::json::array();
    nlohmann::json b = nlohmann::json::array();
    for (std::size_t g = 0; g < kGateCount; ++g) {
      u.push_back(c.input_weights[g].data);
      w.push_back(c.recurrent_weights[g].data);
      b.push_back(c.biases[g]);
    }
    lstm.push_back({{"inputs", c.inputs()},
                    {"hidden", c.hidden()},
                    {"gate_order", {"input", "forget", "output", "candidate"}},
                    {"input_weights", std::move(u)},
                    {"recurrent_weights", std::move(w)},
                    {"biases", std::move(b)}});
  }
  nlohmann::json dense = nlohmann::json::array();
  for (const auto& l : m.dense) {
    dense.push_back({{"rows", l.weights.rows},
                     {"cols", l.weights.cols},
                     {"activation", to_string(l.activation)},
                     {"weights", l.weights.data},
                     {"bias", l.bias}});
  }
  return {{"architecture",
           {{"kind", to_string(m.arch.kind)},
            {"input_dim", m.arch.input_dim},
            {"lstm_units", m.arch.lstm_units},
            {"dense_units", m.arch.dense_units}}},
          {"target_scaling", {{"mean", m.target_mean}, {"std", m.target_std}}},
          {"lstm_layers", std::move(lstm)},
          {"dense_layers", std::move(dense)}};
}

Model model_from_json(const nlohmann::json& j) {
  Model m;
  try {
    const auto& a = j.at("architecture");
    m.arch.kind = model_kind_from_string(a.at("kind").get<std::string>());
    m.arch.input_dim = a.at("input_dim").get<std::size_t>();
    m.arch.lstm_units = a.at("lstm_units").get<std::vector<std::size_t>>();
    m.arch.dense_units = a.at("dense_units").get<std::vector<std::size_t>>();
    m.target_mean = j.at("target_scaling").at("mean").get<double>();
    m.target_std = j.at("target_scaling").at("std").get<double>();
    for (const auto& c : j.at("lstm_layers")) {
      const auto in = c.at("inputs").get<std::size_t>();
      const auto h = c.at("hidden").get<std::size_t>();
      LstmCell cell;
      for (std::size_t g = 0; g < kGateCount; ++g) {
        cell.input_weights[g] = Matrix(h, in);
        cell.input_weights[g].data = c.at("input_weights").at(g).get<std::vector<double>>();
        cell.recurrent_weights[g] = Matrix(h, h);
        cell.recurrent_weights[g].data = c.at("recurrent_weights").at(g).get<std::vector<double>>();
        cell.biases[g] = c.at("biases").at(g).get<std::vector<double>>();
      }
      m.lstm.push_back(std::move(cell));
    }
    for (const auto& l : j.at("dense_layers")) {
      DenseLayer layer;
      layer.weights = Matrix(l.at("rows").get<std::size_t>(), l.at("cols").get<std::size_t>());
      layer.weights.data = l.at("weights").get<std::vector<double>>();
      layer.bias = l.at("bias").get<std::vector<double>>();
      layer.activation = activation_from_string(l.at("activation").get<std::string>());
      m.dense.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("bad model checkpoint: ") + e.what());
  }
  check_model(m);
  if (m.lstm.size() != m.arch.lstm_units.size() || m.dense.size() != m.arch.dense_units.size() + 1) {
    throw SchemaError("checkpoint layers disagree with the architecture");
  }
  if (!(m.target_std > 0.0)) throw SchemaError("checkpoint target scale must be positive");
  return m;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"seed", c.seed},
          {"optimizer", c.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"epsilon", c.epsilon}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.epochs = j.at("epochs").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    const auto opt = j.at("optimizer").get<std::string>();
    if (opt != "adam" && opt != "sgd") throw SchemaError("unknown optimizer '" + opt + "'");
    c.optimizer = opt == "adam" ? OptimizerKind::Adam : OptimizerKind::Sgd;
    c.beta1 = j.value("beta1", 0.9);
    c.beta2 = j.value("beta2", 0.999);
    c.epsilon = j.value("epsilon", 1e-8);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("bad training config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace ttp::neural
