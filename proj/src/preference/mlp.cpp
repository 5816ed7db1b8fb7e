#include <algorithm>
#include <cfloat>
#include <cmath>

#include "airground/preference.h"
#include "airground/random.h"

namespace airground {

namespace {

double sigmoid(double z) {
  if (z >= 0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Keeps the output strictly inside (0, 1) even when the logistic saturates.
double open_unit(double p) {
  return std::clamp(p, DBL_MIN, std::nextafter(1.0, 0.0));
}

}  // namespace

Mlp::Mlp(std::vector<Layer> layers, Architecture arch, std::size_t shared_layers)
    : layers_(std::move(layers)), arch_(arch), shared_layers_(shared_layers) {
  validate();
}

void Mlp::validate() const {
  if (layers_.empty()) throw DimensionMismatch("network has no layers");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& l = layers_[k];
    if (l.w.rows() != l.b.size() || l.w.rows() == 0 || l.w.cols() == 0) {
      throw DimensionMismatch("layer " + std::to_string(k) + " has inconsistent shape");
    }
    if (k > 0 && l.w.cols() != layers_[k - 1].w.rows()) {
      throw DimensionMismatch("layer " + std::to_string(k) + " does not chain");
    }
    if (!l.w.allFinite() || !l.b.allFinite()) {
      throw DimensionMismatch("layer " + std::to_string(k) + " has non-finite parameters");
    }
  }
  if (layers_.back().w.rows() != 1) throw DimensionMismatch("output width must be 1");
  if (shared_layers_ > layers_.size()) throw DimensionMismatch("shared block too long");
}

std::vector<int> default_shared_dims() { return {9, 64, 64, 32, 1}; }

Mlp Mlp::xavier(const std::vector<int>& dims, std::uint64_t seed) {
  if (dims.size() < 2) throw DimensionMismatch("need at least two layer widths");
  Rng rng(seed);
  std::vector<Layer> layers;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const int in = dims[k];
    const int out = dims[k + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    Layer l{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) l.w(r, c) = rng.uniform(-limit, limit);
    }
    layers.push_back(std::move(l));
  }
  return Mlp(std::move(layers));
}

Mlp Mlp::zeros(const std::vector<int>& dims) {
  if (dims.size() < 2) throw DimensionMismatch("need at least two layer widths");
  std::vector<Layer> layers;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    layers.push_back({Eigen::MatrixXd::Zero(dims[k + 1], dims[k]),
                      Eigen::VectorXd::Zero(dims[k + 1])});
  }
  return Mlp(std::move(layers));
}

int Mlp::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().w.cols());
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.w.size() + l.b.size();
  return n;
}

bool Mlp::operator==(const Mlp& other) const {
  if (arch_ != other.arch_ || shared_layers_ != other.shared_layers_ ||
      layers_.size() != other.layers_.size()) {
    return false;
  }
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& a = layers_[k];
    const auto& b = other.layers_[k];
    if (a.w.rows() != b.w.rows() || a.w.cols() != b.w.cols() || a.w != b.w || a.b != b.b) {
      return false;
    }
  }
  return true;
}

double Mlp::forward(const FeatureVector& x) const {
  if (input_dim() != static_cast<int>(x.size())) {
    throw DimensionMismatch("input has " + std::to_string(x.size()) +
                            " entries, network expects " + std::to_string(input_dim()));
  }
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Eigen::VectorXd z = layers_[k].w * a + layers_[k].b;
    if (k + 1 < layers_.size()) {
      a = z.cwiseMax(0.0);
    } else {
      return open_unit(sigmoid(z(0)));
    }
  }
  return 0.5;
}

double Mlp::forward(const std::vector<double>& x) const {
  if (input_dim() != static_cast<int>(x.size())) {
    throw DimensionMismatch("input has " + std::to_string(x.size()) +
                            " entries, network expects " + std::to_string(input_dim()));
  }
  Eigen::MatrixXd m = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  return forward_batch(m)(0);
}

Eigen::VectorXd Mlp::forward_batch(const Eigen::MatrixXd& x) const {
  if (x.rows() != input_dim()) throw DimensionMismatch("batch row count differs from input width");
  Eigen::MatrixXd a = x;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Eigen::MatrixXd z = layers_[k].w * a;
    z.colwise() += layers_[k].b;
    if (k + 1 < layers_.size()) {
      a = z.cwiseMax(0.0);
    } else {
      a = z;
    }
  }
  Eigen::VectorXd out(a.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i) out(i) = open_unit(sigmoid(a(0, i)));
  return out;
}

double bce_loss(const std::vector<double>& preds, const std::vector<int>& labels) {
  if (preds.size() != labels.size() || preds.empty()) {
    throw LengthMismatch("predictions and labels must have equal nonzero length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double p = std::clamp(preds[i], kBceClamp, 1.0 - kBceClamp);
    sum += labels[i] ? std::log(p) : std::log(1.0 - p);
  }
  return -sum / static_cast<double>(preds.size());
}

Gradients backprop_gradients(const Mlp& model, const Eigen::MatrixXd& x,
                             const Eigen::VectorXd& y, double* loss) {
  const auto& layers = model.layers();
  const Eigen::Index n = x.cols();
  if (n == 0) throw EmptyDataset("empty batch");
  if (y.size() != n) throw LengthMismatch("label count differs from batch size");
  if (x.rows() != model.input_dim()) throw DimensionMismatch("batch row count differs from input width");

  const std::size_t depth = layers.size();
  std::vector<Eigen::MatrixXd> act(depth + 1);  // act[k] feeds layer k
  std::vector<Eigen::MatrixXd> pre(depth);
  act[0] = x;
  for (std::size_t k = 0; k < depth; ++k) {
    pre[k] = layers[k].w * act[k];
    pre[k].colwise() += layers[k].b;
    act[k + 1] = k + 1 < depth ? Eigen::MatrixXd(pre[k].cwiseMax(0.0)) : pre[k];
  }

  Eigen::MatrixXd delta(1, n);
  double sum = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = sigmoid(pre[depth - 1](0, i));
    const bool clamped = p < kBceClamp || p > 1.0 - kBceClamp;
    const double pc = std::clamp(p, kBceClamp, 1.0 - kBceClamp);
    sum += y(i) > 0.5 ? std::log(pc) : std::log(1.0 - pc);
    delta(0, i) = clamped ? 0.0 : (p - y(i)) * inv_n;
  }
  if (loss) *loss = -sum * inv_n;

  Gradients g(depth);
  for (std::size_t k = depth; k-- > 0;) {
    g[k].w = delta * act[k].transpose();
    g[k].b = delta.rowwise().sum();
    if (k > 0) {
      Eigen::MatrixXd back = layers[k].w.transpose() * delta;
      delta = back.cwiseProduct((pre[k - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

Gradients backprop_gradients(const Mlp& model, const Dataset& batch) {
  if (batch.empty()) throw EmptyDataset("empty batch");
  Eigen::MatrixXd x(kFeatureCount, batch.size());
  Eigen::VectorXd y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t r = 0; r < kFeatureCount; ++r) x(r, i) = batch[i].features[r];
    y(i) = batch[i].label;
  }
  return backprop_gradients(model, x, y);
}

AdamState AdamState::for_model(const Mlp& model, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  for (const auto& l : model.layers()) {
    s.m.push_back({Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()),
                   Eigen::VectorXd::Zero(l.b.size())});
  }
  s.v = s.m;
  return s;
}

void adam_step(Mlp& model, const Gradients& grads, AdamState& state,
               const std::vector<double>& layer_rate_scale) {
  auto& layers = model.layers();
  if (grads.size() != layers.size() || state.m.size() != layers.size() ||
      state.v.size() != layers.size() ||
      (!layer_rate_scale.empty() && layer_rate_scale.size() != layers.size())) {
    throw ShapeMismatch("gradient, state and model layer counts differ");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    if (grads[k].w.rows() != l.w.rows() || grads[k].w.cols() != l.w.cols() ||
        grads[k].b.size() != l.b.size() || state.m[k].w.rows() != l.w.rows() ||
        state.m[k].w.cols() != l.w.cols()) {
      throw ShapeMismatch("layer " + std::to_string(k) + " shapes differ");
    }
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  auto update = [&](auto& param, const auto& g, auto& m, auto& v, double lr) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.epsilon);
  };
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const double lr = state.learning_rate *
                      (layer_rate_scale.empty() ? 1.0 : layer_rate_scale[k]);
    update(layers[k].w, grads[k].w, state.m[k].w, state.v[k].w, lr);
    update(layers[k].b, grads[k].b, state.m[k].b, state.v[k].b, lr);
  }
}

}  // namespace airground
