#include <numeric>

#include "airground/preference.h"
#include "airground/random.h"

namespace airground {

namespace {

void to_matrix(const Dataset& data, Eigen::MatrixXd& x, Eigen::VectorXd& y) {
  x.resize(kFeatureCount, static_cast<Eigen::Index>(data.size()));
  y.resize(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t r = 0; r < kFeatureCount; ++r) x(r, i) = data[i].features[r];
    y(i) = data[i].label;
  }
}

}  // namespace

TrainResult train(Mlp& model, const Dataset& data, const TrainConfig& cfg) {
  if (data.empty()) throw EmptyDataset("training set is empty");
  if (cfg.batch_size <= 0) throw std::invalid_argument("batch size must be positive");
  if (model.input_dim() != static_cast<int>(kFeatureCount)) {
    throw DimensionMismatch("network input width differs from the feature layout");
  }
  TrainResult result;
  if (cfg.epochs <= 0) return result;

  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  to_matrix(data, x, y);
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);
  AdamState state = AdamState::for_model(model, cfg.learning_rate);

  Eigen::MatrixXd bx;
  Eigen::VectorXd by;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double weighted = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t count = std::min<std::size_t>(cfg.batch_size, n - start);
      bx.resize(kFeatureCount, static_cast<Eigen::Index>(count));
      by.resize(static_cast<Eigen::Index>(count));
      for (std::size_t i = 0; i < count; ++i) {
        bx.col(i) = x.col(order[start + i]);
        by(i) = y(order[start + i]);
      }
      double loss = 0.0;
      const Gradients g = backprop_gradients(model, bx, by, &loss);
      adam_step(model, g, state, cfg.layer_rate_scale);
      weighted += loss * static_cast<double>(count);
    }
    result.epoch_loss.push_back(weighted / static_cast<double>(n));
  }
  return result;
}

double dataset_loss(const Mlp& model, const Dataset& data) {
  if (data.empty()) throw EmptyDataset("empty dataset");
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  to_matrix(data, x, y);
  const Eigen::VectorXd p = model.forward_batch(x);
  std::vector<double> preds(p.data(), p.data() + p.size());
  std::vector<int> labels(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) labels[i] = data[i].label;
  return bce_loss(preds, labels);
}

Mlp transfer_finetune(const Mlp& source, const Dataset& target,
                      TransferMode mode, const TransferConfig& cfg,
                      TrainResult* result) {
  if (source.input_dim() != static_cast<int>(kFeatureCount)) {
    throw DimensionMismatch("source network input width differs from the feature layout");
  }
  const double reduced = cfg.transfer_rate_ratio;
  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.learning_rate = cfg.base_learning_rate;
  tc.seed = cfg.seed;

  Mlp model;
  if (mode == TransferMode::GvFineTune) {
    model = Mlp(source.layers(), Architecture::Shared, source.layers().size());
    tc.layer_rate_scale.assign(source.layers().size(), reduced);
  } else {
    const auto& src = source.layers();
    if (src.size() < 2) throw DimensionMismatch("source has no trunk to share");
    if (cfg.specific_dims.empty() || cfg.specific_dims.back() != 1) {
      throw DimensionMismatch("specific layers must end in a single output");
    }
    std::vector<Layer> layers(src.begin(), src.end() - 1);
    std::vector<int> dims = {static_cast<int>(layers.back().w.rows())};
    dims.insert(dims.end(), cfg.specific_dims.begin(), cfg.specific_dims.end());
    const Mlp head = Mlp::xavier(dims, derive_seed(cfg.seed, 0x5bec));
    const std::size_t shared = layers.size();
    for (const auto& l : head.layers()) layers.push_back(l);
    model = Mlp(std::move(layers), Architecture::SharedPlusSpecific, shared);
    tc.layer_rate_scale.assign(model.layers().size(), 1.0);
    for (std::size_t k = 0; k < shared; ++k) tc.layer_rate_scale[k] = reduced;
  }
  if (cfg.epochs > 0) {
    TrainResult r = train(model, target, tc);
    if (result) *result = std::move(r);
  }
  return model;
}

}  // namespace airground
