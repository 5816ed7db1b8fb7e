#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "airground/agents.h"
#include "airground/feasibility.h"
#include "airground/geo.h"

namespace airground {

constexpr std::size_t kFeatureCount = 9;

// Slots: day fraction of t_o, pick-up x and y scaled to the area, detour (km),
// speed (m/s), delivery distance (km), cost, load fraction, remaining time
// as a fraction of the deadline.
using FeatureVector = std::array<double, kFeatureCount>;

struct LabeledSample {
  FeatureVector features{};
  int label = 0;
};

using Dataset = std::vector<LabeledSample>;

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class LengthMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class EmptyDataset : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class MalformedRecord : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Features

struct FeatureContext {
  Rect bounds;
  double uav_cost_rate = 0.0;  // CNY per second of added UAV time
};

FeatureVector courier_features(const CourierState& courier, const Parcel& p,
                               double now, const CandidatePlan& c,
                               const FeasibilityConfig& cfg,
                               const FeatureContext& ctx);
FeatureVector gv_features(const GvState& gv, const Parcel& p, double now,
                          const CandidatePlan& c, const FeasibilityConfig& cfg,
                          const FeatureContext& ctx);
FeatureVector uav_features(const UavState& uav, const Parcel& p, double now,
                           const CandidatePlan& c, const FeasibilityConfig& cfg,
                           const FeatureContext& ctx);

// ---------------------------------------------------------------------------
// Network

struct Layer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;  // out
};

enum class Architecture : std::uint8_t { Shared, SharedPlusSpecific };

// Feed-forward network: ReLU on hidden layers, logistic output of width 1.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<Layer> layers,
               Architecture arch = Architecture::Shared,
               std::size_t shared_layers = 0);

  // Xavier-uniform weights and zero biases.
  static Mlp xavier(const std::vector<int>& dims, std::uint64_t seed);
  static Mlp zeros(const std::vector<int>& dims);

  double forward(const FeatureVector& x) const;
  double forward(const std::vector<double>& x) const;
  // Columns of x are samples; returns one preference per column.
  Eigen::VectorXd forward_batch(const Eigen::MatrixXd& x) const;

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  Architecture architecture() const { return arch_; }
  // Number of leading layers transferred from a source network.
  std::size_t shared_layers() const { return shared_layers_; }
  int input_dim() const;
  std::size_t parameter_count() const;
  bool operator==(const Mlp& other) const;

 private:
  void validate() const;

  std::vector<Layer> layers_;
  Architecture arch_ = Architecture::Shared;
  std::size_t shared_layers_ = 0;
};

std::vector<int> default_shared_dims();  // 9, 64, 64, 32, 1

using Gradients = std::vector<Layer>;

constexpr double kBceClamp = 1e-7;

double bce_loss(const std::vector<double>& preds, const std::vector<int>& labels);

// Exact gradient of the mean BCE loss of `batch` with respect to every weight
// and bias.
Gradients backprop_gradients(const Mlp& model, const Dataset& batch);
// Same on column-major inputs; also returns the batch loss.
Gradients backprop_gradients(const Mlp& model, const Eigen::MatrixXd& x,
                             const Eigen::VectorXd& y, double* loss = nullptr);

struct AdamState {
  std::vector<Layer> m;
  std::vector<Layer> v;
  long t = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_model(const Mlp& model, double learning_rate);
};

// One bias-corrected Adam update. `layer_rate_scale` (empty = all 1)
// multiplies the learning rate per layer.
void adam_step(Mlp& model, const Gradients& grads, AdamState& state,
               const std::vector<double>& layer_rate_scale = {});

struct TrainConfig {
  int epochs = 20;
  int batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  std::vector<double> layer_rate_scale;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean loss over each epoch's batches
};

TrainResult train(Mlp& model, const Dataset& data, const TrainConfig& cfg);

double dataset_loss(const Mlp& model, const Dataset& data);

enum class TransferMode : std::uint8_t { GvFineTune, UavSpecific };

struct TransferConfig {
  int epochs = 20;
  int batch_size = 64;
  double base_learning_rate = 1e-3;
  double transfer_rate_ratio = 0.1;      // applied to transferred layers
  std::vector<int> specific_dims = {32, 1};  // widths after the shared trunk
  std::uint64_t seed = 1;
};

// GvFineTune copies the source and retrains every layer at the reduced rate.
// UavSpecific drops the source's output layer, keeps the rest as a shared
// trunk and appends freshly initialised specific layers trained at the full
// rate.
Mlp transfer_finetune(const Mlp& source, const Dataset& target,
                      TransferMode mode, const TransferConfig& cfg,
                      TrainResult* result = nullptr);

// ---------------------------------------------------------------------------
// Preference prediction

double predict_preference(const Mlp& model, const CourierState& courier,
                          const Parcel& p, double now, const CandidatePlan& c,
                          const FeasibilityConfig& cfg, const FeatureContext& ctx);
double predict_preference(const Mlp& model, const GvState& gv, const Parcel& p,
                          double now, const CandidatePlan& c,
                          const FeasibilityConfig& cfg, const FeatureContext& ctx);
double predict_preference(const Mlp& model, const UavState& uav, const Parcel& p,
                          double now, const CandidatePlan& c,
                          const FeasibilityConfig& cfg, const FeatureContext& ctx);

// ---------------------------------------------------------------------------
// Courier acceptance log

// One candidate decision as recorded in a courier history. Missing numeric
// fields are NaN.
struct CourierLogRecord {
  double t_order = 0.0;  // seconds, time of day
  double x = 0.0;        // pick-up location, meters
  double y = 0.0;
  double detour_km = 0.0;
  double speed = 0.0;
  double dist_km = 0.0;
  double cost = 0.0;
  double payload = 0.0;
  double n_max = 0.0;
  double t_re = 0.0;  // seconds
  int accepted = 0;
};

Dataset extract_courier_dataset(const std::vector<CourierLogRecord>& log,
                                const FeatureContext& ctx, double deadline);

std::vector<CourierLogRecord> read_courier_log(std::istream& in);
void write_courier_log(std::ostream& out, const std::vector<CourierLogRecord>& log);

// ---------------------------------------------------------------------------
// Serialization: text with hexadecimal floats, bit-exact on round trip.

void save_model(std::ostream& out, const Mlp& model);
Mlp load_model(std::istream& in);

struct ModelBundle {
  Mlp courier;
  Mlp gv;
  Mlp uav;
  std::string fingerprint;

  bool operator==(const ModelBundle& o) const {
    return courier == o.courier && gv == o.gv && uav == o.uav &&
           fingerprint == o.fingerprint;
  }
};

void save_bundle(const std::string& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::string& path);
void save_bundle(std::ostream& out, const ModelBundle& bundle);
ModelBundle load_bundle(std::istream& in);

}  // namespace airground
