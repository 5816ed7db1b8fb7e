#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "airground/preference.h"
#include "airground/random.h"
#include "support.h"

using namespace airground;

namespace {

bool same_parameters(const std::vector<Layer>& a, const std::vector<Layer>& b, std::size_t count) {
  if (a.size() < count || b.size() < count) return false;
  for (std::size_t k = 0; k < count; ++k) {
    if (a[k].w.rows() != b[k].w.rows() || a[k].w.cols() != b[k].w.cols()) return false;
    if (a[k].w != b[k].w || a[k].b != b[k].b) return false;
  }
  return true;
}

FeatureVector random_features(Rng& rng) {
  FeatureVector f;
  for (auto& v : f) v = rng.uniform();
  return f;
}

Dataset random_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) d.push_back({random_features(rng), rng.bernoulli(0.4) ? 1 : 0});
  return d;
}

CourierLogRecord record_at_eleven(int accepted) {
  CourierLogRecord r;
  r.t_order = 11 * 3600.0;
  r.x = 10000;
  r.y = 30000;
  r.detour_km = 0.5;
  r.speed = 5;
  r.dist_km = 2;
  r.cost = 6.3;
  r.payload = 2;
  r.n_max = 5;
  r.t_re = 20 * 60.0;
  r.accepted = accepted;
  return r;
}

}  // namespace

TEST(Forward, ZeroNetworkGivesHalf) {
  const Mlp m = Mlp::zeros(default_shared_dims());
  Rng rng(1);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(m.forward(random_features(rng)), 0.5);
}

TEST(Forward, SingleLinearLayerAtOrigin) {
  Layer l{Eigen::MatrixXd::Zero(1, kFeatureCount), Eigen::VectorXd::Zero(1)};
  l.w(0, 0) = 1.0;
  const Mlp m({l});
  EXPECT_EQ(m.forward(FeatureVector{}), 0.5);
  FeatureVector x{};
  x[0] = 2.0;
  EXPECT_NEAR(m.forward(x), 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
}

TEST(Forward, ShapeGuards) {
  const Mlp m = Mlp::zeros({9, 4, 1});
  EXPECT_THROW(m.forward(std::vector<double>(8, 0.0)), DimensionMismatch);
  Layer a{Eigen::MatrixXd::Zero(4, 9), Eigen::VectorXd::Zero(4)};
  Layer b{Eigen::MatrixXd::Zero(1, 3), Eigen::VectorXd::Zero(1)};
  EXPECT_THROW(Mlp({a, b}), DimensionMismatch);
  Layer wide{Eigen::MatrixXd::Zero(2, 4), Eigen::VectorXd::Zero(2)};
  EXPECT_THROW(Mlp({a, wide}), DimensionMismatch);
}

TEST(Forward, OutputInOpenUnitIntervalAndDeterministic) {
  Mlp m = Mlp::xavier(default_shared_dims(), 4);
  for (auto& l : m.layers()) l.w *= 40.0;  // saturate the logistic
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    FeatureVector x = random_features(rng);
    for (auto& v : x) v *= 100.0;
    const double p = m.forward(x);
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
    EXPECT_EQ(p, m.forward(x));
  }
}

TEST(Forward, BatchMatchesSingle) {
  const Mlp m = Mlp::xavier(default_shared_dims(), 9);
  Rng rng(3);
  Eigen::MatrixXd x(kFeatureCount, 5);
  std::vector<FeatureVector> cols;
  for (int i = 0; i < 5; ++i) {
    cols.push_back(random_features(rng));
    for (std::size_t r = 0; r < kFeatureCount; ++r) x(r, i) = cols.back()[r];
  }
  const Eigen::VectorXd p = m.forward_batch(x);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(p(i), m.forward(cols[i]), 1e-14);
}

TEST(Loss, KnownValues) {
  EXPECT_LT(bce_loss({1.0, 0.0, 1.0}, {1, 0, 1}), 1e-6);
  EXPECT_NEAR(bce_loss({0.5, 0.5, 0.5, 0.5}, {1, 0, 0, 1}), std::log(2.0), 1e-12);
  EXPECT_NEAR(bce_loss({1e-7}, {1}), -std::log(1e-7), 1e-9);
  EXPECT_NEAR(bce_loss({1e-7}, {1}), 16.118, 1e-3);
  EXPECT_NEAR(bce_loss({0.0}, {1}), -std::log(kBceClamp), 1e-9);  // clamped
  EXPECT_THROW(bce_loss({0.5}, {1, 0}), LengthMismatch);
  EXPECT_THROW(bce_loss({}, {}), LengthMismatch);
}

TEST(Gradients, MatchFiniteDifferences) {
  double worst = 0.0;
  std::size_t total = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    std::size_t checked = 0;
    worst = std::max(worst, test_support::gradient_check_draw(1000 + s, &checked));
    total += checked;
  }
  EXPECT_GT(total, 1000u);
  EXPECT_LT(worst, 1e-5);
}

TEST(Gradients, PerfectPredictionHasZeroOutputGradient) {
  // A saturated output matching its label contributes no gradient.
  Layer l{Eigen::MatrixXd::Zero(1, kFeatureCount), Eigen::VectorXd::Constant(1, 40.0)};
  const Mlp m({l});
  Dataset batch = {{FeatureVector{}, 1}};
  const Gradients g = backprop_gradients(m, batch);
  EXPECT_NEAR(g[0].b(0), 0.0, 1e-12);
  EXPECT_NEAR(g[0].w.cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Gradients, Guards) {
  const Mlp m = Mlp::zeros({9, 3, 1});
  EXPECT_THROW(backprop_gradients(m, Dataset{}), EmptyDataset);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(9, 2);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(backprop_gradients(m, x, y), LengthMismatch);
}

TEST(Adam, FirstStepMovesBySignTimesRate) {
  Mlp m = Mlp::xavier({9, 4, 1}, 3);
  const Mlp before = m;
  Gradients g;
  Rng rng(8);
  for (const auto& l : m.layers()) {
    Layer gl{Eigen::MatrixXd(l.w.rows(), l.w.cols()), Eigen::VectorXd(l.b.size())};
    for (Eigen::Index i = 0; i < gl.w.size(); ++i) gl.w.data()[i] = rng.uniform(0.1, 2) * (rng.bernoulli(0.5) ? 1 : -1);
    for (Eigen::Index i = 0; i < gl.b.size(); ++i) gl.b.data()[i] = rng.uniform(0.1, 2) * (rng.bernoulli(0.5) ? 1 : -1);
    g.push_back(gl);
  }
  const double eta = 1e-3;
  AdamState st = AdamState::for_model(m, eta);
  adam_step(m, g, st);
  EXPECT_EQ(st.t, 1);
  for (std::size_t k = 0; k < g.size(); ++k) {
    for (Eigen::Index i = 0; i < g[k].w.size(); ++i) {
      const double delta = m.layers()[k].w.data()[i] - before.layers()[k].w.data()[i];
      const double sign = g[k].w.data()[i] > 0 ? 1.0 : -1.0;
      EXPECT_NEAR(delta, -eta * sign, 1e-6 * eta);
    }
  }
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Mlp m = Mlp::xavier({9, 4, 1}, 3);
  const Mlp before = m;
  Gradients g;
  for (const auto& l : m.layers()) {
    g.push_back({Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()), Eigen::VectorXd::Zero(l.b.size())});
  }
  AdamState st = AdamState::for_model(m, 1e-3);
  adam_step(m, g, st);
  EXPECT_TRUE(same_parameters(m.layers(), before.layers(), m.layers().size()));
}

TEST(Adam, TwoStepTraceMatchesHandAlgebra) {
  Layer l{Eigen::MatrixXd::Zero(1, kFeatureCount), Eigen::VectorXd::Zero(1)};
  Mlp m({l});
  AdamState st = AdamState::for_model(m, 0.01);
  const double grads[2] = {0.5, -0.2};
  double theta = 0.0, mom = 0.0, var = 0.0;
  for (int t = 1; t <= 2; ++t) {
    Gradients g = {{Eigen::MatrixXd::Zero(1, kFeatureCount), Eigen::VectorXd::Constant(1, grads[t - 1])}};
    adam_step(m, g, st);
    mom = 0.9 * mom + 0.1 * grads[t - 1];
    var = 0.999 * var + 0.001 * grads[t - 1] * grads[t - 1];
    const double mhat = mom / (1 - std::pow(0.9, t));
    const double vhat = var / (1 - std::pow(0.999, t));
    theta -= 0.01 * mhat / (std::sqrt(vhat) + 1e-8);
    EXPECT_NEAR(m.layers()[0].b(0), theta, 1e-15);
  }
}

TEST(Adam, ShapeGuard) {
  Mlp m = Mlp::xavier({9, 4, 1}, 3);
  AdamState st = AdamState::for_model(m, 1e-3);
  Gradients wrong = {{Eigen::MatrixXd::Zero(4, 9), Eigen::VectorXd::Zero(4)}};
  EXPECT_THROW(adam_step(m, wrong, st), ShapeMismatch);
}

TEST(Training, SeparableToySetConverges) {
  const Dataset toy = test_support::separable_toy_set(400, 5);
  Mlp m = Mlp::xavier(default_shared_dims(), 6);
  const TrainResult r = train(m, toy, {200, 32, 1e-3, 7, {}});
  ASSERT_EQ(r.epoch_loss.size(), 200u);
  EXPECT_LT(dataset_loss(m, toy), 0.1);
  EXPECT_LE(r.epoch_loss.back(), r.epoch_loss.front());
}

TEST(Training, ZeroEpochsAndDeterminism) {
  const Dataset d = random_dataset(100, 3);
  Mlp m = Mlp::xavier(default_shared_dims(), 6);
  const Mlp before = m;
  EXPECT_TRUE(train(m, d, {0, 32, 1e-3, 1, {}}).epoch_loss.empty());
  EXPECT_EQ(m, before);

  Mlp a = before, b = before;
  train(a, d, {3, 16, 1e-3, 9, {}});
  train(b, d, {3, 16, 1e-3, 9, {}});
  EXPECT_EQ(a, b);
  Mlp c = before;
  train(c, d, {3, 16, 1e-3, 10, {}});
  EXPECT_FALSE(a == c);
  EXPECT_THROW(train(m, Dataset{}, {}), EmptyDataset);
}

TEST(Transfer, ZeroEpochFineTuneIsIdentity) {
  const Mlp src = Mlp::xavier(default_shared_dims(), 12);
  TransferConfig cfg;
  cfg.epochs = 0;
  const Mlp gv = transfer_finetune(src, random_dataset(50, 1), TransferMode::GvFineTune, cfg);
  EXPECT_TRUE(same_parameters(gv.layers(), src.layers(), src.layers().size()));
  EXPECT_EQ(gv.layers().size(), src.layers().size());
}

TEST(Transfer, UavSpecificLayout) {
  const Mlp src = Mlp::xavier(default_shared_dims(), 12);
  TransferConfig cfg;
  cfg.epochs = 0;
  cfg.specific_dims = {32, 1};
  const Mlp uav = transfer_finetune(src, random_dataset(50, 1), TransferMode::UavSpecific, cfg);
  // Trunk 9-64-64-32 from the source, then 32-32-1.
  EXPECT_EQ(uav.layers().size(), 3u + 2u);
  EXPECT_EQ(uav.architecture(), Architecture::SharedPlusSpecific);
  EXPECT_EQ(uav.shared_layers(), 3u);
  EXPECT_TRUE(same_parameters(uav.layers(), src.layers(), 3));
  EXPECT_EQ(uav.layers()[3].w.rows(), 32);
  EXPECT_EQ(uav.layers()[3].w.cols(), 32);
  EXPECT_EQ(uav.layers()[4].w.rows(), 1);
}

TEST(Transfer, FineTuneTrainsAtReducedRate) {
  const Mlp src = Mlp::xavier(default_shared_dims(), 12);
  const Dataset d = random_dataset(64, 4);
  TransferConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 64;  // one Adam step
  const Mlp tuned = transfer_finetune(src, d, TransferMode::GvFineTune, cfg);
  double largest = 0.0;
  for (std::size_t k = 0; k < src.layers().size(); ++k) {
    largest = std::max(largest, (tuned.layers()[k].w - src.layers()[k].w).cwiseAbs().maxCoeff());
  }
  EXPECT_GT(largest, 0.0);
  EXPECT_LE(largest, 1e-4 * (1 + 1e-9));
}

TEST(CourierLog, ExtractHandNormalisedRecord) {
  FeatureContext ctx;
  ctx.bounds = {0, 0, 40000, 40000};
  const Dataset d = extract_courier_dataset({record_at_eleven(1), record_at_eleven(0)}, ctx, 3600);
  ASSERT_EQ(d.size(), 2u);
  const FeatureVector expected = {11.0 / 24.0, 0.25, 0.75, 0.5, 5.0, 2.0, 6.3, 0.4, 1.0 / 3.0};
  for (std::size_t i = 0; i < kFeatureCount; ++i) EXPECT_NEAR(d[0].features[i], expected[i], 1e-15) << i;
  EXPECT_EQ(d[0].label, 1);
  EXPECT_EQ(d[1].label, 0);
}

TEST(CourierLog, MissingLocationIsMalformed) {
  FeatureContext ctx;
  ctx.bounds = {0, 0, 40000, 40000};
  std::istringstream in(
      "t_order,x,y,detour_km,speed,dist_km,cost,payload,n_max,t_re,accepted\n"
      "39600,,30000,0.5,5,2,6.3,2,5,1200,1\n");
  const auto log = read_courier_log(in);
  ASSERT_EQ(log.size(), 1u);
  EXPECT_THROW(extract_courier_dataset(log, ctx, 3600), MalformedRecord);

  std::istringstream bad_header("when,x\n1,2\n");
  EXPECT_THROW(read_courier_log(bad_header), MalformedRecord);
  std::istringstream short_row(
      "t_order,x,y,detour_km,speed,dist_km,cost,payload,n_max,t_re,accepted\n1,2,3\n");
  EXPECT_THROW(read_courier_log(short_row), MalformedRecord);
  std::istringstream bad_label(
      "t_order,x,y,detour_km,speed,dist_km,cost,payload,n_max,t_re,accepted\n"
      "39600,1,1,0.5,5,2,6.3,2,5,1200,yes\n");
  EXPECT_THROW(extract_courier_dataset(read_courier_log(bad_label), ctx, 3600), MalformedRecord);
}

TEST(CourierLog, RoundTripAndOrderIndependence) {
  Rng rng(4);
  std::vector<CourierLogRecord> log;
  for (int i = 0; i < 30; ++i) {
    CourierLogRecord r = record_at_eleven(rng.bernoulli(0.5));
    r.t_order = rng.uniform(28800, 72000);
    r.x = rng.uniform(0, 40000);
    r.cost = rng.uniform(0, 20) / 3.0;
    log.push_back(r);
  }
  std::ostringstream out;
  write_courier_log(out, log);
  std::istringstream in(out.str());
  const auto back = read_courier_log(in);
  ASSERT_EQ(back.size(), log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    EXPECT_EQ(back[i].t_order, log[i].t_order);
    EXPECT_EQ(back[i].x, log[i].x);
    EXPECT_EQ(back[i].cost, log[i].cost);
    EXPECT_EQ(back[i].accepted, log[i].accepted);
  }
  FeatureContext ctx;
  ctx.bounds = {0, 0, 40000, 40000};
  const Dataset forward = extract_courier_dataset(log, ctx, 3600);
  std::vector<CourierLogRecord> reversed(log.rbegin(), log.rend());
  const Dataset backward = extract_courier_dataset(reversed, ctx, 3600);
  for (std::size_t i = 0; i < log.size(); ++i) {
    EXPECT_EQ(forward[i].features, backward[log.size() - 1 - i].features);
  }
}

TEST(Serialization, ModelRoundTripIsBitExact) {
  Mlp m = Mlp::xavier(default_shared_dims(), 77);
  m.layers()[1].b(3) = 0.1 + 1e-17;
  m.layers()[2].w(0, 0) = -std::nextafter(0.0, 1.0);
  std::stringstream s;
  save_model(s, m);
  const Mlp back = load_model(s);
  EXPECT_EQ(back, m);

  TransferConfig cfg;
  cfg.epochs = 0;
  ModelBundle b{m, transfer_finetune(m, random_dataset(10, 1), TransferMode::GvFineTune, cfg),
                transfer_finetune(m, random_dataset(10, 1), TransferMode::UavSpecific, cfg),
                "00ff00ff00ff00ff"};
  std::stringstream bs;
  save_bundle(bs, b);
  const ModelBundle bb = load_bundle(bs);
  EXPECT_EQ(bb, b);
  EXPECT_EQ(bb.uav.architecture(), Architecture::SharedPlusSpecific);
}

TEST(Serialization, RejectsGarbage) {
  std::istringstream in("not a model\n");
  EXPECT_ANY_THROW(load_model(in));
}

TEST(Prediction, ZeroModelAndRange) {
  const Mlp zero = Mlp::zeros(default_shared_dims());
  CourierState c;
  c.available_from = 36000;
  Parcel p;
  p.t_order = 36000;
  p.pickup = {100, 100};
  p.dropoff = {900, 400};
  const FeasibilityConfig cfg;
  const auto plan = std::get<CandidatePlan>(plan_courier_insertion(c, p, 36000, cfg));
  FeatureContext ctx;
  ctx.bounds = {0, 0, 40000, 40000};
  EXPECT_EQ(predict_preference(zero, c, p, 36000, plan, cfg, ctx), 0.5);
  const Mlp m = Mlp::xavier(default_shared_dims(), 3);
  const double rho = predict_preference(m, c, p, 36000, plan, cfg, ctx);
  EXPECT_GT(rho, 0.0);
  EXPECT_LT(rho, 1.0);
  EXPECT_EQ(rho, predict_preference(m, c, p, 36000, plan, cfg, ctx));
}
