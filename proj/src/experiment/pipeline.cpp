#include <fstream>

#include "airground/experiment.h"
#include "airground/random.h"

namespace airground {

ScenarioConfig PipelineSpec::default_training_scenario() {
  ScenarioConfig c;
  c.base_orders = 6000;
  c.seed = 1001;
  return c;
}

PreferenceModels models_of(const ModelBundle& bundle) {
  return {bundle.courier, bundle.gv, bundle.uav};
}

PipelineResult pipeline_train(const PipelineSpec& spec) {
  const Scenario scenario =
      spec.scenario_path ? load_scenario(*spec.scenario_path) : synth_scenario(spec.scenario);
  SimConfig sim = spec.sim;
  if (sim.dispatch.features.bounds.width() <= 0) sim.dispatch.features.bounds = scenario.area.bounds;
  FeatureContext ctx = sim.dispatch.features;
  ctx.uav_cost_rate = sim.dispatch.uav_cost_rate;

  std::vector<CourierLogRecord> log;
  if (spec.courier_log_path) {
    std::ifstream in(*spec.courier_log_path);
    if (!in) throw std::runtime_error("cannot read " + *spec.courier_log_path);
    log = read_courier_log(in);
  } else {
    log = simulate_courier_log(scenario, sim, derive_seed(spec.seed, 21), spec.courier_data);
  }
  const Dataset courier = extract_courier_dataset(log, ctx, sim.dispatch.feasibility.deadline);

  PipelineResult r;
  r.courier_samples = courier.size();
  Mlp f_c = Mlp::xavier(default_shared_dims(), derive_seed(spec.seed, 22));
  TrainConfig tc = spec.courier_train;
  tc.seed = derive_seed(spec.seed, 23);
  r.courier_fit = train(f_c, courier, tc);

  const Dataset gv = simulate_agent_dataset(AgentKind::Gv, scenario, sim, derive_seed(spec.seed, 24), spec.gv_data);
  r.gv_samples = gv.size();
  TransferConfig gc = spec.gv_transfer;
  gc.seed = derive_seed(spec.seed, 25);
  Mlp f_b = gv.empty() ? f_c : transfer_finetune(f_c, gv, TransferMode::GvFineTune, gc, &r.gv_fit);

  const Dataset uav = simulate_agent_dataset(AgentKind::Uav, scenario, sim, derive_seed(spec.seed, 26), spec.uav_data);
  r.uav_samples = uav.size();
  TransferConfig uc = spec.uav_transfer;
  uc.seed = derive_seed(spec.seed, 27);
  if (uav.empty()) uc.epochs = 0;
  Mlp f_u = transfer_finetune(f_c, uav, TransferMode::UavSpecific, uc, &r.uav_fit);

  r.bundle = {std::move(f_c), std::move(f_b), std::move(f_u), pipeline_fingerprint(spec)};
  return r;
}

}  // namespace airground
