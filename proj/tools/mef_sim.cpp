// Copyright 2026 The mef-se23 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include "mef/harness.hpp"

namespace {

int run_command(const std::string& config_path, std::uint64_t* seed_override,
                int* trials_override, const std::string& out_override) {
  mef::harness::RunConfig config = mef::harness::load_config(config_path);
  if (seed_override != nullptr) {
    config.sensors.seed = *seed_override;
  }
  if (trials_override != nullptr) {
    config.trials = *trials_override;
  }
  if (!out_override.empty()) {
    config.output_path = out_override;
  }
  config.validate();

  if (config.trials == 1) {
    const mef::harness::TrialResult result =
        mef::harness::run_trial(config, config.sensors.seed);
    const auto means = mef::harness::converged_means(result.trace);
    std::printf(
        "trial complete: %zu steps, converged mean errors "
        "trans=%.4g m rot=%.4g rad vel=%.4g m/s\n",
        result.trace.size(), means.translation, means.rotation,
        means.velocity);
    if (!result.p_positive_definite) {
      std::fprintf(stderr, "warning: P lost positive definiteness\n");
    }
    if (!config.output_path.empty()) {
      mef::harness::write_csv(result.trace, config.output_path);
      std::printf("trace written to %s\n", config.output_path.c_str());
    }
    return 0;
  }

  const mef::harness::MonteCarloResult mc =
      mef::harness::run_monte_carlo(config, config.trials);
  double trans = 0.0, rot = 0.0, vel = 0.0;
  for (const auto& trial : mc.trials) {
    const auto means = mef::harness::converged_means(trial.trace);
    trans += means.translation;
    rot += means.rotation;
    vel += means.velocity;
  }
  if (!mc.trials.empty()) {
    const double n = static_cast<double>(mc.trials.size());
    std::printf(
        "%zu/%d trials complete: converged mean errors "
        "trans=%.4g m rot=%.4g rad vel=%.4g m/s\n",
        mc.trials.size(), config.trials, trans / n, rot / n, vel / n);
  }
  for (const auto& flagged : mc.flagged) {
    std::fprintf(stderr, "trial %d (seed %llu) diverged at t=%.3f s: %s\n",
                 flagged.index,
                 static_cast<unsigned long long>(flagged.seed), flagged.t,
                 flagged.reason.c_str());
  }
  if (!config.output_path.empty()) {
    mef::harness::write_csv(mc.aggregate, config.output_path);
    std::printf("aggregate written to %s\n", config.output_path.c_str());
  }
  return mc.flagged.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Velocity-aided pose estimation on SE2(3): simulation harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int trials = 0;
  bool seed_set = false;
  bool trials_set = false;

  CLI::App* run = app.add_subcommand("run", "run a simulation");
  run->add_option("--config", config_path, "config file path")->required();
  run->add_option("--seed", seed, "override the config seed")
      ->each([&](const std::string&) { seed_set = true; });
  run->add_option("--trials", trials, "override the trial count")
      ->check(CLI::PositiveNumber)
      ->each([&](const std::string&) { trials_set = true; });
  run->add_option("--out", out_path, "CSV output path");

  CLI::App* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("--config", config_path, "config file path")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate)) {
      mef::harness::load_config(config_path).validate();
      std::printf("config ok: %s\n", config_path.c_str());
      return 0;
    }
    return run_command(config_path, seed_set ? &seed : nullptr,
                       trials_set ? &trials : nullptr, out_path);
  } catch (const mef::filter::DivergenceError& err) {
    std::fprintf(stderr, "filter diverged at t=%.3f s: %s\n", err.time(),
                 err.what());
    return 1;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
}
