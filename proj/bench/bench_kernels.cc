// Copyright 2026 The Affectod Authors.
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

// Serial reference vs OpenMP kernels: rollouts, PPO loss and gradient,
// behaviour-cloning loss, conduct distribution. Every pair must agree
// exactly; the process exits non-zero otherwise.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "affectod/corpus.h"
#include "affectod/trainer.h"

using namespace affectod;

namespace {

template <typename F>
double seconds(F&& f, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

bool report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-22s serial %9.4fs  parallel %9.4fs  speedup %5.2fx  %s\n", name, serial, parallel,
              serial / parallel, same ? "identical" : "MISMATCH");
  return same;
}

}  // namespace

int main(int argc, char** argv) {
  const int episodes = argc > 1 ? std::atoi(argv[1]) : 256;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;
  std::printf("threads %d, %d episodes, %d reps\n", omp_get_max_threads(), episodes, reps);

  const Ontology ontology = desk_ontology();
  const TrainConfig config;
  const Modules modules = make_modules(config, ontology);
  const PolicyModel model = make_policy(config, ontology, 11);
  const NeuralPolicy policy(model, ontology, DecodeMode::kSample);
  bool ok = true;

  std::vector<EpisodeResult> rs, rp;
  const double ts = seconds([&] {
    rs = collect(policy, modules, 5, 0, episodes, config.goals, ExecutionMode::kSerial);
  }, reps);
  const double tp = seconds([&] {
    rp = collect(policy, modules, 5, 0, episodes, config.goals, ExecutionMode::kParallel);
  }, reps);
  bool same = rs.size() == rp.size();
  for (std::size_t i = 0; same && i < rs.size(); ++i) same = rs[i].record == rp[i].record;
  ok &= report("collect", ts, tp, same);

  std::vector<Trajectory> trajectories;
  for (const auto& r : rs) trajectories.push_back(r.trajectory);
  auto samples = build_samples(trajectories, config.ppo);
  normalize_advantages(samples);
  LossEval ls, lp;
  const double gs = seconds([&] { ls = ppo_loss(model, samples, config.ppo, ExecutionMode::kSerial); }, reps);
  const double gp = seconds([&] { lp = ppo_loss(model, samples, config.ppo, ExecutionMode::kParallel); }, reps);
  ok &= report("ppo_loss+grad", gs, gp, ls.total == lp.total && ls.grad == lp.grad);

  std::vector<BcExample> bc;
  for (const auto& s : samples) bc.push_back({s.features, s.tokens});
  double bs = 0, bp = 0;
  const double cs = seconds([&] { bs = bc_loss(model, bc, ExecutionMode::kSerial); }, reps);
  const double cp = seconds([&] { bp = bc_loss(model, bc, ExecutionMode::kParallel); }, reps);
  ok &= report("bc_loss", cs, cp, bs == bp);

  std::vector<AnnotatedDialogue> corpus;
  for (std::size_t i = 0; i < rs.size(); ++i) corpus.push_back(to_annotated(rs[i].record, std::to_string(i)));
  ConductDistribution ds, dp;
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double ks = seconds([&] { ds = conduct_distribution(corpus, true); }, reps);
  omp_set_num_threads(saved);
  const double kp = seconds([&] { dp = conduct_distribution(corpus, true); }, reps);
  bool dsame = ds.counts == dp.counts && ds.by_turn.size() == dp.by_turn.size();
  for (std::size_t i = 0; dsame && i < ds.by_turn.size(); ++i) dsame = ds.by_turn[i].counts == dp.by_turn[i].counts;
  ok &= report("conduct_distribution", ks, kp, dsame);

  return ok ? 0 : 1;
}
