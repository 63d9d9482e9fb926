// Train 1NN and AdaBoost on one noisy half-plane sample and compare their ION.

#include <cstdio>

#include "ionboost/ionboost.hpp"

int main() {
  using namespace ionboost;
  const Population pop = make_population(PopulationKind::half_plane_2d, 0.1);
  const LabelledSample data = sample(pop, 500, 7);
  std::printf("%zu points, %zu flipped labels\n", data.set.size(), data.noise.noise_count());

  BoostConfig cfg;
  cfg.max_depth = 4;
  cfg.n_steps = 50;
  const MethodComparison c =
      compare_methods(MethodSpec::one_nn(), MethodSpec::adaboost(cfg), pop, data.set, 100000, 11);
  for (const IonReport* r : {&c.a, &c.b})
    std::printf("%-32s ion %.4f (+/- %.4f)  train %.4f  test %.4f  identity %.4f\n", r->method.c_str(), r->ion_hat,
                r->half_width_95, r->training_error, r->test_error_hat,
                test_error_via_lemma1(pop.bayes_error(), r->bayes_disagreement_hat));
  return 0;
}
