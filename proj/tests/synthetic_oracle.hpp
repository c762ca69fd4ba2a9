// Shared test helper: a SamplingOracle backed by a SyntheticExecutor.
#ifndef PERFMOD_TESTS_SYNTHETIC_ORACLE_HPP_
#define PERFMOD_TESTS_SYNTHETIC_ORACLE_HPP_

#include <memory>

#include "perfmod/modeler.hpp"

namespace perfmod_tests {

class SynthOracle : public perfmod::SamplingOracle {
public:
  SynthOracle(perfmod::TruthFunction truth,
              perfmod::NoiseModel noise = perfmod::NoiseModel::none(),
              uint64_t seed = 0, int reps = 3)
      : executor_(std::move(truth), noise, seed),
        inner_(executor_, "SYNTH", {}, 1, reps, 1, 1e-12) {}

  perfmod::Sample sample_at(const perfmod::Point& p) override {
    return inner_.sample_at(p);
  }
  size_t samples_drawn() const override { return inner_.samples_drawn(); }

private:
  perfmod::SyntheticExecutor executor_;
  perfmod::ExecutorOracle inner_;
};

inline perfmod::OracleFactory oracle_factory(perfmod::TruthFunction truth,
                                             perfmod::NoiseModel noise,
                                             uint64_t seed, int reps = 3) {
  return [=] {
    return std::unique_ptr<perfmod::SamplingOracle>(
        new SynthOracle(truth, noise, seed, reps));
  };
}

}  // namespace perfmod_tests

#endif  // PERFMOD_TESTS_SYNTHETIC_ORACLE_HPP_
