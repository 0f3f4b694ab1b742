#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfslab/config.hpp"
#include "cfslab/report.hpp"

namespace cfslab {

const std::vector<std::string>& experiment_names();

// Runs one named experiment.  Deterministic given the config (including its seed).
Report run_experiment(const std::string& name, const ExperimentConfig& cfg);

// Portable uniform draws (the standard distributions are implementation defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    double uniform();                      // [0, 1)
    double uniform(double lo, double hi);
    int index(int n);                      // 0 .. n-1

private:
    std::uint64_t state_;
};

}  // namespace cfslab
