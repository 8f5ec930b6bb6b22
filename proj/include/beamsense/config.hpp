#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "beamsense/beam_predictor.hpp"
#include "beamsense/codebook.hpp"
#include "beamsense/dataset.hpp"
#include "beamsense/dqn.hpp"
#include "beamsense/env.hpp"

namespace beamsense {

// Everything one experiment run needs, assembled from defaults, an optional
// config file, and command-line overrides (in that order).
struct ExperimentConfig {
    TrajectoryConfig trajectory;
    ChannelConfig channel;
    int num_antennas = 32;
    int num_beams = 32;
    DnnConfig dnn;
    DqnConfig dqn;
    EnvConfig env;
    int eval_horizon = 10000;
    // Chronological share of the dataset the sensing policy trains on; the
    // remaining tail is the evaluation region.
    double policy_train_fraction = 0.8;
    std::string out_dir = "out";
    std::uint64_t seed = 1;

    void validate() const;
    // Per-component seeds are derived from the global one, so a single
    // --seed pins every random stream in the run.
    void derive_seeds();
};

// One settable scalar in the config, addressed by a dotted key. The same
// table drives the file parser and the generated CLI flags.
struct ConfigBinding {
    enum class Kind { Int, Double, Bool, Uint64, String, IntList };
    std::string key;
    Kind kind;
    void* target;
};

std::vector<ConfigBinding> config_bindings(ExperimentConfig& cfg);

// Parses and stores one value; throws ConfigError on bad input.
void apply_config_value(const ConfigBinding& binding, const std::string& value);

// INI-style file: "[section]" lines prefix following keys with "section.",
// "key = value" pairs, "#" comments. Dotted keys also work directly.
// Unknown keys are errors.
void load_config_file(ExperimentConfig& cfg, const std::string& path);

}  // namespace beamsense
