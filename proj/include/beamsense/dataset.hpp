#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "beamsense/codebook.hpp"
#include "beamsense/common.hpp"

namespace beamsense {

// Straight-line UE trajectory with temporally correlated Gaussian position
// jitter. jitter_corr_slots is the correlation time constant in slots; 0
// gives independent per-slot noise.
struct TrajectoryConfig {
    Vec2 start{-60.0, 25.0};
    Vec2 end{60.0, 25.0};
    int num_slots = 12000;
    double jitter_std = 4.0;
    double jitter_corr_slots = 45.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct DatasetRecord {
    int slot = 0;
    Eigen::VectorXd features;  // min-max normalized position, layout [x, y]
    int label = 0;             // codebook index with the highest gain
    Eigen::VectorXd gains;     // per-beam gains, kept for rank evaluation
};

struct Dataset {
    std::vector<DatasetRecord> records;
    int feature_dim() const { return records.empty() ? 0 : static_cast<int>(records.front().features.size()); }
    int size() const { return static_cast<int>(records.size()); }
};

Dataset generate_dataset(const TrajectoryConfig& traj, const ChannelConfig& chan,
                         const BeamCodebook& cb);

// CSV layout: header "t,feat_0,...,feat_{d-1},label", one row per slot.
// Loading validates every label against [0, num_beams); a header-only file
// is an empty dataset, not an error.
void save_dataset_csv(const Dataset& ds, const std::string& path);
Dataset load_dataset_csv(const std::string& path, int num_beams);

// Companion file holding the full gain vector per slot, header
// "t,gain_0,...,gain_{M-1}". Needed to score top-k hits offline.
void save_gains_csv(const Dataset& ds, const std::string& path);
void load_gains_csv(Dataset& ds, const std::string& path);

}  // namespace beamsense
