#pragma once

#include <Eigen/Dense>
#include <vector>

#include "beamsense/common.hpp"

namespace beamsense {

// Narrowband channel vector between the array and a single-antenna user.
using ChannelSample = Eigen::VectorXcd;

// Set of unit-norm analog beamforming vectors the transmitter picks from.
struct BeamCodebook {
    int num_antennas = 0;
    std::vector<Eigen::VectorXcd> vectors;

    int size() const { return static_cast<int>(vectors.size()); }
};

struct ChannelConfig {
    Vec2 bs_position{0.0, 0.0};
    double path_gain_ref = 1.0;       // gain at 1 m
    double path_loss_exponent = 2.0;
    double transmit_power = 1.0;      // W; only used for optional SNR scaling
    double noise_variance = 1e-9;     // W

    void validate() const;
};

// Array response of a half-wavelength ULA: element n carries phase
// pi * n * sin(angle), normalized to unit norm.
Eigen::VectorXcd steering_vector(double angle_rad, int num_antennas);

// DFT-style codebook: beam m points at arcsin(2m/M - 1 + 1/M), so the M
// beams tile sine space uniformly over [-1, 1).
BeamCodebook make_dft_codebook(int num_antennas, int num_beams);

// Deterministic line-of-sight channel: steering vector toward the user,
// scaled by sqrt(path_gain_ref / distance^exponent).
ChannelSample los_channel(Vec2 ue_position, const ChannelConfig& cfg, int num_antennas);

// |h^H w|^2, the received-power proxy a beam choice is scored by.
double beamforming_gain(const ChannelSample& h, const Eigen::VectorXcd& w);

// Index of the gain-maximizing beam; ties go to the lowest index.
int optimal_beam(const ChannelSample& h, const BeamCodebook& cb);

}  // namespace beamsense
