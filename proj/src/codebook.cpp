#include "beamsense/codebook.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "beamsense/errors.hpp"

namespace beamsense {

void ChannelConfig::validate() const {
    if (!(std::isfinite(bs_position.x) && std::isfinite(bs_position.y)))
        throw std::invalid_argument("channel: bs_position must be finite");
    if (!(std::isfinite(path_gain_ref) && path_gain_ref >= 0.0))
        throw std::invalid_argument("channel: path_gain_ref must be finite and >= 0");
    if (!(std::isfinite(path_loss_exponent) && path_loss_exponent >= 0.0))
        throw std::invalid_argument("channel: path_loss_exponent must be finite and >= 0");
    if (!(std::isfinite(transmit_power) && transmit_power > 0.0))
        throw std::invalid_argument("channel: transmit_power must be finite and > 0");
    if (!(std::isfinite(noise_variance) && noise_variance > 0.0))
        throw std::invalid_argument("channel: noise_variance must be finite and > 0");
}

Eigen::VectorXcd steering_vector(double angle_rad, int num_antennas) {
    constexpr double half_pi = std::numbers::pi / 2.0;
    if (num_antennas < 1)
        throw std::invalid_argument("steering_vector: need at least one antenna");
    if (!(angle_rad >= -half_pi && angle_rad <= half_pi))
        throw std::invalid_argument("steering_vector: angle outside [-pi/2, pi/2]");

    Eigen::VectorXcd v(num_antennas);
    const double scale = 1.0 / std::sqrt(static_cast<double>(num_antennas));
    const double phase_step = std::numbers::pi * std::sin(angle_rad);
    for (int n = 0; n < num_antennas; ++n)
        v(n) = std::polar(scale, phase_step * n);
    return v;
}

BeamCodebook make_dft_codebook(int num_antennas, int num_beams) {
    if (num_antennas < 1)
        throw std::invalid_argument("make_dft_codebook: need at least one antenna");
    if (num_beams < 1)
        throw std::invalid_argument("make_dft_codebook: need at least one beam");

    BeamCodebook cb;
    cb.num_antennas = num_antennas;
    cb.vectors.reserve(num_beams);
    for (int m = 0; m < num_beams; ++m) {
        const double sine = 2.0 * m / num_beams - 1.0 + 1.0 / num_beams;
        cb.vectors.push_back(steering_vector(std::asin(sine), num_antennas));
    }
    return cb;
}

ChannelSample los_channel(Vec2 ue_position, const ChannelConfig& cfg, int num_antennas) {
    const double dx = ue_position.x - cfg.bs_position.x;
    const double dy = ue_position.y - cfg.bs_position.y;
    const double dist = std::hypot(dx, dy);
    if (dist == 0.0)
        throw std::invalid_argument("los_channel: UE coincides with BS (zero distance)");

    // A ULA only resolves sin(azimuth); positions behind the array alias
    // onto the front half-plane, which asin handles directly.
    const double sine = std::clamp(dx / dist, -1.0, 1.0);
    const double gain = cfg.path_gain_ref / std::pow(dist, cfg.path_loss_exponent);
    return std::sqrt(gain) * steering_vector(std::asin(sine), num_antennas);
}

double beamforming_gain(const ChannelSample& h, const Eigen::VectorXcd& w) {
    if (h.size() != w.size())
        throw std::invalid_argument("beamforming_gain: dimension mismatch");
    return std::norm(h.dot(w));  // Eigen's dot conjugates the left argument
}

int optimal_beam(const ChannelSample& h, const BeamCodebook& cb) {
    if (cb.size() < 1)
        throw std::invalid_argument("optimal_beam: empty codebook");
    if (h.size() != cb.num_antennas)
        throw std::invalid_argument("optimal_beam: channel/codebook dimension mismatch");

    int best = 0;
    double best_gain = beamforming_gain(h, cb.vectors[0]);
    for (int m = 1; m < cb.size(); ++m) {
        const double g = beamforming_gain(h, cb.vectors[m]);
        if (g > best_gain) {
            best_gain = g;
            best = m;
        }
    }
    return best;
}

}  // namespace beamsense
