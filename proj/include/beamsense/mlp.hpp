#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace beamsense {

// Fully connected network with ReLU hidden layers and an identity output
// layer. Weight matrices are (out x in); a column of an activation matrix
// is one sample.
struct MlpParams {
    std::vector<int> layer_sizes;  // [input, hidden..., output]
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    int num_layers() const { return static_cast<int>(weights.size()); }
    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
};

// Pre-activations and activations saved by a forward pass, consumed by the
// matching backward pass.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> pre;   // z at each layer
    std::vector<Eigen::MatrixXd> post;  // a at each layer (post[0] is the input)
};

struct MlpGrads {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

struct AdamState {
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    std::int64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// He-uniform initialization: each entry drawn from U(-b, b) with
// b = sqrt(6 / fan_in). Biases start at zero. Draw order is row-major per
// layer so results are reproducible across platforms.
MlpParams mlp_init(const std::vector<int>& layer_sizes, std::uint64_t seed);

MlpGrads grads_like(const MlpParams& params);
// Clears an existing gradient buffer so callers can reuse allocations
// across mini-batches.
void zero_grads(MlpGrads& grads);
AdamState adam_init(const MlpParams& params);

// Forward pass for a batch stored column-wise (input is d x B). Returns the
// output logits (k x B); fills cache when given one.
Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& input,
                            ForwardCache* cache = nullptr);

// Single-sample convenience wrapper.
Eigen::VectorXd mlp_forward_one(const MlpParams& params, const Eigen::VectorXd& input,
                                ForwardCache* cache = nullptr);

// Numerically stable softmax (subtracts the column max before exponentiating).
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits);

// Cross-entropy -log p_label computed from raw logits via log-sum-exp.
double cross_entropy_from_logits(const Eigen::VectorXd& logits, int label);

// Mean cross-entropy over a batch and its gradient wrt the logits
// (softmax minus one-hot, divided by batch size). Accumulates parameter
// gradients through the cached forward pass.
double mlp_backward_cross_entropy(const MlpParams& params, const ForwardCache& cache,
                                  const std::vector<int>& labels, MlpGrads& grads);

// Squared-error loss 0.5 * (z[a_i] - y_i)^2 on one selected output per
// sample, as used for TD regression. Non-selected outputs get zero
// gradient. Returns the mean loss over the batch.
double mlp_backward_selected_squared(const MlpParams& params, const ForwardCache& cache,
                                     const std::vector<int>& selected,
                                     const Eigen::VectorXd& targets, MlpGrads& grads);

// Generic backprop entry point: dL/dz at the output layer is supplied by
// the caller (already averaged over the batch if desired).
void mlp_backward_from_output_delta(const MlpParams& params, const ForwardCache& cache,
                                    const Eigen::MatrixXd& output_delta, MlpGrads& grads);

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state, double lr);

// Central finite differences on every parameter of a small network; returns
// the worst relative error between analytic and numeric gradients.
double finite_diff_max_rel_error_cross_entropy(const MlpParams& params,
                                               const Eigen::MatrixXd& input,
                                               const std::vector<int>& labels,
                                               double eps = 1e-5);
double finite_diff_max_rel_error_selected_squared(const MlpParams& params,
                                                  const Eigen::MatrixXd& input,
                                                  const std::vector<int>& selected,
                                                  const Eigen::VectorXd& targets,
                                                  double eps = 1e-5);

// JSON round trip preserving exact bit patterns of all parameters.
std::string mlp_to_json(const MlpParams& params);
MlpParams mlp_from_json(const std::string& text);
void save_mlp_json(const MlpParams& params, const std::string& path);
MlpParams load_mlp_json(const std::string& path);

}  // namespace beamsense
