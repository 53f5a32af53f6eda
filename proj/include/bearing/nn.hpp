#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bearing/linalg.hpp"
#include "bearing/rng.hpp"

namespace bearing::nn {

/// Fully-connected feedforward stack. Layer l maps sizes[l] -> sizes[l+1]
/// with optional ReLU. Weights are out-by-in row-major so forward passes run
/// over contiguous rows.
struct Mlp {
    std::vector<std::size_t> sizes;
    std::vector<bool> relu_after;  // one flag per affine layer
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    std::size_t layer_count() const { return weights.size(); }
    std::size_t input_size() const { return sizes.front(); }
    std::size_t output_size() const { return sizes.back(); }
    std::size_t parameter_count() const;
};

/// Glorot-uniform weights, zero biases, drawn deterministically from rng.
Mlp make_mlp(const std::vector<std::size_t>& sizes, const std::vector<bool>& relu_after, Rng& rng);

/// Per-sample activations kept around for the backward pass.
struct Workspace {
    std::vector<std::vector<double>> pre;   // pre-activation per layer
    std::vector<std::vector<double>> post;  // post-activation; post[0] is the input
};

/// Gradient accumulator with the same shape as the network.
struct Grads {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    void match(const Mlp& net);
    void zero();
    void scale(double s);
};

const std::vector<double>& forward(const Mlp& net, std::span<const double> input, Workspace& ws);

/// Backpropagate dL/d(output); accumulates into grads, returns dL/d(input).
std::vector<double> backward(const Mlp& net, const Workspace& ws,
                             std::span<const double> dloss_doutput, Grads& grads);

struct Adam {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void attach(const Mlp& net);
    void step(Mlp& net, const Grads& grads);

private:
    std::vector<Matrix> mw_, vw_;
    std::vector<std::vector<double>> mb_, vb_;
    long t_ = 0;
};

/// In-place softmax.
void softmax(std::vector<double>& logits);

} // namespace bearing::nn
