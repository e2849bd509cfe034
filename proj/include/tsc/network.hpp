#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tsc/errors.hpp"
#include "tsc/signal.hpp"

namespace tsc {

struct ConvSpec {
    int kernel = 3;
    int stride = 1;
    int out_channels = 16;
};

struct LayerShape {
    int c = 0, h = 0, w = 0;
    int count() const { return c * h * w; }
};

// Three conv layers filter the stacked frames; the full model pools between
// the first and second. Rectifier activations on hidden layers, linear
// 5-value output.
struct NetworkSpec {
    int input_size = 80;
    int input_channels = 4;
    std::vector<ConvSpec> convs;
    bool pool_after_first = true;  // 2x2 max, stride 2
    int dense_hidden = 256;
    int num_actions = kNumActions;

    // 80x80x4: conv 8x8/4 x16, pool, conv 4x4/2 x32, conv 3x3/1 x32, dense 256
    static NetworkSpec large();
    // 24x24x4: conv 6x6/2 x16 (no pool), conv 4x4/2 x32, conv 3x3/1 x32, dense 128
    static NetworkSpec reduced();
    static NetworkSpec for_size(int state_size);

    void validate() const;
};

struct StagePlan {
    enum class Kind { Conv, Pool, Dense, Output };
    Kind kind;
    int param_index = -1;  // index into NetworkParams, -1 for pool
    LayerShape in, out;
    ConvSpec conv;  // for Kind::Conv
};

std::vector<StagePlan> plan_stages(const NetworkSpec& spec);

// Weights and biases per parameterized layer: each conv (weights
// [oc][ic][kh][kw], bias [oc]), the hidden dense, the output dense.
struct NetworkParams {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    bool finite() const;
    size_t count() const;
    bool operator==(const NetworkParams&) const = default;
};

NetworkParams zero_params(const NetworkSpec& spec);
// Scaled uniform fan-in init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
NetworkParams init_params(const NetworkSpec& spec, uint64_t seed);

// Reusable per-forward scratch: stage activations, im2col buffers, pool
// argmax indices.
struct ForwardCache {
    std::vector<std::vector<double>> acts;    // acts[i] = output of stage i
    std::vector<std::vector<double>> cols;    // per conv stage
    std::vector<std::vector<int>> pool_idx;   // per pool stage
    const double* input = nullptr;

    const std::vector<double>& q() const { return acts.back(); }
};

// input is [channels][size][size] row-major, length per spec. Returns Q via
// cache.q(); deterministic.
void forward(const NetworkSpec& spec, const NetworkParams& params, const double* input,
             ForwardCache& cache);

std::array<double, kNumActions> q_values(const NetworkSpec& spec, const NetworkParams& params,
                                         const double* input);

// Reverse-mode gradients of sum(dq . q) w.r.t. every parameter, accumulated
// into `grads` (same shapes as params). `cache` must hold the forward pass
// for the same input.
void backward(const NetworkSpec& spec, const NetworkParams& params, const ForwardCache& cache,
              const double* dq, NetworkParams& grads);

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    NetworkParams m, v;
    int64_t step = 0;

    static AdamState zero(const NetworkSpec& spec) { return {zero_params(spec), zero_params(spec), 0}; }
};

void adam_step(NetworkParams& params, const NetworkParams& grads, AdamState& state,
               const AdamConfig& cfg);

}  // namespace tsc
