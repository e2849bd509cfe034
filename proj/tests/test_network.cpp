#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tsc/dqn.hpp"
#include "tsc/network.hpp"
#include "tsc/rng.hpp"

using namespace tsc;

namespace {

NetworkSpec tiny_spec(bool pool, int stride1) {
    NetworkSpec s;
    s.input_size = 10;
    s.input_channels = 2;
    s.convs = {{3, stride1, 3}, {2, 2, 4}};
    s.pool_after_first = pool;
    s.dense_hidden = 7;
    return s;
}

std::vector<double> random_input(const NetworkSpec& spec, uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<double> x(static_cast<size_t>(spec.input_channels) * spec.input_size *
                          spec.input_size);
    for (double& v : x) v = rng.next_double();
    return x;
}

// Independent re-implementation of the forward pass with plain nested
// loops; the production path uses im2col + GEMM.
std::vector<double> naive_forward(const NetworkSpec& spec, const NetworkParams& params,
                                  const std::vector<double>& input) {
    std::vector<double> cur = input;
    int c = spec.input_channels, h = spec.input_size, w = spec.input_size;
    int pi = 0;
    for (size_t li = 0; li < spec.convs.size(); ++li) {
        const ConvSpec& cs = spec.convs[li];
        const int oh = (h - cs.kernel) / cs.stride + 1;
        const int ow = (w - cs.kernel) / cs.stride + 1;
        std::vector<double> out(static_cast<size_t>(cs.out_channels) * oh * ow);
        for (int oc = 0; oc < cs.out_channels; ++oc)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    double acc = params.biases[pi][oc];
                    for (int ic = 0; ic < c; ++ic)
                        for (int ky = 0; ky < cs.kernel; ++ky)
                            for (int kx = 0; kx < cs.kernel; ++kx) {
                                const double wv =
                                    params.weights[pi][((static_cast<size_t>(oc) * c + ic) *
                                                            cs.kernel +
                                                        ky) *
                                                           cs.kernel +
                                                       kx];
                                const double xv =
                                    cur[(static_cast<size_t>(ic) * h + oy * cs.stride + ky) * w +
                                        ox * cs.stride + kx];
                                acc += wv * xv;
                            }
                    out[(static_cast<size_t>(oc) * oh + oy) * ow + ox] = acc > 0 ? acc : 0;
                }
        cur = out;
        c = cs.out_channels;
        h = oh;
        w = ow;
        ++pi;
        if (li == 0 && spec.pool_after_first) {
            const int ph = (h - 2) / 2 + 1, pw = (w - 2) / 2 + 1;
            std::vector<double> pooled(static_cast<size_t>(c) * ph * pw);
            for (int cc = 0; cc < c; ++cc)
                for (int oy = 0; oy < ph; ++oy)
                    for (int ox = 0; ox < pw; ++ox) {
                        double best = -1e300;
                        for (int dy = 0; dy < 2; ++dy)
                            for (int dx = 0; dx < 2; ++dx)
                                best = std::max(best,
                                                cur[(static_cast<size_t>(cc) * h + oy * 2 + dy) *
                                                        w +
                                                    ox * 2 + dx]);
                        pooled[(static_cast<size_t>(cc) * ph + oy) * pw + ox] = best;
                    }
            cur = pooled;
            h = ph;
            w = pw;
        }
    }
    // dense hidden with rectifier, then linear output
    std::vector<double> hidden(spec.dense_hidden);
    for (int o = 0; o < spec.dense_hidden; ++o) {
        double acc = params.biases[pi][o];
        for (size_t j = 0; j < cur.size(); ++j)
            acc += params.weights[pi][static_cast<size_t>(o) * cur.size() + j] * cur[j];
        hidden[o] = acc > 0 ? acc : 0;
    }
    ++pi;
    std::vector<double> q(spec.num_actions);
    for (int o = 0; o < spec.num_actions; ++o) {
        double acc = params.biases[pi][o];
        for (size_t j = 0; j < hidden.size(); ++j)
            acc += params.weights[pi][static_cast<size_t>(o) * hidden.size() + j] * hidden[j];
        q[o] = acc;
    }
    return q;
}

}  // namespace

TEST_CASE("canonical specs produce the expected shapes") {
    NetworkSpec big = NetworkSpec::large();
    big.validate();
    auto stages = plan_stages(big);
    // conv 19x19x16, pool 9x9x16, conv 3x3x32, conv 1x1x32
    CHECK(stages[0].out.h == 19);
    CHECK(stages[1].out.h == 9);
    CHECK(stages[2].out.h == 3);
    CHECK(stages[3].out.h == 1);
    CHECK(stages[3].out.c == 32);

    NetworkSpec small = NetworkSpec::reduced();
    small.validate();
    auto sstages = plan_stages(small);
    // conv 10x10x16, conv 4x4x32, conv 2x2x32
    CHECK(sstages[0].out.h == 10);
    CHECK(sstages[1].out.h == 4);
    CHECK(sstages[2].out.h == 2);
    CHECK(NetworkSpec::for_size(24).input_size == 24);
    CHECK_THROWS_AS(NetworkSpec::for_size(40), ConfigError);
}

TEST_CASE("zero parameters give identically zero q-values") {
    for (int size : {24, 80}) {
        NetworkSpec spec = NetworkSpec::for_size(size);
        NetworkParams params = zero_params(spec);
        std::vector<double> input = random_input(spec, 9);
        auto q = q_values(spec, params, input.data());
        for (double v : q) CHECK(v == 0.0);
    }
}

TEST_CASE("a unit 1x1 convolution preserves its input map") {
    NetworkSpec spec;
    spec.input_size = 3;
    spec.input_channels = 1;
    spec.convs = {{1, 1, 1}};
    spec.pool_after_first = false;
    spec.dense_hidden = 2;
    NetworkParams params = zero_params(spec);
    params.weights[0][0] = 1.0;  // identity kernel

    std::vector<double> input = {0.5, 1.0, 0.0, 2.0, 3.0, 4.0, 0.25, 0.75, 1.5};
    ForwardCache cache;
    forward(spec, params, input.data(), cache);
    REQUIRE(cache.acts[0].size() == input.size());
    for (size_t i = 0; i < input.size(); ++i)
        CHECK(cache.acts[0][i] == doctest::Approx(input[i]).epsilon(1e-15));
}

TEST_CASE("forward matches an independent nested-loop computation to 1e-12") {
    for (bool pool : {false, true}) {
        NetworkSpec spec = tiny_spec(pool, 1);
        NetworkParams params = init_params(spec, 1234);
        std::vector<double> input = random_input(spec, 77);
        auto q = q_values(spec, params, input.data());
        auto oracle = naive_forward(spec, params, input);
        for (int a = 0; a < spec.num_actions; ++a)
            CHECK(std::abs(q[a] - oracle[a]) < 1e-12);
    }
    // the production sizes as well
    for (int size : {24, 80}) {
        NetworkSpec spec = NetworkSpec::for_size(size);
        NetworkParams params = init_params(spec, 99);
        std::vector<double> input = random_input(spec, 3);
        auto q = q_values(spec, params, input.data());
        auto oracle = naive_forward(spec, params, input);
        for (int a = 0; a < spec.num_actions; ++a)
            CHECK(std::abs(q[a] - oracle[a]) < 1e-12);
    }
}

TEST_CASE("zero loss produces zero gradients") {
    NetworkSpec spec = tiny_spec(true, 1);
    NetworkParams params = init_params(spec, 11);
    std::vector<double> input = random_input(spec, 12);
    const double target = q_values(spec, params, input.data())[2];  // prediction == target
    NetworkParams grads = zero_params(spec);
    ForwardCache cache;
    std::vector<GradSample> batch = {{input.data(), 2, target}};
    const double loss =
        loss_and_gradients(spec, params, batch, LossKind::Squared, 1.0, grads, cache);
    CHECK(loss == 0.0);
    for (const auto& w : grads.weights)
        for (double g : w) CHECK(g == 0.0);
    for (const auto& b : grads.biases)
        for (double g : b) CHECK(g == 0.0);
}

TEST_CASE("one-layer dense gradient equals the chain rule by hand") {
    // single linear output over a flattened input: d loss / d w = err * x
    NetworkSpec spec;
    spec.input_size = 2;
    spec.input_channels = 1;
    spec.convs = {{1, 1, 1}};
    spec.pool_after_first = false;
    spec.dense_hidden = 1;
    NetworkParams params = zero_params(spec);
    params.weights[0][0] = 1.0;              // conv passthrough
    params.weights[1] = {1.0, 1.0, 1.0, 1.0};  // hidden sums the input
    params.biases[1] = {0.0};
    params.weights[2] = {1.0, 0.0, 0.0, 0.0, 0.0};

    std::vector<double> input = {0.5, 1.5, 2.0, 1.0};  // sum 5
    NetworkParams grads = zero_params(spec);
    ForwardCache cache;
    std::vector<GradSample> batch = {{input.data(), 0, 2.0}};
    const double loss =
        loss_and_gradients(spec, params, batch, LossKind::Squared, 1.0, grads, cache);
    // pred = 5, target = 2, squared loss 0.5 e^2 = 4.5, d/d pred = 3
    CHECK(loss == doctest::Approx(4.5));
    CHECK(grads.biases[2][0] == doctest::Approx(3.0));
    CHECK(grads.weights[2][0] == doctest::Approx(3.0 * 5.0));  // err * hidden activation
    for (int j = 0; j < 4; ++j)
        CHECK(grads.weights[1][j] == doctest::Approx(3.0 * input[j]));  // err * x
}

TEST_CASE("analytic gradients match central finite differences") {
    struct Case {
        NetworkSpec spec;
        LossKind loss;
    };
    std::vector<Case> cases = {
        {tiny_spec(false, 1), LossKind::Squared},
        {tiny_spec(true, 1), LossKind::Huber},
        {tiny_spec(false, 2), LossKind::Huber},
    };
    for (const Case& tc : cases) {
        NetworkParams params = init_params(tc.spec, 321);
        std::vector<std::vector<double>> inputs = {random_input(tc.spec, 1),
                                                   random_input(tc.spec, 2),
                                                   random_input(tc.spec, 3)};
        std::vector<GradSample> batch = {{inputs[0].data(), 0, 0.4},
                                         {inputs[1].data(), 3, -0.7},
                                         {inputs[2].data(), 4, 1.2}};

        NetworkParams grads = zero_params(tc.spec);
        ForwardCache cache;
        loss_and_gradients(tc.spec, params, batch, tc.loss, 1.0, grads, cache);

        auto loss_at = [&](const NetworkParams& p) {
            ForwardCache c2;
            double sum = 0.0;
            for (const GradSample& s : batch) {
                forward(tc.spec, p, s.input, c2);
                const double err = c2.q()[s.action] - s.target;
                if (tc.loss == LossKind::Squared)
                    sum += 0.5 * err * err;
                else
                    sum += std::abs(err) <= 1.0 ? 0.5 * err * err : std::abs(err) - 0.5;
            }
            return sum / static_cast<double>(batch.size());
        };

        const double h = 1e-5;
        double max_rel = 0.0;
        auto check_block = [&](std::vector<double>& block, const std::vector<double>& g) {
            for (size_t i = 0; i < block.size(); ++i) {
                const double saved = block[i];
                block[i] = saved + h;
                const double up = loss_at(params);
                block[i] = saved - h;
                const double down = loss_at(params);
                block[i] = saved;
                const double fd = (up - down) / (2.0 * h);
                const double rel =
                    std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-6});
                max_rel = std::max(max_rel, rel);
            }
        };
        for (size_t l = 0; l < params.weights.size(); ++l) {
            check_block(params.weights[l], grads.weights[l]);
            check_block(params.biases[l], grads.biases[l]);
        }
        CHECK(max_rel < 1e-4);
    }
}

TEST_CASE("adam with zero learning rate leaves parameters unchanged") {
    NetworkSpec spec = tiny_spec(true, 1);
    NetworkParams params = init_params(spec, 5);
    const NetworkParams before = params;
    NetworkParams grads = init_params(spec, 6);  // arbitrary nonzero gradients
    AdamState adam = AdamState::zero(spec);
    AdamConfig cfg;
    cfg.lr = 0.0;
    adam_step(params, grads, adam, cfg);
    CHECK(params == before);
}

TEST_CASE("init is seed-deterministic and fan-in bounded") {
    NetworkSpec spec = NetworkSpec::reduced();
    NetworkParams a = init_params(spec, 42);
    NetworkParams b = init_params(spec, 42);
    NetworkParams c = init_params(spec, 43);
    CHECK(a == b);
    CHECK(!(a == c));
    const double bound0 = 1.0 / std::sqrt(4.0 * 6.0 * 6.0);
    for (double w : a.weights[0]) CHECK(std::abs(w) <= bound0);
    for (double bb : a.biases[0]) CHECK(bb == 0.0);
}
