#include "tsc/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "tsc/rng.hpp"

namespace tsc {

NetworkSpec NetworkSpec::large() {
    NetworkSpec s;
    s.input_size = 80;
    s.convs = {{8, 4, 16}, {4, 2, 32}, {3, 1, 32}};
    s.pool_after_first = true;
    s.dense_hidden = 256;
    return s;
}

NetworkSpec NetworkSpec::reduced() {
    NetworkSpec s;
    s.input_size = 24;
    s.convs = {{6, 2, 16}, {4, 2, 32}, {3, 1, 32}};
    s.pool_after_first = false;
    s.dense_hidden = 128;
    return s;
}

NetworkSpec NetworkSpec::for_size(int state_size) {
    if (state_size == 80) return large();
    if (state_size == 24) return reduced();
    throw ConfigError("no network defined for state size " + std::to_string(state_size));
}

void NetworkSpec::validate() const {
    if (num_actions != kNumActions) throw ConfigError("network output width must equal action count");
    if (dense_hidden < 1) throw ConfigError("dense hidden width must be >= 1");
    plan_stages(*this);  // throws if any spatial dimension collapses
}

std::vector<StagePlan> plan_stages(const NetworkSpec& spec) {
    std::vector<StagePlan> stages;
    LayerShape cur{spec.input_channels, spec.input_size, spec.input_size};
    int param_index = 0;
    for (size_t i = 0; i < spec.convs.size(); ++i) {
        const ConvSpec& c = spec.convs[i];
        if (c.kernel < 1 || c.stride < 1 || c.out_channels < 1)
            throw ConfigError("bad conv spec");
        if (cur.h < c.kernel || cur.w < c.kernel)
            throw ConfigError("conv kernel larger than its input");
        StagePlan sp;
        sp.kind = StagePlan::Kind::Conv;
        sp.param_index = param_index++;
        sp.conv = c;
        sp.in = cur;
        sp.out = {c.out_channels, (cur.h - c.kernel) / c.stride + 1,
                  (cur.w - c.kernel) / c.stride + 1};
        if (sp.out.h < 1 || sp.out.w < 1) throw ConfigError("conv output collapsed");
        stages.push_back(sp);
        cur = sp.out;
        if (i == 0 && spec.pool_after_first) {
            if (cur.h < 2 || cur.w < 2) throw ConfigError("pool input too small");
            StagePlan pp;
            pp.kind = StagePlan::Kind::Pool;
            pp.in = cur;
            pp.out = {cur.c, (cur.h - 2) / 2 + 1, (cur.w - 2) / 2 + 1};
            stages.push_back(pp);
            cur = pp.out;
        }
    }
    StagePlan dense;
    dense.kind = StagePlan::Kind::Dense;
    dense.param_index = param_index++;
    dense.in = cur;
    dense.out = {spec.dense_hidden, 1, 1};
    stages.push_back(dense);

    StagePlan out;
    out.kind = StagePlan::Kind::Output;
    out.param_index = param_index++;
    out.in = dense.out;
    out.out = {spec.num_actions, 1, 1};
    stages.push_back(out);
    return stages;
}

bool NetworkParams::finite() const {
    for (const auto& w : weights)
        for (double x : w)
            if (!std::isfinite(x)) return false;
    for (const auto& b : biases)
        for (double x : b)
            if (!std::isfinite(x)) return false;
    return true;
}

size_t NetworkParams::count() const {
    size_t n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    return n;
}

namespace {

struct LayerSizes {
    size_t w, b, fan_in;
};

std::vector<LayerSizes> param_sizes(const NetworkSpec& spec) {
    std::vector<LayerSizes> out;
    for (const StagePlan& sp : plan_stages(spec)) {
        if (sp.kind == StagePlan::Kind::Pool) continue;
        if (sp.kind == StagePlan::Kind::Conv) {
            size_t fan = static_cast<size_t>(sp.in.c) * sp.conv.kernel * sp.conv.kernel;
            out.push_back({fan * sp.conv.out_channels, static_cast<size_t>(sp.conv.out_channels), fan});
        } else {
            size_t fan = static_cast<size_t>(sp.in.count());
            out.push_back({fan * sp.out.c, static_cast<size_t>(sp.out.c), fan});
        }
    }
    return out;
}

}  // namespace

NetworkParams zero_params(const NetworkSpec& spec) {
    NetworkParams p;
    for (const LayerSizes& s : param_sizes(spec)) {
        p.weights.emplace_back(s.w, 0.0);
        p.biases.emplace_back(s.b, 0.0);
    }
    return p;
}

NetworkParams init_params(const NetworkSpec& spec, uint64_t seed) {
    NetworkParams p = zero_params(spec);
    SplitMix64 rng(mix64(seed));
    const auto sizes = param_sizes(spec);
    for (size_t i = 0; i < p.weights.size(); ++i) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[i].fan_in));
        for (double& w : p.weights[i]) w = (2.0 * rng.next_double() - 1.0) * bound;
        // biases start at zero
    }
    return p;
}

namespace {

// C[m][n] += A[m][k] * B[k][n], all row-major; C preloaded with bias.
// Four k-values per pass so each C row is streamed once per quad.
void gemm_acc(const double* A, const double* B, double* C, int m, int k, int n) {
    const size_t sn = static_cast<size_t>(n);
    for (int i = 0; i < m; ++i) {
        const double* arow = A + static_cast<size_t>(i) * k;
        double* crow = C + static_cast<size_t>(i) * sn;
        int kk = 0;
        for (; kk + 4 <= k; kk += 4) {
            const double a0 = arow[kk], a1 = arow[kk + 1], a2 = arow[kk + 2], a3 = arow[kk + 3];
            const double* b0 = B + static_cast<size_t>(kk) * sn;
            const double* b1 = b0 + sn;
            const double* b2 = b1 + sn;
            const double* b3 = b2 + sn;
            for (int j = 0; j < n; ++j)
                crow[j] += a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j];
        }
        for (; kk < k; ++kk) {
            const double a = arow[kk];
            const double* brow = B + static_cast<size_t>(kk) * sn;
            for (int j = 0; j < n; ++j) crow[j] += a * brow[j];
        }
    }
}

// C[m][k] += A[m][n] * B[k][n]^T (dot products over the contiguous axis),
// four B rows per pass to reuse the streamed A row.
void gemm_abt_acc(const double* A, const double* B, double* C, int m, int n, int k) {
    const size_t sn = static_cast<size_t>(n);
    for (int i = 0; i < m; ++i) {
        const double* arow = A + static_cast<size_t>(i) * sn;
        double* crow = C + static_cast<size_t>(i) * k;
        int kk = 0;
        for (; kk + 4 <= k; kk += 4) {
            const double* b0 = B + static_cast<size_t>(kk) * sn;
            const double* b1 = b0 + sn;
            const double* b2 = b1 + sn;
            const double* b3 = b2 + sn;
            double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double a = arow[j];
                s0 += a * b0[j];
                s1 += a * b1[j];
                s2 += a * b2[j];
                s3 += a * b3[j];
            }
            crow[kk] += s0;
            crow[kk + 1] += s1;
            crow[kk + 2] += s2;
            crow[kk + 3] += s3;
        }
        for (; kk < k; ++kk) {
            const double* brow = B + static_cast<size_t>(kk) * sn;
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += arow[j] * brow[j];
            crow[kk] += s;
        }
    }
}

// C[k][n] = A[m][k]^T * B[m][n] (C zeroed here), four A/B rows per pass.
void gemm_atb(const double* A, const double* B, double* C, int m, int k, int n) {
    const size_t sn = static_cast<size_t>(n);
    std::memset(C, 0, sizeof(double) * static_cast<size_t>(k) * sn);
    int i = 0;
    for (; i + 4 <= m; i += 4) {
        const double* a0 = A + static_cast<size_t>(i) * k;
        const double* a1 = a0 + k;
        const double* a2 = a1 + k;
        const double* a3 = a2 + k;
        const double* b0 = B + static_cast<size_t>(i) * sn;
        const double* b1 = b0 + sn;
        const double* b2 = b1 + sn;
        const double* b3 = b2 + sn;
        for (int kk = 0; kk < k; ++kk) {
            const double w0 = a0[kk], w1 = a1[kk], w2 = a2[kk], w3 = a3[kk];
            double* crow = C + static_cast<size_t>(kk) * sn;
            for (int j = 0; j < n; ++j)
                crow[j] += w0 * b0[j] + w1 * b1[j] + w2 * b2[j] + w3 * b3[j];
        }
    }
    for (; i < m; ++i) {
        const double* arow = A + static_cast<size_t>(i) * k;
        const double* brow = B + static_cast<size_t>(i) * sn;
        for (int kk = 0; kk < k; ++kk) {
            const double a = arow[kk];
            double* crow = C + static_cast<size_t>(kk) * sn;
            for (int j = 0; j < n; ++j) crow[j] += a * brow[j];
        }
    }
}

void im2col(const double* in, const LayerShape& is, int kernel, int stride, const LayerShape& os,
            double* col) {
    const int ohw = os.h * os.w;
    int row = 0;
    for (int c = 0; c < is.c; ++c)
        for (int ky = 0; ky < kernel; ++ky)
            for (int kx = 0; kx < kernel; ++kx) {
                double* dst = col + static_cast<size_t>(row) * ohw;
                for (int oy = 0; oy < os.h; ++oy) {
                    const double* src =
                        in + (static_cast<size_t>(c) * is.h + oy * stride + ky) * is.w + kx;
                    if (stride == 1) {
                        std::memcpy(dst, src, sizeof(double) * os.w);
                    } else {
                        for (int ox = 0; ox < os.w; ++ox) dst[ox] = src[ox * stride];
                    }
                    dst += os.w;
                }
                ++row;
            }
}

void col2im_add(const double* col, const LayerShape& is, int kernel, int stride,
                const LayerShape& os, double* din) {
    const int ohw = os.h * os.w;
    int row = 0;
    for (int c = 0; c < is.c; ++c)
        for (int ky = 0; ky < kernel; ++ky)
            for (int kx = 0; kx < kernel; ++kx) {
                const double* src = col + static_cast<size_t>(row) * ohw;
                for (int oy = 0; oy < os.h; ++oy) {
                    double* dst =
                        din + (static_cast<size_t>(c) * is.h + oy * stride + ky) * is.w + kx;
                    if (stride == 1) {
                        for (int ox = 0; ox < os.w; ++ox) dst[ox] += src[ox];
                    } else {
                        for (int ox = 0; ox < os.w; ++ox) dst[ox * stride] += src[ox];
                    }
                    src += os.w;
                }
                ++row;
            }
}

}  // namespace

void forward(const NetworkSpec& spec, const NetworkParams& params, const double* input,
             ForwardCache& cache) {
    const auto stages = plan_stages(spec);
    cache.acts.resize(stages.size());
    cache.cols.resize(stages.size());
    cache.pool_idx.resize(stages.size());
    cache.input = input;

    const double* cur = input;
    for (size_t si = 0; si < stages.size(); ++si) {
        const StagePlan& sp = stages[si];
        std::vector<double>& out = cache.acts[si];
        out.resize(static_cast<size_t>(sp.out.count()));
        switch (sp.kind) {
            case StagePlan::Kind::Conv: {
                const int k = sp.in.c * sp.conv.kernel * sp.conv.kernel;
                const int ohw = sp.out.h * sp.out.w;
                std::vector<double>& col = cache.cols[si];
                col.resize(static_cast<size_t>(k) * ohw);
                im2col(cur, sp.in, sp.conv.kernel, sp.conv.stride, sp.out, col.data());
                const auto& b = params.biases[sp.param_index];
                for (int oc = 0; oc < sp.out.c; ++oc)
                    std::fill_n(out.data() + static_cast<size_t>(oc) * ohw, ohw, b[oc]);
                gemm_acc(params.weights[sp.param_index].data(), col.data(), out.data(),
                         sp.out.c, k, ohw);
                for (double& x : out) x = x > 0.0 ? x : 0.0;  // rectifier
                break;
            }
            case StagePlan::Kind::Pool: {
                std::vector<int>& idx = cache.pool_idx[si];
                idx.resize(out.size());
                for (int c = 0; c < sp.in.c; ++c) {
                    const double* plane = cur + static_cast<size_t>(c) * sp.in.h * sp.in.w;
                    for (int oy = 0; oy < sp.out.h; ++oy)
                        for (int ox = 0; ox < sp.out.w; ++ox) {
                            int best = (oy * 2) * sp.in.w + ox * 2;
                            for (int dy = 0; dy < 2; ++dy)
                                for (int dx = 0; dx < 2; ++dx) {
                                    int i = (oy * 2 + dy) * sp.in.w + ox * 2 + dx;
                                    if (plane[i] > plane[best]) best = i;
                                }
                            const size_t o =
                                (static_cast<size_t>(c) * sp.out.h + oy) * sp.out.w + ox;
                            out[o] = plane[best];
                            idx[o] = c * sp.in.h * sp.in.w + best;
                        }
                }
                break;
            }
            case StagePlan::Kind::Dense:
            case StagePlan::Kind::Output: {
                const auto& w = params.weights[sp.param_index];
                const auto& b = params.biases[sp.param_index];
                const int in_n = sp.in.count();
                for (int o = 0; o < sp.out.c; ++o) {
                    const double* wrow = w.data() + static_cast<size_t>(o) * in_n;
                    double s = b[o];
                    for (int j = 0; j < in_n; ++j) s += wrow[j] * cur[j];
                    out[o] = s;
                }
                if (sp.kind == StagePlan::Kind::Dense)
                    for (double& x : out) x = x > 0.0 ? x : 0.0;
                break;
            }
        }
        cur = out.data();
    }
}

std::array<double, kNumActions> q_values(const NetworkSpec& spec, const NetworkParams& params,
                                         const double* input) {
    ForwardCache cache;
    forward(spec, params, input, cache);
    std::array<double, kNumActions> q{};
    std::copy_n(cache.q().data(), kNumActions, q.begin());
    return q;
}

void backward(const NetworkSpec& spec, const NetworkParams& params, const ForwardCache& cache,
              const double* dq, NetworkParams& grads) {
    const auto stages = plan_stages(spec);
    std::vector<double> dcur(dq, dq + spec.num_actions);
    std::vector<double> dprev, dcol;

    for (int si = static_cast<int>(stages.size()) - 1; si >= 0; --si) {
        const StagePlan& sp = stages[si];
        const double* stage_in = si == 0 ? cache.input : cache.acts[si - 1].data();
        dprev.assign(static_cast<size_t>(sp.in.count()), 0.0);
        switch (sp.kind) {
            case StagePlan::Kind::Conv: {
                // rectifier gate on this stage's (post-activation) output
                const std::vector<double>& out = cache.acts[si];
                for (size_t i = 0; i < dcur.size(); ++i)
                    if (out[i] <= 0.0) dcur[i] = 0.0;
                const int k = sp.in.c * sp.conv.kernel * sp.conv.kernel;
                const int ohw = sp.out.h * sp.out.w;
                auto& gw = grads.weights[sp.param_index];
                auto& gb = grads.biases[sp.param_index];
                for (int oc = 0; oc < sp.out.c; ++oc) {
                    double s = 0.0;
                    const double* row = dcur.data() + static_cast<size_t>(oc) * ohw;
                    for (int j = 0; j < ohw; ++j) s += row[j];
                    gb[oc] += s;
                }
                gemm_abt_acc(dcur.data(), cache.cols[si].data(), gw.data(), sp.out.c, ohw, k);
                if (si > 0) {
                    dcol.resize(static_cast<size_t>(k) * ohw);
                    gemm_atb(params.weights[sp.param_index].data(), dcur.data(), dcol.data(),
                             sp.out.c, k, ohw);
                    col2im_add(dcol.data(), sp.in, sp.conv.kernel, sp.conv.stride, sp.out,
                               dprev.data());
                }
                break;
            }
            case StagePlan::Kind::Pool: {
                const std::vector<int>& idx = cache.pool_idx[si];
                for (size_t i = 0; i < dcur.size(); ++i) dprev[idx[i]] += dcur[i];
                break;
            }
            case StagePlan::Kind::Dense:
            case StagePlan::Kind::Output: {
                if (sp.kind == StagePlan::Kind::Dense) {
                    const std::vector<double>& out = cache.acts[si];
                    for (size_t i = 0; i < dcur.size(); ++i)
                        if (out[i] <= 0.0) dcur[i] = 0.0;
                }
                auto& gw = grads.weights[sp.param_index];
                auto& gb = grads.biases[sp.param_index];
                const int in_n = sp.in.count();
                const auto& w = params.weights[sp.param_index];
                for (int o = 0; o < sp.out.c; ++o) {
                    const double d = dcur[o];
                    gb[o] += d;
                    if (d == 0.0) continue;
                    double* gwrow = gw.data() + static_cast<size_t>(o) * in_n;
                    const double* wrow = w.data() + static_cast<size_t>(o) * in_n;
                    for (int j = 0; j < in_n; ++j) {
                        gwrow[j] += d * stage_in[j];
                        dprev[j] += d * wrow[j];
                    }
                }
                break;
            }
        }
        if (si > 0) dcur.swap(dprev);
    }
}

void adam_step(NetworkParams& params, const NetworkParams& grads, AdamState& state,
               const AdamConfig& cfg) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                      std::vector<double>& v) {
        for (size_t i = 0; i < p.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    };
    for (size_t l = 0; l < params.weights.size(); ++l) {
        update(params.weights[l], grads.weights[l], state.m.weights[l], state.v.weights[l]);
        update(params.biases[l], grads.biases[l], state.m.biases[l], state.v.biases[l]);
    }
}

}  // namespace tsc
