#include "padtrack/lstm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "padtrack/rng.hpp"
#include "padtrack/text.hpp"

namespace padtrack::lstm {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// z[0..4h) = b + Wx * x + Wh * hprev (hprev may be null at t = 0)
void gate_preactivations(const double* wx, const double* wh, const double* b, const double* x,
                         const double* hprev, int four_h, int d, int h, double* z) {
    for (int r = 0; r < four_h; ++r) {
        double acc = b[r];
        const double* row = wx + static_cast<std::size_t>(r) * static_cast<std::size_t>(d);
        for (int k = 0; k < d; ++k) acc += row[k] * x[k];
        z[r] = acc;
    }
    if (hprev) {
        for (int r = 0; r < four_h; ++r) {
            double acc = 0.0;
            const double* row = wh + static_cast<std::size_t>(r) * static_cast<std::size_t>(h);
            for (int k = 0; k < h; ++k) acc += row[k] * hprev[k];
            z[r] += acc;
        }
    }
}

// Per-sample activation cache for BPTT. Indexed [layer][t*h + u].
struct Cache {
    int layers = 0, W = 0, h = 0, channels = 0;
    std::vector<double> x;                       // standardized input, W x channels
    std::vector<std::vector<double>> in;         // per layer: its input series, W x d
    std::vector<std::vector<double>> gi, gf, gg, go, c, tanc, hs;

    void resize(const ModelConfig& cfg) {
        layers = cfg.layers;
        W = cfg.window;
        h = cfg.hidden;
        channels = cfg.channels;
        x.assign(static_cast<std::size_t>(W) * static_cast<std::size_t>(channels), 0.0);
        auto sz = [&](int l) {
            return static_cast<std::size_t>(W) * static_cast<std::size_t>(l == 0 ? channels : h);
        };
        in.resize(static_cast<std::size_t>(layers));
        gi.resize(static_cast<std::size_t>(layers));
        gf.resize(static_cast<std::size_t>(layers));
        gg.resize(static_cast<std::size_t>(layers));
        go.resize(static_cast<std::size_t>(layers));
        c.resize(static_cast<std::size_t>(layers));
        tanc.resize(static_cast<std::size_t>(layers));
        hs.resize(static_cast<std::size_t>(layers));
        const std::size_t wh = static_cast<std::size_t>(W) * static_cast<std::size_t>(h);
        for (int l = 0; l < layers; ++l) {
            const auto li = static_cast<std::size_t>(l);
            in[li].assign(sz(l), 0.0);
            gi[li].assign(wh, 0.0);
            gf[li].assign(wh, 0.0);
            gg[li].assign(wh, 0.0);
            go[li].assign(wh, 0.0);
            c[li].assign(wh, 0.0);
            tanc[li].assign(wh, 0.0);
            hs[li].assign(wh, 0.0);
        }
    }
};

void check_window_shape(const ModelParams& p, const core::Window& w) {
    if (w.length != p.cfg.window || w.channels != p.cfg.channels)
        throw ValidationError("forward: window shape " + fmt(static_cast<std::int64_t>(w.length)) + "x" +
                              fmt(static_cast<std::int64_t>(w.channels)) + " does not match model " +
                              fmt(static_cast<std::int64_t>(p.cfg.window)) + "x" +
                              fmt(static_cast<std::int64_t>(p.cfg.channels)));
}

// Runs the stacked forward pass, filling the cache. Returns the estimate.
double forward_cached(const ModelParams& p, const core::Window& win, Cache& cc) {
    check_window_shape(p, win);
    const ModelConfig& cfg = p.cfg;
    const int W = cfg.window, h = cfg.hidden, C = cfg.channels;

    for (int t = 0; t < W; ++t)
        for (int c = 0; c < C; ++c) {
            const auto idx = static_cast<std::size_t>(t) * static_cast<std::size_t>(C) +
                             static_cast<std::size_t>(c);
            cc.x[idx] = (win.values[idx] - p.input_mean[static_cast<std::size_t>(c)]) /
                        p.input_std[static_cast<std::size_t>(c)];
        }

    std::vector<double> z(static_cast<std::size_t>(4 * h));
    for (int l = 0; l < cfg.layers; ++l) {
        const auto li = static_cast<std::size_t>(l);
        const int d = p.input_dim(l);
        const double* wx = &p.w[p.wx_offset(l)];
        const double* wh = &p.w[p.wh_offset(l)];
        const double* b = &p.w[p.b_offset(l)];

        // layer input: standardized window for l = 0, previous layer's h above
        if (l == 0) {
            cc.in[0] = cc.x;
        } else {
            const auto& prev = cc.hs[li - 1];
            auto& dst = cc.in[li];
            if (cfg.interlayer_norm && !p.inter_mean.empty()) {
                const std::size_t off = (li - 1) * static_cast<std::size_t>(h);
                for (int t = 0; t < W; ++t)
                    for (int u = 0; u < h; ++u) {
                        const auto idx = static_cast<std::size_t>(t) * static_cast<std::size_t>(h) +
                                         static_cast<std::size_t>(u);
                        dst[idx] = (prev[idx] - p.inter_mean[off + static_cast<std::size_t>(u)]) /
                                   p.inter_std[off + static_cast<std::size_t>(u)];
                    }
            } else {
                dst = prev;
            }
        }

        const double* hprev = nullptr;
        for (int t = 0; t < W; ++t) {
            const std::size_t th = static_cast<std::size_t>(t) * static_cast<std::size_t>(h);
            const double* xt = &cc.in[li][static_cast<std::size_t>(t) * static_cast<std::size_t>(d)];
            gate_preactivations(wx, wh, b, xt, hprev, 4 * h, d, h, z.data());
            for (int u = 0; u < h; ++u) {
                const auto uu = static_cast<std::size_t>(u);
                const double iv = sigmoid(z[uu]);
                const double fv = sigmoid(z[static_cast<std::size_t>(h) + uu]);
                const double gv = std::tanh(z[2 * static_cast<std::size_t>(h) + uu]);
                const double ov = sigmoid(z[3 * static_cast<std::size_t>(h) + uu]);
                const double cprev = (t == 0) ? 0.0 : cc.c[li][th - static_cast<std::size_t>(h) + uu];
                const double cv = fv * cprev + iv * gv;
                const double tc = std::tanh(cv);
                cc.gi[li][th + uu] = iv;
                cc.gf[li][th + uu] = fv;
                cc.gg[li][th + uu] = gv;
                cc.go[li][th + uu] = ov;
                cc.c[li][th + uu] = cv;
                cc.tanc[li][th + uu] = tc;
                cc.hs[li][th + uu] = ov * tc;
            }
            hprev = &cc.hs[li][th];
        }
    }

    const double* wo = &p.w[p.wo_offset()];
    const double* h_last =
        &cc.hs[static_cast<std::size_t>(cfg.layers) - 1]
              [static_cast<std::size_t>(W - 1) * static_cast<std::size_t>(h)];
    double y = p.w[p.bo_offset()];
    for (int u = 0; u < h; ++u) y += wo[u] * h_last[u];
    return y;
}

// Backprop for one sample given dLoss/dOutput; accumulates into grads.
void backward_one(const ModelParams& p, const Cache& cc, double dout, std::span<double> grads) {
    const ModelConfig& cfg = p.cfg;
    const int W = cfg.window, h = cfg.hidden;
    const auto hs = static_cast<std::size_t>(h);

    // output affine map
    const std::size_t last = static_cast<std::size_t>(W - 1) * hs;
    const auto top = static_cast<std::size_t>(cfg.layers) - 1;
    double* gwo = &grads[p.wo_offset()];
    for (int u = 0; u < h; ++u) gwo[u] += dout * cc.hs[top][last + static_cast<std::size_t>(u)];
    grads[p.bo_offset()] += dout;

    // dh carried into each layer, seeded at the top by the output map
    std::vector<double> dh_next(static_cast<std::size_t>(W) * hs, 0.0);  // gradient w.r.t. this layer's h
    const double* wo = &p.w[p.wo_offset()];
    for (int u = 0; u < h; ++u) dh_next[last + static_cast<std::size_t>(u)] = dout * wo[u];

    std::vector<double> dz(4 * hs), dh_prev_t(hs), dc(hs), dc_next(hs), dx_layer;
    for (int l = cfg.layers - 1; l >= 0; --l) {
        const auto li = static_cast<std::size_t>(l);
        const int d = p.input_dim(l);
        const double* wx = &p.w[p.wx_offset(l)];
        const double* wh = &p.w[p.wh_offset(l)];
        double* gwx = &grads[p.wx_offset(l)];
        double* gwh = &grads[p.wh_offset(l)];
        double* gb = &grads[p.b_offset(l)];

        dx_layer.assign(static_cast<std::size_t>(W) * static_cast<std::size_t>(d), 0.0);
        std::fill(dc_next.begin(), dc_next.end(), 0.0);

        for (int t = W - 1; t >= 0; --t) {
            const std::size_t th = static_cast<std::size_t>(t) * hs;
            for (int u = 0; u < h; ++u) {
                const auto uu = static_cast<std::size_t>(u);
                const double dh = dh_next[th + uu];
                const double iv = cc.gi[li][th + uu];
                const double fv = cc.gf[li][th + uu];
                const double gv = cc.gg[li][th + uu];
                const double ov = cc.go[li][th + uu];
                const double tc = cc.tanc[li][th + uu];
                const double cprev = (t == 0) ? 0.0 : cc.c[li][th - hs + uu];

                const double dov = dh * tc;
                double dcv = dc_next[uu] + dh * ov * (1.0 - tc * tc);
                const double div = dcv * gv;
                const double dfv = dcv * cprev;
                const double dgv = dcv * iv;

                dz[uu] = div * iv * (1.0 - iv);
                dz[hs + uu] = dfv * fv * (1.0 - fv);
                dz[2 * hs + uu] = dgv * (1.0 - gv * gv);
                dz[3 * hs + uu] = dov * ov * (1.0 - ov);
                dc[uu] = dcv * fv;  // to c_{t-1}
            }
            std::swap(dc, dc_next);

            const double* xt = &cc.in[li][static_cast<std::size_t>(t) * static_cast<std::size_t>(d)];
            const double* hprev = (t == 0) ? nullptr : &cc.hs[li][th - hs];
            double* dxt = &dx_layer[static_cast<std::size_t>(t) * static_cast<std::size_t>(d)];
            std::fill(dh_prev_t.begin(), dh_prev_t.end(), 0.0);

            for (int r = 0; r < 4 * h; ++r) {
                const auto rr = static_cast<std::size_t>(r);
                const double dzr = dz[rr];
                if (dzr == 0.0) continue;
                gb[r] += dzr;
                double* gxrow = gwx + rr * static_cast<std::size_t>(d);
                const double* xrow = wx + rr * static_cast<std::size_t>(d);
                for (int k = 0; k < d; ++k) {
                    gxrow[k] += dzr * xt[k];
                    dxt[k] += dzr * xrow[k];
                }
                if (hprev) {
                    double* ghrow = gwh + rr * hs;
                    const double* hrow = wh + rr * hs;
                    for (int k = 0; k < h; ++k) {
                        ghrow[k] += dzr * hprev[k];
                        dh_prev_t[static_cast<std::size_t>(k)] += dzr * hrow[k];
                    }
                }
            }
            if (t > 0)
                for (int u = 0; u < h; ++u) dh_next[th - hs + static_cast<std::size_t>(u)] += dh_prev_t[static_cast<std::size_t>(u)];
        }

        // hand dx down to the layer below (through the inter-layer scaling)
        if (l > 0) {
            if (cfg.interlayer_norm && !p.inter_std.empty()) {
                const std::size_t off = (li - 1) * hs;
                for (int t = 0; t < W; ++t)
                    for (int u = 0; u < h; ++u) {
                        const auto idx = static_cast<std::size_t>(t) * hs + static_cast<std::size_t>(u);
                        dx_layer[idx] /= p.inter_std[off + static_cast<std::size_t>(u)];
                    }
            }
            dh_next = dx_layer;
        }
    }
}

} // namespace

void ModelConfig::validate() const {
    if (layers < 1 || hidden < 1 || window < 1 || channels < 1)
        throw ValidationError("model: layers/hidden/window/channels must be >= 1");
    if (batch < 1 || epochs < 1) throw ValidationError("model: batch and epochs must be >= 1");
    if (!(learning_rate > 0.0) || !(lr_decay > 0.0) || lr_decay_every < 1)
        throw ValidationError("model: rates must be positive");
    if (!(grad_clip > 0.0)) throw ValidationError("model: grad_clip must be positive");
}

ModelConfig ModelConfig::paper_scale() {
    ModelConfig c;
    c.layers = 6;
    c.hidden = 256;
    c.batch = 256;
    return c;
}

double lr_for_epoch(const ModelConfig& cfg, int epoch) {
    return cfg.learning_rate * std::pow(cfg.lr_decay, static_cast<double>(epoch / cfg.lr_decay_every));
}

std::size_t ModelParams::wx_offset(int layer) const {
    std::size_t off = 0;
    const auto h = static_cast<std::size_t>(cfg.hidden);
    for (int l = 0; l < layer; ++l)
        off += 4 * h * static_cast<std::size_t>(input_dim(l)) + 4 * h * h + 4 * h;
    return off;
}

std::size_t ModelParams::wh_offset(int layer) const {
    return wx_offset(layer) +
           4 * static_cast<std::size_t>(cfg.hidden) * static_cast<std::size_t>(input_dim(layer));
}

std::size_t ModelParams::b_offset(int layer) const {
    return wh_offset(layer) + 4 * static_cast<std::size_t>(cfg.hidden) * static_cast<std::size_t>(cfg.hidden);
}

std::size_t ModelParams::wo_offset() const { return wx_offset(cfg.layers); }

std::size_t ModelParams::bo_offset() const { return wo_offset() + static_cast<std::size_t>(cfg.hidden); }

bool ModelParams::finite() const {
    for (double v : w)
        if (!std::isfinite(v)) return false;
    return true;
}

ModelParams init(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    ModelParams p;
    p.cfg = cfg;
    p.cfg.seed = seed;
    p.w.assign(p.bo_offset() + 1, 0.0);
    p.input_mean.assign(static_cast<std::size_t>(cfg.channels), 0.0);
    p.input_std.assign(static_cast<std::size_t>(cfg.channels), 1.0);

    Rng rng(hash_combine(seed, 0x1e57abcdULL));
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
    const auto h = static_cast<std::size_t>(cfg.hidden);
    for (int l = 0; l < cfg.layers; ++l) {
        const std::size_t nwx = 4 * h * static_cast<std::size_t>(p.input_dim(l));
        const std::size_t nwh = 4 * h * h;
        double* wx = &p.w[p.wx_offset(l)];
        double* wh = &p.w[p.wh_offset(l)];
        double* b = &p.w[p.b_offset(l)];
        for (std::size_t k = 0; k < nwx; ++k) wx[k] = rng.uniform(-scale, scale);
        for (std::size_t k = 0; k < nwh; ++k) wh[k] = rng.uniform(-scale, scale);
        for (std::size_t k = 0; k < h; ++k) b[h + k] = 1.0;  // forget gate
    }
    double* wo = &p.w[p.wo_offset()];
    for (std::size_t k = 0; k < h; ++k) wo[k] = rng.uniform(-scale, scale);
    p.w[p.bo_offset()] = 0.0;
    return p;
}

double forward(const ModelParams& params, const core::Window& window) {
    thread_local Cache cache;
    if (cache.layers != params.cfg.layers || cache.W != params.cfg.window ||
        cache.h != params.cfg.hidden || cache.channels != params.cfg.channels)
        cache.resize(params.cfg);
    return forward_cached(params, window, cache);
}

std::vector<double> forward_batch(const ModelParams& params, std::span<const core::Window> windows) {
    std::vector<double> out(windows.size());
    Cache cache;
    cache.resize(params.cfg);
    for (std::size_t i = 0; i < windows.size(); ++i) out[i] = forward_cached(params, windows[i], cache);
    return out;
}

double mse_loss(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.empty()) throw ValidationError("mse_loss: empty input");
    if (predictions.size() != targets.size()) throw ValidationError("mse_loss: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - targets[i];
        acc += d * d;
    }
    return acc / static_cast<double>(predictions.size());
}

BackwardResult backward(const ModelParams& params, std::span<const core::Window> windows,
                        std::span<const double> targets) {
    if (windows.empty()) throw ValidationError("backward: empty batch");
    if (windows.size() != targets.size()) throw ValidationError("backward: batch/target mismatch");

    BackwardResult res;
    res.predictions.resize(windows.size());
    res.grads.assign(params.w.size(), 0.0);

    Cache cache;
    cache.resize(params.cfg);
    const double n = static_cast<double>(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        res.predictions[i] = forward_cached(params, windows[i], cache);
        const double dout = 2.0 * (res.predictions[i] - targets[i]) / n;
        backward_one(params, cache, dout, res.grads);
    }
    res.loss = mse_loss(res.predictions, targets);
    if (!std::isfinite(res.loss)) throw NumericError("backward: non-finite loss");
    return res;
}

BackwardResult backward_outputs(const ModelParams& params, std::span<const core::Window> windows,
                                std::span<const double> dloss_dout) {
    if (windows.empty()) throw ValidationError("backward_outputs: empty batch");
    if (windows.size() != dloss_dout.size())
        throw ValidationError("backward_outputs: batch/gradient mismatch");

    BackwardResult res;
    res.predictions.resize(windows.size());
    res.grads.assign(params.w.size(), 0.0);
    Cache cache;
    cache.resize(params.cfg);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        res.predictions[i] = forward_cached(params, windows[i], cache);
        backward_one(params, cache, dloss_dout[i], res.grads);
    }
    return res;
}

double clip_gradients(std::span<double> grads, double max_norm) {
    if (!(max_norm > 0.0)) throw ValidationError("clip_gradients: max_norm must be positive");
    double sq = 0.0;
    for (double g : grads) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm > max_norm) {
        const double s = max_norm / norm;
        for (double& g : grads) g *= s;
    }
    return norm;
}

namespace {

void compute_input_stats(ModelParams& p, std::span<const core::Window> train) {
    const int C = p.cfg.channels;
    std::vector<double> mean(static_cast<std::size_t>(C), 0.0), var(static_cast<std::size_t>(C), 0.0);
    std::size_t count = 0;
    for (const auto& w : train) {
        for (int t = 0; t < w.length; ++t)
            for (int c = 0; c < C; ++c)
                mean[static_cast<std::size_t>(c)] +=
                    w.values[static_cast<std::size_t>(t) * static_cast<std::size_t>(C) +
                             static_cast<std::size_t>(c)];
        count += static_cast<std::size_t>(w.length);
    }
    for (auto& m : mean) m /= static_cast<double>(count);
    for (const auto& w : train)
        for (int t = 0; t < w.length; ++t)
            for (int c = 0; c < C; ++c) {
                const double d = w.values[static_cast<std::size_t>(t) * static_cast<std::size_t>(C) +
                                          static_cast<std::size_t>(c)] -
                                 mean[static_cast<std::size_t>(c)];
                var[static_cast<std::size_t>(c)] += d * d;
            }
    p.input_mean = mean;
    for (int c = 0; c < C; ++c)
        p.input_std[static_cast<std::size_t>(c)] =
            std::max(std::sqrt(var[static_cast<std::size_t>(c)] / static_cast<double>(count)), 1e-8);
}

// Captures fixed standardization constants for the hidden outputs feeding the
// next layer, from the initial params over a sample of train windows.
void compute_interlayer_stats(ModelParams& p, std::span<const core::Window> train) {
    const int h = p.cfg.hidden;
    const int L = p.cfg.layers;
    if (L < 2) {
        p.inter_mean.clear();
        p.inter_std.clear();
        return;
    }
    const std::size_t n_stats = static_cast<std::size_t>(L - 1) * static_cast<std::size_t>(h);
    std::vector<double> mean(n_stats, 0.0), var(n_stats, 0.0);

    ModelParams probe = p;
    probe.inter_mean.clear();  // raw activations for the probe pass
    probe.inter_std.clear();

    Cache cache;
    cache.resize(probe.cfg);
    const std::size_t sample = std::min<std::size_t>(train.size(), 256);
    std::size_t count = 0;
    for (std::size_t i = 0; i < sample; ++i) {
        forward_cached(probe, train[i], cache);
        for (int l = 0; l + 1 < L; ++l)
            for (int t = 0; t < p.cfg.window; ++t)
                for (int u = 0; u < h; ++u)
                    mean[static_cast<std::size_t>(l) * static_cast<std::size_t>(h) +
                         static_cast<std::size_t>(u)] +=
                        cache.hs[static_cast<std::size_t>(l)]
                                [static_cast<std::size_t>(t) * static_cast<std::size_t>(h) +
                                 static_cast<std::size_t>(u)];
        count += static_cast<std::size_t>(p.cfg.window);
    }
    for (auto& m : mean) m /= static_cast<double>(count);
    for (std::size_t i = 0; i < sample; ++i) {
        forward_cached(probe, train[i], cache);
        for (int l = 0; l + 1 < L; ++l)
            for (int t = 0; t < p.cfg.window; ++t)
                for (int u = 0; u < h; ++u) {
                    const auto k = static_cast<std::size_t>(l) * static_cast<std::size_t>(h) +
                                   static_cast<std::size_t>(u);
                    const double d = cache.hs[static_cast<std::size_t>(l)]
                                             [static_cast<std::size_t>(t) * static_cast<std::size_t>(h) +
                                              static_cast<std::size_t>(u)] -
                                     mean[k];
                    var[k] += d * d;
                }
    }
    p.inter_mean = mean;
    p.inter_std.resize(n_stats);
    for (std::size_t k = 0; k < n_stats; ++k)
        p.inter_std[k] = std::max(std::sqrt(var[k] / static_cast<double>(count)), 1e-8);
}

std::vector<double> targets_of(std::span<const core::Window> ws) {
    std::vector<double> t;
    t.reserve(ws.size());
    for (const auto& w : ws) {
        if (!w.target) throw ValidationError("fit: window without target");
        t.push_back(*w.target);
    }
    return t;
}

} // namespace

std::pair<ModelParams, TrainReport> fit(ModelParams params, std::span<const core::Window> train,
                                        std::span<const core::Window> validate,
                                        const ModelConfig& cfg) {
    cfg.validate();
    if (train.empty() || validate.empty()) throw ValidationError("fit: empty train or validation split");
    params.cfg = cfg;
    params.cfg.seed = cfg.seed;

    const auto t_start = std::chrono::steady_clock::now();
    compute_input_stats(params, train);
    if (cfg.interlayer_norm) compute_interlayer_stats(params, train);

    // Start the output bias at the target mean so early steps are not spent
    // crawling the bias toward the angle scale under the gradient clip.
    {
        double tm = 0.0;
        for (const auto& w : train) {
            if (!w.target) throw ValidationError("fit: window without target");
            tm += *w.target;
        }
        params.w[params.bo_offset()] = tm / static_cast<double>(train.size());
    }

    const std::vector<double> val_targets = targets_of(validate);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(hash_combine(cfg.seed, 0x5affedULL));

    TrainReport report;
    ModelParams best = params;
    double best_val = std::numeric_limits<double>::infinity();

    // Adam state, unused for plain gradient descent
    std::vector<double> m_adam, v_adam;
    if (cfg.adam) {
        m_adam.assign(params.w.size(), 0.0);
        v_adam.assign(params.w.size(), 0.0);
    }
    long long step = 0;

    std::vector<core::Window> batch;
    std::vector<double> batch_targets;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_for_epoch(cfg, epoch);
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch)) {
            const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch));
            batch.clear();
            batch_targets.clear();
            for (std::size_t k = begin; k < end; ++k) {
                batch.push_back(train[order[k]]);
                if (!batch.back().target) throw ValidationError("fit: window without target");
                batch_targets.push_back(*batch.back().target);
            }
            BackwardResult bw;
            try {
                bw = backward(params, batch, batch_targets);
            } catch (const NumericError&) {
                throw NumericError("fit: diverged (non-finite loss) at epoch " + fmt(static_cast<std::int64_t>(epoch)));
            }
            clip_gradients(bw.grads, cfg.grad_clip);

            if (cfg.adam) {
                ++step;
                const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
                const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
                const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
                for (std::size_t k = 0; k < params.w.size(); ++k) {
                    m_adam[k] = b1 * m_adam[k] + (1.0 - b1) * bw.grads[k];
                    v_adam[k] = b2 * v_adam[k] + (1.0 - b2) * bw.grads[k] * bw.grads[k];
                    params.w[k] -= lr * (m_adam[k] / c1) / (std::sqrt(v_adam[k] / c2) + eps);
                }
            } else {
                for (std::size_t k = 0; k < params.w.size(); ++k) params.w[k] -= lr * bw.grads[k];
            }

            loss_sum += bw.loss * static_cast<double>(end - begin);
            loss_count += end - begin;
        }

        const double train_mse = loss_sum / static_cast<double>(loss_count);
        const std::vector<double> val_pred = forward_batch(params, validate);
        const double val_mse = mse_loss(val_pred, val_targets);
        if (!std::isfinite(train_mse) || !std::isfinite(val_mse))
            throw NumericError("fit: diverged (non-finite loss) at epoch " + fmt(static_cast<std::int64_t>(epoch)));

        report.epochs.push_back({epoch, lr, train_mse, val_mse});
        if (val_mse < best_val) {
            best_val = val_mse;
            best = params;
            report.best_epoch = epoch;
        }
    }

    for (std::size_t e = 4; e < report.epochs.size(); ++e)
        if (report.epochs[e].train_mse > report.epochs[e - 1].train_mse + 1e-12)
            report.train_monotone_after_warmup = false;

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {std::move(best), std::move(report)};
}

std::vector<std::optional<double>> predict_series(const ModelParams& params,
                                                  const core::Session& session) {
    std::vector<std::optional<double>> out(session.frames.size());
    const auto windows = core::make_windows(session, params.cfg.window, params.cfg.channels);
    if (windows.empty()) return out;
    const std::vector<double> est = forward_batch(params, windows);
    for (std::size_t i = 0; i < est.size(); ++i)
        out[i + static_cast<std::size_t>(params.cfg.window) - 1] = est[i];
    return out;
}

// ---- checkpoint ------------------------------------------------------------

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path,
                     const std::map<std::string, std::string>& extras) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    const ModelConfig& c = params.cfg;
    out << "padtrack-checkpoint 1\n";
    out << "layers " << c.layers << "\nhidden " << c.hidden << "\nwindow " << c.window
        << "\nchannels " << c.channels << "\nbatch " << c.batch << "\nepochs " << c.epochs
        << "\nlearning_rate " << fmt(c.learning_rate) << "\nlr_decay " << fmt(c.lr_decay)
        << "\nlr_decay_every " << c.lr_decay_every << "\ngrad_clip " << fmt(c.grad_clip)
        << "\nadam " << (c.adam ? 1 : 0) << "\ninterlayer_norm " << (c.interlayer_norm ? 1 : 0)
        << "\nseed " << c.seed << "\n";
    for (const auto& [k, v] : extras) out << "x:" << k << " " << v << "\n";
    auto dump = [&](const char* name, const std::vector<double>& v) {
        out << name << " " << v.size();
        for (double x : v) out << ' ' << fmt(x);
        out << '\n';
    };
    dump("input_mean", params.input_mean);
    dump("input_std", params.input_std);
    dump("inter_mean", params.inter_mean);
    dump("inter_std", params.inter_std);
    dump("params", params.w);
    out << "end\n";
}

std::pair<ModelParams, std::map<std::string, std::string>> load_checkpoint(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || trim(line) != "padtrack-checkpoint 1")
        throw ParseError(path.string(), 1, "not a padtrack checkpoint");

    ModelParams p;
    std::map<std::string, std::string> extras;
    long line_no = 1;
    bool done = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view v = trim(line);
        if (v.empty()) continue;
        if (v == "end") {
            done = true;
            break;
        }
        const std::size_t sp = v.find(' ');
        if (sp == std::string_view::npos) throw ParseError(path.string(), line_no, "bad record");
        std::string_view key = v.substr(0, sp);
        std::string_view rest = v.substr(sp + 1);
        auto read_vec = [&](std::vector<double>& dst) {
            auto parts = split(rest, ' ');
            const std::size_t n = static_cast<std::size_t>(parse_i64(parts[0]));
            if (parts.size() != n + 1) throw ParseError(path.string(), line_no, "bad vector length");
            dst.resize(n);
            for (std::size_t i = 0; i < n; ++i) dst[i] = parse_double(parts[i + 1]);
        };
        if (key == "layers") p.cfg.layers = static_cast<int>(parse_i64(rest));
        else if (key == "hidden") p.cfg.hidden = static_cast<int>(parse_i64(rest));
        else if (key == "window") p.cfg.window = static_cast<int>(parse_i64(rest));
        else if (key == "channels") p.cfg.channels = static_cast<int>(parse_i64(rest));
        else if (key == "batch") p.cfg.batch = static_cast<int>(parse_i64(rest));
        else if (key == "epochs") p.cfg.epochs = static_cast<int>(parse_i64(rest));
        else if (key == "learning_rate") p.cfg.learning_rate = parse_double(rest);
        else if (key == "lr_decay") p.cfg.lr_decay = parse_double(rest);
        else if (key == "lr_decay_every") p.cfg.lr_decay_every = static_cast<int>(parse_i64(rest));
        else if (key == "grad_clip") p.cfg.grad_clip = parse_double(rest);
        else if (key == "adam") p.cfg.adam = parse_i64(rest) != 0;
        else if (key == "interlayer_norm") p.cfg.interlayer_norm = parse_i64(rest) != 0;
        else if (key == "seed") p.cfg.seed = static_cast<std::uint64_t>(parse_i64(rest));
        else if (key == "input_mean") read_vec(p.input_mean);
        else if (key == "input_std") read_vec(p.input_std);
        else if (key == "inter_mean") read_vec(p.inter_mean);
        else if (key == "inter_std") read_vec(p.inter_std);
        else if (key == "params") read_vec(p.w);
        else if (key.substr(0, 2) == "x:") extras[std::string(key.substr(2))] = std::string(rest);
        else throw ParseError(path.string(), line_no, "unknown record '" + std::string(key) + "'");
    }
    if (!done) throw ParseError(path.string(), line_no, "truncated checkpoint");
    p.cfg.validate();
    const std::size_t want = p.bo_offset() + 1;
    if (p.w.size() != want)
        throw ParseError(path.string(), line_no, "parameter count mismatch");
    if (!p.finite()) throw NumericError("checkpoint contains non-finite parameters");
    return {std::move(p), std::move(extras)};
}

} // namespace padtrack::lstm
