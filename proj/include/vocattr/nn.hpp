#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "vocattr/augment.hpp"
#include "vocattr/rng.hpp"

namespace vocattr {

struct ModelConfig {
    std::vector<int> channels{16, 32, 64, 128};  // conv channels per block
    int n_classes = kNumClasses;

    void validate() const {
        if (channels.empty()) throw std::invalid_argument("ModelConfig: need at least one block");
        for (int c : channels)
            if (c < 1) throw std::invalid_argument("ModelConfig: channel counts must be >= 1");
        if (n_classes < 2) throw std::invalid_argument("ModelConfig: n_classes must be >= 2");
    }
    bool operator==(const ModelConfig&) const = default;
};

// Exponential decay: lr = base * decay^epoch (epoch counted from 0).
inline double lr_schedule(int epoch, double base_lr, double decay) {
    if (epoch < 0) throw std::invalid_argument("lr_schedule: epoch must be >= 0");
    return base_lr * std::pow(decay, epoch);
}

// (1 - alpha) * y + alpha / K
inline std::vector<double> smoothed_target(const std::vector<double>& label, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("smoothed_target: alpha out of [0,1)");
    std::vector<double> out(label.size());
    const double uniform = alpha / static_cast<double>(label.size());
    for (size_t c = 0; c < label.size(); ++c) out[c] = (1.0 - alpha) * label[c] + uniform;
    return out;
}

inline std::vector<double> softmax(const std::vector<double>& logits) {
    std::vector<double> p(logits.size());
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (size_t c = 0; c < logits.size(); ++c) {
        p[c] = std::exp(logits[c] - mx);
        sum += p[c];
    }
    bool clamped = false;
    for (double& x : p) {
        x /= sum;
        if (x <= 0.0) {
            x = std::numeric_limits<double>::min();
            clamped = true;
        }
    }
    if (clamped) {
        double s2 = 0.0;
        for (double x : p) s2 += x;
        for (double& x : p) x /= s2;
    }
    return p;
}

// -sum_c smoothed(label)_c * log(probs_c); probs must be strictly positive.
inline double smoothed_cce(const std::vector<double>& probs, const std::vector<double>& label,
                           double alpha) {
    if (probs.size() != label.size()) throw std::invalid_argument("smoothed_cce: size mismatch");
    const std::vector<double> target = smoothed_target(label, alpha);
    double loss = 0.0;
    for (size_t c = 0; c < probs.size(); ++c) loss -= target[c] * std::log(probs[c]);
    return loss;
}

// -sum_c target_c * log softmax(logits)_c, evaluated via log-sum-exp.
inline double cross_entropy(const std::vector<double>& logits, const std::vector<double>& target) {
    if (logits.size() != target.size())
        throw std::invalid_argument("cross_entropy: size mismatch");
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - mx);
    const double lse = mx + std::log(sum);
    double loss = 0.0;
    for (size_t c = 0; c < logits.size(); ++c) loss -= target[c] * (logits[c] - lse);
    return loss;
}

template <typename T>
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> v;

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_) { resize(n_, c_, h_, w_); }

    void resize(int n_, int c_, int h_, int w_) {
        n = n_;
        c = c_;
        h = h_;
        w = w_;
        v.assign(static_cast<size_t>(n) * c * h * w, T(0));
    }
    size_t size() const { return v.size(); }
    T* plane(int ni, int ci) {
        return v.data() + (static_cast<size_t>(ni) * c + ci) * h * w;
    }
    const T* plane(int ni, int ci) const {
        return v.data() + (static_cast<size_t>(ni) * c + ci) * h * w;
    }
    T& at(int ni, int ci, int y, int x) { return plane(ni, ci)[static_cast<size_t>(y) * w + x]; }
    T at(int ni, int ci, int y, int x) const {
        return plane(ni, ci)[static_cast<size_t>(y) * w + x];
    }
};

template <typename T>
struct ConvBlock {
    int in_ch = 0, out_ch = 0;
    std::vector<T> w, b;    // w: [out_ch][in_ch][3][3]
    std::vector<T> dw, db;
};

template <typename T>
struct DenseLayer {
    int in_dim = 0, out_dim = 0;
    std::vector<T> w, b;    // w: [out_dim][in_dim]
    std::vector<T> dw, db;
};

// Intermediate activations a forward pass leaves behind for backward.
template <typename T>
struct ForwardCache {
    Tensor4<T> input;
    std::vector<Tensor4<T>> act;     // per block, post-ReLU pre-pool
    std::vector<Tensor4<T>> pooled;  // per block
    std::vector<std::vector<uint32_t>> switches;  // argmax plane index per pooled cell
    std::vector<T> feat;             // [n][last_channels] after global average pool
};

// Small fixed-topology image classifier: repeated [3x3 conv, ReLU, 2x2 max
// pool] blocks, global average pooling, one dense layer. Inference produces
// logits; probabilities and losses are computed in double regardless of T.
template <typename T>
class Cnn {
  public:
    explicit Cnn(ModelConfig cfg = {}) : cfg_(std::move(cfg)) {
        cfg_.validate();
        int in_ch = 1;
        for (int out_ch : cfg_.channels) {
            ConvBlock<T> blk;
            blk.in_ch = in_ch;
            blk.out_ch = out_ch;
            blk.w.assign(static_cast<size_t>(out_ch) * in_ch * 9, T(0));
            blk.b.assign(out_ch, T(0));
            blk.dw.assign(blk.w.size(), T(0));
            blk.db.assign(blk.b.size(), T(0));
            blocks_.push_back(std::move(blk));
            in_ch = out_ch;
        }
        dense_.in_dim = in_ch;
        dense_.out_dim = cfg_.n_classes;
        dense_.w.assign(static_cast<size_t>(cfg_.n_classes) * in_ch, T(0));
        dense_.b.assign(cfg_.n_classes, T(0));
        dense_.dw.assign(dense_.w.size(), T(0));
        dense_.db.assign(dense_.b.size(), T(0));
    }

    const ModelConfig& config() const { return cfg_; }
    std::vector<ConvBlock<T>>& blocks() { return blocks_; }
    const std::vector<ConvBlock<T>>& blocks() const { return blocks_; }
    DenseLayer<T>& dense() { return dense_; }
    const DenseLayer<T>& dense() const { return dense_; }

    // He-uniform weights (limit sqrt(6 / fan_in)), zero biases.
    void he_init(uint64_t seed) {
        Rng rng(seed);
        for (auto& blk : blocks_) {
            const double limit = std::sqrt(6.0 / (static_cast<double>(blk.in_ch) * 9.0));
            for (T& x : blk.w) x = static_cast<T>(rng.uniform(-limit, limit));
            std::fill(blk.b.begin(), blk.b.end(), T(0));
        }
        const double limit = std::sqrt(6.0 / static_cast<double>(dense_.in_dim));
        for (T& x : dense_.w) x = static_cast<T>(rng.uniform(-limit, limit));
        std::fill(dense_.b.begin(), dense_.b.end(), T(0));
    }

    // Returns logits row-major [n][n_classes] as doubles.
    std::vector<double> forward(const Tensor4<T>& x, ForwardCache<T>& cache) const {
        if (x.c != 1) throw std::invalid_argument("forward: expected single-channel input");
        if (x.n < 1) throw std::invalid_argument("forward: empty batch");
        const int min_dim = 1 << static_cast<int>(blocks_.size());
        if (x.h < min_dim || x.w < min_dim)
            throw std::invalid_argument("forward: input smaller than pooling pyramid");

        cache.input = x;
        cache.act.resize(blocks_.size());
        cache.pooled.resize(blocks_.size());
        cache.switches.resize(blocks_.size());

        const Tensor4<T>* cur = &cache.input;
        for (size_t i = 0; i < blocks_.size(); ++i) {
            conv3x3_forward(*cur, blocks_[i], cache.act[i]);
            relu_inplace(cache.act[i]);
            maxpool2_forward(cache.act[i], cache.pooled[i], cache.switches[i]);
            cur = &cache.pooled[i];
        }

        // global average pool
        const Tensor4<T>& last = *cur;
        const double inv_area = 1.0 / (static_cast<double>(last.h) * last.w);
        cache.feat.assign(static_cast<size_t>(last.n) * last.c, T(0));
        for (int ni = 0; ni < last.n; ++ni)
            for (int ci = 0; ci < last.c; ++ci) {
                const T* p = last.plane(ni, ci);
                double acc = 0.0;
                for (int j = 0; j < last.h * last.w; ++j) acc += static_cast<double>(p[j]);
                cache.feat[static_cast<size_t>(ni) * last.c + ci] = static_cast<T>(acc * inv_area);
            }

        std::vector<double> logits(static_cast<size_t>(x.n) * cfg_.n_classes);
        for (int ni = 0; ni < x.n; ++ni)
            for (int k = 0; k < cfg_.n_classes; ++k) {
                double acc = static_cast<double>(dense_.b[k]);
                const T* wrow = dense_.w.data() + static_cast<size_t>(k) * dense_.in_dim;
                const T* frow = cache.feat.data() + static_cast<size_t>(ni) * dense_.in_dim;
                for (int c = 0; c < dense_.in_dim; ++c)
                    acc += static_cast<double>(wrow[c]) * static_cast<double>(frow[c]);
                logits[static_cast<size_t>(ni) * cfg_.n_classes + k] = acc;
            }
        return logits;
    }

    // Softmax probabilities row-major [n][n_classes]; no cache kept.
    std::vector<std::vector<double>> predict(const Tensor4<T>& x) const {
        ForwardCache<T> cache;
        const std::vector<double> logits = forward(x, cache);
        std::vector<std::vector<double>> probs(x.n);
        for (int ni = 0; ni < x.n; ++ni) {
            std::vector<double> row(logits.begin() + static_cast<size_t>(ni) * cfg_.n_classes,
                                    logits.begin() + static_cast<size_t>(ni + 1) * cfg_.n_classes);
            probs[ni] = softmax(row);
        }
        return probs;
    }

    // Accumulates parameter gradients for d(loss)/d(logits) in `dlogits`
    // (row-major [n][n_classes]). Call zero_grad() first.
    void backward(const ForwardCache<T>& cache, const std::vector<double>& dlogits) {
        const int n = cache.input.n;
        if (dlogits.size() != static_cast<size_t>(n) * cfg_.n_classes)
            throw std::invalid_argument("backward: dlogits shape mismatch");

        // dense layer
        std::vector<T> dfeat(cache.feat.size(), T(0));
        for (int ni = 0; ni < n; ++ni) {
            const double* drow = dlogits.data() + static_cast<size_t>(ni) * cfg_.n_classes;
            const T* frow = cache.feat.data() + static_cast<size_t>(ni) * dense_.in_dim;
            for (int k = 0; k < cfg_.n_classes; ++k) {
                const double d = drow[k];
                dense_.db[k] += static_cast<T>(d);
                T* dwrow = dense_.dw.data() + static_cast<size_t>(k) * dense_.in_dim;
                for (int c = 0; c < dense_.in_dim; ++c)
                    dwrow[c] += static_cast<T>(d * static_cast<double>(frow[c]));
            }
            T* dfrow = dfeat.data() + static_cast<size_t>(ni) * dense_.in_dim;
            for (int c = 0; c < dense_.in_dim; ++c) {
                double acc = 0.0;
                for (int k = 0; k < cfg_.n_classes; ++k)
                    acc += drow[k] *
                           static_cast<double>(dense_.w[static_cast<size_t>(k) * dense_.in_dim + c]);
                dfrow[c] = static_cast<T>(acc);
            }
        }

        // global average pool: spread gradient uniformly over the plane
        const Tensor4<T>& last = cache.pooled.back();
        Tensor4<T> dcur(last.n, last.c, last.h, last.w);
        const double inv_area = 1.0 / (static_cast<double>(last.h) * last.w);
        for (int ni = 0; ni < last.n; ++ni)
            for (int ci = 0; ci < last.c; ++ci) {
                const T g = static_cast<T>(
                    static_cast<double>(dfeat[static_cast<size_t>(ni) * last.c + ci]) * inv_area);
                T* p = dcur.plane(ni, ci);
                std::fill(p, p + last.h * last.w, g);
            }

        for (int i = static_cast<int>(blocks_.size()) - 1; i >= 0; --i) {
            // unpool through stored argmax switches, then gate by ReLU mask
            const Tensor4<T>& act = cache.act[i];
            Tensor4<T> dact(act.n, act.c, act.h, act.w);
            const std::vector<uint32_t>& sw = cache.switches[i];
            const Tensor4<T>& pooled = cache.pooled[i];
            for (int ni = 0; ni < pooled.n; ++ni)
                for (int ci = 0; ci < pooled.c; ++ci) {
                    const T* dp = dcur.plane(ni, ci);
                    T* da = dact.plane(ni, ci);
                    const uint32_t* sp =
                        sw.data() + (static_cast<size_t>(ni) * pooled.c + ci) * pooled.h * pooled.w;
                    for (int j = 0; j < pooled.h * pooled.w; ++j) da[sp[j]] += dp[j];
                }
            const T* ap = act.v.data();
            T* dp = dact.v.data();
            for (size_t j = 0; j < act.size(); ++j)
                if (ap[j] <= T(0)) dp[j] = T(0);

            const Tensor4<T>& in = i == 0 ? cache.input : cache.pooled[i - 1];
            Tensor4<T> din;
            conv3x3_backward(in, blocks_[i], dact, din, /*need_din=*/i > 0);
            if (i > 0) dcur = std::move(din);
        }
    }

    void zero_grad() {
        for (auto& blk : blocks_) {
            std::fill(blk.dw.begin(), blk.dw.end(), T(0));
            std::fill(blk.db.begin(), blk.db.end(), T(0));
        }
        std::fill(dense_.dw.begin(), dense_.dw.end(), T(0));
        std::fill(dense_.db.begin(), dense_.db.end(), T(0));
    }

    std::vector<std::vector<T>*> param_arrays() {
        std::vector<std::vector<T>*> out;
        for (auto& blk : blocks_) {
            out.push_back(&blk.w);
            out.push_back(&blk.b);
        }
        out.push_back(&dense_.w);
        out.push_back(&dense_.b);
        return out;
    }
    std::vector<const std::vector<T>*> param_arrays() const {
        std::vector<const std::vector<T>*> out;
        for (const auto& blk : blocks_) {
            out.push_back(&blk.w);
            out.push_back(&blk.b);
        }
        out.push_back(&dense_.w);
        out.push_back(&dense_.b);
        return out;
    }
    std::vector<std::vector<T>*> grad_arrays() {
        std::vector<std::vector<T>*> out;
        for (auto& blk : blocks_) {
            out.push_back(&blk.dw);
            out.push_back(&blk.db);
        }
        out.push_back(&dense_.dw);
        out.push_back(&dense_.db);
        return out;
    }

    size_t num_params() const {
        size_t total = 0;
        for (const auto* arr : param_arrays()) total += arr->size();
        return total;
    }

  private:
    static void conv3x3_forward(const Tensor4<T>& in, const ConvBlock<T>& blk, Tensor4<T>& out) {
        const int H = in.h, W = in.w;
        out.resize(in.n, blk.out_ch, H, W);
        for (int ni = 0; ni < in.n; ++ni)
            for (int oc = 0; oc < blk.out_ch; ++oc) {
                T* op = out.plane(ni, oc);
                std::fill(op, op + static_cast<size_t>(H) * W, blk.b[oc]);
                for (int ic = 0; ic < blk.in_ch; ++ic) {
                    const T* ip = in.plane(ni, ic);
                    const T* wp = blk.w.data() + (static_cast<size_t>(oc) * blk.in_ch + ic) * 9;
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kx = 0; kx < 3; ++kx) {
                            const int dy = ky - 1, dx = kx - 1;
                            const T wv = wp[ky * 3 + kx];
                            const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                            const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                            for (int y = y0; y < y1; ++y) {
                                T* orow = op + static_cast<size_t>(y) * W;
                                const T* irow = ip + static_cast<size_t>(y + dy) * W + dx;
                                for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
                            }
                        }
                }
            }
    }

    static void conv3x3_backward(const Tensor4<T>& in, ConvBlock<T>& blk, const Tensor4<T>& dout,
                                 Tensor4<T>& din, bool need_din) {
        const int H = in.h, W = in.w;
        if (need_din) din.resize(in.n, in.c, H, W);
        for (int ni = 0; ni < in.n; ++ni)
            for (int oc = 0; oc < blk.out_ch; ++oc) {
                const T* dop = dout.plane(ni, oc);
                double bacc = 0.0;
                for (int j = 0; j < H * W; ++j) bacc += static_cast<double>(dop[j]);
                blk.db[oc] += static_cast<T>(bacc);
                for (int ic = 0; ic < blk.in_ch; ++ic) {
                    const T* ip = in.plane(ni, ic);
                    T* dip = need_din ? din.plane(ni, ic) : nullptr;
                    T* dwp = blk.dw.data() + (static_cast<size_t>(oc) * blk.in_ch + ic) * 9;
                    const T* wp = blk.w.data() + (static_cast<size_t>(oc) * blk.in_ch + ic) * 9;
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kx = 0; kx < 3; ++kx) {
                            const int dy = ky - 1, dx = kx - 1;
                            const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                            const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                            const T wv = wp[ky * 3 + kx];
                            double wacc = 0.0;
                            for (int y = y0; y < y1; ++y) {
                                const T* dorow = dop + static_cast<size_t>(y) * W;
                                const T* irow = ip + static_cast<size_t>(y + dy) * W + dx;
                                for (int x = x0; x < x1; ++x)
                                    wacc += static_cast<double>(dorow[x]) *
                                            static_cast<double>(irow[x]);
                                if (need_din) {
                                    T* dirow = dip + static_cast<size_t>(y + dy) * W + dx;
                                    for (int x = x0; x < x1; ++x) dirow[x] += wv * dorow[x];
                                }
                            }
                            dwp[ky * 3 + kx] += static_cast<T>(wacc);
                        }
                }
            }
    }

    static void relu_inplace(Tensor4<T>& t) {
        for (T& x : t.v) x = x > T(0) ? x : T(0);
    }

    // 2x2/stride-2 max pool with ceil output dims; edge windows may be 1 wide.
    static void maxpool2_forward(const Tensor4<T>& in, Tensor4<T>& out,
                                 std::vector<uint32_t>& switches) {
        const int ph = (in.h + 1) / 2, pw = (in.w + 1) / 2;
        out.resize(in.n, in.c, ph, pw);
        switches.assign(out.size(), 0);
        for (int ni = 0; ni < in.n; ++ni)
            for (int ci = 0; ci < in.c; ++ci) {
                const T* ip = in.plane(ni, ci);
                T* op = out.plane(ni, ci);
                uint32_t* sp =
                    switches.data() + (static_cast<size_t>(ni) * in.c + ci) * ph * pw;
                for (int py = 0; py < ph; ++py)
                    for (int px = 0; px < pw; ++px) {
                        const int y1 = std::min(2 * py + 2, in.h), x1 = std::min(2 * px + 2, in.w);
                        T best = ip[static_cast<size_t>(2 * py) * in.w + 2 * px];
                        uint32_t arg = static_cast<uint32_t>(2 * py) * in.w + 2 * px;
                        for (int y = 2 * py; y < y1; ++y)
                            for (int x = 2 * px; x < x1; ++x) {
                                const T val = ip[static_cast<size_t>(y) * in.w + x];
                                if (val > best) {
                                    best = val;
                                    arg = static_cast<uint32_t>(y) * in.w + x;
                                }
                            }
                        op[static_cast<size_t>(py) * pw + px] = best;
                        sp[static_cast<size_t>(py) * pw + px] = arg;
                    }
            }
    }

    ModelConfig cfg_;
    std::vector<ConvBlock<T>> blocks_;
    DenseLayer<T> dense_;
};

// Adam with bias correction; moments kept in double regardless of T.
template <typename T>
class Adam {
  public:
    explicit Adam(Cnn<T>& model, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (const auto* arr : model.param_arrays()) {
            m_.emplace_back(arr->size(), 0.0);
            v_.emplace_back(arr->size(), 0.0);
        }
    }

    void step(Cnn<T>& model, double lr) {
        auto params = model.param_arrays();
        auto grads = model.grad_arrays();
        if (params.size() != m_.size())
            throw std::invalid_argument("adam: model does not match optimizer state");
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (size_t i = 0; i < params.size(); ++i) {
            std::vector<T>& p = *params[i];
            const std::vector<T>& g = *grads[i];
            std::vector<double>& m = m_[i];
            std::vector<double>& v = v_[i];
            for (size_t j = 0; j < p.size(); ++j) {
                const double gj = static_cast<double>(g[j]);
                m[j] = beta1_ * m[j] + (1.0 - beta1_) * gj;
                v[j] = beta2_ * v[j] + (1.0 - beta2_) * gj * gj;
                const double mhat = m[j] / bc1;
                const double vhat = v[j] / bc2;
                p[j] = static_cast<T>(static_cast<double>(p[j]) -
                                      lr * mhat / (std::sqrt(vhat) + eps_));
            }
        }
    }

    long steps_taken() const { return t_; }

  private:
    std::vector<std::vector<double>> m_, v_;
    long t_ = 0;
    double beta1_, beta2_, eps_;
};

// Mean smoothed cross-entropy over a batch plus its logit gradient.
// logits/targets row-major [n][k]; dlogits receives (softmax - target)/n.
inline double batch_loss_grad(const std::vector<double>& logits,
                              const std::vector<double>& targets, int n_classes,
                              std::vector<double>& dlogits) {
    if (logits.size() != targets.size() || logits.size() % n_classes != 0)
        throw std::invalid_argument("batch_loss_grad: shape mismatch");
    const size_t n = logits.size() / n_classes;
    dlogits.assign(logits.size(), 0.0);
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const std::vector<double> row(logits.begin() + i * n_classes,
                                      logits.begin() + (i + 1) * n_classes);
        const std::vector<double> tgt(targets.begin() + i * n_classes,
                                      targets.begin() + (i + 1) * n_classes);
        total += cross_entropy(row, tgt);
        const std::vector<double> p = softmax(row);
        for (int c = 0; c < n_classes; ++c)
            dlogits[i * n_classes + c] = (p[c] - tgt[c]) / static_cast<double>(n);
    }
    return total / static_cast<double>(n);
}

// On-disk model format: magic/version header, architecture, then each
// parameter array as shape + float32 little-endian payload.
void save_model(const std::string& path, const Cnn<float>& model);
void save_model(const std::string& path, const Cnn<double>& model);
Cnn<float> load_model(const std::string& path);

}  // namespace vocattr
