#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "grapheye/cpg.hpp"
#include "grapheye/errors.hpp"
#include "grapheye/linalg.hpp"
#include "grapheye/veccpg.hpp"

namespace grapheye {

struct GcGatConfig {
    int input_dim = kFeatureWidth;  // 133
    int hidden_dim = 64;
    int pool_dim = 32;
    int gat_layers = 2;
    int heads = 4;
    double leaky_slope = 0.2;
    double dropout = 0.3;
    std::vector<int> mlp_dims = {32, 16, 2};
    double weight_majority = 0.6;
    double weight_minority = 1.7;
    double learning_rate = 8.6e-4;
    int epochs = 15;
    uint32_t seed = 0;

    void validate() const {
        if (hidden_dim % heads != 0) throw ShapeError("hidden_dim not divisible by heads");
        if (mlp_dims.empty() || mlp_dims.back() != 2)
            throw ShapeError("mlp must end in 2 output nodes");
        if (mlp_dims.front() != pool_dim) throw ShapeError("mlp input must match pool_dim");
    }
};

struct GatHead {
    DenseMatrix w;               // d_in x d_out
    std::vector<double> a_src;   // d_out, attention toward the receiving node
    std::vector<double> a_dst;   // d_out, attention toward the neighbor
};

/// All learnable tensors. Gradients reuse this container with the same shapes.
struct GcGatParams {
    std::vector<std::vector<GatHead>> gat;  // [layer][head]
    DenseMatrix pool_w;                     // hidden x pool
    DenseMatrix mlp_w1;                     // pool x mlp_hidden
    std::vector<double> mlp_b1;
    DenseMatrix mlp_w2;                     // mlp_hidden x 2
    std::vector<double> mlp_b2;
};

struct ParamView {
    std::string name;
    std::vector<double>* data;
};

inline std::vector<ParamView> param_views(GcGatParams& p) {
    std::vector<ParamView> out;
    for (size_t l = 0; l < p.gat.size(); ++l) {
        for (size_t h = 0; h < p.gat[l].size(); ++h) {
            std::string base = "gat" + std::to_string(l) + ".head" + std::to_string(h);
            out.push_back({base + ".w", &p.gat[l][h].w.data});
            out.push_back({base + ".a_src", &p.gat[l][h].a_src});
            out.push_back({base + ".a_dst", &p.gat[l][h].a_dst});
        }
    }
    out.push_back({"pool.w", &p.pool_w.data});
    out.push_back({"mlp.w1", &p.mlp_w1.data});
    out.push_back({"mlp.b1", &p.mlp_b1});
    out.push_back({"mlp.w2", &p.mlp_w2.data});
    out.push_back({"mlp.b2", &p.mlp_b2});
    return out;
}

struct GcGatModel {
    GcGatConfig config;
    FunctionVocabulary vocab;
    GcGatParams params;
    int majority_class = 0;  // class index carrying weight_majority

    double class_weight(int label) const {
        return label == majority_class ? config.weight_majority : config.weight_minority;
    }
};

struct TrainHistory {
    std::vector<double> loss;      // mean per-sample training loss per epoch
    std::vector<double> train_f1;  // post-epoch F1 on the training set
    std::vector<double> val_f1;    // optional; empty when no validation set
};

// ---- deterministic RNG helpers (fixed across standard libraries) ----------

namespace detail {

inline double uniform01(std::mt19937& rng) {
    return double(rng()) * (1.0 / 4294967296.0);
}

template <typename T>
inline void seeded_shuffle(std::vector<T>& v, std::mt19937& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = rng() % i;
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace detail

// ---- activation primitives -------------------------------------------------

inline double elu(double x) { return x > 0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x > 0 ? 1.0 : std::exp(x); }
inline double leaky_relu(double x, double slope) { return x > 0 ? x : slope * x; }
inline double leaky_relu_grad(double x, double slope) { return x > 0 ? 1.0 : slope; }
inline double relu(double x) { return x > 0 ? x : 0.0; }

/// Numerically stable softmax (max subtraction).
inline std::vector<double> softmax(const std::vector<double>& z) {
    double m = *std::max_element(z.begin(), z.end());
    std::vector<double> out(z.size());
    double sum = 0.0;
    for (size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - m);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

/// Penalty-weighted cross entropy: -w(label) * log p(label).
inline double weighted_loss(const std::vector<double>& probs, int label, double w) {
    return -w * std::log(std::max(probs[size_t(label)], 1e-12));
}

// ---- graph preprocessing ----------------------------------------------------

namespace detail {

/// Self-loop-augmented symmetrized adjacency as neighbor lists.
inline std::vector<std::vector<int>> attention_neighborhoods(const DenseMatrix& a) {
    int n = a.rows;
    std::vector<std::vector<int>> nbrs(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            if (i == j || a.at(i, j) != 0.0 || a.at(j, i) != 0.0)
                nbrs[size_t(i)].push_back(j);
    }
    return nbrs;
}

/// Degree-normalized pooling adjacency: D^{-1/2} (sym(A)+I) D^{-1/2}.
inline DenseMatrix normalized_adjacency(const DenseMatrix& a) {
    int n = a.rows;
    DenseMatrix t(n, n);
    for (int i = 0; i < n; ++i) {
        t.at(i, i) = 1.0;
        for (int j = 0; j < n; ++j)
            if (a.at(i, j) != 0.0 || a.at(j, i) != 0.0) t.at(i, j) = 1.0;
    }
    std::vector<double> dinv(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double deg = 0.0;
        for (int j = 0; j < n; ++j) deg += t.at(i, j);
        dinv[size_t(i)] = 1.0 / std::sqrt(deg);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t.at(i, j) *= dinv[size_t(i)] * dinv[size_t(j)];
    return t;
}

struct GatHeadCache {
    DenseMatrix p;        // H_in W
    std::vector<double> u, v;
    DenseMatrix alpha;    // attention after softmax, before dropout
    DenseMatrix alpha_d;  // after attention dropout
    DenseMatrix s;        // alpha_d * P, pre-ELU
};

struct GatLayerCache {
    DenseMatrix h_in;       // layer input after input dropout
    DenseMatrix drop_mask;  // input dropout mask (already 1/(1-p) scaled)
    DenseMatrix attn_mask;  // attention dropout mask (scaled)
    bool dropped = false;
    std::vector<GatHeadCache> heads;
    DenseMatrix out;
};

struct ForwardCache {
    std::vector<std::vector<int>> nbrs;
    DenseMatrix a_hat;
    std::vector<GatLayerCache> layers;
    DenseMatrix pool_in;   // a_hat * H (last GAT output)
    DenseMatrix pool_pre;  // pool_in * W, pre-ReLU
    DenseMatrix z;         // ReLU(pool_pre)
    std::vector<double> g;
    std::vector<double> h1_pre, h1;
    std::vector<double> logits;
    std::vector<double> probs;
};

inline DenseMatrix dropout_mask(int rows, int cols, double p, std::mt19937& rng) {
    DenseMatrix m(rows, cols);
    double scale = 1.0 / (1.0 - p);
    for (double& v : m.data) v = uniform01(rng) < p ? 0.0 : scale;
    return m;
}

inline void gat_layer_forward(const std::vector<GatHead>& heads,
                              const DenseMatrix& h, const std::vector<std::vector<int>>& nbrs,
                              const GcGatConfig& cfg, bool concat, bool training,
                              std::mt19937* rng, GatLayerCache& cache) {
    int n = h.rows;
    int d_out = heads[0].w.cols;
    if (heads[0].w.rows != h.cols) throw ShapeError("gat_layer: input width mismatch");

    cache.dropped = training && cfg.dropout > 0.0;
    if (cache.dropped) {
        cache.drop_mask = dropout_mask(n, h.cols, cfg.dropout, *rng);
        cache.h_in = h;
        for (size_t i = 0; i < cache.h_in.data.size(); ++i)
            cache.h_in.data[i] *= cache.drop_mask.data[i];
        cache.attn_mask = dropout_mask(n, n, cfg.dropout, *rng);
    } else {
        cache.h_in = h;
    }

    cache.heads.assign(heads.size(), {});
    int out_cols = concat ? d_out * int(heads.size()) : d_out;
    cache.out = DenseMatrix(n, out_cols);

    for (size_t k = 0; k < heads.size(); ++k) {
        GatHeadCache& hc = cache.heads[k];
        hc.p = matmul(cache.h_in, heads[k].w);
        hc.u.assign(size_t(n), 0.0);
        hc.v.assign(size_t(n), 0.0);
        for (int i = 0; i < n; ++i) {
            const double* prow = hc.p.row(i);
            double su = 0.0, sv = 0.0;
            for (int c = 0; c < d_out; ++c) {
                su += prow[c] * heads[k].a_src[size_t(c)];
                sv += prow[c] * heads[k].a_dst[size_t(c)];
            }
            hc.u[size_t(i)] = su;
            hc.v[size_t(i)] = sv;
        }
        hc.alpha = DenseMatrix(n, n);
        for (int i = 0; i < n; ++i) {
            const auto& ns = nbrs[size_t(i)];
            double mx = -1e300;
            for (int j : ns)
                mx = std::max(mx, leaky_relu(hc.u[size_t(i)] + hc.v[size_t(j)], cfg.leaky_slope));
            double sum = 0.0;
            for (int j : ns) {
                double e = leaky_relu(hc.u[size_t(i)] + hc.v[size_t(j)], cfg.leaky_slope);
                double ex = std::exp(e - mx);
                hc.alpha.at(i, j) = ex;
                sum += ex;
            }
            for (int j : ns) hc.alpha.at(i, j) /= sum;
        }
        hc.alpha_d = hc.alpha;
        if (cache.dropped) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) hc.alpha_d.at(i, j) *= cache.attn_mask.at(i, j);
        }
        hc.s = matmul(hc.alpha_d, hc.p);
        for (int i = 0; i < n; ++i) {
            double* orow = cache.out.row(i);
            for (int c = 0; c < d_out; ++c) {
                double val = elu(hc.s.at(i, c));
                if (concat) orow[size_t(k) * d_out + c] = val;
                else orow[c] += val / double(heads.size());
            }
        }
    }
    if (!cache.out.all_finite()) throw NumericalError("gat_layer produced non-finite output");
}

inline void forward_cached(const GcGatParams& params, const GcGatConfig& cfg,
                           const DenseMatrix& x, const DenseMatrix& a, bool training,
                           std::mt19937* rng, ForwardCache& cache) {
    if (x.cols != cfg.input_dim) throw ShapeError("feature width must be " +
                                                  std::to_string(cfg.input_dim));
    if (a.rows != x.rows || a.cols != x.rows) throw ShapeError("adjacency shape mismatch");

    cache.nbrs = attention_neighborhoods(a);
    cache.a_hat = normalized_adjacency(a);

    cache.layers.assign(params.gat.size(), {});
    const DenseMatrix* h = &x;
    for (size_t l = 0; l < params.gat.size(); ++l) {
        bool concat = l + 1 < params.gat.size();
        gat_layer_forward(params.gat[l], *h, cache.nbrs, cfg, concat, training, rng,
                          cache.layers[l]);
        h = &cache.layers[l].out;
    }

    cache.pool_in = matmul(cache.a_hat, *h);
    cache.pool_pre = matmul(cache.pool_in, params.pool_w);
    cache.z = cache.pool_pre;
    for (double& v : cache.z.data) v = relu(v);

    int n = x.rows;
    cache.g.assign(size_t(cfg.pool_dim), 0.0);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < cfg.pool_dim; ++c) cache.g[size_t(c)] += cache.z.at(i, c);
    for (double& v : cache.g) v /= double(n);

    int h1_dim = params.mlp_w1.cols;
    cache.h1_pre.assign(size_t(h1_dim), 0.0);
    for (int c = 0; c < h1_dim; ++c) {
        double s = params.mlp_b1[size_t(c)];
        for (int r = 0; r < params.mlp_w1.rows; ++r)
            s += cache.g[size_t(r)] * params.mlp_w1.at(r, c);
        cache.h1_pre[size_t(c)] = s;
    }
    cache.h1 = cache.h1_pre;
    for (double& v : cache.h1) v = relu(v);

    cache.logits.assign(2, 0.0);
    for (int c = 0; c < 2; ++c) {
        double s = params.mlp_b2[size_t(c)];
        for (int r = 0; r < params.mlp_w2.rows; ++r)
            s += cache.h1[size_t(r)] * params.mlp_w2.at(r, c);
        cache.logits[size_t(c)] = s;
    }
    for (double v : cache.logits)
        if (!std::isfinite(v)) throw NumericalError("non-finite logits");
    cache.probs = softmax(cache.logits);
}

inline void gat_layer_backward(const std::vector<GatHead>& heads,
                               const GcGatConfig& cfg, bool concat,
                               const std::vector<std::vector<int>>& nbrs,
                               const GatLayerCache& cache, const DenseMatrix& d_out,
                               std::vector<GatHead>& grads, DenseMatrix& d_h) {
    int n = cache.h_in.rows;
    int d = heads[0].w.cols;
    DenseMatrix d_h_in(n, cache.h_in.cols);

    for (size_t k = 0; k < heads.size(); ++k) {
        const GatHeadCache& hc = cache.heads[k];

        // dS through the per-head ELU
        DenseMatrix d_s(n, d);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < d; ++c) {
                double go = concat ? d_out.at(i, int(k) * d + c)
                                   : d_out.at(i, c) / double(heads.size());
                d_s.at(i, c) = go * elu_grad(hc.s.at(i, c));
            }

        // S = alpha_d P
        DenseMatrix d_p = matmul(transpose(hc.alpha_d), d_s);
        // d alpha_d(i,j) = dS(i,:) . P(j,:), then attention dropout mask,
        // then masked-softmax backward per row.
        std::vector<double> d_u(size_t(n), 0.0), d_v(size_t(n), 0.0);
        for (int i = 0; i < n; ++i) {
            const auto& ns = nbrs[size_t(i)];
            std::vector<double> d_alpha(ns.size(), 0.0);
            double dot = 0.0;
            for (size_t jj = 0; jj < ns.size(); ++jj) {
                int j = ns[jj];
                double da = 0.0;
                for (int c = 0; c < d; ++c) da += d_s.at(i, c) * hc.p.at(j, c);
                if (cache.dropped) da *= cache.attn_mask.at(i, j);
                d_alpha[jj] = da;
                dot += hc.alpha.at(i, j) * da;
            }
            for (size_t jj = 0; jj < ns.size(); ++jj) {
                int j = ns[jj];
                double de = hc.alpha.at(i, j) * (d_alpha[jj] - dot);
                double dpre = de * leaky_relu_grad(hc.u[size_t(i)] + hc.v[size_t(j)],
                                                   cfg.leaky_slope);
                d_u[size_t(i)] += dpre;
                d_v[size_t(j)] += dpre;
            }
        }
        // u = P a_src, v = P a_dst
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < d; ++c) {
                d_p.at(i, c) += d_u[size_t(i)] * heads[k].a_src[size_t(c)] +
                                d_v[size_t(i)] * heads[k].a_dst[size_t(c)];
                grads[k].a_src[size_t(c)] += hc.p.at(i, c) * d_u[size_t(i)];
                grads[k].a_dst[size_t(c)] += hc.p.at(i, c) * d_v[size_t(i)];
            }
        // P = H_in W
        DenseMatrix dw = matmul(transpose(cache.h_in), d_p);
        for (size_t idx = 0; idx < dw.data.size(); ++idx) grads[k].w.data[idx] += dw.data[idx];
        DenseMatrix dh_part = matmul(d_p, transpose(heads[k].w));
        for (size_t idx = 0; idx < dh_part.data.size(); ++idx)
            d_h_in.data[idx] += dh_part.data[idx];
    }

    d_h = std::move(d_h_in);
    if (cache.dropped)
        for (size_t idx = 0; idx < d_h.data.size(); ++idx)
            d_h.data[idx] *= cache.drop_mask.data[idx];
}

/// Reverse pass; fills `grads` (same shapes as params) and returns the loss.
inline double backward_cached(const GcGatParams& params, const GcGatConfig& cfg,
                              const ForwardCache& cache, int label, double w,
                              GcGatParams& grads) {
    double loss = weighted_loss(cache.probs, label, w);
    int n = cache.z.rows;

    // softmax + weighted CE: dL/dlogits = w * (p - onehot)
    std::vector<double> d_logits(2);
    for (int c = 0; c < 2; ++c)
        d_logits[size_t(c)] = w * (cache.probs[size_t(c)] - (c == label ? 1.0 : 0.0));

    std::vector<double> d_h1(size_t(params.mlp_w2.rows), 0.0);
    for (int r = 0; r < params.mlp_w2.rows; ++r)
        for (int c = 0; c < 2; ++c) {
            grads.mlp_w2.at(r, c) += cache.h1[size_t(r)] * d_logits[size_t(c)];
            d_h1[size_t(r)] += params.mlp_w2.at(r, c) * d_logits[size_t(c)];
        }
    for (int c = 0; c < 2; ++c) grads.mlp_b2[size_t(c)] += d_logits[size_t(c)];

    std::vector<double> d_h1_pre(d_h1.size());
    for (size_t i = 0; i < d_h1.size(); ++i)
        d_h1_pre[i] = cache.h1_pre[i] > 0 ? d_h1[i] : 0.0;

    std::vector<double> d_g(size_t(params.mlp_w1.rows), 0.0);
    for (int r = 0; r < params.mlp_w1.rows; ++r)
        for (int c = 0; c < params.mlp_w1.cols; ++c) {
            grads.mlp_w1.at(r, c) += cache.g[size_t(r)] * d_h1_pre[size_t(c)];
            d_g[size_t(r)] += params.mlp_w1.at(r, c) * d_h1_pre[size_t(c)];
        }
    for (size_t c = 0; c < d_h1_pre.size(); ++c) grads.mlp_b1[c] += d_h1_pre[c];

    // mean readout and pooling GCN
    DenseMatrix d_pre(n, cfg.pool_dim);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < cfg.pool_dim; ++c)
            d_pre.at(i, c) =
                cache.pool_pre.at(i, c) > 0 ? d_g[size_t(c)] / double(n) : 0.0;

    DenseMatrix dw_pool = matmul(transpose(cache.pool_in), d_pre);
    for (size_t idx = 0; idx < dw_pool.data.size(); ++idx)
        grads.pool_w.data[idx] += dw_pool.data[idx];
    DenseMatrix d_pool_in = matmul(d_pre, transpose(params.pool_w));
    DenseMatrix d_h = matmul(transpose(cache.a_hat), d_pool_in);

    for (int l = int(params.gat.size()) - 1; l >= 0; --l) {
        bool concat = size_t(l) + 1 < params.gat.size();
        DenseMatrix d_h_next;
        gat_layer_backward(params.gat[size_t(l)], cfg, concat, cache.nbrs,
                           cache.layers[size_t(l)], d_h, grads.gat[size_t(l)], d_h_next);
        d_h = std::move(d_h_next);
    }

    for (auto view : param_views(grads))
        for (double v : *view.data)
            if (!std::isfinite(v)) throw NumericalError("non-finite gradient in " + view.name);
    return loss;
}

inline GcGatParams zero_like(const GcGatParams& p) {
    GcGatParams z = p;
    for (auto view : param_views(z)) std::fill(view.data->begin(), view.data->end(), 0.0);
    return z;
}

}  // namespace detail

// ---- public single-op entry points (eval mode) ------------------------------

/// One multi-head attention layer over the self-loop-augmented symmetrized
/// neighborhood of a binary adjacency.
inline DenseMatrix gat_layer(const DenseMatrix& h, const DenseMatrix& a,
                             const std::vector<GatHead>& heads, const GcGatConfig& cfg,
                             bool concat) {
    auto nbrs = detail::attention_neighborhoods(a);
    detail::GatLayerCache cache;
    detail::gat_layer_forward(heads, h, nbrs, cfg, concat, /*training=*/false, nullptr,
                              cache);
    return cache.out;
}

/// GCN dimensionality reduction plus mean readout:
/// g = mean_rows(ReLU(D^{-1/2}(sym(A)+I)D^{-1/2} H W)).
inline std::vector<double> gcn_pool(const DenseMatrix& h, const DenseMatrix& a,
                                    const DenseMatrix& w) {
    if (h.cols != w.rows) throw ShapeError("gcn_pool: H/W shape mismatch");
    DenseMatrix z = matmul(matmul(detail::normalized_adjacency(a), h), w);
    for (double& v : z.data) v = relu(v);
    std::vector<double> g(size_t(w.cols), 0.0);
    for (int i = 0; i < z.rows; ++i)
        for (int c = 0; c < z.cols; ++c) g[size_t(c)] += z.at(i, c);
    for (double& v : g) v /= double(z.rows);
    return g;
}

/// 32 -> 16 ReLU -> 2 affine; logits carry no activation.
inline std::vector<double> mlp_forward(const std::vector<double>& g,
                                       const GcGatParams& params) {
    if (int(g.size()) != params.mlp_w1.rows) throw ShapeError("mlp input dimension");
    std::vector<double> h(size_t(params.mlp_w1.cols));
    for (int c = 0; c < params.mlp_w1.cols; ++c) {
        double s = params.mlp_b1[size_t(c)];
        for (int r = 0; r < params.mlp_w1.rows; ++r) s += g[size_t(r)] * params.mlp_w1.at(r, c);
        h[size_t(c)] = relu(s);
    }
    std::vector<double> logits(2);
    for (int c = 0; c < 2; ++c) {
        double s = params.mlp_b2[size_t(c)];
        for (int r = 0; r < params.mlp_w2.rows; ++r) s += h[size_t(r)] * params.mlp_w2.at(r, c);
        logits[size_t(c)] = s;
    }
    return logits;
}

struct ForwardResult {
    std::vector<double> probs;
    std::vector<double> logits;
};

/// Full inference pipeline, dropout disabled.
inline ForwardResult forward(const GcGatModel& model, const DenseMatrix& x,
                             const DenseMatrix& a) {
    detail::ForwardCache cache;
    detail::forward_cached(model.params, model.config, x, a, /*training=*/false, nullptr,
                           cache);
    return {cache.probs, cache.logits};
}

/// Exact reverse-mode gradients of the weighted loss for one sample
/// (dropout disabled). Returns (loss, grads).
inline std::pair<double, GcGatParams> backward(const GcGatModel& model,
                                               const DenseMatrix& x, const DenseMatrix& a,
                                               int label) {
    detail::ForwardCache cache;
    detail::forward_cached(model.params, model.config, x, a, /*training=*/false, nullptr,
                           cache);
    GcGatParams grads = detail::zero_like(model.params);
    double loss = detail::backward_cached(model.params, model.config, cache, label,
                                          model.class_weight(label), grads);
    return {loss, std::move(grads)};
}

// ---- initialization, training, prediction -----------------------------------

/// Fan-in-scaled uniform init (limit 1/sqrt(fan_in)), seeded and
/// order-deterministic.
inline GcGatParams init_params(const GcGatConfig& cfg, std::mt19937& rng) {
    cfg.validate();
    auto uniform = [&rng](double limit) {
        return limit * (2.0 * detail::uniform01(rng) - 1.0);
    };
    auto init_matrix = [&](int r, int c) {
        DenseMatrix m(r, c);
        double limit = 1.0 / std::sqrt(double(r));
        for (double& v : m.data) v = uniform(limit);
        return m;
    };
    auto init_vector = [&](int len, int fan_in) {
        std::vector<double> v(static_cast<size_t>(len));
        double limit = 1.0 / std::sqrt(double(fan_in));
        for (double& x : v) x = uniform(limit);
        return v;
    };

    GcGatParams p;
    int head_dim = cfg.hidden_dim / cfg.heads;
    p.gat.resize(size_t(cfg.gat_layers));
    for (int l = 0; l < cfg.gat_layers; ++l) {
        bool last = l + 1 == cfg.gat_layers;
        int d_in = l == 0 ? cfg.input_dim : cfg.hidden_dim;
        int d_out = last ? cfg.hidden_dim : head_dim;
        for (int h = 0; h < cfg.heads; ++h) {
            GatHead head;
            head.w = init_matrix(d_in, d_out);
            head.a_src = init_vector(d_out, d_out);
            head.a_dst = init_vector(d_out, d_out);
            p.gat[size_t(l)].push_back(std::move(head));
        }
    }
    p.pool_w = init_matrix(cfg.hidden_dim, cfg.pool_dim);
    p.mlp_w1 = init_matrix(cfg.mlp_dims[0], cfg.mlp_dims[1]);
    p.mlp_b1 = init_vector(cfg.mlp_dims[1], cfg.mlp_dims[0]);
    p.mlp_w2 = init_matrix(cfg.mlp_dims[1], cfg.mlp_dims[2]);
    p.mlp_b2 = init_vector(cfg.mlp_dims[2], cfg.mlp_dims[1]);
    return p;
}

struct TrainSample {
    DenseMatrix x;
    DenseMatrix a;
    int label = 0;  // 0 good, 1 bad
};

namespace detail {

struct AdamState {
    std::vector<std::vector<double>> m, v;
    long t = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    void init(GcGatParams& params) {
        for (auto view : param_views(params)) {
            m.emplace_back(view.data->size(), 0.0);
            v.emplace_back(view.data->size(), 0.0);
        }
    }

    void step(GcGatParams& params, GcGatParams& grads, double lr) {
        ++t;
        auto pv = param_views(params);
        auto gv = param_views(grads);
        double bc1 = 1.0 - std::pow(beta1, double(t));
        double bc2 = 1.0 - std::pow(beta2, double(t));
        for (size_t k = 0; k < pv.size(); ++k) {
            auto& p = *pv[k].data;
            auto& g = *gv[k].data;
            for (size_t i = 0; i < p.size(); ++i) {
                m[k][i] = beta1 * m[k][i] + (1.0 - beta1) * g[i];
                v[k][i] = beta2 * v[k][i] + (1.0 - beta2) * g[i] * g[i];
                p[i] -= lr * (m[k][i] / bc1) / (std::sqrt(v[k][i] / bc2) + eps);
            }
        }
    }
};

inline double f1_on(const GcGatModel& model, const std::vector<TrainSample>& set) {
    int tp = 0, fp = 0, fn = 0;
    for (const auto& s : set) {
        auto r = forward(model, s.x, s.a);
        int pred = r.probs[1] >= 0.5 ? 1 : 0;
        if (pred == 1 && s.label == 1) ++tp;
        else if (pred == 1 && s.label == 0) ++fp;
        else if (pred == 0 && s.label == 1) ++fn;
    }
    double denom = 2.0 * tp + fp + fn;
    return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

}  // namespace detail

/// Adam training with per-graph updates in seeded shuffled order.
/// Deterministic given config.seed. The majority class (by training-set
/// count; ties favor class 0) receives weight_majority.
inline std::pair<GcGatModel, TrainHistory> train(
    const std::vector<TrainSample>& dataset, const GcGatConfig& cfg,
    FunctionVocabulary vocab, const std::vector<TrainSample>* validation = nullptr) {
    if (dataset.empty()) throw DataError("empty training set");
    int count0 = 0, count1 = 0;
    for (const auto& s : dataset) (s.label == 0 ? count0 : count1)++;
    if (count0 == 0 || count1 == 0)
        throw DataError("training set must contain both classes");

    std::mt19937 rng(cfg.seed);
    GcGatModel model;
    model.config = cfg;
    model.vocab = std::move(vocab);
    model.params = init_params(cfg, rng);
    model.majority_class = count1 > count0 ? 1 : 0;

    detail::AdamState adam;
    adam.init(model.params);

    TrainHistory history;
    std::vector<size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), size_t(0));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        detail::seeded_shuffle(order, rng);
        double loss_sum = 0.0;
        for (size_t idx : order) {
            const TrainSample& s = dataset[idx];
            detail::ForwardCache cache;
            detail::forward_cached(model.params, cfg, s.x, s.a, /*training=*/true, &rng,
                                   cache);
            GcGatParams grads = detail::zero_like(model.params);
            loss_sum += detail::backward_cached(model.params, cfg, cache, s.label,
                                                model.class_weight(s.label), grads);
            adam.step(model.params, grads, cfg.learning_rate);
        }
        history.loss.push_back(loss_sum / double(dataset.size()));
        history.train_f1.push_back(detail::f1_on(model, dataset));
        if (validation) history.val_f1.push_back(detail::f1_on(model, *validation));
    }
    return {std::move(model), std::move(history)};
}

struct Prediction {
    bool is_bad = false;
    double prob_bad = 0.0;
};

/// Vectorizes with the model's vocabulary and classifies; an exact 0.5/0.5
/// tie resolves to bad.
inline Prediction predict(const GcGatModel& model, const PropertyGraph& graph) {
    DenseMatrix x = build_feature_matrix(graph, model.vocab);
    DenseMatrix a = build_adjacency(graph);
    auto r = forward(model, x, a);
    return {r.probs[1] >= 0.5, r.probs[1]};
}

}  // namespace grapheye
