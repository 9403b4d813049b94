#ifndef SXAI_MLP_HPP
#define SXAI_MLP_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace sxai {

// Two-headed MLP: input -> ReLU hidden -> {softmax decision head, linear
// attribute heads}. Templated so the f32 production path and the f64 shadow
// path used by the gradient check share one implementation.
template <typename T>
struct Mlp {
    std::size_t in_dim = 0, hidden = 0, classes = 0, k = 0;
    std::vector<T> w1, b1;  // hidden x in, hidden
    std::vector<T> w2, b2;  // classes x hidden
    std::vector<T> w3, b3;  // k x hidden

    static Mlp sized(std::size_t in_dim, std::size_t hidden, std::size_t classes, std::size_t k) {
        Mlp m;
        m.in_dim = in_dim;
        m.hidden = hidden;
        m.classes = classes;
        m.k = k;
        m.w1.assign(hidden * in_dim, T(0));
        m.b1.assign(hidden, T(0));
        m.w2.assign(classes * hidden, T(0));
        m.b2.assign(classes, T(0));
        m.w3.assign(k * hidden, T(0));
        m.b3.assign(k, T(0));
        return m;
    }

    template <typename U>
    Mlp<U> cast() const {
        Mlp<U> m = Mlp<U>::sized(in_dim, hidden, classes, k);
        auto cp = [](const std::vector<T>& src, std::vector<U>& dst) {
            for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<U>(src[i]);
        };
        cp(w1, m.w1); cp(b1, m.b1);
        cp(w2, m.w2); cp(b2, m.b2);
        cp(w3, m.w3); cp(b3, m.b3);
        return m;
    }

    std::vector<T*> param_views() {
        return {w1.data(), b1.data(), w2.data(), b2.data(), w3.data(), b3.data()};
    }
    std::vector<std::size_t> param_sizes() const {
        return {w1.size(), b1.size(), w2.size(), b2.size(), w3.size(), b3.size()};
    }

    struct Activations {
        std::vector<T> hidden_pre;   // before ReLU
        std::vector<T> hidden_out;   // after ReLU and dropout scaling
        std::vector<T> probs;        // classes
        std::vector<T> attrs;        // k
    };

    // dropout_scale: per-unit factor, empty = no dropout (all ones)
    Activations forward(std::span<const T> x, std::span<const T> dropout_scale = {}) const {
        Activations a;
        a.hidden_pre.resize(hidden);
        a.hidden_out.resize(hidden);
        for (std::size_t h = 0; h < hidden; ++h) {
            T z = b1[h];
            for (std::size_t j = 0; j < in_dim; ++j) z += w1[h * in_dim + j] * x[j];
            a.hidden_pre[h] = z;
            T act = z > T(0) ? z : T(0);
            if (!dropout_scale.empty()) act *= dropout_scale[h];
            a.hidden_out[h] = act;
        }
        a.probs.resize(classes);
        T mx = -std::numeric_limits<T>::infinity();
        for (std::size_t c = 0; c < classes; ++c) {
            T z = b2[c];
            for (std::size_t h = 0; h < hidden; ++h) z += w2[c * hidden + h] * a.hidden_out[h];
            a.probs[c] = z;
            mx = std::max(mx, z);
        }
        T sum = T(0);
        for (T& p : a.probs) {
            p = std::exp(p - mx);
            sum += p;
        }
        for (T& p : a.probs) p /= sum;

        a.attrs.resize(k);
        for (std::size_t j = 0; j < k; ++j) {
            T z = b3[j];
            for (std::size_t h = 0; h < hidden; ++h) z += w3[j * hidden + h] * a.hidden_out[h];
            a.attrs[j] = z;
        }
        return a;
    }

    // Per-example loss: cross-entropy + attr_weight * mean_j squared error.
    T loss(const Activations& a, int label, std::span<const T> attr_targets,
           T attr_weight) const {
        T p = a.probs[static_cast<std::size_t>(label)];
        T l = -std::log(std::max(p, std::numeric_limits<T>::min()));
        T mse = T(0);
        for (std::size_t j = 0; j < k; ++j) {
            T d = a.attrs[j] - attr_targets[j];
            mse += d * d;
        }
        return l + attr_weight * mse / static_cast<T>(k);
    }

    // Accumulates dLoss/dParams for one example into `grads` (same layout as
    // the network); caller divides by the batch size.
    void backward(std::span<const T> x, const Activations& a, int label,
                  std::span<const T> attr_targets, T attr_weight,
                  std::span<const T> dropout_scale, Mlp<T>& grads) const {
        std::vector<T> dlogits(classes);
        for (std::size_t c = 0; c < classes; ++c)
            dlogits[c] = a.probs[c] - (static_cast<std::size_t>(label) == c ? T(1) : T(0));
        std::vector<T> dattrs(k);
        for (std::size_t j = 0; j < k; ++j)
            dattrs[j] = attr_weight * T(2) * (a.attrs[j] - attr_targets[j]) / static_cast<T>(k);

        std::vector<T> dh(hidden, T(0));
        for (std::size_t c = 0; c < classes; ++c) {
            for (std::size_t h = 0; h < hidden; ++h) {
                grads.w2[c * hidden + h] += dlogits[c] * a.hidden_out[h];
                dh[h] += w2[c * hidden + h] * dlogits[c];
            }
            grads.b2[c] += dlogits[c];
        }
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t h = 0; h < hidden; ++h) {
                grads.w3[j * hidden + h] += dattrs[j] * a.hidden_out[h];
                dh[h] += w3[j * hidden + h] * dattrs[j];
            }
            grads.b3[j] += dattrs[j];
        }
        for (std::size_t h = 0; h < hidden; ++h) {
            if (!dropout_scale.empty()) dh[h] *= dropout_scale[h];
            if (a.hidden_pre[h] <= T(0)) dh[h] = T(0);
            if (dh[h] == T(0)) continue;
            for (std::size_t j = 0; j < in_dim; ++j) grads.w1[h * in_dim + j] += dh[h] * x[j];
            grads.b1[h] += dh[h];
        }
    }
};

}  // namespace sxai

#endif
