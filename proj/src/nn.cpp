#include "bearing/nn.hpp"

#include <algorithm>
#include <cmath>

#include "bearing/error.hpp"

namespace bearing::nn {

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].a.size() + biases[l].size();
    return n;
}

Mlp make_mlp(const std::vector<std::size_t>& sizes, const std::vector<bool>& relu_after, Rng& rng) {
    if (sizes.size() < 2 || relu_after.size() != sizes.size() - 1)
        throw Error(Errc::invalid_argument, "mlp shape lists inconsistent");
    Mlp net;
    net.sizes = sizes;
    net.relu_after = relu_after;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        Matrix w(sizes[l + 1], sizes[l]);
        const double limit = std::sqrt(6.0 / static_cast<double>(sizes[l] + sizes[l + 1]));
        for (double& v : w.a) v = rng.uniform(-limit, limit);
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(sizes[l + 1], 0.0);
    }
    return net;
}

void Grads::match(const Mlp& net) {
    weights.clear();
    biases.clear();
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        weights.emplace_back(net.weights[l].rows, net.weights[l].cols);
        biases.emplace_back(net.biases[l].size(), 0.0);
    }
}

void Grads::zero() {
    for (auto& w : weights) std::fill(w.a.begin(), w.a.end(), 0.0);
    for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

void Grads::scale(double s) {
    for (auto& w : weights)
        for (double& v : w.a) v *= s;
    for (auto& b : biases)
        for (double& v : b) v *= s;
}

const std::vector<double>& forward(const Mlp& net, std::span<const double> input, Workspace& ws) {
    if (input.size() != net.input_size())
        throw Error(Errc::shape_mismatch, "mlp input size " + std::to_string(input.size()) +
                                              ", expected " + std::to_string(net.input_size()));
    const std::size_t nl = net.layer_count();
    ws.pre.resize(nl);
    ws.post.resize(nl + 1);
    ws.post[0].assign(input.begin(), input.end());

    for (std::size_t l = 0; l < nl; ++l) {
        const Matrix& w = net.weights[l];
        const std::vector<double>& x = ws.post[l];
        std::vector<double>& z = ws.pre[l];
        z.assign(w.rows, 0.0);
        for (std::size_t o = 0; o < w.rows; ++o) {
            const double* wr = w.row(o);
            double acc = net.biases[l][o];
            for (std::size_t i = 0; i < w.cols; ++i) acc += wr[i] * x[i];
            z[o] = acc;
        }
        ws.post[l + 1] = z;
        if (net.relu_after[l])
            for (double& v : ws.post[l + 1]) v = v > 0.0 ? v : 0.0;
    }
    return ws.post[nl];
}

std::vector<double> backward(const Mlp& net, const Workspace& ws,
                             std::span<const double> dloss_doutput, Grads& grads) {
    const std::size_t nl = net.layer_count();
    std::vector<double> delta(dloss_doutput.begin(), dloss_doutput.end());

    for (std::size_t li = nl; li-- > 0;) {
        const Matrix& w = net.weights[li];
        if (net.relu_after[li])
            for (std::size_t o = 0; o < delta.size(); ++o)
                if (ws.pre[li][o] <= 0.0) delta[o] = 0.0;

        const std::vector<double>& x = ws.post[li];
        Matrix& gw = grads.weights[li];
        for (std::size_t o = 0; o < w.rows; ++o) {
            const double d = delta[o];
            grads.biases[li][o] += d;
            double* gr = gw.row(o);
            for (std::size_t i = 0; i < w.cols; ++i) gr[i] += d * x[i];
        }

        std::vector<double> prev(w.cols, 0.0);
        for (std::size_t o = 0; o < w.rows; ++o) {
            const double d = delta[o];
            const double* wr = w.row(o);
            for (std::size_t i = 0; i < w.cols; ++i) prev[i] += d * wr[i];
        }
        delta = std::move(prev);
    }
    return delta;
}

void Adam::attach(const Mlp& net) {
    mw_.clear();
    vw_.clear();
    mb_.clear();
    vb_.clear();
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        mw_.emplace_back(net.weights[l].rows, net.weights[l].cols);
        vw_.emplace_back(net.weights[l].rows, net.weights[l].cols);
        mb_.emplace_back(net.biases[l].size(), 0.0);
        vb_.emplace_back(net.biases[l].size(), 0.0);
    }
    t_ = 0;
}

void Adam::step(Mlp& net, const Grads& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        double* w = net.weights[l].a.data();
        const double* g = grads.weights[l].a.data();
        double* m = mw_[l].a.data();
        double* v = vw_[l].a.data();
        const std::size_t nw = net.weights[l].a.size();
        for (std::size_t i = 0; i < nw; ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            w[i] -= learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + epsilon);
        }
        double* b = net.biases[l].data();
        const double* gb = grads.biases[l].data();
        double* mb = mb_[l].data();
        double* vb = vb_[l].data();
        for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
            mb[i] = beta1 * mb[i] + (1.0 - beta1) * gb[i];
            vb[i] = beta2 * vb[i] + (1.0 - beta2) * gb[i] * gb[i];
            b[i] -= learning_rate * (mb[i] / bc1) / (std::sqrt(vb[i] / bc2) + epsilon);
        }
    }
}

void softmax(std::vector<double>& logits) {
    double max = logits[0];
    for (double v : logits) max = std::max(max, v);
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - max);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

} // namespace bearing::nn
