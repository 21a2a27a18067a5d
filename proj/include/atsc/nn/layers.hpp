#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "atsc/tensor.hpp"

namespace atsc::nn {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// All backward methods accumulate into their gradient outputs; callers
// zero-fill the buffers once per backward pass.

struct LinearLayer {
    Tensor W; // {out, in}
    Tensor b; // {out}

    LinearLayer() = default;
    LinearLayer(std::size_t out, std::size_t in) : W({out, in}), b({out}) {}

    std::size_t in_dim() const { return W.shape()[1]; }
    std::size_t out_dim() const { return W.shape()[0]; }

    void forward(const double* x, double* y) const {
        const std::size_t out = out_dim(), in = in_dim();
        for (std::size_t o = 0; o < out; ++o) {
            double acc = b[o];
            const double* w = W.data() + o * in;
            for (std::size_t i = 0; i < in; ++i) acc += w[i] * x[i];
            y[o] = acc;
        }
    }

    void backward(const double* x, const double* dy, Tensor& dW, Tensor& db, double* dx) const {
        const std::size_t out = out_dim(), in = in_dim();
        for (std::size_t o = 0; o < out; ++o) {
            const double g = dy[o];
            db[o] += g;
            double* dw = dW.data() + o * in;
            const double* w = W.data() + o * in;
            for (std::size_t i = 0; i < in; ++i) {
                dw[i] += g * x[i];
                if (dx) dx[i] += g * w[i];
            }
        }
    }
};

// Single LSTM cell, gate order [input, forget, cell, output].
struct LstmLayer {
    std::size_t input = 0;
    std::size_t hidden = 0;
    Tensor W_ih; // {4H, in}
    Tensor W_hh; // {4H, H}
    Tensor b;    // {4H}

    LstmLayer() = default;
    LstmLayer(std::size_t in, std::size_t hid)
        : input(in), hidden(hid), W_ih({4 * hid, in}), W_hh({4 * hid, hid}), b({4 * hid}) {}

    struct Cache {
        std::vector<double> x, h_prev, c_prev;
        std::vector<double> i, f, g, o, c, tanh_c;
    };

    void forward(const double* x, const double* h_prev, const double* c_prev, double* h_out,
                 double* c_out, Cache* cache) const {
        const std::size_t H = hidden;
        std::vector<double> z(4 * H);
        for (std::size_t r = 0; r < 4 * H; ++r) {
            double acc = b[r];
            const double* wi = W_ih.data() + r * input;
            for (std::size_t k = 0; k < input; ++k) acc += wi[k] * x[k];
            const double* wh = W_hh.data() + r * H;
            for (std::size_t k = 0; k < H; ++k) acc += wh[k] * h_prev[k];
            z[r] = acc;
        }
        if (cache) {
            cache->x.assign(x, x + input);
            cache->h_prev.assign(h_prev, h_prev + H);
            cache->c_prev.assign(c_prev, c_prev + H);
            cache->i.resize(H);
            cache->f.resize(H);
            cache->g.resize(H);
            cache->o.resize(H);
            cache->c.resize(H);
            cache->tanh_c.resize(H);
        }
        for (std::size_t k = 0; k < H; ++k) {
            const double ig = sigmoid(z[k]);
            const double fg = sigmoid(z[H + k]);
            const double gg = std::tanh(z[2 * H + k]);
            const double og = sigmoid(z[3 * H + k]);
            const double c = fg * c_prev[k] + ig * gg;
            const double tc = std::tanh(c);
            c_out[k] = c;
            h_out[k] = og * tc;
            if (cache) {
                cache->i[k] = ig;
                cache->f[k] = fg;
                cache->g[k] = gg;
                cache->o[k] = og;
                cache->c[k] = c;
                cache->tanh_c[k] = tc;
            }
        }
    }

    // dh/dc_in: gradients w.r.t. this step's h and c outputs.
    void backward(const Cache& cc, const double* dh, const double* dc_in, Tensor& dW_ih,
                  Tensor& dW_hh, Tensor& db, double* dx, double* dh_prev, double* dc_prev) const {
        const std::size_t H = hidden;
        std::vector<double> dz(4 * H);
        for (std::size_t k = 0; k < H; ++k) {
            const double dc = dc_in[k] + dh[k] * cc.o[k] * (1.0 - cc.tanh_c[k] * cc.tanh_c[k]);
            const double d_o = dh[k] * cc.tanh_c[k];
            const double d_i = dc * cc.g[k];
            const double d_f = dc * cc.c_prev[k];
            const double d_g = dc * cc.i[k];
            dz[k] = d_i * cc.i[k] * (1.0 - cc.i[k]);
            dz[H + k] = d_f * cc.f[k] * (1.0 - cc.f[k]);
            dz[2 * H + k] = d_g * (1.0 - cc.g[k] * cc.g[k]);
            dz[3 * H + k] = d_o * cc.o[k] * (1.0 - cc.o[k]);
            if (dc_prev) dc_prev[k] += dc * cc.f[k];
        }
        for (std::size_t r = 0; r < 4 * H; ++r) {
            const double g = dz[r];
            db[r] += g;
            double* dwi = dW_ih.data() + r * input;
            const double* wi = W_ih.data() + r * input;
            for (std::size_t k = 0; k < input; ++k) {
                dwi[k] += g * cc.x[k];
                if (dx) dx[k] += g * wi[k];
            }
            double* dwh = dW_hh.data() + r * H;
            const double* wh = W_hh.data() + r * H;
            for (std::size_t k = 0; k < H; ++k) {
                dwh[k] += g * cc.h_prev[k];
                if (dh_prev) dh_prev[k] += g * wh[k];
            }
        }
    }
};

// --- 2-d same-padding cross-correlation on (channels, rows, cols) buffers ---

inline void conv2d(const Tensor& K, const double* in, std::size_t in_ch, double* out,
                   std::size_t out_ch, std::size_t R, std::size_t C, bool accumulate) {
    const std::size_t k = K.shape()[2];
    const int pad = static_cast<int>(k) / 2;
    if (!accumulate)
        for (std::size_t n = 0; n < out_ch * R * C; ++n) out[n] = 0.0;
    for (std::size_t oc = 0; oc < out_ch; ++oc)
        for (std::size_t ic = 0; ic < in_ch; ++ic) {
            const double* kern = K.data() + (oc * in_ch + ic) * k * k;
            const double* src = in + ic * R * C;
            double* dst = out + oc * R * C;
            for (std::size_t y = 0; y < R; ++y)
                for (std::size_t x = 0; x < C; ++x) {
                    double acc = 0.0;
                    for (std::size_t dy = 0; dy < k; ++dy) {
                        const int sy = static_cast<int>(y + dy) - pad;
                        if (sy < 0 || sy >= static_cast<int>(R)) continue;
                        for (std::size_t dx = 0; dx < k; ++dx) {
                            const int sx = static_cast<int>(x + dx) - pad;
                            if (sx < 0 || sx >= static_cast<int>(C)) continue;
                            acc += kern[dy * k + dx] * src[sy * C + sx];
                        }
                    }
                    dst[y * C + x] += acc;
                }
        }
}

inline void conv2d_grad_kernel(Tensor& dK, const double* in, std::size_t in_ch, const double* dout,
                               std::size_t out_ch, std::size_t R, std::size_t C) {
    const std::size_t k = dK.shape()[2];
    const int pad = static_cast<int>(k) / 2;
    for (std::size_t oc = 0; oc < out_ch; ++oc)
        for (std::size_t ic = 0; ic < in_ch; ++ic) {
            double* dkern = dK.data() + (oc * in_ch + ic) * k * k;
            const double* src = in + ic * R * C;
            const double* g = dout + oc * R * C;
            for (std::size_t dy = 0; dy < k; ++dy)
                for (std::size_t dx = 0; dx < k; ++dx) {
                    double acc = 0.0;
                    for (std::size_t y = 0; y < R; ++y) {
                        const int sy = static_cast<int>(y + dy) - pad;
                        if (sy < 0 || sy >= static_cast<int>(R)) continue;
                        for (std::size_t x = 0; x < C; ++x) {
                            const int sx = static_cast<int>(x + dx) - pad;
                            if (sx < 0 || sx >= static_cast<int>(C)) continue;
                            acc += g[y * C + x] * src[sy * C + sx];
                        }
                    }
                    dkern[dy * k + dx] += acc;
                }
        }
}

inline void conv2d_grad_input(const Tensor& K, const double* dout, std::size_t out_ch, double* din,
                              std::size_t in_ch, std::size_t R, std::size_t C) {
    const std::size_t k = K.shape()[2];
    const int pad = static_cast<int>(k) / 2;
    for (std::size_t oc = 0; oc < out_ch; ++oc)
        for (std::size_t ic = 0; ic < in_ch; ++ic) {
            const double* kern = K.data() + (oc * in_ch + ic) * k * k;
            const double* g = dout + oc * R * C;
            double* dst = din + ic * R * C;
            for (std::size_t y = 0; y < R; ++y)
                for (std::size_t x = 0; x < C; ++x) {
                    const double gv = g[y * C + x];
                    if (gv == 0.0) continue;
                    for (std::size_t dy = 0; dy < k; ++dy) {
                        const int sy = static_cast<int>(y + dy) - pad;
                        if (sy < 0 || sy >= static_cast<int>(R)) continue;
                        for (std::size_t dx = 0; dx < k; ++dx) {
                            const int sx = static_cast<int>(x + dx) - pad;
                            if (sx < 0 || sx >= static_cast<int>(C)) continue;
                            dst[sy * C + sx] += gv * kern[dy * k + dx];
                        }
                    }
                }
        }
}

// Convolutional LSTM cell over a fixed grid; gates share the LSTM equations
// applied per pixel, with convolutions in place of the dense maps.
struct ConvLstmLayer {
    std::size_t in_ch = 0, hid_ch = 0, rows = 0, cols = 0, kernel = 3;
    Tensor W_ih; // {4C, in_ch, k, k}
    Tensor W_hh; // {4C, C, k, k}
    Tensor b;    // {4C}, broadcast over the grid

    ConvLstmLayer() = default;
    ConvLstmLayer(std::size_t ic, std::size_t hc, std::size_t r, std::size_t c, std::size_t k)
        : in_ch(ic), hid_ch(hc), rows(r), cols(c), kernel(k),
          W_ih({4 * hc, ic, k, k}), W_hh({4 * hc, hc, k, k}), b({4 * hc}) {}

    std::size_t grid() const { return rows * cols; }
    std::size_t state_size() const { return hid_ch * grid(); }

    struct Cache {
        std::vector<double> x, h_prev, c_prev;
        std::vector<double> i, f, g, o, c, tanh_c; // each hid_ch * grid
    };

    void forward(const double* x, const double* h_prev, const double* c_prev, double* h_out,
                 double* c_out, Cache* cache) const {
        const std::size_t G = grid(), S = state_size();
        std::vector<double> z(4 * S);
        conv2d(W_ih, x, in_ch, z.data(), 4 * hid_ch, rows, cols, false);
        conv2d(W_hh, h_prev, hid_ch, z.data(), 4 * hid_ch, rows, cols, true);
        for (std::size_t ch = 0; ch < 4 * hid_ch; ++ch)
            for (std::size_t p = 0; p < G; ++p) z[ch * G + p] += b[ch];
        if (cache) {
            cache->x.assign(x, x + in_ch * G);
            cache->h_prev.assign(h_prev, h_prev + S);
            cache->c_prev.assign(c_prev, c_prev + S);
            cache->i.resize(S);
            cache->f.resize(S);
            cache->g.resize(S);
            cache->o.resize(S);
            cache->c.resize(S);
            cache->tanh_c.resize(S);
        }
        for (std::size_t n = 0; n < S; ++n) {
            const double ig = sigmoid(z[n]);
            const double fg = sigmoid(z[S + n]);
            const double gg = std::tanh(z[2 * S + n]);
            const double og = sigmoid(z[3 * S + n]);
            const double c = fg * c_prev[n] + ig * gg;
            const double tc = std::tanh(c);
            c_out[n] = c;
            h_out[n] = og * tc;
            if (cache) {
                cache->i[n] = ig;
                cache->f[n] = fg;
                cache->g[n] = gg;
                cache->o[n] = og;
                cache->c[n] = c;
                cache->tanh_c[n] = tc;
            }
        }
    }

    void backward(const Cache& cc, const double* dh, const double* dc_in, Tensor& dW_ih,
                  Tensor& dW_hh, Tensor& db, double* dx, double* dh_prev, double* dc_prev) const {
        const std::size_t G = grid(), S = state_size();
        std::vector<double> dz(4 * S);
        for (std::size_t n = 0; n < S; ++n) {
            const double dc = dc_in[n] + dh[n] * cc.o[n] * (1.0 - cc.tanh_c[n] * cc.tanh_c[n]);
            const double d_o = dh[n] * cc.tanh_c[n];
            const double d_i = dc * cc.g[n];
            const double d_f = dc * cc.c_prev[n];
            const double d_g = dc * cc.i[n];
            dz[n] = d_i * cc.i[n] * (1.0 - cc.i[n]);
            dz[S + n] = d_f * cc.f[n] * (1.0 - cc.f[n]);
            dz[2 * S + n] = d_g * (1.0 - cc.g[n] * cc.g[n]);
            dz[3 * S + n] = d_o * cc.o[n] * (1.0 - cc.o[n]);
            if (dc_prev) dc_prev[n] += dc * cc.f[n];
        }
        for (std::size_t ch = 0; ch < 4 * hid_ch; ++ch) {
            double acc = 0.0;
            for (std::size_t p = 0; p < G; ++p) acc += dz[ch * G + p];
            db[ch] += acc;
        }
        conv2d_grad_kernel(dW_ih, cc.x.data(), in_ch, dz.data(), 4 * hid_ch, rows, cols);
        conv2d_grad_kernel(dW_hh, cc.h_prev.data(), hid_ch, dz.data(), 4 * hid_ch, rows, cols);
        if (dh_prev) conv2d_grad_input(W_hh, dz.data(), 4 * hid_ch, dh_prev, hid_ch, rows, cols);
        if (dx) conv2d_grad_input(W_ih, dz.data(), 4 * hid_ch, dx, in_ch, rows, cols);
    }
};

} // namespace atsc::nn
