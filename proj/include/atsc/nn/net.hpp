#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "atsc/errors.hpp"
#include "atsc/nn/layers.hpp"
#include "atsc/rng.hpp"
#include "atsc/tensor.hpp"

namespace atsc::nn {

inline constexpr int kActionHeads = 4;
inline constexpr int kActionChoices = 9;
inline constexpr int kObsRows = 4;
inline constexpr int kObsCols = 8;
inline constexpr int kLogitCount = kActionHeads * kActionChoices;

enum class NetVariant : std::uint8_t { kSingle = 0, kMulti = 1 };

struct NetConfig {
    NetVariant variant = NetVariant::kSingle;
    std::size_t hidden = 64;   // LSTM width (single variant)
    std::size_t channels = 16; // hidden channels (multi variant)
    std::size_t kernel = 3;
    bool shared_trunk = true;  // false: separate actor and critic trunks
};

// Hidden and cell buffers, one pair per trunk.
struct RecurrentState {
    std::vector<std::vector<double>> h, c;
};

namespace detail {

inline void orthogonalize_rows(double* m, std::size_t rows, std::size_t cols, Rng& rng) {
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m[r * cols + c] = rng.normal();
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = m + r * cols;
        for (std::size_t p = 0; p < r; ++p) {
            const double* prev = m + p * cols;
            double dot = 0.0;
            for (std::size_t c = 0; c < cols; ++c) dot += row[c] * prev[c];
            for (std::size_t c = 0; c < cols; ++c) row[c] -= dot * prev[c];
        }
        double norm = 0.0;
        for (std::size_t c = 0; c < cols; ++c) norm += row[c] * row[c];
        norm = std::sqrt(norm);
        if (norm < 1e-10) {
            row[r % cols] = 1.0;
            norm = 1.0;
        }
        for (std::size_t c = 0; c < cols; ++c) row[c] /= norm;
    }
}

inline void uniform_fan_in(Tensor& W, std::size_t fan_in, Rng& rng) {
    const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : W.vec()) v = rng.uniform(-a, a);
}

} // namespace detail

// Policy/value network. The single variant runs the 8-vector observation
// through a tanh linear layer into an LSTM; the multi variant runs the 4x8
// observation matrix through a Conv-LSTM. Both end in four independent
// 9-way policy heads and a scalar value head, either off one shared trunk
// or off separate actor/critic trunks.
class PolicyValueNet {
public:
    struct Output {
        Tensor logits; // {4, 9}
        double value = 0.0;
    };

    struct StepTrace {
        std::vector<double> obs; // raw observation (single variant input layer)
        // one entry per trunk
        std::vector<LstmLayer::Cache> lstm;   // its x is the tanh-activated input
        std::vector<ConvLstmLayer::Cache> clstm;
        std::vector<std::vector<double>> feat; // trunk features fed to heads
    };

    PolicyValueNet() = default;

    explicit PolicyValueNet(const NetConfig& cfg) : cfg_(cfg) {
        const std::size_t trunks = cfg_.shared_trunk ? 1 : 2;
        if (cfg_.variant == NetVariant::kSingle) {
            if (cfg_.hidden == 0) throw ConfigError("nn: hidden size must be > 0");
            for (std::size_t t = 0; t < trunks; ++t) {
                lin_.emplace_back(cfg_.hidden, kObsCols);
                lstm_.emplace_back(cfg_.hidden, cfg_.hidden);
            }
        } else {
            if (cfg_.channels == 0) throw ConfigError("nn: channel count must be > 0");
            if (cfg_.kernel % 2 == 0) throw ConfigError("nn: kernel size must be odd");
            for (std::size_t t = 0; t < trunks; ++t)
                clstm_.emplace_back(1, cfg_.channels, kObsRows, kObsCols, cfg_.kernel);
        }
        policy_ = LinearLayer(kLogitCount, feature_dim());
        value_ = LinearLayer(1, feature_dim());
    }

    const NetConfig& config() const { return cfg_; }

    std::size_t feature_dim() const {
        return cfg_.variant == NetVariant::kSingle ? cfg_.hidden
                                                   : cfg_.channels * kObsRows * kObsCols;
    }

    std::size_t trunk_count() const { return cfg_.shared_trunk ? 1 : 2; }

    std::size_t state_size() const {
        return cfg_.variant == NetVariant::kSingle ? cfg_.hidden
                                                   : cfg_.channels * kObsRows * kObsCols;
    }

    RecurrentState initial_state() const {
        RecurrentState s;
        s.h.assign(trunk_count(), std::vector<double>(state_size(), 0.0));
        s.c.assign(trunk_count(), std::vector<double>(state_size(), 0.0));
        return s;
    }

    void init_random(Rng& rng) {
        for (std::size_t t = 0; t < trunk_count(); ++t) {
            if (cfg_.variant == NetVariant::kSingle) {
                detail::uniform_fan_in(lin_[t].W, lin_[t].in_dim(), rng);
                lin_[t].b.fill(0.0);
                detail::uniform_fan_in(lstm_[t].W_ih, lstm_[t].input, rng);
                const std::size_t H = lstm_[t].hidden;
                for (int gate = 0; gate < 4; ++gate)
                    detail::orthogonalize_rows(lstm_[t].W_hh.data() + gate * H * H, H, H, rng);
                lstm_[t].b.fill(0.0);
                for (std::size_t k = 0; k < H; ++k) lstm_[t].b[H + k] = 1.0; // forget bias
            } else {
                auto& cl = clstm_[t];
                detail::uniform_fan_in(cl.W_ih, cl.in_ch * cl.kernel * cl.kernel, rng);
                const std::size_t C = cl.hid_ch, cols = C * cl.kernel * cl.kernel;
                for (int gate = 0; gate < 4; ++gate)
                    detail::orthogonalize_rows(cl.W_hh.data() + gate * C * cols, C, cols, rng);
                cl.b.fill(0.0);
                for (std::size_t k = 0; k < C; ++k) cl.b[C + k] = 1.0;
            }
        }
        detail::uniform_fan_in(policy_.W, feature_dim(), rng);
        policy_.b.fill(0.0);
        detail::uniform_fan_in(value_.W, feature_dim(), rng);
        value_.b.fill(0.0);
    }

    // Canonical parameter order: trunk(s) in actor-then-critic order, then
    // the policy head, then the value head. Checkpoints, the shared store
    // and gradient sets all use this order.
    std::vector<Tensor*> params() {
        std::vector<Tensor*> out;
        for (std::size_t t = 0; t < trunk_count(); ++t) {
            if (cfg_.variant == NetVariant::kSingle) {
                out.push_back(&lin_[t].W);
                out.push_back(&lin_[t].b);
                out.push_back(&lstm_[t].W_ih);
                out.push_back(&lstm_[t].W_hh);
                out.push_back(&lstm_[t].b);
            } else {
                out.push_back(&clstm_[t].W_ih);
                out.push_back(&clstm_[t].W_hh);
                out.push_back(&clstm_[t].b);
            }
        }
        out.push_back(&policy_.W);
        out.push_back(&policy_.b);
        out.push_back(&value_.W);
        out.push_back(&value_.b);
        return out;
    }

    std::vector<const Tensor*> params() const {
        auto mut = const_cast<PolicyValueNet*>(this)->params();
        return {mut.begin(), mut.end()};
    }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (const Tensor* t : params()) n += t->size();
        return n;
    }

    TensorSet zero_grads() const {
        TensorSet g;
        for (const Tensor* t : params()) g.push_back(Tensor(t->shape()));
        return g;
    }

    void set_params(const TensorSet& src) {
        auto dst = params();
        if (src.size() != dst.size())
            throw ShapeError("net: parameter set has " + std::to_string(src.size()) +
                             " tensors, expected " + std::to_string(dst.size()));
        for (std::size_t i = 0; i < dst.size(); ++i) {
            if (!src[i].same_shape(*dst[i]))
                throw ShapeError("net: parameter " + std::to_string(i) + " shape " +
                                 Tensor::shape_string(src[i].shape()) + " != expected " +
                                 Tensor::shape_string(dst[i]->shape()));
            *dst[i] = src[i];
        }
    }

    TensorSet clone_params() const {
        TensorSet out;
        for (const Tensor* t : params()) out.push_back(*t);
        return out;
    }

    Output forward(const Tensor& obs, RecurrentState& state) const {
        return run(obs, state, nullptr);
    }

    Output forward_traced(const Tensor& obs, RecurrentState& state, StepTrace& trace) const {
        return run(obs, state, &trace);
    }

    // Backpropagation through time over a recorded sequence. dlogits[t] holds
    // the loss gradient at the 36 policy logits for step t, dvalue[t] the
    // gradient at the value output. Gradients accumulate into `grads`
    // (canonical order, zero-initialized by the caller).
    void backward_sequence(const std::vector<StepTrace>& traces,
                           const std::vector<std::array<double, kLogitCount>>& dlogits,
                           const std::vector<double>& dvalue, TensorSet& grads) const {
        if (traces.size() != dlogits.size() || traces.size() != dvalue.size())
            throw ArgumentError("backward_sequence: length mismatch");
        const std::size_t T = traces.size();
        const std::size_t nt = trunk_count();
        const std::size_t S = state_size();
        GradSlots slots = map_grads(grads);

        std::vector<std::vector<double>> dh(nt, std::vector<double>(S, 0.0));
        std::vector<std::vector<double>> dc(nt, std::vector<double>(S, 0.0));
        std::vector<double> dfeat(feature_dim());
        std::vector<double> dh_prev(S), dc_prev(S), dx(feature_dim());

        for (std::size_t ti = T; ti-- > 0;) {
            const StepTrace& tr = traces[ti];
            // policy head -> actor trunk (trunk 0)
            std::fill(dfeat.begin(), dfeat.end(), 0.0);
            policy_.backward(tr.feat[0].data(), dlogits[ti].data(), *slots.policy_W,
                             *slots.policy_b, dfeat.data());
            for (std::size_t k = 0; k < S; ++k) dh[0][k] += dfeat[k];
            // value head -> critic trunk (last trunk)
            const std::size_t vt = nt - 1;
            std::fill(dfeat.begin(), dfeat.end(), 0.0);
            value_.backward(tr.feat[vt].data(), &dvalue[ti], *slots.value_W, *slots.value_b,
                            dfeat.data());
            for (std::size_t k = 0; k < S; ++k) dh[vt][k] += dfeat[k];

            for (std::size_t t = 0; t < nt; ++t) {
                std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
                std::fill(dc_prev.begin(), dc_prev.end(), 0.0);
                if (cfg_.variant == NetVariant::kSingle) {
                    std::fill(dx.begin(), dx.end(), 0.0);
                    lstm_[t].backward(tr.lstm[t], dh[t].data(), dc[t].data(), *slots.lstm_Wih[t],
                                      *slots.lstm_Whh[t], *slots.lstm_b[t], dx.data(),
                                      dh_prev.data(), dc_prev.data());
                    // through the tanh nonlinearity into the input layer; the
                    // LSTM cache's x holds the tanh activations
                    const auto& act = tr.lstm[t].x;
                    for (std::size_t k = 0; k < act.size(); ++k)
                        dx[k] *= (1.0 - act[k] * act[k]);
                    lin_[t].backward(tr.obs.data(), dx.data(), *slots.lin_W[t],
                                     *slots.lin_b[t], nullptr);
                } else {
                    clstm_[t].backward(tr.clstm[t], dh[t].data(), dc[t].data(), *slots.clstm_Wih[t],
                                       *slots.clstm_Whh[t], *slots.clstm_b[t], nullptr,
                                       dh_prev.data(), dc_prev.data());
                }
                dh[t] = dh_prev;
                dc[t] = dc_prev;
            }
        }
    }

private:
    struct GradSlots {
        std::vector<Tensor*> lin_W, lin_b, lstm_Wih, lstm_Whh, lstm_b;
        std::vector<Tensor*> clstm_Wih, clstm_Whh, clstm_b;
        Tensor *policy_W = nullptr, *policy_b = nullptr, *value_W = nullptr, *value_b = nullptr;
    };

    GradSlots map_grads(TensorSet& grads) const {
        if (grads.size() != params().size())
            throw ArgumentError("gradient set size mismatch");
        GradSlots s;
        std::size_t i = 0;
        for (std::size_t t = 0; t < trunk_count(); ++t) {
            if (cfg_.variant == NetVariant::kSingle) {
                s.lin_W.push_back(&grads[i++]);
                s.lin_b.push_back(&grads[i++]);
                s.lstm_Wih.push_back(&grads[i++]);
                s.lstm_Whh.push_back(&grads[i++]);
                s.lstm_b.push_back(&grads[i++]);
            } else {
                s.clstm_Wih.push_back(&grads[i++]);
                s.clstm_Whh.push_back(&grads[i++]);
                s.clstm_b.push_back(&grads[i++]);
            }
        }
        s.policy_W = &grads[i++];
        s.policy_b = &grads[i++];
        s.value_W = &grads[i++];
        s.value_b = &grads[i++];
        return s;
    }

    void check_obs(const Tensor& obs) const {
        if (cfg_.variant == NetVariant::kSingle) {
            if (obs.shape() != std::vector<std::size_t>{8})
                throw ShapeError("input layer (single variant): expected shape (8), got " +
                                 Tensor::shape_string(obs.shape()));
        } else {
            if (obs.shape() != std::vector<std::size_t>{kObsRows, kObsCols})
                throw ShapeError("input layer (multi variant): expected shape (4,8), got " +
                                 Tensor::shape_string(obs.shape()));
        }
    }

    void check_state(const RecurrentState& state) const {
        if (state.h.size() != trunk_count() || state.c.size() != trunk_count())
            throw ShapeError("recurrent state: expected " + std::to_string(trunk_count()) +
                             " trunk states, got " + std::to_string(state.h.size()));
        for (std::size_t t = 0; t < trunk_count(); ++t)
            if (state.h[t].size() != state_size() || state.c[t].size() != state_size())
                throw ShapeError("recurrent state: trunk " + std::to_string(t) +
                                 " expected size " + std::to_string(state_size()) + ", got " +
                                 std::to_string(state.h[t].size()));
    }

    Output run(const Tensor& obs, RecurrentState& state, StepTrace* trace) const {
        check_obs(obs);
        check_state(state);
        const std::size_t nt = trunk_count();
        const std::size_t S = state_size();
        if (trace) {
            trace->lstm.resize(cfg_.variant == NetVariant::kSingle ? nt : 0);
            trace->clstm.resize(cfg_.variant == NetVariant::kMulti ? nt : 0);
            trace->feat.assign(nt, {});
            if (cfg_.variant == NetVariant::kSingle)
                trace->obs.assign(obs.data(), obs.data() + obs.size());
        }

        std::vector<std::vector<double>> feat(nt);
        for (std::size_t t = 0; t < nt; ++t) {
            std::vector<double> h_out(S), c_out(S);
            if (cfg_.variant == NetVariant::kSingle) {
                std::vector<double> act(cfg_.hidden);
                lin_[t].forward(obs.data(), act.data());
                for (double& v : act) v = std::tanh(v);
                lstm_[t].forward(act.data(), state.h[t].data(), state.c[t].data(), h_out.data(),
                                 c_out.data(), trace ? &trace->lstm[t] : nullptr);
                if (trace) {
                    // the LSTM cache stores its input; keep the raw observation there
                    trace->lstm[t].x.assign(obs.data(), obs.data() + kObsCols);
                    trace->lin_act[t] = act;
                }
            } else {
                clstm_[t].forward(obs.data(), state.h[t].data(), state.c[t].data(), h_out.data(),
                                  c_out.data(), trace ? &trace->clstm[t] : nullptr);
            }
            feat[t] = h_out;
            state.h[t] = std::move(h_out);
            state.c[t] = std::move(c_out);
            if (trace) trace->feat[t] = feat[t];
        }

        Output out;
        out.logits = Tensor({kActionHeads, kActionChoices});
        policy_.forward(feat[0].data(), out.logits.data());
        double v = 0.0;
        value_.forward(feat[nt - 1].data(), &v);
        out.value = v;
        return out;
    }

    NetConfig cfg_;
    std::vector<LinearLayer> lin_;
    std::vector<LstmLayer> lstm_;
    std::vector<ConvLstmLayer> clstm_;
    LinearLayer policy_;
    LinearLayer value_;
};

// --- Action sampling ---------------------------------------------------------

struct ActionSample {
    std::array<int, kActionHeads> action{};
    double log_prob = 0.0;
    double entropy = 0.0;
};

inline std::array<double, kActionChoices> softmax_row(const double* logits) {
    std::array<double, kActionChoices> p{};
    double mx = logits[0];
    for (int j = 1; j < kActionChoices; ++j) mx = std::max(mx, logits[j]);
    double sum = 0.0;
    for (int j = 0; j < kActionChoices; ++j) {
        p[j] = std::exp(logits[j] - mx);
        sum += p[j];
    }
    for (int j = 0; j < kActionChoices; ++j) p[j] /= sum;
    return p;
}

inline double entropy_of(const std::array<double, kActionChoices>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

// Samples each head independently from its softmax; the joint log-probability
// and entropy are sums over heads.
inline ActionSample sample_action(const Tensor& logits, Rng& rng) {
    if (logits.shape() != std::vector<std::size_t>{kActionHeads, kActionChoices})
        throw ShapeError("sample_action: expected logits (4,9), got " +
                         Tensor::shape_string(logits.shape()));
    ActionSample s;
    for (int h = 0; h < kActionHeads; ++h) {
        const auto p = softmax_row(logits.data() + h * kActionChoices);
        const double u = rng.uniform01();
        double cdf = 0.0;
        int pick = kActionChoices - 1;
        for (int j = 0; j < kActionChoices; ++j) {
            cdf += p[j];
            if (u <= cdf) {
                pick = j;
                break;
            }
        }
        s.action[h] = pick;
        s.log_prob += std::log(std::max(p[pick], 1e-300));
        s.entropy += entropy_of(p);
    }
    return s;
}

inline std::array<int, kActionHeads> greedy_action(const Tensor& logits) {
    std::array<int, kActionHeads> a{};
    for (int h = 0; h < kActionHeads; ++h) {
        const double* row = logits.data() + h * kActionChoices;
        int best = 0;
        for (int j = 1; j < kActionChoices; ++j)
            if (row[j] > row[best]) best = j;
        a[h] = best;
    }
    return a;
}

} // namespace atsc::nn
