#pragma once

// Dense autoencoder with an attention-pooled bottleneck.
//
// Encoder: flatten -> dense+relu stack ending at width L*D. That vector is
// read as L tokens of dimension D; an additive scorer e_i = v . tanh(t_i Wa
// + ba) produces softmax weights alpha, and the latent is the pooled z =
// sum_i alpha_i t_i (global average pooling of tokens rescaled by L*alpha).
// Decoder: dense+relu stack mirroring the encoder, final layer sigmoid so
// reconstructions live in the input range [0,1]. Loss is plain MSE.
//
// Everything is templated on the scalar type: float is the production
// path, double is used by the finite-difference gradient check so oracle
// noise stays below tolerance.

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kfx/rng.hpp"
#include "kfx/tensor.hpp"

namespace kfx {

struct ModelConfig {
  int channels = 3;
  int height = 64;
  int width = 64;
  std::vector<int> encoder_widths{2048, 1024};
  int token_count = 16;  // L
  int token_dim = 64;    // D; doubles as the latent dimension
  std::vector<int> decoder_widths{1024, 2048};

  int input_size() const { return channels * height * width; }
  int latent_dim() const { return token_dim; }

  void validate() const {
    if (channels < 1 || height < 1 || width < 1)
      throw std::invalid_argument("model config: bad input shape");
    if (encoder_widths.empty() || decoder_widths.empty())
      throw std::invalid_argument("model config: empty layer stack");
    for (int w : encoder_widths)
      if (w < 1) throw std::invalid_argument("model config: bad width");
    for (int w : decoder_widths)
      if (w < 1) throw std::invalid_argument("model config: bad width");
    if (token_count < 1 || token_dim < 1)
      throw std::invalid_argument("model config: bad token shape");
    if (token_count * token_dim != encoder_widths.back())
      throw std::invalid_argument(
          "model config: token_count * token_dim must equal the last "
          "encoder width");
  }
};

template <typename T>
struct ModelParams {
  std::vector<Tensor<T>> enc_w, enc_b;   // per encoder layer
  Tensor<T> attn_w;                      // D x D
  Tensor<T> attn_b;                      // D
  Tensor<T> attn_v;                      // D
  std::vector<Tensor<T>> dec_w, dec_b;   // hidden decoder layers + output

  // Canonical (name, tensor) walk: serialization, the optimizer loop and
  // the gradient check all share this order.
  template <typename Fn>
  void for_each(Fn&& fn) {
    for (std::size_t l = 0; l < enc_w.size(); ++l) {
      fn("encoder." + std::to_string(l) + ".weight", enc_w[l]);
      fn("encoder." + std::to_string(l) + ".bias", enc_b[l]);
    }
    fn("attention.w", attn_w);
    fn("attention.b", attn_b);
    fn("attention.v", attn_v);
    for (std::size_t l = 0; l < dec_w.size(); ++l) {
      fn("decoder." + std::to_string(l) + ".weight", dec_w[l]);
      fn("decoder." + std::to_string(l) + ".bias", dec_b[l]);
    }
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    const_cast<ModelParams*>(this)->for_each(
        [&](const std::string& name, Tensor<T>& t) {
          fn(name, static_cast<const Tensor<T>&>(t));
        });
  }
};

// One latent per frame.
struct LatentFeature {
  std::vector<float> z;
  int frame_index = -1;
};

// Glorot weights, zero biases, fixed draw order (the for_each order above).
template <typename T>
ModelParams<T> init_params(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  ModelParams<T> p;
  int in = cfg.input_size();
  for (int w : cfg.encoder_widths) {
    p.enc_w.push_back(glorot_init<T>(in, w, rng));
    p.enc_b.push_back(Tensor<T>({w}));
    in = w;
  }
  const int d = cfg.token_dim;
  p.attn_w = glorot_init<T>(d, d, rng);
  p.attn_b = Tensor<T>({d});
  {
    // v is a D-vector; its fan pair is (D, 1).
    const double a = std::sqrt(6.0 / (d + 1));
    p.attn_v = Tensor<T>({d});
    for (int i = 0; i < d; ++i) p.attn_v[i] = static_cast<T>(rng.symmetric(a));
  }
  in = d;
  for (int w : cfg.decoder_widths) {
    p.dec_w.push_back(glorot_init<T>(in, w, rng));
    p.dec_b.push_back(Tensor<T>({w}));
    in = w;
  }
  p.dec_w.push_back(glorot_init<T>(in, cfg.input_size(), rng));
  p.dec_b.push_back(Tensor<T>({cfg.input_size()}));
  return p;
}

// Grads are a second ModelParams of the same shapes.
template <typename T>
ModelParams<T> zeros_like(const ModelParams<T>& p) {
  ModelParams<T> g;
  g.enc_w.reserve(p.enc_w.size());
  g.enc_b.reserve(p.enc_b.size());
  for (const auto& t : p.enc_w) g.enc_w.emplace_back(t.shape());
  for (const auto& t : p.enc_b) g.enc_b.emplace_back(t.shape());
  g.attn_w = Tensor<T>(p.attn_w.shape());
  g.attn_b = Tensor<T>(p.attn_b.shape());
  g.attn_v = Tensor<T>(p.attn_v.shape());
  for (const auto& t : p.dec_w) g.dec_w.emplace_back(t.shape());
  for (const auto& t : p.dec_b) g.dec_b.emplace_back(t.shape());
  return g;
}

namespace detail {

template <typename T>
void add_bias_rows(Tensor<T>& x, const Tensor<T>& b) {
  const int m = x.dim(0), n = x.dim(1);
  for (int i = 0; i < m; ++i) {
    T* r = x.row(i);
    for (int j = 0; j < n; ++j) r[j] += b[j];
  }
}

template <typename T>
void relu_inplace(Tensor<T>& x) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < T(0)) x[i] = T(0);
}

template <typename T>
void sigmoid_inplace(Tensor<T>& x) {
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = T(1) / (T(1) + std::exp(-x[i]));
}

template <typename T>
void colsum_into(Tensor<T>& out, const Tensor<T>& x) {
  const int m = x.dim(0), n = x.dim(1);
  if (out.rank() != 1 || out.dim(0) != n) out = Tensor<T>({n});
  out.fill(T(0));
  for (int i = 0; i < m; ++i) {
    const T* r = x.row(i);
    for (int j = 0; j < n; ++j) out[j] += r[j];
  }
}

}  // namespace detail

// Intermediate activations for one batch; reusable across batches.
template <typename T>
struct Workspace {
  std::vector<Tensor<T>> enc_act;  // post-relu, per encoder layer
  Tensor<T> scorer_u;              // tanh(tok Wa + ba), (B*L) x D
  Tensor<T> scores;                // B x L
  Tensor<T> alpha;                 // B x L
  Tensor<T> latent;                // B x D
  std::vector<Tensor<T>> dec_act;  // post-relu hidden layers
  Tensor<T> recon;                 // B x N, sigmoid output

  // backward scratch
  Tensor<T> d_out, d_a, d_b, d_z, d_alpha, d_e, d_tok, tr_a, tr_b;
};

// Encoder + attention pooling for a batch X (B x N). Fills ws.enc_act,
// scorer_u, scores, alpha, latent.
template <typename T>
void run_encoder(const ModelParams<T>& p, const ModelConfig& cfg,
                 const Tensor<T>& X, Workspace<T>& ws) {
  const int B = X.dim(0), L = cfg.token_count, D = cfg.token_dim;
  ws.enc_act.resize(p.enc_w.size());
  const Tensor<T>* h = &X;
  for (std::size_t l = 0; l < p.enc_w.size(); ++l) {
    matmul_into(ws.enc_act[l], *h, p.enc_w[l]);
    detail::add_bias_rows(ws.enc_act[l], p.enc_b[l]);
    detail::relu_inplace(ws.enc_act[l]);
    h = &ws.enc_act[l];
  }
  // Token view of the encoder output: (B*L) x D over the same memory.
  Tensor<T> tok({B * L, D},
                std::vector<T>(h->data(), h->data() + h->size()));
  matmul_into(ws.scorer_u, tok, p.attn_w);
  detail::add_bias_rows(ws.scorer_u, p.attn_b);
  for (std::size_t i = 0; i < ws.scorer_u.size(); ++i)
    ws.scorer_u[i] = std::tanh(ws.scorer_u[i]);
  if (ws.scores.rank() != 2 || ws.scores.dim(0) != B ||
      ws.scores.dim(1) != L) {
    ws.scores = Tensor<T>({B, L});
    ws.alpha = Tensor<T>({B, L});
    ws.latent = Tensor<T>({B, D});
  }
  for (int r = 0; r < B * L; ++r) {
    const T* u = ws.scorer_u.row(r);
    T e = T(0);
    for (int d = 0; d < D; ++d) e += u[d] * p.attn_v[d];
    ws.scores[static_cast<std::size_t>(r)] = e;
  }
  for (int b = 0; b < B; ++b) {
    auto a = softmax(std::span<const T>(ws.scores.row(b), L));
    std::copy(a.begin(), a.end(), ws.alpha.row(b));
  }
  ws.latent.fill(T(0));
  for (int b = 0; b < B; ++b) {
    T* z = ws.latent.row(b);
    for (int i = 0; i < L; ++i) {
      const T a = ws.alpha.at(b, i);
      const T* t = h->row(0) + (static_cast<std::size_t>(b) * L + i) * D;
      for (int d = 0; d < D; ++d) z[d] += a * t[d];
    }
  }
}

// Decoder + MSE against the input batch. Returns the loss.
template <typename T>
double run_decoder(const ModelParams<T>& p, const ModelConfig& cfg,
                   const Tensor<T>& X, Workspace<T>& ws) {
  const std::size_t hidden = p.dec_w.size() - 1;
  ws.dec_act.resize(hidden);
  const Tensor<T>* h = &ws.latent;
  for (std::size_t l = 0; l < hidden; ++l) {
    matmul_into(ws.dec_act[l], *h, p.dec_w[l]);
    detail::add_bias_rows(ws.dec_act[l], p.dec_b[l]);
    detail::relu_inplace(ws.dec_act[l]);
    h = &ws.dec_act[l];
  }
  matmul_into(ws.recon, *h, p.dec_w[hidden]);
  detail::add_bias_rows(ws.recon, p.dec_b[hidden]);
  detail::sigmoid_inplace(ws.recon);
  double se = 0;
  for (std::size_t i = 0; i < ws.recon.size(); ++i) {
    const double d = static_cast<double>(ws.recon[i]) -
                     static_cast<double>(X[i]);
    se += d * d;
  }
  (void)cfg;
  return se / static_cast<double>(ws.recon.size());
}

template <typename T>
struct ForwardResult {
  Tensor<T> recon;   // B x N
  Tensor<T> latents; // B x D
  double loss = 0;
};

// Forward pass over a batch of flattened frames (B x input_size).
template <typename T>
ForwardResult<T> forward(const ModelParams<T>& p, const ModelConfig& cfg,
                         const Tensor<T>& X) {
  if (X.rank() != 2 || X.dim(1) != cfg.input_size())
    throw std::invalid_argument("forward: batch shape mismatch");
  if (X.dim(0) < 1) throw std::invalid_argument("forward: empty batch");
  Workspace<T> ws;
  run_encoder(p, cfg, X, ws);
  ForwardResult<T> r;
  r.loss = run_decoder(p, cfg, X, ws);
  r.recon = std::move(ws.recon);
  r.latents = std::move(ws.latent);
  return r;
}

// Latent + attention weights for a single frame.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> encode(
    const ModelParams<T>& p, const ModelConfig& cfg,
    std::span<const float> frame) {
  if (frame.size() != static_cast<std::size_t>(cfg.input_size()))
    throw std::invalid_argument("encode: frame shape mismatch");
  Tensor<T> x({1, cfg.input_size()});
  for (std::size_t i = 0; i < frame.size(); ++i)
    x[i] = static_cast<T>(frame[i]);
  Workspace<T> ws;
  run_encoder(p, cfg, x, ws);
  std::vector<T> z(ws.latent.data(), ws.latent.data() + ws.latent.size());
  std::vector<T> alpha(ws.alpha.data(), ws.alpha.data() + ws.alpha.size());
  return {std::move(z), std::move(alpha)};
}

// MSE loss and analytic gradients for every parameter tensor. `grads` must
// be shaped like `p` (see zeros_like); workspace is reused across calls.
template <typename T>
double loss_and_grads(const ModelParams<T>& p, const ModelConfig& cfg,
                      const Tensor<T>& X, ModelParams<T>& grads,
                      Workspace<T>& ws) {
  const int B = X.dim(0), N = cfg.input_size();
  const int L = cfg.token_count, D = cfg.token_dim;
  run_encoder(p, cfg, X, ws);
  const double loss = run_decoder(p, cfg, X, ws);

  // d(loss)/d(pre-sigmoid) = 2*(y-x)/(B*N) * y*(1-y)
  const T scale = T(2) / static_cast<T>(static_cast<double>(B) * N);
  if (!ws.d_out.same_shape(ws.recon)) ws.d_out = Tensor<T>(ws.recon.shape());
  for (std::size_t i = 0; i < ws.recon.size(); ++i) {
    const T y = ws.recon[i];
    ws.d_out[i] = scale * (y - X[i]) * y * (T(1) - y);
  }

  // Decoder, last layer first.
  const std::size_t hidden = p.dec_w.size() - 1;
  Tensor<T>* d_up = &ws.d_out;  // grad at current layer's pre-activation
  for (std::size_t l = p.dec_w.size(); l-- > 0;) {
    const Tensor<T>& below =
        l == 0 ? ws.latent : ws.dec_act[l - 1];  // input to layer l
    transpose_into(ws.tr_a, below);
    matmul_into(grads.dec_w[l], ws.tr_a, *d_up);
    detail::colsum_into(grads.dec_b[l], *d_up);
    // propagate: d_below = d_up . W^T, computed as (W . d_up^T)^T so the
    // big weight matrix is walked row-contiguously.
    transpose_into(ws.tr_b, *d_up);
    matmul_into(ws.tr_a, p.dec_w[l], ws.tr_b);
    Tensor<T>& d_below = (d_up == &ws.d_a) ? ws.d_b : ws.d_a;
    transpose_into(d_below, ws.tr_a);
    if (l > 0) {
      const Tensor<T>& act = ws.dec_act[l - 1];
      for (std::size_t i = 0; i < d_below.size(); ++i)
        if (act[i] <= T(0)) d_below[i] = T(0);
    }
    d_up = &d_below;
  }
  ws.d_z = *d_up;  // B x D

  // Attention backward.
  const Tensor<T>& enc_out = ws.enc_act.back();  // B x (L*D)
  if (ws.d_alpha.rank() != 2 || ws.d_alpha.dim(0) != B ||
      ws.d_alpha.dim(1) != L)
    ws.d_alpha = Tensor<T>({B, L});
  if (ws.d_e.rank() != 2 || ws.d_e.dim(0) != B * L || ws.d_e.dim(1) != 1)
    ws.d_e = Tensor<T>({B * L, 1});
  if (!ws.d_tok.same_shape(ws.scorer_u)) ws.d_tok = Tensor<T>({B * L, D});

  // d_alpha[b,i] = dz[b] . t[b,i];  d_tok starts as alpha[b,i] * dz[b].
  for (int b = 0; b < B; ++b) {
    const T* dz = ws.d_z.row(b);
    for (int i = 0; i < L; ++i) {
      const std::size_t r = static_cast<std::size_t>(b) * L + i;
      const T* t = enc_out.data() + r * D;
      T* dt = ws.d_tok.data() + r * D;
      const T a = ws.alpha.at(b, i);
      T da = T(0);
      for (int d = 0; d < D; ++d) {
        da += dz[d] * t[d];
        dt[d] = a * dz[d];
      }
      ws.d_alpha.at(b, i) = da;
    }
  }
  // Softmax backward: de_i = alpha_i * (dalpha_i - sum_j alpha_j dalpha_j).
  for (int b = 0; b < B; ++b) {
    T s = T(0);
    for (int i = 0; i < L; ++i) s += ws.alpha.at(b, i) * ws.d_alpha.at(b, i);
    for (int i = 0; i < L; ++i)
      ws.d_e[static_cast<std::size_t>(b) * L + i] =
          ws.alpha.at(b, i) * (ws.d_alpha.at(b, i) - s);
  }
  // Scorer: e = tanh(tok Wa + ba) . v
  grads.attn_v.fill(T(0));
  for (int r = 0; r < B * L; ++r) {
    const T de = ws.d_e[static_cast<std::size_t>(r)];
    const T* u = ws.scorer_u.row(r);
    for (int d = 0; d < D; ++d) grads.attn_v[d] += de * u[d];
  }
  // dA = (de v^T) tanh'(.) reuses the scorer_u buffer layout.
  Tensor<T>& dA = ws.d_b;
  if (!dA.same_shape(ws.scorer_u)) dA = Tensor<T>({B * L, D});
  for (int r = 0; r < B * L; ++r) {
    const T de = ws.d_e[static_cast<std::size_t>(r)];
    const T* u = ws.scorer_u.row(r);
    T* out = dA.row(r);
    for (int d = 0; d < D; ++d)
      out[d] = de * p.attn_v[d] * (T(1) - u[d] * u[d]);
  }
  {
    Tensor<T> tok({B * L, D},
                  std::vector<T>(enc_out.data(),
                                 enc_out.data() + enc_out.size()));
    transpose_into(ws.tr_a, tok);
    matmul_into(grads.attn_w, ws.tr_a, dA);
  }
  detail::colsum_into(grads.attn_b, dA);
  // d_tok += dA . Wa^T
  {
    transpose_into(ws.tr_b, dA);
    matmul_into(ws.tr_a, p.attn_w, ws.tr_b);  // D x (B*L)
    for (int r = 0; r < B * L; ++r) {
      T* dt = ws.d_tok.row(r);
      for (int d = 0; d < D; ++d) dt[d] += ws.tr_a.at(d, r);
    }
  }

  // Through the encoder stack. d_tok viewed as B x (L*D).
  Tensor<T> d_h({B, L * D},
                std::vector<T>(ws.d_tok.data(),
                               ws.d_tok.data() + ws.d_tok.size()));
  for (std::size_t i = 0; i < d_h.size(); ++i)
    if (enc_out[i] <= T(0)) d_h[i] = T(0);
  Tensor<T>* d_cur = &d_h;
  for (std::size_t l = p.enc_w.size(); l-- > 0;) {
    const Tensor<T>& below = l == 0 ? X : ws.enc_act[l - 1];
    transpose_into(ws.tr_a, below);
    matmul_into(grads.enc_w[l], ws.tr_a, *d_cur);
    detail::colsum_into(grads.enc_b[l], *d_cur);
    if (l == 0) break;  // no gradient past the input
    transpose_into(ws.tr_b, *d_cur);
    matmul_into(ws.tr_a, p.enc_w[l], ws.tr_b);
    Tensor<T>& d_below = (d_cur == &ws.d_a) ? ws.d_b : ws.d_a;
    transpose_into(d_below, ws.tr_a);
    const Tensor<T>& act = ws.enc_act[l - 1];
    for (std::size_t i = 0; i < d_below.size(); ++i)
      if (act[i] <= T(0)) d_below[i] = T(0);
    d_cur = &d_below;
  }
  return loss;
}

// Convenience overload allocating grads and workspace.
template <typename T>
std::pair<double, ModelParams<T>> loss_and_grads(const ModelParams<T>& p,
                                                 const ModelConfig& cfg,
                                                 const Tensor<T>& X) {
  ModelParams<T> grads = zeros_like(p);
  Workspace<T> ws;
  const double loss = loss_and_grads(p, cfg, X, grads, ws);
  return {loss, std::move(grads)};
}

}  // namespace kfx
