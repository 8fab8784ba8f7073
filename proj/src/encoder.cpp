#include "courtseq/encoder.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "courtseq/kernels.hpp"
#include "courtseq/rng.hpp"

namespace courtseq {

void EncoderConfig::validate() const {
  if (in_channels < 1 || hidden_channels < 1 || depth < 1 || kernel_size < 1 || out_dim < 1) {
    throw std::invalid_argument("EncoderConfig: all sizes must be >= 1");
  }
  if (!(leaky_slope >= 0.0 && leaky_slope < 1.0)) {
    throw std::invalid_argument("EncoderConfig: leaky_slope must be in [0, 1)");
  }
}

std::size_t receptive_field(const EncoderConfig& cfg) {
  // taps reach back (K-1)*2^i at block i; total span 1 + (K-1)*(2^depth - 1)
  return 1 + (cfg.kernel_size - 1) * ((std::size_t{1} << cfg.depth) - 1);
}

namespace {

std::size_t block_in_channels(const EncoderConfig& cfg, std::size_t i) {
  return i == 0 ? cfg.in_channels : cfg.hidden_channels;
}

}  // namespace

EncoderParams zeros_like(const EncoderParams& p) {
  EncoderParams z;
  z.cfg = p.cfg;
  z.blocks.resize(p.blocks.size());
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    z.blocks[i].v = Mat(p.blocks[i].v.rows, p.blocks[i].v.cols);
    z.blocks[i].gain.assign(p.blocks[i].gain.size(), 0.0);
    z.blocks[i].bias.assign(p.blocks[i].bias.size(), 0.0);
    if (!p.blocks[i].proj.empty()) {
      z.blocks[i].proj = Mat(p.blocks[i].proj.rows, p.blocks[i].proj.cols);
    }
  }
  z.head_w = Mat(p.head_w.rows, p.head_w.cols);
  z.head_b.assign(p.head_b.size(), 0.0);
  return z;
}

std::vector<TensorView> tensor_views(EncoderParams& p) {
  std::vector<TensorView> views;
  for (BlockParams& b : p.blocks) {
    views.push_back({b.v.data.data(), b.v.data.size()});
    views.push_back({b.gain.data(), b.gain.size()});
    views.push_back({b.bias.data(), b.bias.size()});
    if (!b.proj.empty()) views.push_back({b.proj.data.data(), b.proj.data.size()});
  }
  views.push_back({p.head_w.data.data(), p.head_w.data.size()});
  views.push_back({p.head_b.data(), p.head_b.size()});
  return views;
}

std::size_t parameter_count(const EncoderParams& p) {
  std::size_t n = 0;
  EncoderParams& mut = const_cast<EncoderParams&>(p);
  for (const TensorView& v : tensor_views(mut)) n += v.size;
  return n;
}

EncoderParams init_params(const EncoderConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  const auto& K = kern::ops();
  EncoderParams p;
  p.cfg = cfg;
  p.blocks.resize(cfg.depth);
  for (std::size_t i = 0; i < cfg.depth; ++i) {
    const std::size_t cin = block_in_channels(cfg, i);
    const std::size_t cout = cfg.hidden_channels;
    const std::size_t fan_in = cin * cfg.kernel_size;
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    BlockParams& b = p.blocks[i];
    b.v = Mat(cout, cin * cfg.kernel_size);
    for (double& w : b.v.data) w = rng.uniform(-bound, bound);
    b.gain.resize(cout);
    for (std::size_t oc = 0; oc < cout; ++oc) {
      b.gain[oc] = std::sqrt(K.dot(b.v.row(oc), b.v.row(oc), b.v.cols));
    }
    b.bias.assign(cout, 0.0);
    if (cfg.residual && cin != cout) {
      const double pbound = std::sqrt(1.0 / static_cast<double>(cin));
      b.proj = Mat(cout, cin);
      for (double& w : b.proj.data) w = rng.uniform(-pbound, pbound);
    }
  }
  const double hbound = std::sqrt(1.0 / static_cast<double>(cfg.hidden_channels));
  p.head_w = Mat(cfg.out_dim, cfg.hidden_channels);
  for (double& w : p.head_w.data) w = rng.uniform(-hbound, hbound);
  p.head_b.assign(cfg.out_dim, 0.0);
  return p;
}

namespace {

/// Causal conv + weight norm + leaky ReLU + residual for one block.
/// Tap k of the effective weight row multiplies x[t - (K-1-k)*dilation], so
/// the last tap is the current sample.
void block_forward(const EncoderConfig& cfg, const BlockParams& b, std::size_t dilation,
                   const Series& x, Series& pre, Series& out) {
  const auto& K = kern::ops();
  const std::size_t T = x.samples;
  const std::size_t cin = x.channels;
  const std::size_t cout = cfg.hidden_channels;
  const std::size_t taps = cfg.kernel_size;
  pre = Series(cout, T);
  out = Series(cout, T);
  for (std::size_t oc = 0; oc < cout; ++oc) {
    const double norm = std::sqrt(K.dot(b.v.row(oc), b.v.row(oc), b.v.cols));
    // ||v|| = 0 is outside the invariant but must still evaluate: the
    // effective weight magnitude is the gain, and a zero gain means zero taps.
    const double scale = norm > 0.0 ? b.gain[oc] / norm : 0.0;
    double* z = pre.row(oc);
    for (std::size_t t = 0; t < T; ++t) z[t] = b.bias[oc];
    for (std::size_t ic = 0; ic < cin; ++ic) {
      const double* xr = x.row(ic);
      for (std::size_t k = 0; k < taps; ++k) {
        const std::size_t off = (taps - 1 - k) * dilation;
        if (off >= T) continue;
        K.axpy(T - off, scale * b.v.at(oc, ic * taps + k), xr, z + off);
      }
    }
    K.leaky_relu(T, cfg.leaky_slope, z, out.row(oc));
  }
  if (!cfg.residual) return;
  if (b.proj.empty()) {
    if (cin != cout) throw std::logic_error("block_forward: channel mismatch without projection");
    for (std::size_t c = 0; c < cout; ++c) K.axpy(T, 1.0, x.row(c), out.row(c));
  } else {
    for (std::size_t oc = 0; oc < cout; ++oc) {
      for (std::size_t ic = 0; ic < cin; ++ic) {
        K.axpy(T, b.proj.at(oc, ic), x.row(ic), out.row(oc));
      }
    }
  }
}

/// Backward through one block. g_out is consumed; gradients are accumulated
/// into gb and g_in (g_in must be zero-initialized by the caller).
void block_backward(const EncoderConfig& cfg, const BlockParams& b, std::size_t dilation,
                    const Series& x, const Series& pre, const Series& g_out, BlockParams& gb,
                    Series& g_in) {
  const auto& K = kern::ops();
  const std::size_t T = x.samples;
  const std::size_t cin = x.channels;
  const std::size_t cout = cfg.hidden_channels;
  const std::size_t taps = cfg.kernel_size;
  Series gz(cout, T);
  std::vector<double> gw_eff(cin * taps);
  for (std::size_t oc = 0; oc < cout; ++oc) {
    K.leaky_relu_grad(T, cfg.leaky_slope, pre.row(oc), g_out.row(oc), gz.row(oc));
    gb.bias[oc] += K.sum(gz.row(oc), T);

    const double norm = std::sqrt(K.dot(b.v.row(oc), b.v.row(oc), b.v.cols));
    const double scale = norm > 0.0 ? b.gain[oc] / norm : 0.0;
    std::fill(gw_eff.begin(), gw_eff.end(), 0.0);
    for (std::size_t ic = 0; ic < cin; ++ic) {
      const double* xr = x.row(ic);
      for (std::size_t k = 0; k < taps; ++k) {
        const std::size_t off = (taps - 1 - k) * dilation;
        if (off >= T) continue;
        gw_eff[ic * taps + k] = K.dot(xr, gz.row(oc) + off, T - off);
        K.axpy(T - off, scale * b.v.at(oc, ic * taps + k), gz.row(oc) + off, g_in.row(ic));
      }
    }
    if (norm > 0.0) {
      // chain through w = gain * v / ||v||
      const double gdotv = K.dot(gw_eff.data(), b.v.row(oc), b.v.cols);
      gb.gain[oc] += gdotv / norm;
      K.axpy(b.v.cols, scale, gw_eff.data(), gb.v.row(oc));
      K.axpy(b.v.cols, -b.gain[oc] * gdotv / (norm * norm * norm), b.v.row(oc), gb.v.row(oc));
    }
  }
  if (!cfg.residual) return;
  if (b.proj.empty()) {
    for (std::size_t c = 0; c < cout; ++c) K.axpy(T, 1.0, g_out.row(c), g_in.row(c));
  } else {
    for (std::size_t oc = 0; oc < cout; ++oc) {
      for (std::size_t ic = 0; ic < cin; ++ic) {
        gb.proj.at(oc, ic) += K.dot(g_out.row(oc), x.row(ic), T);
        K.axpy(T, b.proj.at(oc, ic), g_out.row(oc), g_in.row(ic));
      }
    }
  }
}

}  // namespace

Series forward_sequence(const EncoderParams& p, const Series& x) {
  if (x.channels != p.cfg.in_channels) {
    throw std::invalid_argument("forward_sequence: expected " +
                                std::to_string(p.cfg.in_channels) + " channels, got " +
                                std::to_string(x.channels));
  }
  if (x.samples < 1) throw std::invalid_argument("forward_sequence: empty input");
  Series cur = x;
  Series pre, next;
  for (std::size_t i = 0; i < p.cfg.depth; ++i) {
    block_forward(p.cfg, p.blocks[i], std::size_t{1} << i, cur, pre, next);
    cur = std::move(next);
  }
  return cur;
}

namespace {

void pool_and_head(const EncoderParams& p, const Series& hidden, std::vector<double>& pooled,
                   std::vector<std::size_t>& pool_index, std::vector<double>& embedding) {
  const auto& K = kern::ops();
  const std::size_t ch = hidden.channels;
  const std::size_t T = hidden.samples;
  pooled.resize(ch);
  pool_index.resize(ch);
  for (std::size_t c = 0; c < ch; ++c) {
    const double* row = hidden.row(c);
    const double m = K.max_value(row, T);
    pooled[c] = m;
    std::size_t idx = 0;  // earliest maximizing index; max is an exact element
    while (idx + 1 < T && row[idx] != m) ++idx;
    pool_index[c] = idx;
  }
  embedding.resize(p.cfg.out_dim);
  for (std::size_t j = 0; j < p.cfg.out_dim; ++j) {
    embedding[j] = p.head_b[j] + K.dot(p.head_w.row(j), pooled.data(), ch);
  }
}

}  // namespace

std::vector<double> encode(const EncoderParams& p, const Series& x) {
  const Series hidden = forward_sequence(p, x);
  std::vector<double> pooled, embedding;
  std::vector<std::size_t> pool_index;
  pool_and_head(p, hidden, pooled, pool_index, embedding);
  return embedding;
}

ForwardTape encode_with_tape(const EncoderParams& p, const Series& x) {
  if (x.channels != p.cfg.in_channels) {
    throw std::invalid_argument("encode_with_tape: channel mismatch");
  }
  ForwardTape tape;
  tape.input = x;
  tape.pre.resize(p.cfg.depth);
  tape.out.resize(p.cfg.depth);
  const Series* cur = &tape.input;
  for (std::size_t i = 0; i < p.cfg.depth; ++i) {
    block_forward(p.cfg, p.blocks[i], std::size_t{1} << i, *cur, tape.pre[i], tape.out[i]);
    cur = &tape.out[i];
  }
  pool_and_head(p, *cur, tape.pooled, tape.pool_index, tape.embedding);
  return tape;
}

void accumulate_backward(const EncoderParams& p, const ForwardTape& tape,
                         const std::vector<double>& g_embedding, EncoderParams& grads) {
  if (tape.out.size() != p.cfg.depth || tape.pooled.empty()) {
    throw std::invalid_argument("accumulate_backward: tape does not match params");
  }
  if (g_embedding.size() != p.cfg.out_dim) {
    throw std::invalid_argument("accumulate_backward: upstream gradient size mismatch");
  }
  const auto& K = kern::ops();
  const std::size_t ch = p.cfg.hidden_channels;
  const std::size_t T = tape.input.samples;

  std::vector<double> g_pooled(ch, 0.0);
  for (std::size_t j = 0; j < p.cfg.out_dim; ++j) {
    grads.head_b[j] += g_embedding[j];
    K.axpy(ch, g_embedding[j], tape.pooled.data(), grads.head_w.row(j));
    K.axpy(ch, g_embedding[j], p.head_w.row(j), g_pooled.data());
  }

  Series g_cur(ch, T);
  for (std::size_t c = 0; c < ch; ++c) g_cur.at(c, tape.pool_index[c]) = g_pooled[c];

  for (std::size_t i = p.cfg.depth; i-- > 0;) {
    const Series& x = i == 0 ? tape.input : tape.out[i - 1];
    Series g_in(x.channels, T);
    block_backward(p.cfg, p.blocks[i], std::size_t{1} << i, x, tape.pre[i], g_cur,
                   grads.blocks[i], g_in);
    g_cur = std::move(g_in);
  }
}

// ---------------------------------------------------------------------------
// Checkpoint I/O: little-endian binary, magic + version + config + tensors.

namespace {

constexpr char kMagic[8] = {'C', 'S', 'E', 'Q', 'C', 'K', 'P', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

double get_f64(std::istream& in) {
  const std::uint64_t bits = get_u64(in);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

void put_doubles(std::ostream& out, const double* p, std::size_t n) {
  put_u64(out, n);
  for (std::size_t i = 0; i < n; ++i) put_f64(out, p[i]);
}

std::vector<double> get_doubles(std::istream& in) {
  const std::uint64_t n = get_u64(in);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = get_f64(in);
  return v;
}

}  // namespace

void save_checkpoint(const EncoderParams& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof kMagic);
  put_u64(out, p.cfg.in_channels);
  put_u64(out, p.cfg.hidden_channels);
  put_u64(out, p.cfg.depth);
  put_u64(out, p.cfg.kernel_size);
  put_u64(out, p.cfg.out_dim);
  put_f64(out, p.cfg.leaky_slope);
  put_u64(out, p.cfg.residual ? 1 : 0);
  for (const BlockParams& b : p.blocks) {
    put_doubles(out, b.v.data.data(), b.v.data.size());
    put_doubles(out, b.gain.data(), b.gain.size());
    put_doubles(out, b.bias.data(), b.bias.size());
    put_u64(out, b.proj.empty() ? 0 : 1);
    if (!b.proj.empty()) put_doubles(out, b.proj.data.data(), b.proj.data.size());
  }
  put_doubles(out, p.head_w.data.data(), p.head_w.data.size());
  put_doubles(out, p.head_b.data(), p.head_b.size());
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

EncoderParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  EncoderParams p;
  p.cfg.in_channels = get_u64(in);
  p.cfg.hidden_channels = get_u64(in);
  p.cfg.depth = get_u64(in);
  p.cfg.kernel_size = get_u64(in);
  p.cfg.out_dim = get_u64(in);
  p.cfg.leaky_slope = get_f64(in);
  p.cfg.residual = get_u64(in) != 0;
  p.cfg.validate();
  p.blocks.resize(p.cfg.depth);
  for (std::size_t i = 0; i < p.cfg.depth; ++i) {
    const std::size_t cin = block_in_channels(p.cfg, i);
    BlockParams& b = p.blocks[i];
    b.v.rows = p.cfg.hidden_channels;
    b.v.cols = cin * p.cfg.kernel_size;
    b.v.data = get_doubles(in);
    b.gain = get_doubles(in);
    b.bias = get_doubles(in);
    if (get_u64(in) != 0) {
      b.proj.rows = p.cfg.hidden_channels;
      b.proj.cols = cin;
      b.proj.data = get_doubles(in);
    }
    if (b.v.data.size() != b.v.rows * b.v.cols || b.gain.size() != p.cfg.hidden_channels ||
        b.bias.size() != p.cfg.hidden_channels ||
        (!b.proj.empty() && b.proj.data.size() != b.proj.rows * b.proj.cols)) {
      throw std::runtime_error("checkpoint shape mismatch: " + path);
    }
  }
  p.head_w.rows = p.cfg.out_dim;
  p.head_w.cols = p.cfg.hidden_channels;
  p.head_w.data = get_doubles(in);
  p.head_b = get_doubles(in);
  if (!in || p.head_w.data.size() != p.head_w.rows * p.head_w.cols ||
      p.head_b.size() != p.cfg.out_dim) {
    throw std::runtime_error("checkpoint truncated: " + path);
  }
  return p;
}

}  // namespace courtseq
