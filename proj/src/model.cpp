#include "retscreen/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace retscreen {

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  v.assign(static_cast<size_t>(n), 0.0);
}

const char* to_string(HeadMode mode) {
  switch (mode) {
    case HeadMode::t2d_only: return "t2d_only";
    case HeadMode::biomarkers_only: return "biomarkers_only";
    case HeadMode::multi_target: return "multi_target";
  }
  return "?";
}

HeadMode parse_head_mode(std::string_view s) {
  if (s == "t2d_only") return HeadMode::t2d_only;
  if (s == "biomarkers_only") return HeadMode::biomarkers_only;
  if (s == "multi_target") return HeadMode::multi_target;
  fail(Errc::bad_enum, "unknown head_mode '" + std::string(s) + "'");
}

void ModelConfig::validate() const {
  if (input_size < 4) fail(Errc::invalid_config, "input_size must be >= 4");
  if (conv_blocks.empty()) fail(Errc::invalid_config, "need at least one conv block");
  if (trunk_feature_dim < 4) fail(Errc::invalid_config, "trunk_feature_dim must be >= 4");
  for (const ConvBlock& b : conv_blocks) {
    if (b.out_channels < 1 || b.kernel < 1 || b.kernel % 2 == 0 || b.stride < 1)
      fail(Errc::invalid_config, "conv block needs out_channels >= 1, odd kernel, stride >= 1");
  }
}

uint64_t config_hash(const ModelConfig& config) {
  std::string repr = "input=" + std::to_string(config.input_size) + ";trunk=" +
                     std::to_string(config.trunk_feature_dim) + ";mode=" +
                     to_string(config.head_mode) + ";blocks=";
  for (const ConvBlock& b : config.conv_blocks) {
    repr += std::to_string(b.out_channels) + ":" + std::to_string(b.kernel) + ":" +
            std::to_string(b.stride) + ":" + (b.max_pool ? "1" : "0") + ",";
  }
  return fnv1a64(repr);
}

void ParamSet::for_each_param(const std::function<void(const std::string&, Tensor&)>& fn) {
  for (size_t i = 0; i < conv_w.size(); ++i) {
    fn("conv" + std::to_string(i) + ".w", conv_w[i]);
    fn("conv" + std::to_string(i) + ".b", conv_b[i]);
  }
  fn("trunk.w", trunk_w);
  fn("trunk.b", trunk_b);
  if (has_t2d()) {
    fn("head_t2d.w", t2d_w);
    fn("head_t2d.b", t2d_b);
  }
  if (has_bio()) {
    fn("head_bio.w", bio_w);
    fn("head_bio.b", bio_b);
  }
}

void ParamSet::for_each_param(
    const std::function<void(const std::string&, const Tensor&)>& fn) const {
  const_cast<ParamSet*>(this)->for_each_param(
      [&fn](const std::string& name, Tensor& t) { fn(name, t); });
}

namespace {

struct BlockDims {
  int in_c, in_h, in_w;
  int conv_h, conv_w;  // after convolution
  int out_h, out_w;    // after optional pooling
};

struct NetDims {
  std::vector<BlockDims> blocks;
  int gap_channels = 0;
};

NetDims compute_dims(const ModelConfig& config) {
  NetDims dims;
  int c = 3, h = config.input_size, w = config.input_size;
  for (const ConvBlock& b : config.conv_blocks) {
    BlockDims d{};
    d.in_c = c;
    d.in_h = h;
    d.in_w = w;
    const int pad = b.kernel / 2;
    d.conv_h = (h + 2 * pad - b.kernel) / b.stride + 1;
    d.conv_w = (w + 2 * pad - b.kernel) / b.stride + 1;
    d.out_h = b.max_pool ? d.conv_h / 2 : d.conv_h;
    d.out_w = b.max_pool ? d.conv_w / 2 : d.conv_w;
    if (d.conv_h < 1 || d.conv_w < 1 || d.out_h < 1 || d.out_w < 1)
      fail(Errc::invalid_config, "conv stack shrinks the image to nothing");
    dims.blocks.push_back(d);
    c = b.out_channels;
    h = d.out_h;
    w = d.out_w;
  }
  dims.gap_channels = c;
  return dims;
}

Model build_skeleton(const ModelConfig& config) {
  config.validate();
  const NetDims dims = compute_dims(config);
  Model model;
  model.config = config;
  ParamSet& p = model.params;
  for (size_t i = 0; i < config.conv_blocks.size(); ++i) {
    const ConvBlock& b = config.conv_blocks[i];
    const BlockDims& d = dims.blocks[i];
    p.conv_w.emplace_back(std::vector<int>{b.out_channels, d.in_c, b.kernel, b.kernel});
    p.conv_b.emplace_back(std::vector<int>{b.out_channels});
  }
  p.trunk_w = Tensor({config.trunk_feature_dim, dims.gap_channels});
  p.trunk_b = Tensor({config.trunk_feature_dim});
  if (config.head_mode != HeadMode::biomarkers_only) {
    p.t2d_w = Tensor({1, config.trunk_feature_dim});
    p.t2d_b = Tensor({1});
  }
  if (config.head_mode != HeadMode::t2d_only) {
    p.bio_w = Tensor({4, config.trunk_feature_dim});
    p.bio_b = Tensor({4});
  }
  return model;
}

int fan_in_of(const Tensor& w) {
  // [out, in, k, k] for conv, [out, in] for dense
  int64_t fan = 1;
  for (size_t i = 1; i < w.shape.size(); ++i) fan *= w.shape[i];
  return static_cast<int>(fan);
}

void random_fill(ParamSet& params, uint64_t seed) {
  params.for_each_param([seed](const std::string& name, Tensor& t) {
    if (name.size() >= 2 && name.compare(name.size() - 2, 2, ".b") == 0) {
      std::fill(t.v.begin(), t.v.end(), 0.0);
      return;
    }
    Rng rng(derive_seed(seed, name));
    const double bound = std::sqrt(6.0 / fan_in_of(t));
    for (double& x : t.v) x = rng.uniform(-bound, bound);
  });
}

constexpr double kLogitClamp = 30.0;
constexpr double kProbClamp = 1e-7;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct ForwardCache {
  std::vector<std::vector<double>> inputs;    // planar input per block, plus final pooled output
  std::vector<std::vector<double>> conv_act;  // post-ReLU, pre-pool
  std::vector<std::vector<int>> pool_idx;     // argmax flat index per pooled cell
  std::vector<double> gap;
  std::vector<double> trunk_act;  // post-ReLU
  double logit_raw = 0.0;
  std::array<double, 4> bio{};
};

void conv_forward(const Tensor& w, const Tensor& b, const double* in, const BlockDims& d,
                  int kernel, int stride, double* out) {
  const int pad = kernel / 2;
  const int oc_n = w.shape[0];
  const size_t out_plane = static_cast<size_t>(d.conv_h) * d.conv_w;
  const size_t in_plane = static_cast<size_t>(d.in_h) * d.in_w;
  for (int oc = 0; oc < oc_n; ++oc) {
    double* outp = out + oc * out_plane;
    std::fill(outp, outp + out_plane, b.v[static_cast<size_t>(oc)]);
    for (int ic = 0; ic < d.in_c; ++ic) {
      const double* inp = in + ic * in_plane;
      for (int ky = 0; ky < kernel; ++ky) {
        const int oy_lo = (pad - ky) > 0 ? (pad - ky + stride - 1) / stride : 0;
        const int oy_hi = std::min(d.conv_h, (d.in_h - 1 - ky + pad) / stride + 1);
        for (int kx = 0; kx < kernel; ++kx) {
          const double wv = w.v[((static_cast<size_t>(oc) * d.in_c + ic) * kernel + ky) * kernel + kx];
          const int ox_lo = (pad - kx) > 0 ? (pad - kx + stride - 1) / stride : 0;
          const int ox_hi = std::min(d.conv_w, (d.in_w - 1 - kx + pad) / stride + 1);
          for (int oy = oy_lo; oy < oy_hi; ++oy) {
            const int y = oy * stride + ky - pad;
            double* orow = outp + static_cast<size_t>(oy) * d.conv_w;
            const double* irow = inp + static_cast<size_t>(y) * d.in_w;
            if (stride == 1) {
              const int off = kx - pad;
              for (int ox = ox_lo; ox < ox_hi; ++ox) orow[ox] += wv * irow[ox + off];
            } else {
              for (int ox = ox_lo; ox < ox_hi; ++ox)
                orow[ox] += wv * irow[ox * stride + kx - pad];
            }
          }
        }
      }
    }
  }
}

void conv_backward(const Tensor& w, const double* in, const double* d_out, const BlockDims& d,
                   int kernel, int stride, Tensor& dw, Tensor& db, double* d_in) {
  const int pad = kernel / 2;
  const int oc_n = w.shape[0];
  const size_t out_plane = static_cast<size_t>(d.conv_h) * d.conv_w;
  const size_t in_plane = static_cast<size_t>(d.in_h) * d.in_w;
  for (int oc = 0; oc < oc_n; ++oc) {
    const double* doutp = d_out + oc * out_plane;
    double acc_b = 0.0;
    for (size_t i = 0; i < out_plane; ++i) acc_b += doutp[i];
    db.v[static_cast<size_t>(oc)] += acc_b;
    for (int ic = 0; ic < d.in_c; ++ic) {
      const double* inp = in + ic * in_plane;
      double* dinp = d_in ? d_in + ic * in_plane : nullptr;
      for (int ky = 0; ky < kernel; ++ky) {
        const int oy_lo = (pad - ky) > 0 ? (pad - ky + stride - 1) / stride : 0;
        const int oy_hi = std::min(d.conv_h, (d.in_h - 1 - ky + pad) / stride + 1);
        for (int kx = 0; kx < kernel; ++kx) {
          const size_t widx =
              ((static_cast<size_t>(oc) * d.in_c + ic) * kernel + ky) * kernel + kx;
          const double wv = w.v[widx];
          const int ox_lo = (pad - kx) > 0 ? (pad - kx + stride - 1) / stride : 0;
          const int ox_hi = std::min(d.conv_w, (d.in_w - 1 - kx + pad) / stride + 1);
          double acc_w = 0.0;
          for (int oy = oy_lo; oy < oy_hi; ++oy) {
            const int y = oy * stride + ky - pad;
            const double* dorow = doutp + static_cast<size_t>(oy) * d.conv_w;
            const double* irow = inp + static_cast<size_t>(y) * d.in_w;
            double* dirow = dinp ? dinp + static_cast<size_t>(y) * d.in_w : nullptr;
            if (stride == 1) {
              const int off = kx - pad;
              for (int ox = ox_lo; ox < ox_hi; ++ox) {
                acc_w += dorow[ox] * irow[ox + off];
                if (dirow) dirow[ox + off] += wv * dorow[ox];
              }
            } else {
              for (int ox = ox_lo; ox < ox_hi; ++ox) {
                const int x = ox * stride + kx - pad;
                acc_w += dorow[ox] * irow[x];
                if (dirow) dirow[x] += wv * dorow[ox];
              }
            }
          }
          dw.v[widx] += acc_w;
        }
      }
    }
  }
}

void check_batch(const Model& model, const std::vector<ImageTensor>& batch) {
  for (const ImageTensor& img : batch) {
    if (img.height != model.config.input_size || img.width != model.config.input_size ||
        img.channels != 3)
      fail(Errc::shape_mismatch,
           "batch image is " + std::to_string(img.height) + "x" + std::to_string(img.width) + "x" +
               std::to_string(img.channels) + ", model expects " +
               std::to_string(model.config.input_size) + "^2 x3");
  }
}

std::vector<double> to_planar(const ImageTensor& img) {
  const size_t plane = static_cast<size_t>(img.height) * img.width;
  std::vector<double> out(plane * img.channels);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out[c * plane + static_cast<size_t>(y) * img.width + x] = img.at(y, x, c);
  return out;
}

void forward_one(const Model& model, const NetDims& dims, const ImageTensor& img,
                 ForwardCache& cache) {
  const ParamSet& p = model.params;
  const size_t n_blocks = model.config.conv_blocks.size();
  cache.inputs.resize(n_blocks + 1);
  cache.conv_act.resize(n_blocks);
  cache.pool_idx.assign(n_blocks, {});
  cache.inputs[0] = to_planar(img);

  for (size_t i = 0; i < n_blocks; ++i) {
    const ConvBlock& blk = model.config.conv_blocks[i];
    const BlockDims& d = dims.blocks[i];
    std::vector<double>& act = cache.conv_act[i];
    act.assign(static_cast<size_t>(blk.out_channels) * d.conv_h * d.conv_w, 0.0);
    conv_forward(p.conv_w[i], p.conv_b[i], cache.inputs[i].data(), d, blk.kernel, blk.stride,
                 act.data());
    for (double& v : act)
      if (v < 0.0) v = 0.0;

    if (blk.max_pool) {
      const size_t conv_plane = static_cast<size_t>(d.conv_h) * d.conv_w;
      const size_t out_plane = static_cast<size_t>(d.out_h) * d.out_w;
      std::vector<double>& pooled = cache.inputs[i + 1];
      pooled.assign(static_cast<size_t>(blk.out_channels) * out_plane, 0.0);
      std::vector<int>& idx = cache.pool_idx[i];
      idx.assign(pooled.size(), 0);
      for (int c = 0; c < blk.out_channels; ++c) {
        const double* src = act.data() + c * conv_plane;
        double* dst = pooled.data() + c * out_plane;
        int* ip = idx.data() + c * out_plane;
        for (int y = 0; y < d.out_h; ++y) {
          for (int x = 0; x < d.out_w; ++x) {
            int best = (2 * y) * d.conv_w + 2 * x;
            double best_v = src[best];
            const int cand[3] = {(2 * y) * d.conv_w + 2 * x + 1, (2 * y + 1) * d.conv_w + 2 * x,
                                 (2 * y + 1) * d.conv_w + 2 * x + 1};
            for (int k : cand) {
              if (src[k] > best_v) {
                best_v = src[k];
                best = k;
              }
            }
            dst[static_cast<size_t>(y) * d.out_w + x] = best_v;
            ip[static_cast<size_t>(y) * d.out_w + x] = best;
          }
        }
      }
    } else {
      cache.inputs[i + 1] = act;
    }
  }

  const BlockDims& last = dims.blocks.back();
  const size_t last_plane = static_cast<size_t>(last.out_h) * last.out_w;
  cache.gap.assign(static_cast<size_t>(dims.gap_channels), 0.0);
  const std::vector<double>& final_planes = cache.inputs[n_blocks];
  for (int c = 0; c < dims.gap_channels; ++c) {
    double sum = 0.0;
    const double* plane = final_planes.data() + c * last_plane;
    for (size_t k = 0; k < last_plane; ++k) sum += plane[k];
    cache.gap[static_cast<size_t>(c)] = sum / static_cast<double>(last_plane);
  }

  const int feat = model.config.trunk_feature_dim;
  cache.trunk_act.assign(static_cast<size_t>(feat), 0.0);
  for (int f = 0; f < feat; ++f) {
    double acc = p.trunk_b.v[static_cast<size_t>(f)];
    const double* wrow = p.trunk_w.v.data() + static_cast<size_t>(f) * dims.gap_channels;
    for (int c = 0; c < dims.gap_channels; ++c) acc += wrow[c] * cache.gap[static_cast<size_t>(c)];
    cache.trunk_act[static_cast<size_t>(f)] = acc > 0.0 ? acc : 0.0;
  }

  if (p.has_t2d()) {
    double z = p.t2d_b.v[0];
    for (int f = 0; f < feat; ++f) z += p.t2d_w.v[static_cast<size_t>(f)] * cache.trunk_act[static_cast<size_t>(f)];
    cache.logit_raw = z;
  }
  if (p.has_bio()) {
    for (int j = 0; j < 4; ++j) {
      double z = p.bio_b.v[static_cast<size_t>(j)];
      const double* wrow = p.bio_w.v.data() + static_cast<size_t>(j) * feat;
      for (int f = 0; f < feat; ++f) z += wrow[f] * cache.trunk_act[static_cast<size_t>(f)];
      cache.bio[static_cast<size_t>(j)] = z;
    }
  }
}

void backward_one(const Model& model, const NetDims& dims, const ForwardCache& cache,
                  double d_logit, const std::array<double, 4>& d_bio, ParamSet& grad) {
  const ParamSet& p = model.params;
  const int feat = model.config.trunk_feature_dim;
  std::vector<double> d_trunk_act(static_cast<size_t>(feat), 0.0);

  if (p.has_t2d() && d_logit != 0.0) {
    grad.t2d_b.v[0] += d_logit;
    for (int f = 0; f < feat; ++f) {
      grad.t2d_w.v[static_cast<size_t>(f)] += d_logit * cache.trunk_act[static_cast<size_t>(f)];
      d_trunk_act[static_cast<size_t>(f)] += d_logit * p.t2d_w.v[static_cast<size_t>(f)];
    }
  }
  if (p.has_bio()) {
    for (int j = 0; j < 4; ++j) {
      const double g = d_bio[static_cast<size_t>(j)];
      if (g == 0.0) continue;
      grad.bio_b.v[static_cast<size_t>(j)] += g;
      double* gwrow = grad.bio_w.v.data() + static_cast<size_t>(j) * feat;
      const double* wrow = p.bio_w.v.data() + static_cast<size_t>(j) * feat;
      for (int f = 0; f < feat; ++f) {
        gwrow[f] += g * cache.trunk_act[static_cast<size_t>(f)];
        d_trunk_act[static_cast<size_t>(f)] += g * wrow[f];
      }
    }
  }

  std::vector<double> d_gap(static_cast<size_t>(dims.gap_channels), 0.0);
  for (int f = 0; f < feat; ++f) {
    if (cache.trunk_act[static_cast<size_t>(f)] <= 0.0) continue;  // ReLU gate
    const double g = d_trunk_act[static_cast<size_t>(f)];
    if (g == 0.0) continue;
    grad.trunk_b.v[static_cast<size_t>(f)] += g;
    double* gwrow = grad.trunk_w.v.data() + static_cast<size_t>(f) * dims.gap_channels;
    const double* wrow = p.trunk_w.v.data() + static_cast<size_t>(f) * dims.gap_channels;
    for (int c = 0; c < dims.gap_channels; ++c) {
      gwrow[c] += g * cache.gap[static_cast<size_t>(c)];
      d_gap[static_cast<size_t>(c)] += g * wrow[c];
    }
  }

  const size_t n_blocks = model.config.conv_blocks.size();
  const BlockDims& last = dims.blocks.back();
  const size_t last_plane = static_cast<size_t>(last.out_h) * last.out_w;
  std::vector<double> d_next(static_cast<size_t>(dims.gap_channels) * last_plane);
  for (int c = 0; c < dims.gap_channels; ++c) {
    const double g = d_gap[static_cast<size_t>(c)] / static_cast<double>(last_plane);
    double* plane = d_next.data() + c * last_plane;
    std::fill(plane, plane + last_plane, g);
  }

  for (size_t i = n_blocks; i-- > 0;) {
    const ConvBlock& blk = model.config.conv_blocks[i];
    const BlockDims& d = dims.blocks[i];
    const size_t conv_plane = static_cast<size_t>(d.conv_h) * d.conv_w;

    // d_next currently holds the gradient at this block's output
    std::vector<double> d_conv(static_cast<size_t>(blk.out_channels) * conv_plane, 0.0);
    if (blk.max_pool) {
      const size_t out_plane = static_cast<size_t>(d.out_h) * d.out_w;
      const std::vector<int>& idx = cache.pool_idx[i];
      for (int c = 0; c < blk.out_channels; ++c) {
        const double* src = d_next.data() + c * out_plane;
        const int* ip = idx.data() + c * out_plane;
        double* dst = d_conv.data() + c * conv_plane;
        for (size_t k = 0; k < out_plane; ++k) dst[static_cast<size_t>(ip[k])] += src[k];
      }
    } else {
      d_conv = d_next;
    }
    // ReLU gate on the conv activation
    const std::vector<double>& act = cache.conv_act[i];
    for (size_t k = 0; k < d_conv.size(); ++k)
      if (act[k] <= 0.0) d_conv[k] = 0.0;

    const bool need_d_in = i > 0;
    std::vector<double> d_in;
    if (need_d_in) d_in.assign(cache.inputs[i].size(), 0.0);
    conv_backward(p.conv_w[i], cache.inputs[i].data(), d_conv.data(), d, blk.kernel, blk.stride,
                  grad.conv_w[i], grad.conv_b[i], need_d_in ? d_in.data() : nullptr);
    d_next = std::move(d_in);
  }
}

void accumulate(ParamSet& into, const ParamSet& from) {
  auto add = [](Tensor& a, const Tensor& b) {
    for (size_t i = 0; i < a.v.size(); ++i) a.v[i] += b.v[i];
  };
  for (size_t i = 0; i < into.conv_w.size(); ++i) {
    add(into.conv_w[i], from.conv_w[i]);
    add(into.conv_b[i], from.conv_b[i]);
  }
  add(into.trunk_w, from.trunk_w);
  add(into.trunk_b, from.trunk_b);
  if (into.has_t2d()) {
    add(into.t2d_w, from.t2d_w);
    add(into.t2d_b, from.t2d_b);
  }
  if (into.has_bio()) {
    add(into.bio_w, from.bio_w);
    add(into.bio_b, from.bio_b);
  }
}

}  // namespace

ParamSet zeros_like(const ParamSet& params) {
  ParamSet out;
  for (const Tensor& t : params.conv_w) out.conv_w.emplace_back(t.shape);
  for (const Tensor& t : params.conv_b) out.conv_b.emplace_back(t.shape);
  out.trunk_w = Tensor(params.trunk_w.shape);
  out.trunk_b = Tensor(params.trunk_b.shape);
  if (params.has_t2d()) {
    out.t2d_w = Tensor(params.t2d_w.shape);
    out.t2d_b = Tensor(params.t2d_b.shape);
  }
  if (params.has_bio()) {
    out.bio_w = Tensor(params.bio_w.shape);
    out.bio_b = Tensor(params.bio_b.shape);
  }
  return out;
}

Model init_model(const ModelConfig& config, uint64_t seed) {
  Model model = build_skeleton(config);
  random_fill(model.params, seed);
  return model;
}

Model replace_output_head(const Model& model, HeadMode new_mode, uint64_t seed) {
  ModelConfig config = model.config;
  config.head_mode = new_mode;
  Model out = build_skeleton(config);
  out.params.conv_w = model.params.conv_w;
  out.params.conv_b = model.params.conv_b;
  out.params.trunk_w = model.params.trunk_w;
  out.params.trunk_b = model.params.trunk_b;
  ParamSet heads = zeros_like(out.params);
  random_fill(heads, seed);
  if (out.params.has_t2d()) {
    out.params.t2d_w = std::move(heads.t2d_w);
    out.params.t2d_b = std::move(heads.t2d_b);
  }
  if (out.params.has_bio()) {
    out.params.bio_w = std::move(heads.bio_w);
    out.params.bio_b = std::move(heads.bio_b);
  }
  return out;
}

Outputs forward(const Model& model, const std::vector<ImageTensor>& batch, int threads) {
  model.config.validate();
  check_batch(model, batch);
  const NetDims dims = compute_dims(model.config);
  const size_t n = batch.size();
  Outputs out;
  out.batch = n;
  if (model.params.has_t2d()) {
    out.t2d_logit.assign(n, 0.0);
    out.t2d_prob.assign(n, 0.0);
  }
  if (model.params.has_bio()) out.biomarkers.assign(n * 4, 0.0);

  parallel_for(n, threads, [&](size_t i) {
    ForwardCache cache;
    forward_one(model, dims, batch[i], cache);
    if (model.params.has_t2d()) {
      const double z = std::clamp(cache.logit_raw, -kLogitClamp, kLogitClamp);
      out.t2d_logit[i] = z;
      out.t2d_prob[i] = sigmoid(z);
    }
    if (model.params.has_bio()) {
      for (int j = 0; j < 4; ++j) out.biomarkers[i * 4 + static_cast<size_t>(j)] = cache.bio[static_cast<size_t>(j)];
    }
  });
  return out;
}

namespace {

void check_targets(const Outputs& outputs, const Targets& targets) {
  if (outputs.has_t2d() && targets.labels.size() != outputs.batch)
    fail(Errc::mode_mismatch, "t2d outputs need one label per sample");
  if (outputs.has_bio() && targets.biomarkers.size() != outputs.batch * 4)
    fail(Errc::mode_mismatch, "biomarker outputs need 4 targets per sample");
  for (int y : targets.labels)
    if (y != 0 && y != 1) fail(Errc::bad_enum, "labels must be 0 or 1");
}

double bce_of(double prob, int label) {
  const double p = std::clamp(prob, kProbClamp, 1.0 - kProbClamp);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double weight_sq_norm(const ParamSet& params) {
  double acc = 0.0;
  params.for_each_param([&acc](const std::string& name, const Tensor& t) {
    if (name.size() >= 2 && name.compare(name.size() - 2, 2, ".w") == 0) {
      for (double v : t.v) acc += v * v;
    }
  });
  return acc;
}

}  // namespace

LossComponents loss(const Model& model, const Outputs& outputs, const Targets& targets,
                    double lambda_bio, double l2) {
  check_targets(outputs, targets);
  const size_t n = outputs.batch;
  LossComponents out;
  if (outputs.has_t2d() && n > 0) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += bce_of(outputs.t2d_prob[i], targets.labels[i]);
    out.bce = acc / static_cast<double>(n);
  }
  if (outputs.has_bio() && n > 0) {
    double acc = 0.0;
    for (size_t i = 0; i < n * 4; ++i) {
      const double d = outputs.biomarkers[i] - targets.biomarkers[i];
      acc += d * d;
    }
    out.mse = lambda_bio * acc / (4.0 * static_cast<double>(n));
  }
  out.l2 = l2 * weight_sq_norm(model.params);
  out.total = out.bce + out.mse + out.l2;
  return out;
}

ParamSet gradients(const Model& model, const std::vector<ImageTensor>& batch,
                   const Targets& targets, double lambda_bio, double l2, int threads,
                   LossComponents* loss_out) {
  model.config.validate();
  check_batch(model, batch);
  const size_t n = batch.size();
  if (n == 0) fail(Errc::empty_input, "empty batch");
  {
    Outputs probe;  // shape checks only
    probe.batch = n;
    if (model.params.has_t2d()) probe.t2d_prob.assign(n, 0.5);
    if (model.params.has_bio()) probe.biomarkers.assign(n * 4, 0.0);
    check_targets(probe, targets);
  }

  const NetDims dims = compute_dims(model.config);
  const size_t workers =
      std::min<size_t>(n, static_cast<size_t>(threads < 1 ? 1 : threads));
  std::vector<ParamSet> chunk_grad;
  std::vector<double> chunk_bce(workers, 0.0), chunk_mse(workers, 0.0);
  chunk_grad.reserve(workers);
  for (size_t w = 0; w < workers; ++w) chunk_grad.push_back(zeros_like(model.params));

  auto run_chunk = [&](size_t w) {
    const size_t begin = n * w / workers;
    const size_t end = n * (w + 1) / workers;
    for (size_t i = begin; i < end; ++i) {
      ForwardCache cache;
      forward_one(model, dims, batch[i], cache);
      double d_logit = 0.0;
      std::array<double, 4> d_bio{};
      if (model.params.has_t2d()) {
        const double z = std::clamp(cache.logit_raw, -kLogitClamp, kLogitClamp);
        const double p = sigmoid(z);
        chunk_bce[w] += bce_of(p, targets.labels[i]);
        const bool live = cache.logit_raw > -kLogitClamp && cache.logit_raw < kLogitClamp &&
                          p > kProbClamp && p < 1.0 - kProbClamp;
        if (live) d_logit = (p - targets.labels[i]) / static_cast<double>(n);
      }
      if (model.params.has_bio()) {
        for (int j = 0; j < 4; ++j) {
          const double diff = cache.bio[static_cast<size_t>(j)] - targets.biomarkers[i * 4 + static_cast<size_t>(j)];
          chunk_mse[w] += diff * diff;
          d_bio[static_cast<size_t>(j)] = lambda_bio * diff / (2.0 * static_cast<double>(n));
        }
      }
      backward_one(model, dims, cache, d_logit, d_bio, chunk_grad[w]);
    }
  };

  if (workers == 1) {
    run_chunk(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(run_chunk, w);
    for (auto& t : pool) t.join();
  }

  ParamSet grad = std::move(chunk_grad[0]);
  for (size_t w = 1; w < workers; ++w) accumulate(grad, chunk_grad[w]);

  if (l2 != 0.0) {
    // d/dw of l2 * w^2 = 2 * l2 * w, weights only
    auto add_l2 = [&](Tensor& g, const Tensor& w) {
      for (size_t i = 0; i < g.v.size(); ++i) g.v[i] += 2.0 * l2 * w.v[i];
    };
    for (size_t i = 0; i < grad.conv_w.size(); ++i) add_l2(grad.conv_w[i], model.params.conv_w[i]);
    add_l2(grad.trunk_w, model.params.trunk_w);
    if (grad.has_t2d()) add_l2(grad.t2d_w, model.params.t2d_w);
    if (grad.has_bio()) add_l2(grad.bio_w, model.params.bio_w);
  }

  if (loss_out) {
    double bce = 0.0, mse = 0.0;
    for (size_t w = 0; w < workers; ++w) {
      bce += chunk_bce[w];
      mse += chunk_mse[w];
    }
    loss_out->bce = model.params.has_t2d() ? bce / static_cast<double>(n) : 0.0;
    loss_out->mse = model.params.has_bio() ? lambda_bio * mse / (4.0 * static_cast<double>(n)) : 0.0;
    loss_out->l2 = l2 * weight_sq_norm(model.params);
    loss_out->total = loss_out->bce + loss_out->mse + loss_out->l2;
  }
  return grad;
}

namespace {

constexpr char kCheckpointMagic[8] = {'R', 'S', 'C', 'K', 'P', 'T', '0', '1'};

nlohmann::json config_to_json(const ModelConfig& config) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const ConvBlock& b : config.conv_blocks) {
    blocks.push_back({{"out_channels", b.out_channels},
                      {"kernel", b.kernel},
                      {"stride", b.stride},
                      {"max_pool", b.max_pool}});
  }
  return {{"input_size", config.input_size},
          {"trunk_feature_dim", config.trunk_feature_dim},
          {"head_mode", to_string(config.head_mode)},
          {"conv_blocks", blocks}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig config;
  config.input_size = j.at("input_size").get<int>();
  config.trunk_feature_dim = j.at("trunk_feature_dim").get<int>();
  config.head_mode = parse_head_mode(j.at("head_mode").get<std::string>());
  config.conv_blocks.clear();
  for (const auto& b : j.at("conv_blocks")) {
    config.conv_blocks.push_back({b.at("out_channels").get<int>(), b.at("kernel").get<int>(),
                                  b.at("stride").get<int>(), b.at("max_pool").get<bool>()});
  }
  return config;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const std::map<std::string, std::string>& extra) {
  nlohmann::json header;
  header["version"] = 1;
  header["config"] = config_to_json(model.config);
  char hash_buf[32];
  std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                static_cast<unsigned long long>(config_hash(model.config)));
  header["config_hash"] = hash_buf;
  header["extra"] = extra;

  nlohmann::json tensors = nlohmann::json::array();
  std::string payload;
  model.params.for_each_param([&](const std::string& name, const Tensor& t) {
    tensors.push_back({{"name", name}, {"shape", t.shape}});
    const char* bytes = reinterpret_cast<const char*>(t.v.data());
    payload.append(bytes, t.v.size() * sizeof(double));
  });
  header["tensors"] = tensors;

  const std::string header_str = header.dump();
  std::string blob;
  blob.reserve(8 + 8 + header_str.size() + payload.size());
  blob.append(kCheckpointMagic, sizeof(kCheckpointMagic));
  uint64_t len = header_str.size();
  blob.append(reinterpret_cast<const char*>(&len), sizeof(len));
  blob += header_str;
  blob += payload;

  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::checkpoint_io, "cannot open " + tmp.string());
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) fail(Errc::checkpoint_io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(Errc::checkpoint_io, "rename failed for " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::checkpoint_io, "cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    fail(Errc::checkpoint_io, "bad checkpoint magic in " + path.string());
  uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > (1ULL << 30)) fail(Errc::checkpoint_io, "bad checkpoint header length");
  std::string header_str(len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(len));
  if (!in) fail(Errc::checkpoint_io, "truncated checkpoint header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const std::exception& e) {
    fail(Errc::checkpoint_io, std::string("checkpoint header parse error: ") + e.what());
  }

  Model model;
  try {
    model = build_skeleton(config_from_json(header.at("config")));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(Errc::checkpoint_io, std::string("checkpoint config error: ") + e.what());
  }

  std::map<std::string, Tensor*> by_name;
  model.params.for_each_param([&](const std::string& name, Tensor& t) { by_name[name] = &t; });

  for (const auto& entry : header.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    const std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
    auto it = by_name.find(name);
    if (it == by_name.end())
      fail(Errc::checkpoint_shape_mismatch, "unexpected tensor '" + name + "' in checkpoint");
    if (it->second->shape != shape)
      fail(Errc::checkpoint_shape_mismatch, "tensor '" + name + "' has unexpected shape");
    in.read(reinterpret_cast<char*>(it->second->v.data()),
            static_cast<std::streamsize>(it->second->v.size() * sizeof(double)));
    if (!in) fail(Errc::checkpoint_io, "truncated checkpoint payload at '" + name + "'");
    by_name.erase(it);
  }
  if (!by_name.empty())
    fail(Errc::checkpoint_shape_mismatch,
         "checkpoint missing tensor '" + by_name.begin()->first + "'");
  return model;
}

Model init_model_from_checkpoint(const ModelConfig& config, const std::filesystem::path& path,
                                 uint64_t seed) {
  const Model loaded = load_checkpoint(path);
  if (loaded.config.conv_blocks != config.conv_blocks ||
      loaded.config.trunk_feature_dim != config.trunk_feature_dim)
    fail(Errc::checkpoint_shape_mismatch, "checkpoint trunk architecture differs from config");

  Model model = init_model(config, seed);  // heads absent from the file stay random
  model.params.conv_w = loaded.params.conv_w;
  model.params.conv_b = loaded.params.conv_b;
  model.params.trunk_w = loaded.params.trunk_w;
  model.params.trunk_b = loaded.params.trunk_b;
  if (model.params.has_t2d() && loaded.params.has_t2d()) {
    model.params.t2d_w = loaded.params.t2d_w;
    model.params.t2d_b = loaded.params.t2d_b;
  }
  if (model.params.has_bio() && loaded.params.has_bio()) {
    model.params.bio_w = loaded.params.bio_w;
    model.params.bio_b = loaded.params.bio_b;
  }
  return model;
}

}  // namespace retscreen
