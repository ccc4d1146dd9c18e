#include "trasa/ad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace trasa::ad {

namespace {

template <typename T>
Tape<T>& tape_of(Var<T> v) {
  if (!v.valid()) throw ContractError("operation on an empty Var");
  return *v.tape();
}

template <typename T>
void require_matrix(const Tensor<T>& t, const char* what) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(what) + " expects a 2-D tensor, got " + to_string(t.shape()));
  }
}

// out (m x n) += a (m x k) * b (k x n), optionally with a or b transposed in storage.
template <typename T>
void gemm_acc(const T* a, const T* b, T* out, std::size_t m, std::size_t k, std::size_t n,
              bool a_t, bool b_t) {
  for (std::size_t i = 0; i < m; ++i) {
    T* orow = out + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a_t ? a[p * m + i] : a[i * k + p];
      if (av == T(0)) continue;
      if (!b_t) {
        const T* brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
      } else {
        for (std::size_t j = 0; j < n; ++j) orow[j] += av * b[j * k + p];
      }
    }
  }
}

enum class Broadcast { kFull, kScalar, kRow };

template <typename T>
Broadcast classify(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() == b.shape()) return Broadcast::kFull;
  if (b.size() == 1) return Broadcast::kScalar;
  if (b.size() == a.cols() && a.size() % b.size() == 0 && (b.rank() == 1 || b.rows() == 1)) {
    return Broadcast::kRow;
  }
  throw DimensionError("cannot broadcast " + to_string(b.shape()) + " onto " +
                       to_string(a.shape()));
}

// Splits a shape around `axis` into (outer, extent, inner) strides.
struct AxisView {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisView axis_view(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " + to_string(shape));
  }
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
  v.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

Shape drop_axis(const Shape& shape, std::size_t axis) {
  Shape out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != axis) out.push_back(shape[i]);
  }
  if (out.empty()) out.push_back(1);
  return out;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  Tape<T>& tape = tape_of(a);
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0)) {
    throw DimensionError("matmul shape mismatch: " + to_string(av.shape()) + " x " +
                         to_string(bv.shape()));
  }
  const std::size_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  Tensor<T> out(Shape{m, n});
  gemm_acc(av.data().data(), bv.data().data(), out.data().data(), m, k, n, false, false);
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {a, b}, [ia, ib, m, k, n](Tape<T>& t, std::size_t self) {
    const T* g = t.grad_buffer(self).data();
    if (t.requires_grad(ia)) {
      gemm_acc(g, t.value(ib).data().data(), t.grad_buffer(ia).data(), m, n, k, false, true);
    }
    if (t.requires_grad(ib)) {
      gemm_acc(t.value(ia).data().data(), g, t.grad_buffer(ib).data(), k, m, n, true, false);
    }
  });
}

template <typename T>
Var<T> transpose(Var<T> a) {
  Tape<T>& tape = tape_of(a);
  const Tensor<T>& av = a.value();
  require_matrix(av, "transpose");
  const std::size_t m = av.dim(0), n = av.dim(1);
  Tensor<T> out(Shape{n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  }
  const auto ia = a.id();
  return tape.record(std::move(out), {a}, [ia, m, n](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    auto& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
    }
  });
}

template <typename T>
Var<T> elementwise(Var<T> a, Var<T> b, BinaryOp op) {
  Tape<T>& tape = tape_of(a);
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  const Broadcast mode = classify(av, bv);
  const std::size_t n = av.size();
  const std::size_t bn = bv.size();
  auto bidx = [mode, bn](std::size_t i) {
    switch (mode) {
      case Broadcast::kFull: return i;
      case Broadcast::kScalar: return std::size_t{0};
      case Broadcast::kRow: return i % bn;
    }
    return i;
  };
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const T x = av[i], y = bv[bidx(i)];
    switch (op) {
      case BinaryOp::kAdd: out[i] = x + y; break;
      case BinaryOp::kSub: out[i] = x - y; break;
      case BinaryOp::kMul: out[i] = x * y; break;
    }
  }
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {a, b}, [ia, ib, op, n, bidx](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    if (t.requires_grad(ia)) {
      auto& ga = t.grad_buffer(ia);
      if (op == BinaryOp::kMul) {
        const auto& bv = t.value(ib);
        for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * bv[bidx(i)];
      } else {
        for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
      }
    }
    if (t.requires_grad(ib)) {
      auto& gb = t.grad_buffer(ib);
      switch (op) {
        case BinaryOp::kAdd:
          for (std::size_t i = 0; i < n; ++i) gb[bidx(i)] += g[i];
          break;
        case BinaryOp::kSub:
          for (std::size_t i = 0; i < n; ++i) gb[bidx(i)] -= g[i];
          break;
        case BinaryOp::kMul: {
          const auto& av = t.value(ia);
          for (std::size_t i = 0; i < n; ++i) gb[bidx(i)] += g[i] * av[i];
          break;
        }
      }
    }
  });
}

template <typename T>
Var<T> affine(Var<T> a, T factor, T offset) {
  Tape<T>& tape = tape_of(a);
  const Tensor<T>& av = a.value();
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * factor + offset;
  const auto ia = a.id();
  return tape.record(std::move(out), {a}, [ia, factor](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    auto& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
  });
}

template <typename T>
Var<T> activate(Var<T> x, Activation kind) {
  Tape<T>& tape = tape_of(x);
  const Tensor<T>& xv = x.value();
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const T v = xv[i];
    switch (kind) {
      case Activation::kSigmoid:
        out[i] = v >= T(0) ? T(1) / (T(1) + std::exp(-v)) : std::exp(v) / (T(1) + std::exp(v));
        break;
      case Activation::kTanh: out[i] = std::tanh(v); break;
      case Activation::kRelu: out[i] = v > T(0) ? v : T(0); break;
    }
  }
  const auto ix = x.id();
  return tape.record(std::move(out), {x}, [ix, kind](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    const auto& y = t.value(self);
    auto& gx = t.grad_buffer(ix);
    for (std::size_t i = 0; i < g.size(); ++i) {
      switch (kind) {
        case Activation::kSigmoid: gx[i] += g[i] * y[i] * (T(1) - y[i]); break;
        case Activation::kTanh: gx[i] += g[i] * (T(1) - y[i] * y[i]); break;
        case Activation::kRelu: gx[i] += y[i] > T(0) ? g[i] : T(0); break;
      }
    }
  });
}

template <typename T>
Var<T> log_clamped(Var<T> x, T lo, T hi) {
  Tape<T>& tape = tape_of(x);
  const Tensor<T>& xv = x.value();
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = std::log(std::clamp(xv[i], lo, hi));
  const auto ix = x.id();
  return tape.record(std::move(out), {x}, [ix, lo, hi](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    const auto& xv = t.value(ix);
    auto& gx = t.grad_buffer(ix);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > lo && xv[i] < hi) gx[i] += g[i] / xv[i];
    }
  });
}

template <typename T>
Var<T> softmax(Var<T> x, std::size_t axis) {
  Tape<T>& tape = tape_of(x);
  const Tensor<T>& xv = x.value();
  const AxisView v = axis_view(xv.shape(), axis);
  Tensor<T> out(xv.shape());
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t in = 0; in < v.inner; ++in) {
      const std::size_t base = o * v.extent * v.inner + in;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t k = 0; k < v.extent; ++k) {
        const T val = xv[base + k * v.inner];
        if (!std::isfinite(val)) throw NumericError("softmax input contains a non-finite value");
        mx = std::max(mx, val);
      }
      T total = 0;
      for (std::size_t k = 0; k < v.extent; ++k) {
        const T e = std::exp(xv[base + k * v.inner] - mx);
        out[base + k * v.inner] = e;
        total += e;
      }
      for (std::size_t k = 0; k < v.extent; ++k) out[base + k * v.inner] /= total;
    }
  }
  const auto ix = x.id();
  return tape.record(std::move(out), {x}, [ix, v](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    const auto& y = t.value(self);
    auto& gx = t.grad_buffer(ix);
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t in = 0; in < v.inner; ++in) {
        const std::size_t base = o * v.extent * v.inner + in;
        T dot = 0;
        for (std::size_t k = 0; k < v.extent; ++k) {
          const std::size_t i = base + k * v.inner;
          dot += g[i] * y[i];
        }
        for (std::size_t k = 0; k < v.extent; ++k) {
          const std::size_t i = base + k * v.inner;
          gx[i] += y[i] * (g[i] - dot);
        }
      }
    }
  });
}

template <typename T>
Var<T> gather_rows(Var<T> table, std::span<const std::size_t> indices) {
  Tape<T>& tape = tape_of(table);
  const Tensor<T>& tv = table.value();
  require_matrix(tv, "gather_rows");
  const std::size_t n = tv.dim(0), d = tv.dim(1);
  if (indices.empty()) throw DimensionError("gather_rows needs at least one index");
  Tensor<T> out(Shape{indices.size(), d});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t row = indices[r];
    if (row >= n) {
      throw BoundsError("gather_rows index " + std::to_string(row) + " out of range for " +
                        std::to_string(n) + " rows");
    }
    std::copy_n(tv.data().begin() + row * d, d, out.data().begin() + r * d);
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  const auto it = table.id();
  return tape.record(std::move(out), {table},
                     [it, d, idx = std::move(idx)](Tape<T>& t, std::size_t self) {
                       const auto& g = t.grad_buffer(self);
                       auto& gt = t.grad_buffer(it);
                       for (std::size_t r = 0; r < idx.size(); ++r) {
                         T* dst = gt.data() + idx[r] * d;
                         const T* src = g.data() + r * d;
                         for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
                       }
                     });
}

template <typename T>
Var<T> concat(std::span<const Var<T>> parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat of zero tensors");
  Tape<T>& tape = tape_of(parts[0]);
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) {
    throw DimensionError("concat axis " + std::to_string(axis) + " out of range for " +
                         to_string(first));
  }
  Shape out_shape = first;
  out_shape[axis] = 0;
  std::vector<std::size_t> extents;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = i == axis || s[i] == first[i];
    if (!ok) {
      throw DimensionError("concat shape mismatch: " + to_string(first) + " vs " + to_string(s));
    }
    extents.push_back(s[axis]);
    out_shape[axis] += s[axis];
  }
  const AxisView ov = axis_view(out_shape, axis);
  Tensor<T> out(out_shape);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Tensor<T>& pv = parts[p].value();
    const std::size_t chunk = extents[p] * ov.inner;
    for (std::size_t o = 0; o < ov.outer; ++o) {
      std::copy_n(pv.data().begin() + o * chunk, chunk,
                  out.data().begin() + o * ov.extent * ov.inner + offset * ov.inner);
    }
    offset += extents[p];
  }
  std::vector<std::size_t> ids;
  for (const auto& p : parts) ids.push_back(p.id());
  return tape.record(std::move(out), parts,
                     [ids, extents, ov](Tape<T>& t, std::size_t self) {
                       const auto& g = t.grad_buffer(self);
                       std::size_t offset = 0;
                       for (std::size_t p = 0; p < ids.size(); ++p) {
                         const std::size_t chunk = extents[p] * ov.inner;
                         if (t.requires_grad(ids[p])) {
                           auto& gp = t.grad_buffer(ids[p]);
                           for (std::size_t o = 0; o < ov.outer; ++o) {
                             const T* src = g.data() + o * ov.extent * ov.inner + offset * ov.inner;
                             T* dst = gp.data() + o * chunk;
                             for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
                           }
                         }
                         offset += extents[p];
                       }
                     });
}

template <typename T>
Var<T> slice(Var<T> x, std::size_t axis, std::size_t begin, std::size_t end) {
  Tape<T>& tape = tape_of(x);
  const Tensor<T>& xv = x.value();
  const AxisView v = axis_view(xv.shape(), axis);
  if (begin >= end || end > v.extent) {
    throw DimensionError("slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") out of range for axis " + std::to_string(axis) + " of " +
                         to_string(xv.shape()));
  }
  Shape out_shape = xv.shape();
  out_shape[axis] = end - begin;
  const std::size_t chunk = (end - begin) * v.inner;
  Tensor<T> out(out_shape);
  for (std::size_t o = 0; o < v.outer; ++o) {
    std::copy_n(xv.data().begin() + o * v.extent * v.inner + begin * v.inner, chunk,
                out.data().begin() + o * chunk);
  }
  const auto ix = x.id();
  return tape.record(std::move(out), {x}, [ix, v, begin, chunk](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    auto& gx = t.grad_buffer(ix);
    for (std::size_t o = 0; o < v.outer; ++o) {
      T* dst = gx.data() + o * v.extent * v.inner + begin * v.inner;
      const T* src = g.data() + o * chunk;
      for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
    }
  });
}

template <typename T>
Var<T> reshape(Var<T> x, Shape shape) {
  Tape<T>& tape = tape_of(x);
  Tensor<T> out = x.value();
  out.clear_grad();
  out.reshape(std::move(shape));
  const auto ix = x.id();
  return tape.record(std::move(out), {x}, [ix](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    auto& gx = t.grad_buffer(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

template <typename T>
Var<T> sum(Var<T> x) {
  Tape<T>& tape = tape_of(x);
  const Tensor<T>& xv = x.value();
  T total = 0;
  for (T v : xv.data()) total += v;
  const auto ix = x.id();
  return tape.record(Tensor<T>::scalar(total), {x}, [ix](Tape<T>& t, std::size_t self) {
    const T g = t.grad_buffer(self)[0];
    for (auto& v : t.grad_buffer(ix)) v += g;
  });
}

template <typename T>
Var<T> sum(Var<T> x, std::size_t axis) {
  Tape<T>& tape = tape_of(x);
  const Tensor<T>& xv = x.value();
  const AxisView v = axis_view(xv.shape(), axis);
  Tensor<T> out(drop_axis(xv.shape(), axis));
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t k = 0; k < v.extent; ++k) {
      const T* src = xv.data().data() + (o * v.extent + k) * v.inner;
      T* dst = out.data().data() + o * v.inner;
      for (std::size_t in = 0; in < v.inner; ++in) dst[in] += src[in];
    }
  }
  const auto ix = x.id();
  return tape.record(std::move(out), {x}, [ix, v](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    auto& gx = t.grad_buffer(ix);
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t k = 0; k < v.extent; ++k) {
        T* dst = gx.data() + (o * v.extent + k) * v.inner;
        const T* src = g.data() + o * v.inner;
        for (std::size_t in = 0; in < v.inner; ++in) dst[in] += src[in];
      }
    }
  });
}

template <typename T>
Var<T> mean(Var<T> x) {
  const auto count = static_cast<T>(x.value().size());
  return affine(sum(x), T(1) / count);
}

template <typename T>
Var<T> mean(Var<T> x, std::size_t axis) {
  const auto count = static_cast<T>(axis_view(x.shape(), axis).extent);
  return affine(sum(x, axis), T(1) / count);
}

template <typename T>
Var<T> l2_normalize_rows(Var<T> x) {
  Tape<T>& tape = tape_of(x);
  const Tensor<T>& xv = x.value();
  const std::size_t d = xv.cols();
  const std::size_t rows = xv.size() / d;
  Tensor<T> out(xv.shape());
  std::vector<T> norms(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    T sq = 0;
    for (std::size_t c = 0; c < d; ++c) sq += xv[r * d + c] * xv[r * d + c];
    norms[r] = std::sqrt(sq + T(1e-12));
    for (std::size_t c = 0; c < d; ++c) out[r * d + c] = xv[r * d + c] / norms[r];
  }
  const auto ix = x.id();
  return tape.record(std::move(out), {x},
                     [ix, d, rows, norms = std::move(norms)](Tape<T>& t, std::size_t self) {
                       const auto& g = t.grad_buffer(self);
                       const auto& y = t.value(self);
                       auto& gx = t.grad_buffer(ix);
                       for (std::size_t r = 0; r < rows; ++r) {
                         T dot = 0;
                         for (std::size_t c = 0; c < d; ++c) dot += g[r * d + c] * y[r * d + c];
                         for (std::size_t c = 0; c < d; ++c) {
                           const std::size_t i = r * d + c;
                           gx[i] += (g[i] - y[i] * dot) / norms[r];
                         }
                       }
                     });
}

template <typename T>
Var<T> layer_norm_rows(Var<T> x, Var<T> gain, Var<T> bias, T eps) {
  Tape<T>& tape = tape_of(x);
  const Tensor<T>& xv = x.value();
  const std::size_t d = xv.cols();
  const std::size_t rows = xv.size() / d;
  if (gain.value().size() != d || bias.value().size() != d) {
    throw DimensionError("layer_norm_rows gain/bias " + to_string(gain.shape()) + "/" +
                         to_string(bias.shape()) + " do not match rows of " +
                         to_string(xv.shape()));
  }
  const Tensor<T>& gv = gain.value();
  const Tensor<T>& bv = bias.value();
  Tensor<T> out(xv.shape());
  std::vector<T> normed(xv.size());
  std::vector<T> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = xv.data().data() + r * d;
    T mu = 0;
    for (std::size_t c = 0; c < d; ++c) mu += row[c];
    mu /= static_cast<T>(d);
    T var = 0;
    for (std::size_t c = 0; c < d; ++c) var += (row[c] - mu) * (row[c] - mu);
    var /= static_cast<T>(d);
    inv_std[r] = T(1) / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) {
      const std::size_t i = r * d + c;
      normed[i] = (row[c] - mu) * inv_std[r];
      out[i] = normed[i] * gv[c] + bv[c];
    }
  }
  const auto ix = x.id(), ig = gain.id(), ib = bias.id();
  return tape.record(
      std::move(out), {x, gain, bias},
      [ix, ig, ib, d, rows, normed = std::move(normed), inv_std = std::move(inv_std)](
          Tape<T>& t, std::size_t self) {
        const auto& g = t.grad_buffer(self);
        if (t.requires_grad(ig)) {
          auto& gg = t.grad_buffer(ig);
          for (std::size_t i = 0; i < g.size(); ++i) gg[i % d] += g[i] * normed[i];
        }
        if (t.requires_grad(ib)) {
          auto& gb = t.grad_buffer(ib);
          for (std::size_t i = 0; i < g.size(); ++i) gb[i % d] += g[i];
        }
        if (t.requires_grad(ix)) {
          const auto& gain_v = t.value(ig);
          auto& gx = t.grad_buffer(ix);
          const T inv_d = T(1) / static_cast<T>(d);
          for (std::size_t r = 0; r < rows; ++r) {
            T sum_g = 0, sum_gn = 0;
            for (std::size_t c = 0; c < d; ++c) {
              const std::size_t i = r * d + c;
              const T gh = g[i] * gain_v[c];
              sum_g += gh;
              sum_gn += gh * normed[i];
            }
            for (std::size_t c = 0; c < d; ++c) {
              const std::size_t i = r * d + c;
              const T gh = g[i] * gain_v[c];
              gx[i] += inv_std[r] * (gh - inv_d * sum_g - normed[i] * inv_d * sum_gn);
            }
          }
        }
      });
}

std::vector<std::uint8_t> dropout_mask(std::size_t count, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError("dropout probability must lie in [0, 1), got " + std::to_string(p));
  }
  std::vector<std::uint8_t> mask(count);
  std::uint64_t state = seed;
  for (auto& m : mask) {
    const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    m = u >= p ? 1 : 0;
  }
  return mask;
}

template <typename T>
Var<T> dropout(Var<T> x, double p, bool training, std::uint64_t seed) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError("dropout probability must lie in [0, 1), got " + std::to_string(p));
  }
  if (!training || p == 0.0) return x;
  Tape<T>& tape = tape_of(x);
  const Tensor<T>& xv = x.value();
  auto mask = dropout_mask(xv.size(), p, seed);
  const T scale = T(1) / static_cast<T>(1.0 - p);
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = mask[i] ? xv[i] * scale : T(0);
  const auto ix = x.id();
  return tape.record(std::move(out), {x},
                     [ix, scale, mask = std::move(mask)](Tape<T>& t, std::size_t self) {
                       const auto& g = t.grad_buffer(self);
                       auto& gx = t.grad_buffer(ix);
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         if (mask[i]) gx[i] += g[i] * scale;
                       }
                     });
}

template <typename T>
Tensor<T> scatter_add(const Tensor<T>& rows, std::span<const std::size_t> indices,
                      std::size_t table_rows) {
  require_matrix(rows, "scatter_add");
  if (rows.dim(0) != indices.size()) {
    throw DimensionError("scatter_add: " + std::to_string(indices.size()) + " indices for " +
                         to_string(rows.shape()));
  }
  const std::size_t d = rows.dim(1);
  Tensor<T> out(Shape{table_rows, d});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= table_rows) {
      throw BoundsError("scatter_add index " + std::to_string(indices[r]) + " out of range");
    }
    for (std::size_t c = 0; c < d; ++c) out[indices[r] * d + c] += rows[r * d + c];
  }
  return out;
}

#define TRASA_INSTANTIATE_OPS(T)                                                          \
  template Var<T> matmul(Var<T>, Var<T>);                                                 \
  template Var<T> transpose(Var<T>);                                                      \
  template Var<T> elementwise(Var<T>, Var<T>, BinaryOp);                                  \
  template Var<T> affine(Var<T>, T, T);                                                   \
  template Var<T> activate(Var<T>, Activation);                                           \
  template Var<T> log_clamped(Var<T>, T, T);                                              \
  template Var<T> softmax(Var<T>, std::size_t);                                           \
  template Var<T> gather_rows(Var<T>, std::span<const std::size_t>);                      \
  template Var<T> concat(std::span<const Var<T>>, std::size_t);                           \
  template Var<T> slice(Var<T>, std::size_t, std::size_t, std::size_t);                   \
  template Var<T> reshape(Var<T>, Shape);                                                 \
  template Var<T> sum(Var<T>);                                                            \
  template Var<T> sum(Var<T>, std::size_t);                                               \
  template Var<T> mean(Var<T>);                                                           \
  template Var<T> mean(Var<T>, std::size_t);                                              \
  template Var<T> l2_normalize_rows(Var<T>);                                              \
  template Var<T> layer_norm_rows(Var<T>, Var<T>, Var<T>, T);                             \
  template Var<T> dropout(Var<T>, double, bool, std::uint64_t);                           \
  template Tensor<T> scatter_add(const Tensor<T>&, std::span<const std::size_t>, std::size_t);

TRASA_INSTANTIATE_OPS(float)
TRASA_INSTANTIATE_OPS(double)

#undef TRASA_INSTANTIATE_OPS

}  // namespace trasa::ad
