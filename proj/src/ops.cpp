#include "negm/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "negm/errors.hpp"
#include "negm/kernels.hpp"

namespace negm::ops {

namespace {

Tape* tape_of(const Value& a, const char* op) {
    if (!a.valid()) throw std::logic_error(std::string(op) + ": invalid operand");
    return a.tape;
}

Tape* tape_of(const Value& a, const Value& b, const char* op) {
    Tape* t = tape_of(a, op);
    if (b.tape != t) throw std::logic_error(std::string(op) + ": operands on different tapes");
    return t;
}

void check_same_shape(const Value& a, const Value& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + a.tensor().shape_str() + " vs " +
                         b.tensor().shape_str());
}

template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, F f) {
    Tensor out(a.shape());
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (int64_t i = 0; i < a.size(); ++i) po[i] = f(pa[i], pb[i]);
    return out;
}

template <typename F>
Tensor map(const Tensor& a, F f) {
    Tensor out(a.shape());
    const double* pa = a.data();
    double* po = out.data();
    for (int64_t i = 0; i < a.size(); ++i) po[i] = f(pa[i]);
    return out;
}

// shape helpers for axis-1 ops: [B, C, inner...]
void axis1_dims(const std::vector<int>& shape, int& b, int& c, int64_t& inner) {
    if (shape.size() < 2) throw ShapeError("axis-1 op requires rank >= 2");
    b = shape[0];
    c = shape[1];
    inner = 1;
    for (size_t i = 2; i < shape.size(); ++i) inner *= shape[i];
}

}  // namespace

Value add(const Value& a, const Value& b) {
    Tape* t = tape_of(a, b, "add");
    check_same_shape(a, b, "add");
    Tensor out = zip(a.tensor(), b.tensor(), [](double x, double y) { return x + y; });
    return t->record(std::move(out), {a, b}, [](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{gy, gy};
    });
}

Value sub(const Value& a, const Value& b) {
    Tape* t = tape_of(a, b, "sub");
    check_same_shape(a, b, "sub");
    Tensor out = zip(a.tensor(), b.tensor(), [](double x, double y) { return x - y; });
    return t->record(std::move(out), {a, b},
                     [](const Value& gy, const Value&, const std::vector<char>& needs) {
                         std::vector<Value> g(2);
                         g[0] = gy;
                         if (needs[1]) g[1] = neg(gy);
                         return g;
                     });
}

Value mul(const Value& a, const Value& b) {
    Tape* t = tape_of(a, b, "mul");
    check_same_shape(a, b, "mul");
    Tensor out = zip(a.tensor(), b.tensor(), [](double x, double y) { return x * y; });
    return t->record(std::move(out), {a, b},
                     [a, b](const Value& gy, const Value&, const std::vector<char>& needs) {
                         std::vector<Value> g(2);
                         if (needs[0]) g[0] = mul(gy, b);
                         if (needs[1]) g[1] = mul(gy, a);
                         return g;
                     });
}

Value div(const Value& a, const Value& b) {
    Tape* t = tape_of(a, b, "div");
    check_same_shape(a, b, "div");
    Tensor out = zip(a.tensor(), b.tensor(), [](double x, double y) { return x / y; });
    return t->record(std::move(out), {a, b},
                     [a, b](const Value& gy, const Value& self, const std::vector<char>& needs) {
                         std::vector<Value> g(2);
                         if (needs[0]) g[0] = div(gy, b);
                         if (needs[1]) g[1] = neg(mul(gy, div(self, b)));
                         return g;
                     });
}

Value neg(const Value& a) {
    Tape* t = tape_of(a, "neg");
    Tensor out = map(a.tensor(), [](double x) { return -x; });
    return t->record(std::move(out), {a}, [](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{neg(gy)};
    });
}

Value scale(const Value& a, double c) {
    Tape* t = tape_of(a, "scale");
    Tensor out = map(a.tensor(), [c](double x) { return c * x; });
    return t->record(std::move(out), {a}, [c](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{scale(gy, c)};
    });
}

Value add_scalar(const Value& a, double c) {
    Tape* t = tape_of(a, "add_scalar");
    Tensor out = map(a.tensor(), [c](double x) { return x + c; });
    return t->record(std::move(out), {a}, [](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{gy};
    });
}

Value exp(const Value& a) {
    Tape* t = tape_of(a, "exp");
    Tensor out = map(a.tensor(), [](double x) { return std::exp(x); });
    return t->record(std::move(out), {a}, [](const Value& gy, const Value& self, const std::vector<char>&) {
        return std::vector<Value>{mul(gy, self)};
    });
}

Value log(const Value& a) {
    Tape* t = tape_of(a, "log");
    Tensor out = map(a.tensor(), [](double x) { return std::log(x); });
    return t->record(std::move(out), {a}, [a](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{div(gy, a)};
    });
}

Value sqrt(const Value& a) {
    Tape* t = tape_of(a, "sqrt");
    Tensor out = map(a.tensor(), [](double x) { return std::sqrt(x); });
    return t->record(std::move(out), {a}, [](const Value& gy, const Value& self, const std::vector<char>&) {
        return std::vector<Value>{div(gy, scale(self, 2.0))};
    });
}

Value relu(const Value& a) {
    Tape* t = tape_of(a, "relu");
    Tensor mask = map(a.tensor(), [](double x) { return x > 0.0 ? 1.0 : 0.0; });
    Tensor out = zip(a.tensor(), mask, [](double x, double m) { return x * m; });
    return t->record(std::move(out), {a}, [mask](const Value& gy, const Value&, const std::vector<char>&) {
        Value m = gy.tape->constant(mask);
        return std::vector<Value>{mul(gy, m)};
    });
}

Value reshape(const Value& a, std::vector<int> shape) {
    Tape* t = tape_of(a, "reshape");
    if (Tensor::numel(shape) != a.tensor().size())
        throw ShapeError("reshape: element count mismatch");
    Tensor out(shape, a.tensor().vec());
    std::vector<int> old_shape = a.shape();
    return t->record(std::move(out), {a},
                     [old_shape](const Value& gy, const Value&, const std::vector<char>&) {
                         return std::vector<Value>{reshape(gy, old_shape)};
                     });
}

Value transpose2d(const Value& a) {
    Tape* t = tape_of(a, "transpose2d");
    if (a.shape().size() != 2) throw ShapeError("transpose2d requires rank 2");
    const int m = a.shape()[0], n = a.shape()[1];
    Tensor out({n, m});
    const double* pa = a.tensor().data();
    double* po = out.data();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) po[static_cast<int64_t>(j) * m + i] = pa[static_cast<int64_t>(i) * n + j];
    return t->record(std::move(out), {a}, [](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{transpose2d(gy)};
    });
}

Value sum_all(const Value& a) {
    Tape* t = tape_of(a, "sum_all");
    double s = 0.0;
    const double* pa = a.tensor().data();
    for (int64_t i = 0; i < a.tensor().size(); ++i) s += pa[i];
    std::vector<int> shape = a.shape();
    return t->record(Tensor::scalar(s), {a}, [shape](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{broadcast_scalar(gy, shape)};
    });
}

Value broadcast_scalar(const Value& s, std::vector<int> shape) {
    Tape* t = tape_of(s, "broadcast_scalar");
    if (s.tensor().size() != 1) throw ShapeError("broadcast_scalar requires scalar input");
    Tensor out = Tensor::full(shape, s.tensor()[0]);
    return t->record(std::move(out), {s}, [](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{sum_all(gy)};
    });
}

Value sum_samples(const Value& a) {
    Tape* t = tape_of(a, "sum_samples");
    if (a.shape().empty()) throw ShapeError("sum_samples requires rank >= 1");
    const int b = a.shape()[0];
    const int64_t inner = a.tensor().size() / b;
    Tensor out({b});
    const double* pa = a.tensor().data();
    for (int i = 0; i < b; ++i) {
        double s = 0.0;
        const double* row = pa + i * inner;
        for (int64_t j = 0; j < inner; ++j) s += row[j];
        out[i] = s;
    }
    std::vector<int> shape = a.shape();
    return t->record(std::move(out), {a}, [shape](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{broadcast_samples(gy, shape)};
    });
}

Value broadcast_samples(const Value& v, std::vector<int> shape) {
    Tape* t = tape_of(v, "broadcast_samples");
    if (v.shape().size() != 1 || shape.empty() || v.shape()[0] != shape[0])
        throw ShapeError("broadcast_samples: batch dim mismatch");
    const int b = shape[0];
    Tensor out(shape);
    const int64_t inner = out.size() / b;
    const double* pv = v.tensor().data();
    double* po = out.data();
    for (int i = 0; i < b; ++i)
        for (int64_t j = 0; j < inner; ++j) po[i * inner + j] = pv[i];
    return t->record(std::move(out), {v}, [](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{sum_samples(gy)};
    });
}

Value sum_to_axis1(const Value& a) {
    Tape* t = tape_of(a, "sum_to_axis1");
    int b, c;
    int64_t inner;
    axis1_dims(a.shape(), b, c, inner);
    Tensor out({c});
    const double* pa = a.tensor().data();
    for (int bi = 0; bi < b; ++bi)
        for (int ci = 0; ci < c; ++ci) {
            double s = 0.0;
            const double* row = pa + (static_cast<int64_t>(bi) * c + ci) * inner;
            for (int64_t j = 0; j < inner; ++j) s += row[j];
            out[ci] += s;
        }
    std::vector<int> shape = a.shape();
    return t->record(std::move(out), {a}, [shape](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{broadcast_axis1(gy, shape)};
    });
}

Value broadcast_axis1(const Value& v, std::vector<int> shape) {
    Tape* t = tape_of(v, "broadcast_axis1");
    int b, c;
    int64_t inner;
    axis1_dims(shape, b, c, inner);
    if (v.shape().size() != 1 || v.shape()[0] != c)
        throw ShapeError("broadcast_axis1: channel dim mismatch");
    Tensor out(shape);
    const double* pv = v.tensor().data();
    double* po = out.data();
    for (int bi = 0; bi < b; ++bi)
        for (int ci = 0; ci < c; ++ci) {
            double* row = po + (static_cast<int64_t>(bi) * c + ci) * inner;
            for (int64_t j = 0; j < inner; ++j) row[j] = pv[ci];
        }
    return t->record(std::move(out), {v}, [](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{sum_to_axis1(gy)};
    });
}

Value mean_all(const Value& a) { return scale(sum_all(a), 1.0 / static_cast<double>(a.tensor().size())); }

Value pick_class(const Value& logits, const std::vector<int>& labels) {
    Tape* t = tape_of(logits, "pick_class");
    if (logits.shape().size() != 2) throw ShapeError("pick_class requires [B,C] logits");
    const int b = logits.shape()[0], c = logits.shape()[1];
    if (static_cast<int>(labels.size()) != b) throw ShapeError("pick_class: labels size mismatch");
    Tensor out({b});
    const double* pl = logits.tensor().data();
    for (int i = 0; i < b; ++i) {
        if (labels[i] < 0 || labels[i] >= c)
            throw std::out_of_range("label out of range: " + std::to_string(labels[i]));
        out[i] = pl[static_cast<int64_t>(i) * c + labels[i]];
    }
    std::vector<int> lab = labels;
    return t->record(std::move(out), {logits}, [lab, c](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{scatter_class(gy, lab, c)};
    });
}

Value scatter_class(const Value& v, const std::vector<int>& labels, int classes) {
    Tape* t = tape_of(v, "scatter_class");
    if (v.shape().size() != 1) throw ShapeError("scatter_class requires [B] input");
    const int b = v.shape()[0];
    if (static_cast<int>(labels.size()) != b)
        throw ShapeError("scatter_class: labels size mismatch");
    Tensor out({b, classes});
    const double* pv = v.tensor().data();
    for (int i = 0; i < b; ++i) out[static_cast<int64_t>(i) * classes + labels[i]] = pv[i];
    std::vector<int> lab = labels;
    return t->record(std::move(out), {v}, [lab](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{pick_class(gy, lab)};
    });
}

Value concat_channels(const Value& a, const Value& b) {
    Tape* t = tape_of(a, b, "concat_channels");
    int ba, ca, bb, cb;
    int64_t ia, ib;
    axis1_dims(a.shape(), ba, ca, ia);
    axis1_dims(b.shape(), bb, cb, ib);
    std::vector<int> sa = a.shape(), sb = b.shape();
    if (ba != bb || ia != ib || sa.size() != sb.size())
        throw ShapeError("concat_channels: non-channel dims must match");
    for (size_t i = 2; i < sa.size(); ++i)
        if (sa[i] != sb[i]) throw ShapeError("concat_channels: spatial dims must match");
    std::vector<int> os = sa;
    os[1] = ca + cb;
    Tensor out(os);
    const double* pa = a.tensor().data();
    const double* pb = b.tensor().data();
    double* po = out.data();
    for (int bi = 0; bi < ba; ++bi) {
        double* dst = po + static_cast<int64_t>(bi) * (ca + cb) * ia;
        std::copy_n(pa + static_cast<int64_t>(bi) * ca * ia, ca * ia, dst);
        std::copy_n(pb + static_cast<int64_t>(bi) * cb * ia, cb * ia, dst + ca * ia);
    }
    return t->record(std::move(out), {a, b},
                     [ca, cb](const Value& gy, const Value&, const std::vector<char>& needs) {
                         std::vector<Value> g(2);
                         if (needs[0]) g[0] = slice_channels(gy, 0, ca);
                         if (needs[1]) g[1] = slice_channels(gy, ca, ca + cb);
                         return g;
                     });
}

Value slice_channels(const Value& a, int c0, int c1) {
    Tape* t = tape_of(a, "slice_channels");
    int b, c;
    int64_t inner;
    axis1_dims(a.shape(), b, c, inner);
    if (c0 < 0 || c1 > c || c0 >= c1) throw ShapeError("slice_channels: bad channel range");
    std::vector<int> os = a.shape();
    os[1] = c1 - c0;
    Tensor out(os);
    const double* pa = a.tensor().data();
    double* po = out.data();
    for (int bi = 0; bi < b; ++bi)
        std::copy_n(pa + (static_cast<int64_t>(bi) * c + c0) * inner,
                    static_cast<int64_t>(c1 - c0) * inner,
                    po + static_cast<int64_t>(bi) * (c1 - c0) * inner);
    const int after = c - c1;
    return t->record(std::move(out), {a}, [c0, after](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{pad_channels(gy, c0, after)};
    });
}

Value pad_channels(const Value& a, int before, int after) {
    Tape* t = tape_of(a, "pad_channels");
    if (before < 0 || after < 0) throw ShapeError("pad_channels: negative padding");
    int b, c;
    int64_t inner;
    axis1_dims(a.shape(), b, c, inner);
    std::vector<int> os = a.shape();
    os[1] = before + c + after;
    Tensor out(os);
    const double* pa = a.tensor().data();
    double* po = out.data();
    for (int bi = 0; bi < b; ++bi)
        std::copy_n(pa + static_cast<int64_t>(bi) * c * inner, static_cast<int64_t>(c) * inner,
                    po + (static_cast<int64_t>(bi) * (before + c + after) + before) * inner);
    return t->record(std::move(out), {a}, [before, c](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{slice_channels(gy, before, before + c)};
    });
}

Value matmul(const Value& a, const Value& b) {
    Tape* t = tape_of(a, b, "matmul");
    if (a.shape().size() != 2 || b.shape().size() != 2 || a.shape()[1] != b.shape()[0])
        throw ShapeError("matmul: incompatible shapes " + a.tensor().shape_str() + " x " +
                         b.tensor().shape_str());
    const int m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
    Tensor out({m, n});
    kernels::matmul(m, k, n, a.tensor().data(), b.tensor().data(), out.data());
    return t->record(std::move(out), {a, b},
                     [a, b](const Value& gy, const Value&, const std::vector<char>& needs) {
                         std::vector<Value> g(2);
                         if (needs[0]) g[0] = matmul(gy, transpose2d(b));
                         if (needs[1]) g[1] = matmul(transpose2d(a), gy);
                         return g;
                     });
}

Value conv2d(const Value& x, const Value& k, int stride) {
    Tape* t = tape_of(x, k, "conv2d");
    kernels::Conv2dGeom g = kernels::conv2d_geometry(x.shape(), k.shape(), stride);
    Tensor out({g.batch, g.out_ch, g.out_h, g.out_w});
    kernels::conv2d_forward(g, x.tensor().data(), k.tensor().data(), out.data());
    std::vector<int> xs = x.shape(), ks = k.shape();
    return t->record(std::move(out), {x, k},
                     [x, k, xs, ks, stride](const Value& gy, const Value&,
                                            const std::vector<char>& needs) {
                         std::vector<Value> gr(2);
                         if (needs[0]) gr[0] = conv2d_grad_input_op(gy, k, xs, stride);
                         if (needs[1]) gr[1] = conv2d_grad_kernel_op(x, gy, ks, stride);
                         return gr;
                     });
}

Value conv2d_grad_input_op(const Value& gy, const Value& k, std::vector<int> x_shape,
                           int stride) {
    Tape* t = tape_of(gy, k, "conv2d_grad_input");
    kernels::Conv2dGeom g = kernels::conv2d_geometry(x_shape, k.shape(), stride);
    if (gy.shape() != std::vector<int>{g.batch, g.out_ch, g.out_h, g.out_w})
        throw ShapeError("conv2d_grad_input: gy shape mismatch");
    Tensor out(x_shape);
    kernels::conv2d_grad_input(g, gy.tensor().data(), k.tensor().data(), out.data());
    std::vector<int> ks = k.shape();
    return t->record(std::move(out), {gy, k},
                     [gy, k, ks, stride](const Value& u, const Value&,
                                         const std::vector<char>& needs) {
                         std::vector<Value> gr(2);
                         if (needs[0]) gr[0] = conv2d(u, k, stride);
                         if (needs[1]) gr[1] = conv2d_grad_kernel_op(u, gy, ks, stride);
                         return gr;
                     });
}

Value conv2d_grad_kernel_op(const Value& x, const Value& gy, std::vector<int> k_shape,
                            int stride) {
    Tape* t = tape_of(x, gy, "conv2d_grad_kernel");
    kernels::Conv2dGeom g = kernels::conv2d_geometry(x.shape(), k_shape, stride);
    if (gy.shape() != std::vector<int>{g.batch, g.out_ch, g.out_h, g.out_w})
        throw ShapeError("conv2d_grad_kernel: gy shape mismatch");
    Tensor out(k_shape);
    kernels::conv2d_grad_kernel(g, x.tensor().data(), gy.tensor().data(), out.data());
    std::vector<int> xs = x.shape();
    return t->record(std::move(out), {x, gy},
                     [x, gy, xs, stride](const Value& v, const Value&,
                                         const std::vector<char>& needs) {
                         std::vector<Value> gr(2);
                         if (needs[0]) gr[0] = conv2d_grad_input_op(gy, v, xs, stride);
                         if (needs[1]) gr[1] = conv2d(x, v, stride);
                         return gr;
                     });
}

Value maxpool2(const Value& x) {
    Tape* t = tape_of(x, "maxpool2");
    if (x.shape().size() != 4) throw ShapeError("maxpool2 requires [B,C,H,W]");
    const int b = x.shape()[0], c = x.shape()[1], h = x.shape()[2], w = x.shape()[3];
    if (h < 2 || w < 2) throw ShapeError("maxpool2: spatial dims must be >= 2");
    Tensor out({b, c, h / 2, w / 2});
    Tensor idx({b, c, h / 2, w / 2});
    kernels::maxpool2_forward(b, c, h, w, x.tensor().data(), out.data(), idx.data());
    std::vector<int> xs = x.shape();
    return t->record(std::move(out), {x}, [idx, xs](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{maxpool2_scatter_op(gy, idx, xs)};
    });
}

Value maxpool2_scatter_op(const Value& gy, const Tensor& idx, std::vector<int> x_shape) {
    Tape* t = tape_of(gy, "maxpool2_scatter");
    const int b = x_shape[0], c = x_shape[1], h = x_shape[2], w = x_shape[3];
    if (gy.shape() != idx.shape()) throw ShapeError("maxpool2_scatter: gy/idx shape mismatch");
    Tensor out(x_shape);
    kernels::maxpool2_scatter(b, c, h, w, gy.tensor().data(), idx.data(), out.data());
    Tensor idx_copy = idx;
    return t->record(std::move(out), {gy}, [idx_copy](const Value& u, const Value&, const std::vector<char>&) {
        return std::vector<Value>{maxpool2_gather_op(u, idx_copy)};
    });
}

Value maxpool2_gather_op(const Value& u, const Tensor& idx) {
    Tape* t = tape_of(u, "maxpool2_gather");
    if (u.shape().size() != 4) throw ShapeError("maxpool2_gather requires [B,C,H,W]");
    const int b = u.shape()[0], c = u.shape()[1], h = u.shape()[2], w = u.shape()[3];
    if (idx.shape() != std::vector<int>{b, c, h / 2, w / 2})
        throw ShapeError("maxpool2_gather: idx shape mismatch");
    Tensor out(idx.shape());
    kernels::maxpool2_gather(b, c, h, w, u.tensor().data(), idx.data(), out.data());
    Tensor idx_copy = idx;
    std::vector<int> us = u.shape();
    return t->record(std::move(out), {u}, [idx_copy, us](const Value& gy, const Value&, const std::vector<char>&) {
        return std::vector<Value>{maxpool2_scatter_op(gy, idx_copy, us)};
    });
}

namespace {
Tensor rowmax(const Tensor& logits) {
    const int b = logits.shape()[0], c = logits.shape()[1];
    Tensor m({b});
    for (int i = 0; i < b; ++i) {
        double best = logits[static_cast<int64_t>(i) * c];
        for (int j = 1; j < c; ++j) best = std::max(best, logits[static_cast<int64_t>(i) * c + j]);
        m[i] = best;
    }
    return m;
}
}  // namespace

Value cross_entropy_sum(const Value& logits, const std::vector<int>& labels) {
    Tape* t = tape_of(logits, "cross_entropy");
    if (logits.shape().size() != 2) throw ShapeError("cross_entropy requires [B,C] logits");
    // a detached per-row max keeps exp() in range; the expression is exact for
    // any constant shift, so derivatives of all orders stay correct
    Value m = t->constant(rowmax(logits.tensor()));
    Value z = sub(logits, broadcast_samples(m, logits.shape()));
    Value lse = add(log(sum_samples(exp(z))), m);
    Value truth = pick_class(logits, labels);
    return sum_all(sub(lse, truth));
}

Value cross_entropy(const Value& logits, const std::vector<int>& labels) {
    const double b = static_cast<double>(logits.shape()[0]);
    return scale(cross_entropy_sum(logits, labels), 1.0 / b);
}

}  // namespace negm::ops
