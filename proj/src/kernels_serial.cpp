#include <atomic>
#include <stdexcept>

#include "kernels_detail.hpp"
#include "negm/errors.hpp"
#include "negm/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace negm::kernels {

Conv2dGeom conv2d_geometry(const std::vector<int>& xs, const std::vector<int>& ks, int stride) {
    if (xs.size() != 4 || ks.size() != 4)
        throw ShapeError("conv2d expects x[B,C,H,W] and k[Co,Ci,K,K]");
    if (ks[2] != ks[3]) throw ShapeError("conv2d kernel must be square");
    if (xs[1] != ks[1])
        throw ShapeError("conv2d channel mismatch: x has " + std::to_string(xs[1]) +
                         ", kernel expects " + std::to_string(ks[1]));
    Conv2dGeom g;
    g.batch = xs[0];
    g.in_ch = xs[1];
    g.in_h = xs[2];
    g.in_w = xs[3];
    g.out_ch = ks[0];
    g.k = ks[2];
    g.stride = stride;
    if (stride < 1) throw ShapeError("conv2d stride must be >= 1");
    if (stride == 1) {
        if (g.k % 2 == 0) throw ShapeError("same-padded conv requires odd kernel size");
        g.pad = (g.k - 1) / 2;
        g.out_h = g.in_h;
        g.out_w = g.in_w;
    } else {
        g.pad = 0;
        g.out_h = (g.in_h - g.k) / stride + 1;
        g.out_w = (g.in_w - g.k) / stride + 1;
        if (g.in_h < g.k || g.in_w < g.k)
            throw ShapeError("strided conv input smaller than kernel");
    }
    return g;
}

namespace serial {

void conv2d_forward(const Conv2dGeom& g, const double* x, const double* k, double* y) {
    for (int b = 0; b < g.batch; ++b)
        for (int co = 0; co < g.out_ch; ++co) detail::conv_fwd_plane(g, b, co, x, k, y);
}

void conv2d_grad_input(const Conv2dGeom& g, const double* gy, const double* k, double* gx) {
    for (int b = 0; b < g.batch; ++b)
        for (int ci = 0; ci < g.in_ch; ++ci) detail::conv_gi_plane(g, b, ci, gy, k, gx);
}

void conv2d_grad_kernel(const Conv2dGeom& g, const double* x, const double* gy, double* gk) {
    for (int co = 0; co < g.out_ch; ++co)
        for (int ci = 0; ci < g.in_ch; ++ci) detail::conv_gk_pair(g, co, ci, x, gy, gk);
}

void matmul(int m, int k, int n, const double* a, const double* b, double* c) {
    for (int i = 0; i < m; ++i) detail::matmul_row(k, n, i, a, b, c);
}

}  // namespace serial

namespace {
std::atomic<bool> g_parallel{
#ifdef _OPENMP
    true
#else
    false
#endif
};
}

void set_parallel(bool on) {
#ifndef _OPENMP
    on = false;
#endif
    g_parallel.store(on);
}

bool parallel_enabled() { return g_parallel.load(); }

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_num_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

void conv2d_forward(const Conv2dGeom& g, const double* x, const double* k, double* y) {
    if (parallel_enabled())
        omp::conv2d_forward(g, x, k, y);
    else
        serial::conv2d_forward(g, x, k, y);
}

void conv2d_grad_input(const Conv2dGeom& g, const double* gy, const double* k, double* gx) {
    if (parallel_enabled())
        omp::conv2d_grad_input(g, gy, k, gx);
    else
        serial::conv2d_grad_input(g, gy, k, gx);
}

void conv2d_grad_kernel(const Conv2dGeom& g, const double* x, const double* gy, double* gk) {
    if (parallel_enabled())
        omp::conv2d_grad_kernel(g, x, gy, gk);
    else
        serial::conv2d_grad_kernel(g, x, gy, gk);
}

void matmul(int m, int k, int n, const double* a, const double* b, double* c) {
    if (parallel_enabled())
        omp::matmul(m, k, n, a, b, c);
    else
        serial::matmul(m, k, n, a, b, c);
}

void maxpool2_forward(int b, int c, int h, int w, const double* x, double* y, double* idx) {
    const int oh = h / 2, ow = w / 2;
    for (int plane = 0; plane < b * c; ++plane) {
        const double* xp = x + static_cast<int64_t>(plane) * h * w;
        double* yp = y + static_cast<int64_t>(plane) * oh * ow;
        double* ip = idx + static_cast<int64_t>(plane) * oh * ow;
        for (int i = 0; i < oh; ++i) {
            for (int j = 0; j < ow; ++j) {
                int best = (2 * i) * w + 2 * j;
                double bv = xp[best];
                const int cand[3] = {(2 * i) * w + 2 * j + 1, (2 * i + 1) * w + 2 * j,
                                     (2 * i + 1) * w + 2 * j + 1};
                for (int t : cand) {
                    if (xp[t] > bv) {
                        bv = xp[t];
                        best = t;
                    }
                }
                yp[i * ow + j] = bv;
                ip[i * ow + j] = static_cast<double>(best);
            }
        }
    }
}

void maxpool2_scatter(int b, int c, int h, int w, const double* gy, const double* idx,
                      double* gx) {
    const int oh = h / 2, ow = w / 2;
    for (int64_t i = 0; i < static_cast<int64_t>(b) * c * h * w; ++i) gx[i] = 0.0;
    for (int plane = 0; plane < b * c; ++plane) {
        double* gxp = gx + static_cast<int64_t>(plane) * h * w;
        const double* gyp = gy + static_cast<int64_t>(plane) * oh * ow;
        const double* ip = idx + static_cast<int64_t>(plane) * oh * ow;
        for (int t = 0; t < oh * ow; ++t) gxp[static_cast<int>(ip[t])] += gyp[t];
    }
}

void maxpool2_gather(int b, int c, int h, int w, const double* u, const double* idx,
                     double* out) {
    const int oh = h / 2, ow = w / 2;
    for (int plane = 0; plane < b * c; ++plane) {
        const double* up = u + static_cast<int64_t>(plane) * h * w;
        double* op = out + static_cast<int64_t>(plane) * oh * ow;
        const double* ip = idx + static_cast<int64_t>(plane) * oh * ow;
        for (int t = 0; t < oh * ow; ++t) op[t] = up[static_cast<int>(ip[t])];
    }
}

}  // namespace negm::kernels
