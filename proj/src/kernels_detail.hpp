// Per-element kernel bodies shared by the serial and OpenMP backends.
// Both backends call these with the same loop decomposition, so accumulation
// order per output element is identical and results match bit-for-bit.
#ifndef NEGM_KERNELS_DETAIL_HPP
#define NEGM_KERNELS_DETAIL_HPP

#include <algorithm>
#include <cstring>

#include "negm/kernels.hpp"

namespace negm::kernels::detail {

inline int div_floor(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
inline int div_ceil(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }

// range of oh with 0 <= oh*stride + kh - pad < extent
inline void valid_out_range(int extent, int out, int kh, int stride, int pad, int& lo, int& hi) {
    lo = std::max(0, div_ceil(pad - kh, stride));
    hi = std::min(out, div_floor(extent - 1 - kh + pad, stride) + 1);
    if (hi < lo) hi = lo;
}

// y[b,co,:,:] for one (b,co) pair
inline void conv_fwd_plane(const Conv2dGeom& g, int b, int co, const double* x, const double* k,
                           double* y) {
    const int hw_in = g.in_h * g.in_w;
    const int hw_out = g.out_h * g.out_w;
    double* yp = y + (static_cast<int64_t>(b) * g.out_ch + co) * hw_out;
    std::memset(yp, 0, sizeof(double) * static_cast<size_t>(hw_out));
    const double* xb = x + static_cast<int64_t>(b) * g.in_ch * hw_in;
    const double* kco = k + static_cast<int64_t>(co) * g.in_ch * g.k * g.k;
    for (int ci = 0; ci < g.in_ch; ++ci) {
        const double* xc = xb + static_cast<int64_t>(ci) * hw_in;
        const double* kc = kco + static_cast<int64_t>(ci) * g.k * g.k;
        for (int kh = 0; kh < g.k; ++kh) {
            int oh_lo, oh_hi;
            valid_out_range(g.in_h, g.out_h, kh, g.stride, g.pad, oh_lo, oh_hi);
            for (int kw = 0; kw < g.k; ++kw) {
                const double w = kc[kh * g.k + kw];
                int ow_lo, ow_hi;
                valid_out_range(g.in_w, g.out_w, kw, g.stride, g.pad, ow_lo, ow_hi);
                for (int oh = oh_lo; oh < oh_hi; ++oh) {
                    const int ih = oh * g.stride + kh - g.pad;
                    const double* xrow = xc + ih * g.in_w;
                    double* yrow = yp + oh * g.out_w;
                    for (int ow = ow_lo; ow < ow_hi; ++ow)
                        yrow[ow] += w * xrow[ow * g.stride + kw - g.pad];
                }
            }
        }
    }
}

// gx[b,ci,:,:] for one (b,ci) pair
inline void conv_gi_plane(const Conv2dGeom& g, int b, int ci, const double* gy, const double* k,
                          double* gx) {
    const int hw_in = g.in_h * g.in_w;
    const int hw_out = g.out_h * g.out_w;
    double* gxp = gx + (static_cast<int64_t>(b) * g.in_ch + ci) * hw_in;
    std::memset(gxp, 0, sizeof(double) * static_cast<size_t>(hw_in));
    const double* gyb = gy + static_cast<int64_t>(b) * g.out_ch * hw_out;
    for (int co = 0; co < g.out_ch; ++co) {
        const double* gyc = gyb + static_cast<int64_t>(co) * hw_out;
        const double* kc = k + (static_cast<int64_t>(co) * g.in_ch + ci) * g.k * g.k;
        for (int kh = 0; kh < g.k; ++kh) {
            int oh_lo, oh_hi;
            valid_out_range(g.in_h, g.out_h, kh, g.stride, g.pad, oh_lo, oh_hi);
            for (int kw = 0; kw < g.k; ++kw) {
                const double w = kc[kh * g.k + kw];
                int ow_lo, ow_hi;
                valid_out_range(g.in_w, g.out_w, kw, g.stride, g.pad, ow_lo, ow_hi);
                for (int oh = oh_lo; oh < oh_hi; ++oh) {
                    const int ih = oh * g.stride + kh - g.pad;
                    double* gxrow = gxp + ih * g.in_w;
                    const double* gyrow = gyc + oh * g.out_w;
                    for (int ow = ow_lo; ow < ow_hi; ++ow)
                        gxrow[ow * g.stride + kw - g.pad] += w * gyrow[ow];
                }
            }
        }
    }
}

// gk[co,ci,:,:] for one (co,ci) pair
inline void conv_gk_pair(const Conv2dGeom& g, int co, int ci, const double* x, const double* gy,
                         double* gk) {
    const int hw_in = g.in_h * g.in_w;
    const int hw_out = g.out_h * g.out_w;
    double* gkp = gk + (static_cast<int64_t>(co) * g.in_ch + ci) * g.k * g.k;
    for (int kh = 0; kh < g.k; ++kh) {
        int oh_lo, oh_hi;
        valid_out_range(g.in_h, g.out_h, kh, g.stride, g.pad, oh_lo, oh_hi);
        for (int kw = 0; kw < g.k; ++kw) {
            int ow_lo, ow_hi;
            valid_out_range(g.in_w, g.out_w, kw, g.stride, g.pad, ow_lo, ow_hi);
            double acc = 0.0;
            for (int b = 0; b < g.batch; ++b) {
                const double* xc = x + (static_cast<int64_t>(b) * g.in_ch + ci) * hw_in;
                const double* gyc = gy + (static_cast<int64_t>(b) * g.out_ch + co) * hw_out;
                for (int oh = oh_lo; oh < oh_hi; ++oh) {
                    const int ih = oh * g.stride + kh - g.pad;
                    const double* xrow = xc + ih * g.in_w;
                    const double* gyrow = gyc + oh * g.out_w;
                    for (int ow = ow_lo; ow < ow_hi; ++ow)
                        acc += gyrow[ow] * xrow[ow * g.stride + kw - g.pad];
                }
            }
            gkp[kh * g.k + kw] = acc;
        }
    }
}

inline void matmul_row(int kdim, int n, int i, const double* a, const double* b, double* c) {
    double* crow = c + static_cast<int64_t>(i) * n;
    std::memset(crow, 0, sizeof(double) * static_cast<size_t>(n));
    const double* arow = a + static_cast<int64_t>(i) * kdim;
    for (int kk = 0; kk < kdim; ++kk) {
        const double av = arow[kk];
        const double* brow = b + static_cast<int64_t>(kk) * n;
        for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
}

}  // namespace negm::kernels::detail

#endif
