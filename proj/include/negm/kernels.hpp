#ifndef NEGM_KERNELS_HPP
#define NEGM_KERNELS_HPP

#include "negm/tensor.hpp"

namespace negm::kernels {

// Geometry of a 2d convolution (cross-correlation), NCHW layout.
// stride 1 uses zero "same" padding (odd k), stride >= 2 uses valid padding.
struct Conv2dGeom {
    int batch, in_ch, in_h, in_w;
    int out_ch, k, stride, pad;
    int out_h, out_w;
};

Conv2dGeom conv2d_geometry(const std::vector<int>& x_shape, const std::vector<int>& k_shape,
                           int stride);

// Hot kernels exist in two backends with identical per-element accumulation
// order, so results are bit-identical; serial is the reference implementation.
namespace serial {
void conv2d_forward(const Conv2dGeom& g, const double* x, const double* k, double* y);
void conv2d_grad_input(const Conv2dGeom& g, const double* gy, const double* k, double* gx);
void conv2d_grad_kernel(const Conv2dGeom& g, const double* x, const double* gy, double* gk);
// C[m,n] = sum_k A[m,k] * B[k,n]
void matmul(int m, int k, int n, const double* a, const double* b, double* c);
}  // namespace serial

namespace omp {
void conv2d_forward(const Conv2dGeom& g, const double* x, const double* k, double* y);
void conv2d_grad_input(const Conv2dGeom& g, const double* gy, const double* k, double* gx);
void conv2d_grad_kernel(const Conv2dGeom& g, const double* x, const double* gy, double* gk);
void matmul(int m, int k, int n, const double* a, const double* b, double* c);
}  // namespace omp

// backend switch; defaults to parallel when compiled with OpenMP
void set_parallel(bool on);
bool parallel_enabled();
int max_threads();
void set_num_threads(int n);  // 0 = library default

// dispatchers used by the ops layer
void conv2d_forward(const Conv2dGeom& g, const double* x, const double* k, double* y);
void conv2d_grad_input(const Conv2dGeom& g, const double* gy, const double* k, double* gx);
void conv2d_grad_kernel(const Conv2dGeom& g, const double* x, const double* gy, double* gk);
void matmul(int m, int k, int n, const double* a, const double* b, double* c);

// 2x2/stride-2 max pooling; ties break to the first element in scan order.
// Windows are disjoint, so scatter has no write conflicts.
void maxpool2_forward(int b, int c, int h, int w, const double* x, double* y, double* idx);
void maxpool2_scatter(int b, int c, int h, int w, const double* gy, const double* idx, double* gx);
void maxpool2_gather(int b, int c, int h, int w, const double* u, const double* idx, double* out);

inline int pooled_dim(int d) { return d / 2; }

}  // namespace negm::kernels

#endif
