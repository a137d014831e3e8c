#include "kernels_detail.hpp"
#include "negm/kernels.hpp"

namespace negm::kernels::omp {

// Parallelism is over independent output planes/rows only; each element is
// accumulated by a single thread in the serial order.

void conv2d_forward(const Conv2dGeom& g, const double* x, const double* k, double* y) {
    const int total = g.batch * g.out_ch;
#pragma omp parallel for schedule(static)
    for (int t = 0; t < total; ++t) detail::conv_fwd_plane(g, t / g.out_ch, t % g.out_ch, x, k, y);
}

void conv2d_grad_input(const Conv2dGeom& g, const double* gy, const double* k, double* gx) {
    const int total = g.batch * g.in_ch;
#pragma omp parallel for schedule(static)
    for (int t = 0; t < total; ++t) detail::conv_gi_plane(g, t / g.in_ch, t % g.in_ch, gy, k, gx);
}

void conv2d_grad_kernel(const Conv2dGeom& g, const double* x, const double* gy, double* gk) {
    const int total = g.out_ch * g.in_ch;
#pragma omp parallel for schedule(static)
    for (int t = 0; t < total; ++t) detail::conv_gk_pair(g, t / g.in_ch, t % g.in_ch, x, gy, gk);
}

void matmul(int m, int k, int n, const double* a, const double* b, double* c) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) detail::matmul_row(k, n, i, a, b, c);
}

}  // namespace negm::kernels::omp
