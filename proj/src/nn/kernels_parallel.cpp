#include <algorithm>
#include <cstddef>
#include <vector>

#include "hifd/nn/kernels.hpp"

namespace hifd::nn::parallel {
namespace {

using idx = std::ptrdiff_t;

constexpr int MR = 4;
constexpr int NR = 32;
constexpr int ROW_BLOCK = 32;

// C[MR x W] += A[MR x kd] * B[kd x W]. A(r, p) = a[r*rs + p*cs].
template <int M, int W>
inline void micro(const double* a, idx rs, idx cs, const double* b, idx ldb, int kd, double* c, idx ldc) {
  double acc[M][W] = {};
  for (int p = 0; p < kd; ++p) {
    const double* bp = b + p * ldb;
    for (int r = 0; r < M; ++r) {
      const double ar = a[r * rs + p * cs];
      for (int j = 0; j < W; ++j) acc[r][j] += ar * bp[j];
    }
  }
  for (int r = 0; r < M; ++r)
    for (int j = 0; j < W; ++j) c[r * ldc + j] += acc[r][j];
}

template <int M>
inline void micro_edge(const double* a, idx rs, idx cs, const double* b, idx ldb, int kd, double* c, idx ldc,
                       int w) {
  double acc[M][NR] = {};
  for (int p = 0; p < kd; ++p) {
    const double* bp = b + p * ldb;
    for (int r = 0; r < M; ++r) {
      const double ar = a[r * rs + p * cs];
      for (int j = 0; j < w; ++j) acc[r][j] += ar * bp[j];
    }
  }
  for (int r = 0; r < M; ++r)
    for (int j = 0; j < w; ++j) c[r * ldc + j] += acc[r][j];
}

template <int M>
void row_panel(const double* a, idx rs, idx cs, const double* b, idx ldb, int kd, double* c, idx ldc, int n) {
  int j = 0;
  for (; j + NR <= n; j += NR) micro<M, NR>(a, rs, cs, b + j, ldb, kd, c + j, ldc);
  if (j + 16 <= n) {
    micro<M, 16>(a, rs, cs, b + j, ldb, kd, c + j, ldc);
    j += 16;
  }
  if (j + 8 <= n) {
    micro<M, 8>(a, rs, cs, b + j, ldb, kd, c + j, ldc);
    j += 8;
  }
  if (j < n) micro_edge<M>(a, rs, cs, b + j, ldb, kd, c + j, ldc, n - j);
}

// C[m x n] += A[m x kd] * B[kd x n] with strided A.
void gemm_acc(const double* a, idx rs, idx cs, const double* b, idx ldb, int kd, double* c, idx ldc, int m,
              int n) {
  int i = 0;
  for (; i + MR <= m; i += MR) row_panel<MR>(a + i * rs, rs, cs, b, ldb, kd, c + i * ldc, ldc, n);
  for (; i < m; ++i) row_panel<1>(a + i * rs, rs, cs, b, ldb, kd, c + i * ldc, ldc, n);
}

// C[m x n] += A[m x kd] * Bt[n x kd]^T with contiguous A rows (stride lda) and Bt rows.
// Vectorizes along kd; used when n is too narrow for the register-blocked path.
void gemm_dot_acc(const double* a, idx lda, const double* bt, int kd, double* c, idx ldc, int m, int n) {
  constexpr int V = 8;
  constexpr int MI = 3;
  constexpr int NJ = 8;
  const int kv = kd / V * V;
  for (int i0 = 0; i0 < m; i0 += MI) {
    const int mi = std::min(MI, m - i0);
    for (int j0 = 0; j0 < n; j0 += NJ) {
      const int nj = std::min(NJ, n - j0);
      double acc[MI][NJ][V] = {};
      if (mi == MI && nj == NJ) {
        for (int p = 0; p < kv; p += V)
          for (int r = 0; r < MI; ++r)
            for (int j = 0; j < NJ; ++j)
              for (int v = 0; v < V; ++v)
                acc[r][j][v] += a[(i0 + r) * lda + p + v] * bt[idx(j0 + j) * kd + p + v];
      } else {
        for (int p = 0; p < kv; p += V)
          for (int r = 0; r < mi; ++r)
            for (int j = 0; j < nj; ++j)
              for (int v = 0; v < V; ++v)
                acc[r][j][v] += a[(i0 + r) * lda + p + v] * bt[idx(j0 + j) * kd + p + v];
      }
      for (int r = 0; r < mi; ++r)
        for (int j = 0; j < nj; ++j) {
          double sum = 0.0;
          for (int v = 0; v < V; ++v) sum += acc[r][j][v];
          for (int p = kv; p < kd; ++p) sum += a[(i0 + r) * lda + p] * bt[idx(j0 + j) * kd + p];
          c[(i0 + r) * ldc + j0 + j] += sum;
        }
    }
  }
}

// Rows r in [0, rows) hold x[r - pad_left], zero outside the input.
std::vector<double> pad_input(const ConvShape& s, const double* x, int rows) {
  std::vector<double> xp(std::size_t(s.batch) * rows * s.ch_in, 0.0);
#pragma omp parallel for schedule(static)
  for (int n = 0; n < s.batch; ++n) {
    const double* xn = x + std::size_t(n) * s.len_in * s.ch_in;
    double* pn = xp.data() + std::size_t(n) * rows * s.ch_in;
    int lo = std::max(0, s.pad_left);
    int hi = std::min(rows, s.len_in + s.pad_left);
    for (int r = lo; r < hi; ++r)
      std::copy_n(xn + std::size_t(r - s.pad_left) * s.ch_in, s.ch_in, pn + std::size_t(r) * s.ch_in);
  }
  return xp;
}

}  // namespace

void conv1d_forward(const ConvShape& s, const double* x, const double* w, const double* b, double* y) {
  const int rows = s.len_out + s.k - 1;
  const std::vector<double> xp = pad_input(s, x, rows);
  const int kd = s.k * s.ch_in;
  const int blocks = (s.len_out + ROW_BLOCK - 1) / ROW_BLOCK;
  const bool narrow = s.ch_out < 16;
  std::vector<double> wt;
  if (narrow) {
    wt.resize(std::size_t(kd) * s.ch_out);
    for (int p = 0; p < kd; ++p)
      for (int co = 0; co < s.ch_out; ++co) wt[std::size_t(co) * kd + p] = w[std::size_t(p) * s.ch_out + co];
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < s.batch; ++n)
    for (int blk = 0; blk < blocks; ++blk) {
      const int t0 = blk * ROW_BLOCK;
      const int m = std::min(ROW_BLOCK, s.len_out - t0);
      double* yn = y + (std::size_t(n) * s.len_out + t0) * s.ch_out;
      const double* an = xp.data() + (std::size_t(n) * rows + t0) * s.ch_in;
      for (int t = 0; t < m; ++t)
        for (int co = 0; co < s.ch_out; ++co) yn[std::size_t(t) * s.ch_out + co] = b ? b[co] : 0.0;
      if (narrow)
        gemm_dot_acc(an, s.ch_in, wt.data(), kd, yn, s.ch_out, m, s.ch_out);
      else
        gemm_acc(an, s.ch_in, 1, w, s.ch_out, kd, yn, s.ch_out, m, s.ch_out);
    }
}

void conv1d_backward_input(const ConvShape& s, const double* dy, const double* w, double* dx) {
  // Correlation of dy with the flipped, transposed kernel.
  std::vector<double> wt(s.weight_size());
  for (int j = 0; j < s.k; ++j)
    for (int ci = 0; ci < s.ch_in; ++ci)
      for (int co = 0; co < s.ch_out; ++co)
        wt[(std::size_t(s.k - 1 - j) * s.ch_out + co) * s.ch_in + ci] =
            w[(std::size_t(j) * s.ch_in + ci) * s.ch_out + co];
  ConvShape t;
  t.batch = s.batch;
  t.len_in = s.len_out;
  t.ch_in = s.ch_out;
  t.ch_out = s.ch_in;
  t.k = s.k;
  t.pad_left = s.k - 1 - s.pad_left;
  t.len_out = s.len_in;
  conv1d_forward(t, dy, wt.data(), nullptr, dx);
}

void conv1d_backward_weights(const ConvShape& s, const double* x, const double* dy, double* dw,
                             double* db) {
  const int rows = s.len_out + s.k - 1;
  const std::vector<double> xp = pad_input(s, x, rows);
  const int kd = s.k * s.ch_in;
  std::fill_n(dw, s.weight_size(), 0.0);
  if (s.ch_out < 16) {
    // Narrow outputs: accumulate dW^T[co x kd] = sum_n dYn^T Xn, wide along kd.
    std::vector<double> dwt(std::size_t(s.ch_out) * kd, 0.0);
    const int cblocks = (kd + 63) / 64;
#pragma omp parallel for schedule(static)
    for (int blk = 0; blk < cblocks; ++blk) {
      const int c0 = blk * 64;
      const int w = std::min(64, kd - c0);
      for (int n = 0; n < s.batch; ++n) {
        const double* dyn = dy + std::size_t(n) * s.len_out * s.ch_out;
        const double* xn = xp.data() + std::size_t(n) * rows * s.ch_in + c0;
        gemm_acc(dyn, 1, s.ch_out, xn, s.ch_in, s.len_out, dwt.data() + c0, kd, s.ch_out, w);
      }
    }
    for (int co = 0; co < s.ch_out; ++co)
      for (int p = 0; p < kd; ++p) dw[std::size_t(p) * s.ch_out + co] = dwt[std::size_t(co) * kd + p];
  } else {
    const int blocks = (kd + MR - 1) / MR;
    // dW[kd x co] = sum_n Xn^T dYn, one row block per task, batch summed in order.
#pragma omp parallel for schedule(static)
    for (int blk = 0; blk < blocks; ++blk) {
      const int r0 = blk * MR;
      const int m = std::min(MR, kd - r0);
      double* c = dw + std::size_t(r0) * s.ch_out;
      for (int n = 0; n < s.batch; ++n) {
        const double* an = xp.data() + std::size_t(n) * rows * s.ch_in + r0;
        const double* dyn = dy + std::size_t(n) * s.len_out * s.ch_out;
        gemm_acc(an, 1, s.ch_in, dyn, s.ch_out, s.len_out, c, s.ch_out, m, s.ch_out);
      }
    }
  }
  if (db) {
    std::fill_n(db, s.ch_out, 0.0);
    for (int n = 0; n < s.batch; ++n)
      for (int t = 0; t < s.len_out; ++t) {
        const double* row = dy + (std::size_t(n) * s.len_out + t) * s.ch_out;
        for (int co = 0; co < s.ch_out; ++co) db[co] += row[co];
      }
  }
}

}  // namespace hifd::nn::parallel
