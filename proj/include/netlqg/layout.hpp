#pragma once

#include <stdexcept>

namespace netlqg {

// Index map for the stacked decision state at step k:
//   z_k = [ x_k ; u_hat_{k-1} ; ... ; u_hat_0 ],
//   u_hat_j = [ u_{1,j} ; ... ; u_{p,j} ].
// Histories are addressed by (controller m, lag n): the control controller m
// issued n steps ago. Lag n = 1 is the most recent batch. All indices here
// are zero-based; lags are one-based because lag 0 is not part of z_k.
struct AugmentedLayout {
  int M = 0;  // state dimension
  int K = 0;  // per-controller input dimension
  int p = 0;  // controller count
  int k = 0;  // step (number of stacked history batches)

  int dim() const { return M + p * k * K; }
  int next_dim() const { return M + p * (k + 1) * K; }

  // Column/row offset of history entry (m, n) inside z_k.
  int history_offset(int m, int n) const {
    check(m, n);
    return M + (n - 1) * p * K + m * K;
  }

  // Offsets inside z_{k+1}: the freshly issued batch sits right after the
  // state, and z_k's history entry (m, n) shifts to lag n + 1.
  int issued_offset(int m) const { return M + m * K; }
  int shifted_offset(int m, int n) const {
    check(m, n);
    return M + n * p * K + m * K;
  }

 private:
  void check(int m, int n) const {
    if (m < 0 || m >= p || n < 1 || n > k) {
      throw std::invalid_argument("AugmentedLayout: history index out of range");
    }
  }
};

}  // namespace netlqg
