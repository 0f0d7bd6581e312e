#include <cmath>
#include <complex>
#include <vector>

#include <fftw3.h>

#include "dmn/errors.hpp"
#include "dmn/oracle.hpp"

namespace dmn {

namespace {

// Eigenvalue range of a symmetric 3x3 by cyclic Jacobi sweeps.
void jacobi_eigen_range(const Mat3& m, double& lo, double& hi) {
  double a[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = m(i, j);
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0;
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 3; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double phi = 0.5 * std::atan2(2 * a[p][q], a[q][q] - a[p][p]);
        const double c = std::cos(phi), s = std::sin(phi);
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  lo = std::min({a[0][0], a[1][1], a[2][2]});
  hi = std::max({a[0][0], a[1][1], a[2][2]});
}

struct FftWorkspace {
  int n;
  fftw_complex* buf;
  fftw_plan fwd, bwd;

  explicit FftWorkspace(int n_) : n(n_) {
    buf = fftw_alloc_complex(std::size_t(n) * n);
    fwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FftWorkspace() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(buf);
  }
  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;
};

}  // namespace

Mat3 fft_homogenize(const PixelMicrostructure& micro, const Mat3& d1, const Mat3& d2,
                    FftOptions opt) {
  const int n = micro.n;
  const std::size_t np = std::size_t(n) * n;
  const double sq2 = std::sqrt(2.0);

  const Mat3 c1 = inverse3(d1), c2 = inverse3(d2);
  double lo1, hi1, lo2, hi2;
  jacobi_eigen_range(c1, lo1, hi1);
  jacobi_eigen_range(c2, lo2, hi2);
  const double alpha = 0.5 * (std::min(lo1, lo2) + std::max(hi1, hi2));
  const double mu0 = 0.5 * alpha;        // reference medium: lambda0 = 0
  const double coef2 = 1.0 / (2 * mu0);  // (lambda0 + mu0)/(mu0 (lambda0 + 2 mu0))

  std::vector<int> freq(n);
  for (int k = 0; k < n; ++k) freq[k] = (k <= n / 2) ? k : k - n;

  FftWorkspace ws(n);
  using Cx = std::complex<double>;
  std::vector<std::vector<double>> eps(3, std::vector<double>(np));
  std::vector<std::vector<double>> tau(3, std::vector<double>(np));
  std::vector<std::vector<Cx>> hat(3, std::vector<Cx>(np));

  auto fft_field = [&](const std::vector<double>& field, std::vector<Cx>& out) {
    for (std::size_t p = 0; p < np; ++p) {
      ws.buf[p][0] = field[p];
      ws.buf[p][1] = 0;
    }
    fftw_execute(ws.fwd);
    for (std::size_t p = 0; p < np; ++p) out[p] = Cx(ws.buf[p][0], ws.buf[p][1]);
  };

  Mat3 cbar;
  for (int load = 0; load < 3; ++load) {
    Vec3 ebar{};
    ebar[load] = 1.0;
    for (int c = 0; c < 3; ++c)
      for (std::size_t p = 0; p < np; ++p) eps[c][p] = ebar[c];

    Vec3 sig_mean{};
    bool done = false;
    for (long iter = 0; iter < opt.max_iter && !done; ++iter) {
      // Local stress and polarization.
      sig_mean = Vec3{};
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
          const std::size_t p = std::size_t(iy) * n + ix;
          const Mat3& c = micro.phase_at(ix, iy) == 1 ? c1 : c2;
          const Vec3 e{{eps[0][p], eps[1][p], eps[2][p]}};
          const Vec3 s = c * e;
          for (int m = 0; m < 3; ++m) {
            tau[m][p] = s[m] - alpha * e[m];
            sig_mean[m] += s[m];
          }
        }
      sig_mean = (1.0 / double(np)) * sig_mean;

      for (int m = 0; m < 3; ++m) fft_field(tau[m], hat[m]);

      // Equilibrium check on sigma_hat = tau_hat + alpha eps_hat every few
      // sweeps; the polarization already carries the fluctuation, so the
      // strain transform is needed too.
      const bool check = (iter % 10 == 9) || iter == opt.max_iter - 1;
      std::vector<std::vector<Cx>> eps_hat;
      if (check) {
        eps_hat.assign(3, std::vector<Cx>(np));
        for (int m = 0; m < 3; ++m) fft_field(eps[m], eps_hat[m]);
      }

      double res_num = 0;
      for (int ky = 0; ky < n; ++ky)
        for (int kx = 0; kx < n; ++kx) {
          const std::size_t p = std::size_t(ky) * n + kx;
          const double x1 = freq[kx], x2 = freq[ky];
          const double xi2 = x1 * x1 + x2 * x2;
          if (xi2 == 0) {
            hat[0][p] = Cx(ebar[0] * double(np), 0);
            hat[1][p] = Cx(ebar[1] * double(np), 0);
            hat[2][p] = Cx(ebar[2] * double(np), 0);
            continue;
          }
          // Modes holding a Nyquist index without being self-conjugate have
          // no consistent frequency sign for their conjugate partner; their
          // fluctuation is suppressed and they are left out of the residual.
          const bool edge_x = (kx == 0) || (n % 2 == 0 && kx == n / 2);
          const bool edge_y = (ky == 0) || (n % 2 == 0 && ky == n / 2);
          const bool has_nyquist =
              (n % 2 == 0) && (kx == n / 2 || ky == n / 2) && !(edge_x && edge_y);
          if (has_nyquist) {
            hat[0][p] = hat[1][p] = hat[2][p] = Cx(0, 0);
            continue;
          }
          const Cx t11 = hat[0][p], t22 = hat[1][p], t12 = hat[2][p] / sq2;
          if (check) {
            const Cx s11 = t11 + alpha * eps_hat[0][p];
            const Cx s22 = t22 + alpha * eps_hat[1][p];
            const Cx s12 = (hat[2][p] + alpha * eps_hat[2][p]) / sq2;
            const Cx r1 = x1 * s11 + x2 * s12;
            const Cx r2 = x1 * s12 + x2 * s22;
            res_num += std::norm(r1) + std::norm(r2);
          }
          const Cx a1 = t11 * x1 + t12 * x2;
          const Cx a2 = t12 * x1 + t22 * x2;
          const Cx xtx = x1 * a1 + x2 * a2;
          const Cx g11 = (2.0 * x1 * a1) / (2 * mu0 * xi2) - coef2 * x1 * x1 * xtx / (xi2 * xi2);
          const Cx g22 = (2.0 * x2 * a2) / (2 * mu0 * xi2) - coef2 * x2 * x2 * xtx / (xi2 * xi2);
          const Cx g12 =
              (x2 * a1 + x1 * a2) / (2 * mu0 * xi2) - coef2 * x1 * x2 * xtx / (xi2 * xi2);
          hat[0][p] = -g11;
          hat[1][p] = -g22;
          hat[2][p] = -sq2 * g12;
        }

      if (check) {
        const double denom = sig_mean.norm() * double(np);
        if (denom > 0 && std::sqrt(res_num) / denom < opt.tol) done = true;
      }

      for (int m = 0; m < 3; ++m) {
        for (std::size_t p = 0; p < np; ++p) {
          ws.buf[p][0] = hat[m][p].real();
          ws.buf[p][1] = hat[m][p].imag();
        }
        fftw_execute(ws.bwd);
        for (std::size_t p = 0; p < np; ++p) eps[m][p] = ws.buf[p][0] / double(np);
      }
    }
    if (!done)
      throw NoConvergence("spectral scheme exhausted its iteration budget, load " +
                          std::to_string(load));

    for (int i = 0; i < 3; ++i) cbar(i, load) = sig_mean[i];
  }

  return symmetrize(inverse3(symmetrize(cbar)));
}

}  // namespace dmn
