// SPDX-License-Identifier: Apache-2.0
#include "thzest/dictionary.hpp"

#include <cmath>

#include "thzest/channel.hpp"

namespace thzest {

AngularGrid build_angular_grid(int size) {
  if (size < 1) throw std::invalid_argument("grid size must be >= 1");
  AngularGrid g;
  g.angles_rad.resize(size);
  g.cosines.resize(size);
  for (int r = 0; r < size; ++r) {
    const double c = 2.0 / size * r - 1.0;  // (2/G)(r-1) - 1 with r 1-based
    g.cosines[r] = c;
    g.angles_rad[r] = std::acos(c);
  }
  return g;
}

std::pair<AngularGrid, AngularGrid> build_angular_grids(int g_r, int g_tu) {
  return {build_angular_grid(g_r), build_angular_grid(g_tu)};
}

Mat build_manifold(const AngularGrid& grid, double f_hz, int num_antennas,
                   double carrier_hz) {
  Mat a(num_antennas, grid.size());
  for (int r = 0; r < grid.size(); ++r)
    a.col(r) = steering_vector(grid.angles_rad[r], f_hz, num_antennas,
                               carrier_hz);
  return a;
}

Mat build_tbod(const AngularGrid& grid, double f_hz, int num_antennas,
               double carrier_hz) {
  const int g = grid.size();
  Mat a(num_antennas, 2 * g);
  for (int r = 0; r < g; ++r) {
    a.col(r) = steering_vector(grid.angles_rad[r], f_hz, num_antennas,
                               carrier_hz);
    a.col(g + r) = steering_vector_derivative(grid.angles_rad[r], f_hz,
                                              num_antennas, carrier_hz);
  }
  return a;
}

Mat SparsifyingDictionary::psi_user(int k) const {
  const Mat& ar = a_r.at(k);
  const Mat& at = a_t.at(k);
  const Eigen::Index n_r = ar.rows(), g_r = ar.cols();
  const Eigen::Index n_t = at.rows(), g_t = at.cols();
  Mat psi(n_r * n_t, g_r * g_t);
  // conj(A_T) (x) A_R, column (r, t) = conj(a_t(:,t)) (x) a_r(:,r)
  for (Eigen::Index t = 0; t < g_t; ++t)
    for (Eigen::Index r = 0; r < g_r; ++r) {
      auto col = psi.col(t * g_r + r);
      for (Eigen::Index j = 0; j < n_t; ++j)
        col.segment(j * n_r, n_r) = std::conj(at(j, t)) * ar.col(r);
    }
  return psi;
}

Mat SparsifyingDictionary::psi(int k) const {
  const Mat block = psi_user(k);
  const Eigen::Index rows_u = block.rows();
  const Eigen::Index cols_u = block.cols();
  Mat psi = Mat::Zero(rows_u * num_users, cols_u * num_users);
  for (int u = 0; u < num_users; ++u)
    psi.block(u * rows_u, u * cols_u, rows_u, cols_u) = block;
  return psi;
}

SparsifyingDictionary build_mu_dictionary(const ScenarioConfig& cfg,
                                          DictionaryMode mode) {
  SparsifyingDictionary d;
  d.mode = mode;
  d.num_users = cfg.num_users;
  d.carrier_hz = cfg.carrier_hz;
  std::tie(d.grid_r, d.grid_t) =
      build_angular_grids(cfg.grid_G_R, cfg.grid_G_Tu);
  d.a_r.reserve(cfg.subcarriers);
  d.a_t.reserve(cfg.subcarriers);
  if (mode == DictionaryMode::TBoD) {
    d.deriv_scale_r = constants::pi / cfg.grid_G_R;
    d.deriv_scale_t = constants::pi / cfg.grid_G_Tu;
  }
  for (int bin = 0; bin < cfg.subcarriers; ++bin) {
    const double f = subcarrier_frequency(bin + 1, cfg);
    if (mode == DictionaryMode::OnGrid) {
      d.a_r.push_back(build_manifold(d.grid_r, f, cfg.rx_antennas,
                                     cfg.carrier_hz));
      d.a_t.push_back(build_manifold(d.grid_t, f, cfg.tx_antennas_per_user,
                                     cfg.carrier_hz));
    } else {
      Mat ar = build_tbod(d.grid_r, f, cfg.rx_antennas, cfg.carrier_hz);
      ar.rightCols(cfg.grid_G_R) *= d.deriv_scale_r;
      Mat at = build_tbod(d.grid_t, f, cfg.tx_antennas_per_user,
                          cfg.carrier_hz);
      at.rightCols(cfg.grid_G_Tu) *= d.deriv_scale_t;
      d.a_r.push_back(std::move(ar));
      d.a_t.push_back(std::move(at));
    }
  }
  return d;
}

}  // namespace thzest
