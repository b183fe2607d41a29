#include "toricflat/harmonic.hpp"

#include <algorithm>
#include <future>
#include <thread>

namespace toricflat {

std::vector<double> grid_axis(double lo, double hi, int count, bool log_spaced) {
  if (count < 2) throw std::invalid_argument("grid axis needs at least 2 points");
  if (log_spaced && !(lo > 0 && hi > 0)) {
    throw std::invalid_argument("log-spaced axis needs positive bounds");
  }
  std::vector<double> axis(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / (count - 1);
    axis[static_cast<size_t>(i)] =
        log_spaced ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
  }
  // Pin the endpoints exactly; the interior is what spacing mode decides.
  axis.front() = lo;
  axis.back() = hi;
  return axis;
}

std::vector<GridSample> sample_grid(const BoundaryProfile& profile, const GridSpec& spec) {
  const auto zs = grid_axis(spec.z_min, spec.z_max, spec.z_count, false);
  const auto rhos = grid_axis(spec.rho_min, spec.rho_max, spec.rho_count, spec.rho_log);
  std::vector<GridSample> samples(zs.size() * rhos.size());

  const auto eval_rows = [&](size_t row_begin, size_t row_end) {
    for (size_t r = row_begin; r < row_end; ++r) {
      for (size_t c = 0; c < zs.size(); ++c) {
        GridSample& s = samples[r * zs.size() + c];
        s.z = zs[c];
        s.rho = rhos[r];
        s.eval = eval_partials(profile, s.z, s.rho);
      }
    }
  };

  const size_t rows = rhos.size();
  const size_t workers = std::min<size_t>(rows, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    eval_rows(0, rows);
    return samples;
  }
  std::vector<std::future<void>> tasks;
  const size_t chunk = (rows + workers - 1) / workers;
  for (size_t begin = 0; begin < rows; begin += chunk) {
    const size_t end = std::min(rows, begin + chunk);
    tasks.push_back(std::async(std::launch::async, eval_rows, begin, end));
  }
  for (auto& t : tasks) t.get();
  return samples;
}

std::vector<double> boundary_limit_residual(const BoundaryProfile& profile, double z,
                                            const std::vector<double>& rho_seq) {
  std::vector<double> out;
  out.reserve(rho_seq.size());
  const double fz = profile.f(z);
  for (const double rho : rho_seq) {
    const double u = eval_U(profile, z, rho);
    out.push_back(std::abs(u / std::log(rho * rho) - fz));
  }
  return out;
}

double axisym_laplacian(int dim, const std::function<double(double, double)>& fn, double z,
                        double rho, double step) {
  if (dim != 3 && dim != 5) throw std::invalid_argument("dim must be 3 or 5");
  if (!(step > 0) || rho - step <= 0) {
    throw std::domain_error("step must satisfy 0 < step < rho");
  }
  const double h2 = step * step;
  const double center = fn(z, rho);
  const double f_zz = (fn(z + step, rho) - 2 * center + fn(z - step, rho)) / h2;
  const double f_pp = (fn(z, rho + step) - 2 * center + fn(z, rho - step)) / h2;
  const double f_p = (fn(z, rho + step) - fn(z, rho - step)) / (2 * step);
  return f_pp + f_zz + static_cast<double>(dim - 2) * f_p / rho;
}

GammaReport compare_profiles(const BoundaryProfile& p1, const BoundaryProfile& p2,
                             const GridSpec& grid) {
  GammaReport report;
  const auto gamma = [&](double z, double rho) {
    const auto e1 = eval_partials(p1, z, rho);
    const auto e2 = eval_partials(p2, z, rho);
    return (e1.Urho - e2.Urho) / rho;
  };
  const auto zs = grid_axis(grid.z_min, grid.z_max, grid.z_count, false);
  const auto rhos = grid_axis(grid.rho_min, grid.rho_max, grid.rho_count, grid.rho_log);
  for (const double rho : rhos) {
    const double step = std::min(1e-3, rho / 2);
    for (const double z : zs) {
      const double g = gamma(z, rho);
      report.max_abs_gamma = std::max(report.max_abs_gamma, std::abs(g));
      report.max_laplacian5_residual = std::max(
          report.max_laplacian5_residual, std::abs(axisym_laplacian(5, gamma, z, rho, step)));
      const double R = std::hypot(z, rho);
      if (R > 0) {
        report.max_growth_ratio =
            std::max(report.max_growth_ratio, std::abs(g) * rho * rho / R);
      }
    }
  }
  return report;
}

}  // namespace toricflat
