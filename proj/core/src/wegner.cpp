#include "ssflab/wegner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "ssflab/errors.hpp"
#include "ssflab/summation.hpp"

namespace ssflab {
namespace {

// Runs task(i) for i in [0, count) on up to `threads` workers. Results are
// written by index, so the caller's reduction order does not depend on timing.
template <class Task>
void run_indexed(std::size_t count, std::size_t threads, Task&& task) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double power_d(double base, int d) { return std::pow(base, d); }

void check_eps_grid(std::span<const double> grid) {
  if (grid.empty()) throw ValidationError("epsilon_grid is empty");
  for (double e : grid) {
    if (!(e > 0.0) || e > 0.5) {
      throw ValidationError("epsilon_grid value " + std::to_string(e) + " outside (0, 1/2]");
    }
  }
}

std::vector<double> sorted_spectrum(const LatticeOperator& op, std::size_t cap) {
  const SpectralData s = spectrum(op, cap);
  std::vector<double> v(s.eigenvalues.data(), s.eigenvalues.data() + s.eigenvalues.size());
  std::sort(v.begin(), v.end());
  return v;
}

std::size_t window_count(const std::vector<double>& sorted, double lo, double hi) {
  auto first = std::lower_bound(sorted.begin(), sorted.end(), lo);
  auto last = std::upper_bound(sorted.begin(), sorted.end(), hi);
  return static_cast<std::size_t>(last - first);
}

// Spectra of the random operator for realizations [0, M).
std::vector<std::vector<double>> realization_spectra(const WegnerConfig& cfg,
                                                     const Domain& domain) {
  const SingleSitePotential u = single_site(cfg.model);
  const auto per = periodic_potential(domain, cfg.model.periodic);
  const std::size_t cells = domain.cells().size();
  std::vector<std::vector<double>> out(cfg.realizations);
  run_indexed(cfg.realizations, cfg.threads, [&](std::size_t m) {
    const auto omega = sample_couplings(cfg.disorder, cells, cfg.seed, m);
    out[m] = sorted_spectrum(assemble_operator(domain, alloy_potential(domain, u, omega, per)),
                             cfg.dense_cap);
  });
  return out;
}

void check_common(const WegnerConfig& cfg) {
  if (cfg.realizations < 1) throw ValidationError("realizations must be >= 1");
}

}  // namespace

Domain build_domain(const ModelSpec& spec) {
  if (!spec.mask.empty()) return build_masked_domain(spec.dimension, spec.mask, spec.spacing);
  return build_box_domain(spec.dimension, spec.side, spec.spacing);
}

SingleSitePotential single_site(const ModelSpec& spec) {
  if (!(spec.u_amplitude > 0.0) || !std::isfinite(spec.u_amplitude)) {
    throw ValidationError("u amplitude must be positive and finite");
  }
  return SingleSitePotential::cell_indicator(spec.dimension, spec.spacing, spec.u_amplitude);
}

std::vector<double> periodic_potential(const Domain& domain, std::span<const double> pattern) {
  std::vector<double> v(domain.size(), 0.0);
  if (pattern.empty()) return v;
  for (double p : pattern) {
    if (!std::isfinite(p)) throw ValidationError("periodic potential must be finite");
  }
  if (pattern.size() == 1) {
    std::fill(v.begin(), v.end(), pattern.front());
    return v;
  }
  const int d = domain.dimension();
  const double h = domain.spacing();
  const int m = h >= 1.0 ? 1 : static_cast<int>(std::lround(1.0 / h));
  std::size_t expected = 1;
  for (int a = 0; a < d; ++a) expected *= static_cast<std::size_t>(m);
  if (pattern.size() != expected) {
    throw ValidationError("periodic pattern needs " + std::to_string(expected) + " values, got " +
                          std::to_string(pattern.size()));
  }
  const int ny = d >= 2 ? m : 1;
  const int nz = d >= 3 ? m : 1;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const Coord anchor = domain.cell_anchor(domain.cell_of(i));
    const Coord& x = domain.sites()[i];
    const int ox = x[0] - anchor[0];
    const int oy = x[1] - anchor[1];
    const int oz = x[2] - anchor[2];
    v[i] = pattern[static_cast<std::size_t>((ox * ny + oy) * nz + oz)];
  }
  return v;
}

double default_energy(const ModelSpec& spec, std::size_t dense_cap) {
  const Domain domain = build_domain(spec);
  const auto s = sorted_spectrum(
      assemble_operator(domain, periodic_potential(domain, spec.periodic)), dense_cap);
  return 0.5 * (s.front() + s.back());
}

WegnerResult wegner_experiment(const WegnerConfig& cfg) {
  check_eps_grid(cfg.eps_grid);
  check_common(cfg);
  const Domain domain = build_domain(cfg.model);
  if (domain.size() > cfg.dense_cap) {
    throw NumericError("domain has " + std::to_string(domain.size()) +
                       " sites, above the dense cap " + std::to_string(cfg.dense_cap));
  }
  WegnerResult res;
  res.kappa = single_site(cfg.model).cell_floor(domain);
  if (!(res.kappa > 0.0)) throw ValidationError("u must dominate a positive cell indicator");
  res.energy = cfg.energy ? *cfg.energy : default_energy(cfg.model, cfg.dense_cap);
  res.volume = domain.volume();
  res.sites = domain.size();

  const std::size_t ne = cfg.eps_grid.size();
  const auto spectra = realization_spectra(cfg, domain);
  res.counts.resize(cfg.realizations);
  for (std::size_t m = 0; m < cfg.realizations; ++m) {
    res.counts[m].resize(ne);
    for (std::size_t j = 0; j < ne; ++j) {
      const double e = cfg.eps_grid[j];
      res.counts[m][j] = window_count(spectra[m], res.energy - e, res.energy + e);
    }
  }

  const int d = cfg.model.dimension;
  const double mcount = static_cast<double>(cfg.realizations);
  std::vector<double> log_eps;
  std::vector<double> log_mean;
  std::vector<double> ratios;
  for (std::size_t j = 0; j < ne; ++j) {
    WegnerRow row;
    row.eps = cfg.eps_grid[j];
    CompensatedSum sum;
    for (std::size_t m = 0; m < cfg.realizations; ++m) sum += static_cast<double>(res.counts[m][j]);
    row.mean = sum.value() / mcount;
    if (cfg.realizations > 1) {
      CompensatedSum sq;
      for (std::size_t m = 0; m < cfg.realizations; ++m) {
        const double dev = static_cast<double>(res.counts[m][j]) - row.mean;
        sq += dev * dev;
      }
      row.std_error = std::sqrt(sq.value() / (mcount - 1.0) / mcount);
    }
    row.s_2eps = modulus_of_continuity(cfg.disorder, 2.0 * row.eps);
    row.s_eps = modulus_of_continuity(cfg.disorder, row.eps);
    const double scale = power_d(std::abs(std::log(row.eps)), d) * res.volume;
    row.ratio_2eps = row.mean / (row.s_2eps * scale);
    row.ratio_eps = row.mean / (row.s_eps * scale);
    ratios.push_back(row.ratio_2eps);
    if (row.mean > 0.0) {
      log_eps.push_back(std::log(row.eps));
      log_mean.push_back(std::log(row.mean));
    }
    res.rows.push_back(row);
  }
  if (log_eps.size() >= 2) {
    const LineFit fit = fit_line(log_eps, log_mean);
    res.exponent = fit.slope;
    res.exponent_r2 = fit.r_squared;
  }
  res.ratio_median = median(ratios);
  res.ratio_max = *std::max_element(ratios.begin(), ratios.end());
  return res;
}

double IDSCurve::evaluate(double energy) const {
  if (realizations == 0 || volume <= 0.0) return 0.0;
  const auto n = std::upper_bound(pooled.begin(), pooled.end(), energy) - pooled.begin();
  return static_cast<double>(n) / (static_cast<double>(realizations) * volume);
}

IDSStudy ids_estimate(const WegnerConfig& cfg, std::span<const int> sides,
                      std::span<const double> energies) {
  check_common(cfg);
  if (sides.empty()) throw ValidationError("volumes list is empty");
  std::vector<double> grid(energies.begin(), energies.end());
  std::sort(grid.begin(), grid.end());
  IDSStudy study;
  for (int side : sides) {
    WegnerConfig local = cfg;
    local.model.side = side;
    local.model.mask.clear();
    const Domain domain = build_domain(local.model);
    if (domain.size() > cfg.dense_cap) {
      throw NumericError("volume with side " + std::to_string(side) + " exceeds the dense cap");
    }
    const auto spectra = realization_spectra(local, domain);
    IDSCurve curve;
    curve.side = side;
    curve.volume = domain.volume();
    curve.realizations = cfg.realizations;
    curve.energies = grid;
    for (const auto& s : spectra) curve.pooled.insert(curve.pooled.end(), s.begin(), s.end());
    std::sort(curve.pooled.begin(), curve.pooled.end());
    for (double e : grid) curve.values.push_back(curve.evaluate(e));
    study.curves.push_back(std::move(curve));
  }
  for (std::size_t i = 1; i < study.curves.size(); ++i) {
    double sup = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      sup = std::max(sup, std::abs(study.curves[i].values[j] - study.curves[i - 1].values[j]));
    }
    study.sup_distances.push_back(sup);
  }
  return study;
}

HolderReport holder_modulus_check(const IDSCurve& curve, const DisorderDistribution& dist,
                                  std::span<const std::pair<double, double>> pairs,
                                  int dimension) {
  HolderReport rep;
  std::vector<double> ratios;
  std::vector<double> log_de;
  std::vector<double> log_dn;
  double finest = std::numeric_limits<double>::infinity();
  double finest_ratio = 0.0;
  for (const auto& [e1, e2] : pairs) {
    const double de = std::abs(e2 - e1);
    if (!(de > 0.0) || de > 0.5) {
      throw ValidationError("energy pair spacing must lie in (0, 1/2]");
    }
    HolderRow row;
    row.e1 = e1;
    row.e2 = e2;
    row.delta_n = std::abs(curve.evaluate(e2) - curve.evaluate(e1));
    row.modulus = modulus_of_continuity(dist, de);
    row.log_factor = power_d(std::abs(std::log(de)), dimension);
    row.ratio = row.delta_n / (row.modulus * row.log_factor);
    ratios.push_back(row.ratio);
    if (row.delta_n > 0.0) {
      log_de.push_back(std::log(de));
      log_dn.push_back(std::log(row.delta_n));
    }
    if (de < finest) {
      finest = de;
      finest_ratio = row.ratio;
    }
    rep.rows.push_back(row);
  }
  if (ratios.empty()) return rep;
  rep.fitted_constant = *std::max_element(ratios.begin(), ratios.end());
  rep.ratio_median = median(ratios);
  if (log_de.size() >= 2) rep.exponent = fit_line(log_de, log_dn).slope;
  rep.unbounded_trend = finest_ratio > 3.0 * rep.ratio_median;
  return rep;
}

}  // namespace ssflab
