#include "ssflab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "ssflab/errors.hpp"
#include "ssflab/rng.hpp"
#include "ssflab/summation.hpp"

#ifndef SSFLAB_VERSION
#define SSFLAB_VERSION "0.0.0"
#endif

namespace ssflab {
namespace {

constexpr std::uint64_t kLemma3Stream = 0x6c656d6d61337472ull;

// ---------------------------------------------------------------------------
// Config reading

class Reader {
 public:
  Reader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigParseError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  const Json& require(const std::string& key) {
    const Json* j = find(key);
    if (!j) throw ConfigParseError(field(key), "required field is missing");
    return *j;
  }

  double number(const Json& j, const std::string& key) const {
    if (!j.is_number()) throw ConfigParseError(field(key), "expected a number");
    return j.get<double>();
  }

  double number_or(const std::string& key, double fallback) {
    const Json* j = find(key);
    return j ? number(*j, key) : fallback;
  }

  std::optional<double> optional_number(const std::string& key) {
    const Json* j = find(key);
    if (!j || j->is_null()) return std::nullopt;
    return number(*j, key);
  }

  long long integer(const Json& j, const std::string& key) const {
    if (j.is_number_integer()) return j.get<long long>();
    if (j.is_number_float()) {
      const double v = j.get<double>();
      if (std::floor(v) == v && std::abs(v) < 9e15) return static_cast<long long>(v);
    }
    throw ConfigParseError(field(key), "expected an integer");
  }

  long long integer_or(const std::string& key, long long fallback) {
    const Json* j = find(key);
    return j ? integer(*j, key) : fallback;
  }

  std::size_t count_or(const std::string& key, std::size_t fallback) {
    const long long v = integer_or(key, static_cast<long long>(fallback));
    if (v < 0) throw ValidationError(field(key) + ": must be nonnegative");
    return static_cast<std::size_t>(v);
  }

  std::string string_or(const std::string& key, const std::string& fallback) {
    const Json* j = find(key);
    if (!j) return fallback;
    if (!j->is_string()) throw ConfigParseError(field(key), "expected a string");
    return j->get<std::string>();
  }

  bool bool_or(const std::string& key, bool fallback) {
    const Json* j = find(key);
    if (!j) return fallback;
    if (!j->is_boolean()) throw ConfigParseError(field(key), "expected true or false");
    return j->get<bool>();
  }

  // Numbers, or "inf" where allow_infinity is set.
  std::vector<double> numbers(const std::string& key, bool allow_infinity = false) {
    const Json* j = find(key);
    std::vector<double> out;
    if (!j) return out;
    if (!j->is_array()) throw ConfigParseError(field(key), "expected a list of numbers");
    for (const auto& e : *j) {
      if (e.is_number()) {
        out.push_back(e.get<double>());
      } else if (allow_infinity && e.is_string() &&
                 (e.get<std::string>() == "inf" || e.get<std::string>() == "infinity")) {
        out.push_back(std::numeric_limits<double>::infinity());
      } else {
        throw ConfigParseError(field(key), "expected a list of numbers");
      }
    }
    return out;
  }

  std::vector<int> integers(const std::string& key) {
    const Json* j = find(key);
    std::vector<int> out;
    if (!j) return out;
    if (!j->is_array()) throw ConfigParseError(field(key), "expected a list of integers");
    for (const auto& e : *j) out.push_back(static_cast<int>(integer(e, key)));
    return out;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigParseError(field(it.key()), "unknown field");
    }
  }

 private:
  const Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

DisorderLaw parse_disorder(const Json& j) {
  Reader r(j, "model.disorder");
  const std::string law = r.string_or("law", "");
  DisorderLaw out;
  if (law == "uniform") {
    out = UniformLaw{r.number_or("a", 0.0), r.number_or("b", 1.0)};
  } else if (law == "bernoulli") {
    out = BernoulliLaw{r.number_or("p", 0.5), r.number_or("a", 0.0), r.number_or("b", 1.0)};
  } else if (law == "atomic-mixture") {
    AtomicMixtureLaw m;
    m.atoms = r.numbers("atoms");
    m.weights = r.numbers("weights");
    m.continuous_weight = r.number_or("continuous_weight", 0.0);
    m.a = r.number_or("a", 0.0);
    m.b = r.number_or("b", 1.0);
    out = m;
  } else if (law == "cantor") {
    CantorLaw c;
    c.depth = static_cast<int>(r.integer_or("depth", c.depth));
    c.alpha = r.number_or("alpha", c.alpha);
    c.a = r.number_or("a", 0.0);
    c.b = r.number_or("b", 1.0);
    out = c;
  } else if (law == "user-cdf") {
    out = TabulatedCdfLaw{r.numbers("x"), r.numbers("cdf")};
  } else {
    throw ConfigParseError("model.disorder.law",
                           law.empty() ? "required field is missing"
                                       : "unknown law '" + law + "'");
  }
  r.finish();
  return out;
}

Json disorder_to_json(const DisorderLaw& law) {
  return std::visit(
      [](const auto& l) -> Json {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, UniformLaw>) {
          return {{"law", "uniform"}, {"a", l.a}, {"b", l.b}};
        } else if constexpr (std::is_same_v<T, BernoulliLaw>) {
          return {{"law", "bernoulli"}, {"p", l.p}, {"a", l.a}, {"b", l.b}};
        } else if constexpr (std::is_same_v<T, AtomicMixtureLaw>) {
          return {{"law", "atomic-mixture"}, {"atoms", l.atoms},
                  {"weights", l.weights},    {"continuous_weight", l.continuous_weight},
                  {"a", l.a},                {"b", l.b}};
        } else if constexpr (std::is_same_v<T, CantorLaw>) {
          return {{"law", "cantor"}, {"depth", l.depth}, {"alpha", l.alpha}, {"a", l.a},
                  {"b", l.b}};
        } else {
          return {{"law", "user-cdf"}, {"x", l.x}, {"cdf", l.cdf}};
        }
      },
      law);
}

Json amplitudes_to_json(const std::vector<double>& amps) {
  Json out = Json::array();
  for (double a : amps) {
    if (std::isinf(a)) {
      out.push_back("inf");
    } else {
      out.push_back(a);
    }
  }
  return out;
}

void check(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ValidationError(field + ": " + message);
}

void check_all(const std::vector<double>& values, const std::string& field,
               const std::function<bool(double)>& ok, const std::string& range) {
  for (double v : values) {
    if (!ok(v)) {
      std::ostringstream msg;
      msg << "value " << v << " outside " << range;
      throw ValidationError(field + ": " + msg.str());
    }
  }
}

void validate(const ExperimentConfig& cfg) {
  const auto& m = cfg.model;
  check(m.dimension >= 1 && m.dimension <= 3, "model.dimension", "must be 1, 2 or 3");
  check(m.side >= 1, "model.side", "must be >= 1");
  check(m.spacing > 0.0 && std::isfinite(m.spacing), "model.spacing", "must be positive");
  check(m.u_amplitude > 0.0 && std::isfinite(m.u_amplitude), "model.u_amplitude",
        "must be positive");
  check_all(m.periodic, "model.periodic", [](double v) { return std::isfinite(v); }, "finite reals");
  check(std::isfinite(cfg.magnetic_field), "model.magnetic_field", "must be finite");
  check(cfg.magnetic_field == 0.0 || m.dimension >= 2, "model.magnetic_field",
        "needs dimension >= 2");
  if (cfg.disorder) {
    try {
      DisorderDistribution probe(*cfg.disorder);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("model.disorder: ") + e.what());
    }
  }
  const auto& n = cfg.numeric;
  check_all(n.epsilon_grid, "numeric.epsilon_grid", [](double e) { return e > 0.0 && e <= 0.5; },
            "(0, 1/2]");
  check(n.t > 0.0 && std::isfinite(n.t), "numeric.t", "must be positive");
  check(n.realizations >= 1, "numeric.realizations", "must be >= 1");
  check(n.eta > 0.0 && n.eta <= 0.25, "numeric.eta", "must lie in (0, 1/4]");
  check_all(n.t_grid, "numeric.t_grid", [](double t) { return t > 0.0 && t <= 1.0; }, "(0, 1]");
  check_all(n.amplitudes, "numeric.amplitudes", [](double a) { return a >= 0.0; }, "[0, inf]");
  check(n.amplitude >= 0.0 && std::isfinite(n.amplitude), "numeric.amplitude",
        "must be finite and >= 0");
  for (int v : n.volumes) check(v >= 1, "numeric.volumes", "sides must be >= 1");
  check(n.trials >= 1, "numeric.trials", "must be >= 1");
  check(n.dense_cap >= 1, "numeric.dense_cap", "must be >= 1");
  check(n.decay_floor > 0.0, "numeric.decay_floor", "must be positive");
  check_all(n.alphas, "numeric.alphas", [](double a) { return a > 0.0 && std::isfinite(a); },
            "(0, inf)");
  check_all(n.cutoffs, "numeric.cutoffs", [](double c) { return c > 3.0 && std::isfinite(c); },
            "(3, inf)");
  check_all(n.x_grid, "numeric.x_grid", [](double x) { return x >= 0.0 && std::isfinite(x); },
            "[0, inf)");
  check_all(n.y_grid, "numeric.y_grid", [](double y) { return y >= 0.0 && std::isfinite(y); },
            "[0, inf)");
  if (n.energy) check(std::isfinite(*n.energy), "numeric.energy", "must be finite");
  if (n.upper) check(std::isfinite(*n.upper), "numeric.T", "must be finite");
  check(!cfg.output.prefix.empty() || !cfg.kind.empty(), "output.prefix", "must not be empty");
  if (cfg.kind == "wegner" || cfg.kind == "trace-bound") {
    check(!n.epsilon_grid.empty(), "numeric.epsilon_grid", "must not be empty");
  }
  if (cfg.kind == "ids") {
    check(!n.volumes.empty(), "numeric.volumes", "must not be empty");
    check(!n.energy_grid.empty(), "numeric.energy_grid", "must not be empty");
  }
  if (cfg.kind == "singular-decay") {
    check(!n.amplitudes.empty(), "numeric.amplitudes", "must not be empty");
  }
}

// ---------------------------------------------------------------------------
// Shared model plumbing

struct Model {
  Domain domain;
  SingleSitePotential u;
  std::vector<double> periodic;
  std::optional<std::vector<std::complex<double>>> phases;
  std::optional<DisorderDistribution> disorder;
  std::size_t center = 0;  // index into domain.cells()
  std::size_t rank = 0;    // sites where the center-cell u is positive
};

Model build_model(const ExperimentConfig& cfg) {
  Domain domain = build_domain(cfg.model);
  if (domain.size() > cfg.numeric.dense_cap) {
    throw NumericError("domain has " + std::to_string(domain.size()) +
                       " sites, above the dense cap " + std::to_string(cfg.numeric.dense_cap));
  }
  Model m{domain, single_site(cfg.model), periodic_potential(domain, cfg.model.periodic), {}, {},
          domain.cells().size() / 2, 0};
  if (cfg.magnetic_field != 0.0) {
    m.phases = constant_field_phases(domain, cfg.magnetic_field, cfg.gauge);
  }
  if (cfg.disorder) m.disorder.emplace(*cfg.disorder);
  std::vector<double> unit(domain.cells().size(), 0.0);
  unit[m.center] = 1.0;
  const std::vector<double> zero(domain.size(), 0.0);
  for (double v : alloy_potential(domain, m.u, unit, zero)) m.rank += v > 0.0 ? 1 : 0;
  return m;
}

std::vector<double> background(const Model& m, std::uint64_t seed, std::uint64_t realization) {
  if (!m.disorder) return std::vector<double>(m.domain.cells().size(), 0.0);
  return sample_couplings(*m.disorder, m.domain.cells().size(), seed, realization);
}

LatticeOperator model_operator(const Model& m, const std::vector<double>& omega) {
  return assemble_operator(m.domain, alloy_potential(m.domain, m.u, omega, m.periodic),
                           m.phases);
}

struct Pair {
  SpectralData first;
  SpectralData second;
};

// H1 = background realization, H2 = H1 + amplitude * u(center).
Pair model_pair(const ExperimentConfig& cfg, const Model& m, std::uint64_t realization,
                bool vectors) {
  auto omega = background(m, cfg.seed, realization);
  const auto h1 = model_operator(m, omega);
  omega[m.center] += cfg.numeric.amplitude;
  const auto h2 = model_operator(m, omega);
  const std::size_t cap = cfg.numeric.dense_cap;
  if (vectors) return {eigen_decompose(h1, cap), eigen_decompose(h2, cap)};
  return {spectrum(h1, cap), spectrum(h2, cap)};
}

double mid_spectrum(const SpectralData& s) {
  return 0.5 * (s.eigenvalues.minCoeff() + s.eigenvalues.maxCoeff());
}

std::vector<double> or_default(const std::vector<double>& v, std::vector<double> fallback) {
  return v.empty() ? fallback : v;
}

WegnerConfig wegner_config(const ExperimentConfig& cfg, std::size_t threads) {
  WegnerConfig w;
  w.model = cfg.model;
  if (cfg.disorder) w.disorder = DisorderDistribution(*cfg.disorder);
  w.energy = cfg.numeric.energy;
  w.eps_grid = cfg.numeric.epsilon_grid;
  w.realizations = cfg.numeric.realizations;
  w.seed = cfg.seed;
  w.threads = threads;
  w.dense_cap = cfg.numeric.dense_cap;
  return w;
}

Json fit_to_json(const std::optional<DecayFit>& fit) {
  if (!fit) return nullptr;
  return {{"alpha", fit->alpha},         {"rate", fit->rate},   {"prefactor", fit->prefactor},
          {"r_squared", fit->r_squared}, {"n_min", fit->n_min}, {"n_max", fit->n_max},
          {"points", fit->points},       {"floor", fit->floor}};
}

Json amplitude_json(double a) {
  if (std::isinf(a)) return "inf";
  return a;
}

// ---------------------------------------------------------------------------
// Experiments

void run_ssf_identities(const ExperimentConfig& cfg, ExperimentRecord& rec) {
  const Model m = build_model(cfg);
  const auto eps_grid = or_default(cfg.numeric.epsilon_grid, {0.5, 0.25, 0.125});
  Json rows = Json::array();
  Table table{"ssf_checks",
              {"trial", "max_abs_xi", "min_xi", "max_xi", "krein_gap", "invariance_exact",
               "integral_gap"},
              {"index", "count", "count", "count", "relative", "bool", "energy"},
              {}};
  double krein_max = 0.0;
  double integral_max = 0.0;
  bool invariance_exact = true;
  std::size_t sign_violations = 0;
  std::size_t rank_violations = 0;
  double energy0 = 0.0;
  for (std::size_t i = 0; i < cfg.numeric.trials; ++i) {
    const Pair p = model_pair(cfg, m, i, false);
    const SSFCurve curve = ssf_counting(p.first, p.second);
    const double energy = cfg.numeric.energy ? *cfg.numeric.energy : mid_spectrum(p.first);
    if (i == 0) energy0 = energy;
    double gap = 0.0;
    for (double e : eps_grid) {
      const SwitchFunction rho = make_switch(energy, e);
      gap = std::max(gap, krein_check(p.first, p.second, curve, [&](double x) { return rho(x); })
                              .relative_gap());
    }
    const bool exact =
        ssf_via_invariance(p.first, p.second, [](double x) { return std::exp(-x); }) == curve &&
        ssf_via_invariance(p.first, p.second, [](double x) { return std::atan(x); }) == curve;
    const double integral_gap =
        std::abs(curve.integral() - (p.first.eigenvalues.sum() - p.second.eigenvalues.sum()));
    if (curve.max_value() > 0) ++sign_violations;
    if (static_cast<std::size_t>(curve.max_abs()) > m.rank) ++rank_violations;
    krein_max = std::max(krein_max, gap);
    integral_max = std::max(integral_max, integral_gap);
    invariance_exact = invariance_exact && exact;
    rows.push_back({{"trial", i},
                    {"energy", energy},
                    {"max_abs_xi", curve.max_abs()},
                    {"min_xi", curve.min_value()},
                    {"max_xi", curve.max_value()},
                    {"krein_gap", gap},
                    {"invariance_exact", exact},
                    {"integral_gap", integral_gap}});
    table.rows.push_back({static_cast<double>(i), static_cast<double>(curve.max_abs()),
                          static_cast<double>(curve.min_value()),
                          static_cast<double>(curve.max_value()), gap, exact ? 1.0 : 0.0,
                          integral_gap});
    if (i == 0) {
      rec.curves.push_back({"ssf",
                            curve,
                            {{"kind", "ssf-identities"},
                             {"pair", "H1 = background, H2 = H1 + amplitude * u(center)"},
                             {"amplitude", std::to_string(cfg.numeric.amplitude)}}});
    }
  }
  rec.payload = {{"trials", cfg.numeric.trials},
                 {"rank", m.rank},
                 {"sites", m.domain.size()},
                 {"energy", energy0},
                 {"epsilon_grid", eps_grid},
                 {"krein_max_gap", krein_max},
                 {"invariance_exact", invariance_exact},
                 {"integral_max_gap", integral_max},
                 {"sign_violations", sign_violations},
                 {"rank_violations", rank_violations},
                 {"rows", rows}};
  rec.fits = Json::object();
  rec.tables.push_back(std::move(table));
}

void run_ft_bounds(const ExperimentConfig& cfg, ExperimentRecord& rec) {
  const int d = cfg.model.dimension;
  const FtFunctional fn{cfg.numeric.t, d, 0.0};
  const double a = fn.exponent();

  Json f_rows = Json::array();
  Table f_table{"ft_values",
                {"x", "log_F", "F_scaled", "asymptotic_ratio"},
                {"dimensionless", "log", "F*exp(-t x^alpha)", "ratio"},
                {}};
  for (double x : or_default(cfg.numeric.x_grid, {0, 0.5, 1, 2, 5, 10, 100, 1000, 10000})) {
    const double scaled = ft_eval_scaled(fn, x);
    const double log_f = x == 0.0 ? -std::numeric_limits<double>::infinity()
                                  : std::log(scaled) + fn.t * std::pow(x, a);
    const double asym =
        x == 0.0 ? 0.0 : scaled / ((d / fn.t) * std::pow(x, (d - 1.0) / d));
    f_rows.push_back({{"x", x}, {"log_F", x == 0.0 ? Json(nullptr) : Json(log_f)},
                      {"F_scaled", scaled}, {"asymptotic_ratio", asym}});
    f_table.rows.push_back({x, log_f, scaled, asym});
  }

  Json g_rows = Json::array();
  Table g_table{"legendre", {"y", "G", "majorant", "holds"}, {"dimensionless", "", "", "bool"}, {}};
  std::vector<double> default_y;
  for (int k = -6; k <= 6; ++k) default_y.push_back(std::pow(10.0, 0.5 * k));
  std::size_t legendre_violations = 0;
  for (double y : or_default(cfg.numeric.y_grid, default_y)) {
    const double g = legendre_dual(fn, y);
    const double bound = legendre_majorant(fn, y);
    const bool holds = g <= bound * (1.0 + 1e-12) + 1e-300;
    if (!holds) ++legendre_violations;
    g_rows.push_back({{"y", y}, {"G", g}, {"majorant", bound}, {"holds", holds}});
    g_table.rows.push_back({y, g, bound, holds ? 1.0 : 0.0});
  }

  Json trends = Json::array();
  Table t_table{"synthetic_trend", {"alpha", "cutoff", "log_integral"},
                {"exponent", "|log lambda|", "log"}, {}};
  const auto cutoffs = or_default(cfg.numeric.cutoffs, {50, 100, 200, 400, 800});
  for (double alpha : or_default(cfg.numeric.alphas, {0.5 / d, 1.0 / d, 3.0 / d})) {
    const DivergenceTrend tr = synthetic_landau_trend({fn.t, d, alpha}, cutoffs);
    trends.push_back({{"alpha", alpha},
                      {"cutoffs", tr.cutoffs},
                      {"log_integrals", tr.log_integrals},
                      {"converging", tr.converging},
                      {"diverging", tr.diverging}});
    for (std::size_t i = 0; i < tr.cutoffs.size(); ++i) {
      t_table.rows.push_back({alpha, tr.cutoffs[i], tr.log_integrals[i]});
    }
  }

  // Model pair: majorization and the integral / dual bounds for its SSF.
  const Model m = build_model(cfg);
  const Pair p = model_pair(cfg, m, 0, true);
  const auto sv = singular_values(difference(semigroup(p.first, 1.0), semigroup(p.second, 1.0)));
  const SSFCurve curve_exp = exponentiated_ssf(p.first, p.second);
  const MajorizationResult maj = hs_majorization_check(sv, curve_exp, fn);
  const SSFCurve curve = ssf_counting(p.first, p.second);
  std::vector<TestFunctionSummary> training;
  std::vector<TestFunctionSummary> heldout;
  const double lo = p.first.eigenvalues.minCoeff();
  const double hi = p.first.eigenvalues.maxCoeff();
  for (int k = 0; k <= 8; ++k) {
    const double e = lo + (hi - lo) * k / 8.0;
    for (double eps : or_default(cfg.numeric.epsilon_grid, {0.5, 0.25, 0.125})) {
      heldout.push_back(summarize_switch_derivative(curve, 1.0, make_switch(e, eps)));
      heldout.push_back(summarize_switch_derivative(curve, 10.0, make_switch(e, eps)));
    }
    for (double w : {0.05, 0.5, 2.0}) {
      for (double height : {1.0, 10.0, 100.0}) {
        training.push_back(summarize_indicator(curve, height, e - w, e + w));
      }
    }
  }
  const DualBoundReport dual = dual_bound_check(curve, fn, training, heldout);
  Json integral = nullptr;
  if (cfg.numeric.upper) {
    const double value = ssf_integral_bound(curve, fn, *cfg.numeric.upper);
    integral = {{"T", *cfg.numeric.upper},
                {"value", value},
                {"k1_times_exp_T", dual.k1 * std::exp(*cfg.numeric.upper)}};
  }
  rec.curves.push_back({"ssf_exponentiated",
                        curve_exp,
                        {{"kind", "ft-bounds"}, {"variable", "s = exp(-lambda)"}}});

  rec.payload = {{"t", fn.t},
                 {"dimension", d},
                 {"alpha", a},
                 {"F", f_rows},
                 {"legendre", g_rows},
                 {"legendre_violations", legendre_violations},
                 {"synthetic_trend", trends},
                 {"majorization", {{"lhs", maj.lhs}, {"rhs", maj.rhs}, {"holds", maj.holds}}},
                 {"singular_values", sv.values},
                 {"integral_bound", integral},
                 {"dual_bound",
                  {{"heldout", dual.heldout},
                   {"violations_fitted", dual.violations_fitted},
                   {"violations_proof", dual.violations_proof}}}};
  rec.fits = {{"K1", dual.k1}, {"K2_fitted", dual.k2_fitted}, {"K2_proof", dual.k2_proof}};
  rec.tables.push_back(std::move(f_table));
  rec.tables.push_back(std::move(g_table));
  rec.tables.push_back(std::move(t_table));
}

void run_wegner(const ExperimentConfig& cfg, const RunOptions& opts, ExperimentRecord& rec) {
  const WegnerResult r = wegner_experiment(wegner_config(cfg, opts.threads));
  Json rows = Json::array();
  Table table{"wegner",
              {"eps", "mean", "std_error", "s_2eps", "s_eps", "ratio_2eps", "ratio_eps"},
              {"energy", "count", "count", "probability", "probability", "", ""},
              {}};
  for (const auto& row : r.rows) {
    rows.push_back({{"eps", row.eps},
                    {"mean", row.mean},
                    {"std_error", row.std_error},
                    {"s_2eps", row.s_2eps},
                    {"s_eps", row.s_eps},
                    {"ratio_2eps", row.ratio_2eps},
                    {"ratio_eps", row.ratio_eps}});
    table.rows.push_back(
        {row.eps, row.mean, row.std_error, row.s_2eps, row.s_eps, row.ratio_2eps, row.ratio_eps});
  }
  rec.payload = {{"energy", r.energy},
                 {"volume", r.volume},
                 {"sites", r.sites},
                 {"kappa", r.kappa},
                 {"realizations_logged", r.counts.size()},
                 {"rows", rows},
                 {"counts", r.counts}};
  rec.fits = {{"exponent", r.exponent},
              {"exponent_r2", r.exponent_r2},
              {"C_W_fitted", r.ratio_max},
              {"ratio_median", r.ratio_median},
              {"ratio_max_over_median", r.ratio_median > 0.0 ? r.ratio_max / r.ratio_median : 0.0}};
  rec.tables.push_back(std::move(table));
  if (cfg.output.raw_counts) {
    Table raw{"counts", {"realization_index", "eps", "count"}, {"index", "energy", "count"}, {}};
    for (std::size_t m = 0; m < r.counts.size(); ++m) {
      for (std::size_t j = 0; j < r.rows.size(); ++j) {
        raw.rows.push_back(
            {static_cast<double>(m), r.rows[j].eps, static_cast<double>(r.counts[m][j])});
      }
    }
    rec.tables.push_back(std::move(raw));
  }
}

void run_ids(const ExperimentConfig& cfg, const RunOptions& opts, ExperimentRecord& rec) {
  const WegnerConfig w = wegner_config(cfg, opts.threads);
  const IDSStudy study = ids_estimate(w, cfg.numeric.volumes, cfg.numeric.energy_grid);
  Json curves = Json::array();
  Table table{"ids", {"side", "energy", "ids"}, {"sites", "energy", "per unit volume"}, {}};
  for (const auto& c : study.curves) {
    curves.push_back({{"side", c.side},
                      {"volume", c.volume},
                      {"realizations", c.realizations},
                      {"energies", c.energies},
                      {"values", c.values}});
    for (std::size_t i = 0; i < c.energies.size(); ++i) {
      table.rows.push_back({static_cast<double>(c.side), c.energies[i], c.values[i]});
    }
  }
  const IDSCurve& finest = study.curves.back();
  const double energy = cfg.numeric.energy ? *cfg.numeric.energy
                                           : default_energy(cfg.model, cfg.numeric.dense_cap);
  std::vector<std::pair<double, double>> pairs;
  for (double e : or_default(cfg.numeric.epsilon_grid, {0.25, 0.125, 0.0625, 0.03125, 0.015625})) {
    pairs.emplace_back(energy, energy + e);
  }
  const HolderReport h = holder_modulus_check(finest, w.disorder, pairs, cfg.model.dimension);
  Json holder_rows = Json::array();
  Table h_table{"holder",
                {"e1", "e2", "delta_n", "modulus", "log_factor", "ratio"},
                {"energy", "energy", "per unit volume", "probability", "", ""},
                {}};
  for (const auto& row : h.rows) {
    holder_rows.push_back({{"e1", row.e1},
                           {"e2", row.e2},
                           {"delta_n", row.delta_n},
                           {"modulus", row.modulus},
                           {"log_factor", row.log_factor},
                           {"ratio", row.ratio}});
    h_table.rows.push_back({row.e1, row.e2, row.delta_n, row.modulus, row.log_factor, row.ratio});
  }
  rec.payload = {{"curves", curves},
                 {"sup_distances", study.sup_distances},
                 {"holder", {{"energy", energy}, {"rows", holder_rows},
                             {"unbounded_trend", h.unbounded_trend}}}};
  rec.fits = {{"C_I_fitted", h.fitted_constant},
              {"ratio_median", h.ratio_median},
              {"holder_exponent", h.exponent}};
  rec.tables.push_back(std::move(table));
  rec.tables.push_back(std::move(h_table));
}

double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

struct Lemma3Trial {
  DisorderLaw law;
  std::vector<std::array<double, 3>> bumps;  // weight, start, width
  double eps = 0.0;
};

Lemma3Trial lemma3_trial(std::uint64_t seed, std::uint64_t index) {
  StreamRng rng({seed, index, kLemma3Stream});
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); };
  Lemma3Trial t;
  const double a = uni(-1.0, 1.0);
  const double b = a + uni(0.01, 2.0);
  switch (index % 4) {
    case 0:
      t.law = UniformLaw{a, b};
      break;
    case 1:
      t.law = BernoulliLaw{uni(0.0, 1.0), a, b};
      break;
    case 2:
      t.law = CantorLaw{4 + static_cast<int>(rng.uniform01() * 9), uni(0.3, 0.95), a, b};
      break;
    default: {
      AtomicMixtureLaw mix;
      const int atoms = 1 + static_cast<int>(rng.uniform01() * 4);
      mix.continuous_weight = rng.uniform01() < 0.5 ? uni(0.0, 0.8) : 0.0;
      double total = 0.0;
      for (int k = 0; k < atoms; ++k) {
        mix.atoms.push_back(uni(a, b));
        mix.weights.push_back(uni(0.05, 1.0));
        total += mix.weights.back();
      }
      for (double& w : mix.weights) w *= (1.0 - mix.continuous_weight) / total;
      mix.a = a;
      mix.b = b;
      t.law = mix;
    }
  }
  const int bumps = 1 + static_cast<int>(rng.uniform01() * 4);
  for (int k = 0; k < bumps; ++k) {
    t.bumps.push_back({uni(0.1, 2.0), uni(a - 0.5, b + 0.5), uni(0.01, 1.0)});
  }
  t.eps = std::exp(uni(std::log(1e-3), std::log(0.5)));
  return t;
}

void run_lemma3(const ExperimentConfig& cfg, ExperimentRecord& rec) {
  Table table{"lemma3", {"trial", "law", "eps", "lhs", "rhs", "holds"},
              {"index", "code", "", "", "", "bool"}, {}};
  std::size_t violations = 0;
  double max_excess = -std::numeric_limits<double>::infinity();
  std::map<std::string, std::size_t> per_law;
  for (std::size_t i = 0; i < cfg.numeric.trials; ++i) {
    const Lemma3Trial t = lemma3_trial(cfg.seed, i);
    const DisorderDistribution dist(t.law);
    auto phi = [&](double x) {
      double s = 0.0;
      for (const auto& [w, start, width] : t.bumps) s += w * smoothstep((x - start) / width);
      return s;
    };
    const Lemma3Result r = lemma3_verify(dist, phi, t.eps);
    if (!r.holds) ++violations;
    max_excess = std::max(max_excess, r.lhs - r.rhs);
    ++per_law[dist.kind()];
    table.rows.push_back({static_cast<double>(i), static_cast<double>(t.law.index()), t.eps, r.lhs,
                          r.rhs, r.holds ? 1.0 : 0.0});
  }
  rec.payload = {{"trials", cfg.numeric.trials},
                 {"violations", violations},
                 {"max_excess", max_excess},
                 {"per_law", per_law},
                 {"tolerance", 1e-8}};
  rec.fits = Json::object();
  rec.tables.push_back(std::move(table));
}

Json weyl_json(const WeylReport& r) {
  return {{"spacing", r.spacing},     {"volume", r.volume},         {"delta", r.delta},
          {"shift", r.shift},         {"checked", r.checked},       {"violations", r.violations},
          {"min_margin", r.min_margin}};
}

std::vector<double> default_t_grid(double h) {
  const double lo = 4.0 * h * h;
  std::vector<double> grid;
  if (lo > 1.0) return grid;
  constexpr int kPoints = 6;
  for (int i = 0; i < kPoints; ++i) grid.push_back(lo * std::pow(1.0 / lo, i / (kPoints - 1.0)));
  grid.back() = 1.0;
  return grid;
}

void run_weyl(const ExperimentConfig& cfg, ExperimentRecord& rec) {
  const Model m = build_model(cfg);
  const auto potential =
      alloy_potential(m.domain, m.u, background(m, cfg.seed, 0), m.periodic);
  const WeylStudy study = weyl_refinement_study(m.domain, potential, cfg.numeric.eta,
                                                cfg.numeric.dense_cap);
  Table w_table{"weyl", {"level", "n", "eigenvalue", "bound"}, {"refinement", "index", "energy", "energy"}, {}};
  int level = 0;
  for (const WeylReport* r : {&study.coarse, &study.fine}) {
    for (std::size_t n = 0; n < r->eigenvalues.size(); ++n) {
      w_table.rows.push_back({static_cast<double>(level), static_cast<double>(n + 1),
                              r->eigenvalues[n], r->bounds[n]});
    }
    ++level;
  }
  Table s_table{"semigroup", {"level", "t", "lhs", "rhs", "margin"},
                {"refinement", "time", "trace", "trace", "1 - lhs/rhs"}, {}};
  Json semigroup = Json::array();
  bool all_hold = true;
  const Domain fine = m.domain.refined();
  const auto fine_potential = refine_potential(m.domain, potential);
  level = 0;
  for (const Domain* dom : {&m.domain, &fine}) {
    const auto& v = level == 0 ? potential : fine_potential;
    std::vector<double> grid = cfg.numeric.t_grid;
    const double lo = 4.0 * dom->spacing() * dom->spacing();
    grid.erase(std::remove_if(grid.begin(), grid.end(), [&](double t) { return t < lo; }),
               grid.end());
    if (cfg.numeric.t_grid.empty()) grid = default_t_grid(dom->spacing());
    Json entry = {{"level", level}, {"window_min", lo}};
    if (grid.empty()) {
      entry["rows"] = Json::array();
      entry["note"] = "window [4h^2, 1] is empty";
    } else {
      const SemigroupReport r = semigroup_trace_check(*dom, v, grid, cfg.numeric.dense_cap);
      Json rows = Json::array();
      for (const auto& row : r.rows) {
        rows.push_back({{"t", row.t}, {"lhs", row.lhs}, {"rhs", row.rhs},
                        {"margin", row.margin}, {"holds", row.holds}});
        s_table.rows.push_back({static_cast<double>(level), row.t, row.lhs, row.rhs, row.margin});
      }
      entry["rows"] = rows;
      entry["all_hold"] = r.all_hold;
      all_hold = all_hold && r.all_hold;
    }
    semigroup.push_back(entry);
    ++level;
  }
  rec.payload = {{"coarse", weyl_json(study.coarse)},
                 {"fine", weyl_json(study.fine)},
                 {"eta", cfg.numeric.eta},
                 {"semigroup", semigroup},
                 {"semigroup_all_hold", all_hold}};
  rec.fits = {{"margin_coarse", study.coarse.min_margin}, {"margin_fine", study.fine.min_margin}};
  rec.tables.push_back(std::move(w_table));
  rec.tables.push_back(std::move(s_table));
}

void run_trace_bound(const ExperimentConfig& cfg, ExperimentRecord& rec) {
  const Model m = build_model(cfg);
  const Pair p = model_pair(cfg, m, 0, false);
  const double energy = cfg.numeric.energy ? *cfg.numeric.energy : mid_spectrum(p.first);
  const TraceBoundReport r =
      trace_bound_check(p.first, p.second, energy, cfg.numeric.epsilon_grid, cfg.model.dimension);
  Json rows = Json::array();
  Table table{"trace_bound", {"eps", "trace", "log_factor", "ratio"},
              {"energy", "count", "|log eps|^d", ""}, {}};
  double max_abs = 0.0;
  for (const auto& row : r.rows) {
    rows.push_back({{"eps", row.eps}, {"trace", row.trace}, {"log_factor", row.log_factor},
                    {"ratio", row.ratio}});
    table.rows.push_back({row.eps, row.trace, row.log_factor, row.ratio});
    max_abs = std::max(max_abs, std::abs(row.trace));
  }
  const bool bounded = max_abs <= static_cast<double>(m.rank) + 1e-9;
  rec.payload = {{"energy", energy},
                 {"rank", m.rank},
                 {"rows", rows},
                 {"max_abs_trace", max_abs},
                 {"bounded_by_rank", bounded},
                 {"envelope_violations", r.envelope_violations}};
  rec.fits = {{"C_E", r.fitted_constant},
              {"C_E_coarse", r.coarse_constant},
              {"C_E_fine", r.fine_constant},
              {"fine_over_coarse",
               r.coarse_constant > 0.0 ? r.fine_constant / r.coarse_constant : 0.0}};
  rec.tables.push_back(std::move(table));
  rec.curves.push_back({"ssf", ssf_counting(p.first, p.second),
                        {{"kind", "trace-bound"}, {"energy", std::to_string(energy)}}});
}

void run_singular_decay(const ExperimentConfig& cfg, ExperimentRecord& rec) {
  DecayConfig dc;
  dc.model = cfg.model;
  dc.amplitudes = cfg.numeric.amplitudes;
  dc.floor = cfg.numeric.decay_floor;
  dc.skip_leading = cfg.numeric.decay_skip;
  dc.dense_cap = cfg.numeric.dense_cap;
  const DecayReport r = singular_value_experiment(dc);
  const int d = cfg.model.dimension;
  Json rows = Json::array();
  Table table{"singular_values", {"amplitude", "n", "mu_n", "n_pow_1_over_d", "log_mu_n"},
              {"coupling (inf = deletion)", "index", "singular value", "", "log"}, {}};
  Json fits = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"amplitude", amplitude_json(row.amplitude)},
                    {"singular_values", row.singular_values.values},
                    {"fit_error", row.fit_error}});
    fits.push_back({{"amplitude", amplitude_json(row.amplitude)},
                    {"alpha_1_over_d", fit_to_json(row.fit_root)},
                    {"alpha_2_over_d", fit_to_json(row.fit_square)}});
    for (std::size_t n = 0; n < row.singular_values.values.size(); ++n) {
      const double mu = row.singular_values.values[n];
      if (!(mu > 0.0)) continue;
      table.rows.push_back({row.amplitude, static_cast<double>(n + 1), mu,
                            std::pow(static_cast<double>(n + 1), 1.0 / d), std::log(mu)});
    }
  }
  rec.payload = {{"rows", rows}, {"rate_spread", r.rate_spread}};
  rec.fits = {{"per_amplitude", fits}, {"rate_spread", r.rate_spread}};
  rec.tables.push_back(std::move(table));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentConfig parse_config(const Json& doc) {
  Reader root(doc, "");
  ExperimentConfig cfg;
  const Json& kind = root.require("kind");
  if (!kind.is_string()) throw ConfigParseError("kind", "expected a string");
  cfg.kind = kind.get<std::string>();
  if (!find_kind(cfg.kind)) throw ConfigParseError("kind", "unknown experiment kind '" + cfg.kind + "'");
  const Json& seed = root.require("seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
    throw ConfigParseError("seed", "expected a nonnegative integer");
  }
  cfg.seed = seed.get<std::uint64_t>();

  if (const Json* mj = root.find("model")) {
    Reader r(*mj, "model");
    cfg.model.dimension = static_cast<int>(r.integer_or("dimension", cfg.model.dimension));
    cfg.model.side = static_cast<int>(r.integer_or("side", cfg.model.side));
    cfg.model.spacing = r.number_or("spacing", cfg.model.spacing);
    if (const Json* mask = r.find("mask")) {
      if (!mask->is_array()) throw ConfigParseError("model.mask", "expected a list of coordinates");
      for (const auto& c : *mask) {
        if (!c.is_array() || c.empty() || c.size() > 3) {
          throw ConfigParseError("model.mask", "each site is a list of 1 to 3 integers");
        }
        Coord x{0, 0, 0};
        for (std::size_t a = 0; a < c.size(); ++a) {
          x[a] = static_cast<int>(r.integer(c[a], "mask"));
        }
        cfg.model.mask.push_back(x);
      }
    }
    cfg.model.u_amplitude = r.number_or("u_amplitude", cfg.model.u_amplitude);
    cfg.model.periodic = r.numbers("periodic");
    if (const Json* dj = r.find("disorder")) {
      if (!dj->is_null()) cfg.disorder = parse_disorder(*dj);
    }
    cfg.magnetic_field = r.number_or("magnetic_field", 0.0);
    const std::string gauge = r.string_or("gauge", "landau");
    if (gauge == "landau") {
      cfg.gauge = Gauge::landau;
    } else if (gauge == "symmetric") {
      cfg.gauge = Gauge::symmetric;
    } else {
      throw ConfigParseError("model.gauge", "expected 'landau' or 'symmetric'");
    }
    r.finish();
  }

  if (const Json* nj = root.find("numeric")) {
    Reader r(*nj, "numeric");
    auto& n = cfg.numeric;
    n.epsilon_grid = r.numbers("epsilon_grid");
    n.t = r.number_or("t", n.t);
    n.upper = r.optional_number("T");
    n.energy = r.optional_number("energy");
    n.realizations = r.count_or("realizations", n.realizations);
    n.eta = r.number_or("eta", n.eta);
    n.t_grid = r.numbers("t_grid");
    n.amplitudes = r.numbers("amplitudes", true);
    n.amplitude = r.number_or("amplitude", n.amplitude);
    n.volumes = r.integers("volumes");
    n.energy_grid = r.numbers("energy_grid");
    n.trials = r.count_or("trials", n.trials);
    n.dense_cap = r.count_or("dense_cap", n.dense_cap);
    n.decay_floor = r.number_or("decay_floor", n.decay_floor);
    n.decay_skip = r.count_or("decay_skip", n.decay_skip);
    n.alphas = r.numbers("alphas");
    n.cutoffs = r.numbers("cutoffs");
    n.x_grid = r.numbers("x_grid");
    n.y_grid = r.numbers("y_grid");
    r.finish();
  }

  if (const Json* oj = root.find("output")) {
    Reader r(*oj, "output");
    cfg.output.directory = r.string_or("directory", cfg.output.directory);
    cfg.output.prefix = r.string_or("prefix", "");
    cfg.output.tables = r.bool_or("tables", true);
    cfg.output.curves = r.bool_or("curves", true);
    cfg.output.raw_counts = r.bool_or("raw_counts", true);
    r.finish();
  }
  root.finish();

  // Kind-specific required fields.
  const KindInfo* info = find_kind(cfg.kind);
  for (const auto& req : info->required) {
    const auto dot = req.find('.');
    const std::string block = req.substr(0, dot);
    const std::string key = req.substr(dot + 1);
    if (block == "seed") continue;
    const bool present = doc.contains(block) && doc[block].is_object() &&
                         doc[block].contains(key) && !doc[block][key].is_null();
    if (!present) throw ConfigParseError(req, "required for kind '" + cfg.kind + "'");
  }
  if (cfg.output.prefix.empty()) cfg.output.prefix = cfg.kind;
  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigParseError("<document>", std::string("not valid JSON: ") + e.what());
  }
  // A stored record reruns its config snapshot.
  if (doc.is_object() && doc.contains("config") && doc.contains("payload_hash")) {
    return config_from_record(doc);
  }
  return parse_config(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("<document>", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json model = {{"dimension", cfg.model.dimension},
                {"side", cfg.model.side},
                {"spacing", cfg.model.spacing},
                {"u_amplitude", cfg.model.u_amplitude},
                {"periodic", cfg.model.periodic},
                {"magnetic_field", cfg.magnetic_field},
                {"gauge", cfg.gauge == Gauge::landau ? "landau" : "symmetric"}};
  if (!cfg.model.mask.empty()) {
    Json mask = Json::array();
    for (const auto& c : cfg.model.mask) {
      Json site = Json::array();
      for (int a = 0; a < cfg.model.dimension; ++a) site.push_back(c[static_cast<std::size_t>(a)]);
      mask.push_back(site);
    }
    model["mask"] = mask;
  }
  if (cfg.disorder) model["disorder"] = disorder_to_json(*cfg.disorder);
  const auto& n = cfg.numeric;
  Json numeric = {{"epsilon_grid", n.epsilon_grid},
                  {"t", n.t},
                  {"realizations", n.realizations},
                  {"eta", n.eta},
                  {"t_grid", n.t_grid},
                  {"amplitudes", amplitudes_to_json(n.amplitudes)},
                  {"amplitude", n.amplitude},
                  {"volumes", n.volumes},
                  {"energy_grid", n.energy_grid},
                  {"trials", n.trials},
                  {"dense_cap", n.dense_cap},
                  {"decay_floor", n.decay_floor},
                  {"decay_skip", n.decay_skip},
                  {"alphas", n.alphas},
                  {"cutoffs", n.cutoffs},
                  {"x_grid", n.x_grid},
                  {"y_grid", n.y_grid}};
  if (n.upper) numeric["T"] = *n.upper;
  if (n.energy) numeric["energy"] = *n.energy;
  Json output = {{"directory", cfg.output.directory},
                 {"prefix", cfg.output.prefix},
                 {"tables", cfg.output.tables},
                 {"curves", cfg.output.curves},
                 {"raw_counts", cfg.output.raw_counts}};
  return {{"kind", cfg.kind}, {"seed", cfg.seed}, {"model", model}, {"numeric", numeric},
          {"output", output}};
}

const std::vector<KindInfo>& experiment_kinds() {
  static const std::vector<KindInfo> kinds = {
      {"singular-decay", "Theorem 1 (Remarks ii and iii)",
       "Singular values of exp(-H1) - exp(-H2) for a center-cell perturbation at each amplitude "
       "(\"inf\" deletes the cell); fits log mu_n = log C - c n^alpha for alpha = 1/d and 2/d and "
       "reports the spread of c across amplitudes.",
       {"seed", "numeric.amplitudes"},
       {"model.*", "numeric.decay_floor", "numeric.decay_skip", "numeric.dense_cap"}},
      {"ssf-identities", "Krein trace identity and invariance principle",
       "Counting spectral shift function of H2 = H1 + amplitude * u(center); checks the Krein "
       "identity with switch functions, the invariance principle for exp(-x) and atan(x), the "
       "integral identity, the sign of xi and |xi| <= rank.",
       {"seed"},
       {"model.*", "numeric.trials", "numeric.amplitude", "numeric.energy", "numeric.epsilon_grid"}},
      {"ft-bounds", "Theorem 2 and the F_t functional",
       "F_t values and large-x asymptotics, the Legendre dual bound, the synthetic Landau-level "
       "integrability trend, Hundertmark-Simon majorization for the model pair and the "
       "integral / dual bound constants K1, K2.",
       {"seed"},
       {"model.*", "numeric.t", "numeric.T", "numeric.x_grid", "numeric.y_grid", "numeric.alphas",
        "numeric.cutoffs", "numeric.epsilon_grid", "numeric.amplitude"}},
      {"wegner", "Theorem 3 (Wegner estimate)",
       "Monte Carlo mean of the eigenvalue count in [E - eps, E + eps] over M disorder "
       "realizations; the eps-scaling check fits the exponent of the mean against eps and "
       "reports mean / (s(mu, 2 eps) |log eps|^d |Lambda|).",
       {"seed", "model.disorder", "numeric.epsilon_grid"},
       {"model.*", "numeric.realizations", "numeric.energy", "numeric.dense_cap"}},
      {"ids", "Theorem 3 corollary (IDS continuity)",
       "Disorder-averaged integrated density of states on several volumes with successive "
       "sup-distances, and the Hoelder-modulus ratio |dN| / (s(mu, |dE|) |log |dE||^d).",
       {"seed", "model.disorder", "numeric.volumes", "numeric.energy_grid"},
       {"model.*", "numeric.realizations", "numeric.energy", "numeric.epsilon_grid"}},
      {"lemma3", "Lemma 3 (partial integration for singular measures)",
       "Randomized (mu, phi, eps) triples: integral [phi(l + eps) - phi(l)] dmu <= "
       "s(mu, eps) [phi(b + eps) - phi(a)] at tolerance 1e-8.",
       {"seed"},
       {"numeric.trials"}},
      {"weyl", "Lemma 1 (Weyl lower bound and semigroup trace bound)",
       "Lowest eta N eigenvalues against (2 pi (1 - delta) d / e) (n / |U|)^(2/d) - C at spacings "
       "h and h/2, and Tr exp(-2 t H) against |U| (8 pi t (1 - delta))^(-d/2) exp(2 t C) on "
       "t in [4 h^2, 1].",
       {"seed"},
       {"model.*", "numeric.eta", "numeric.t_grid", "numeric.dense_cap"}},
      {"trace-bound", "Theorem 2 trace bound for smoothed spectral projections",
       "Tr[rho(H2) - rho(H1)] for switch functions of width eps at energy E, compared against "
       "|log eps|^d; reports the fitted constant on the coarse and fine halves of the grid.",
       {"seed", "numeric.epsilon_grid"},
       {"model.*", "numeric.energy", "numeric.amplitude"}},
  };
  return kinds;
}

const KindInfo* find_kind(const std::string& name) {
  for (const auto& k : experiment_kinds()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

std::string describe_kind(const KindInfo& info) {
  std::ostringstream out;
  out << info.name << "\n  targets: " << info.target << "\n  " << info.summary
      << "\n  required:";
  for (const auto& r : info.required) out << ' ' << r;
  out << "\n  optional:";
  for (const auto& o : info.optional) out << ' ' << o;
  out << '\n';
  return out.str();
}

Json ExperimentRecord::to_json() const {
  return {{"tool", "ssflab"},
          {"tool_version", tool_version},
          {"config", config},
          {"wall_clock_seconds", wall_clock_seconds},
          {"payload", payload},
          {"fits", fits},
          {"payload_hash", payload_hash}};
}

std::string payload_hash(const Json& payload, const Json& fits) {
  const std::string text = payload.dump() + "\n" + fits.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentRecord run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentRecord rec;
  rec.config = config_to_json(cfg);
  rec.tool_version = tool_version();
  const auto start = std::chrono::steady_clock::now();
  if (cfg.kind == "singular-decay") {
    run_singular_decay(cfg, rec);
  } else if (cfg.kind == "ssf-identities") {
    run_ssf_identities(cfg, rec);
  } else if (cfg.kind == "ft-bounds") {
    run_ft_bounds(cfg, rec);
  } else if (cfg.kind == "wegner") {
    run_wegner(cfg, opts, rec);
  } else if (cfg.kind == "ids") {
    run_ids(cfg, opts, rec);
  } else if (cfg.kind == "lemma3") {
    run_lemma3(cfg, rec);
  } else if (cfg.kind == "weyl") {
    run_weyl(cfg, rec);
  } else if (cfg.kind == "trace-bound") {
    run_trace_bound(cfg, rec);
  } else {
    throw ValidationError("kind: unknown experiment kind '" + cfg.kind + "'");
  }
  rec.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rec.payload_hash = payload_hash(rec.payload, rec.fits);
  return rec;
}

void write_table(std::ostream& out, const Table& table) {
  out << "# table: " << table.name << "\n# units:";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "; " : " ") << table.columns[i] << " ["
        << (i < table.units.size() && !table.units[i].empty() ? table.units[i] : "-") << "]";
  }
  out << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "\t" : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << format_number(row[i]);
    out << '\n';
  }
}

std::vector<std::filesystem::path> write_outputs(const ExperimentRecord& record,
                                                 const std::filesystem::path& directory,
                                                 const std::string& prefix) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  std::vector<fs::path> written;
  auto open = [&](const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    written.push_back(p);
    return out;
  };
  {
    auto out = open(directory / (prefix + ".record.json"));
    out << record.to_json().dump(2) << '\n';
  }
  const Json& output = record.config.at("output");
  if (output.value("tables", true)) {
    for (const auto& t : record.tables) {
      auto out = open(directory / (prefix + "." + t.name + ".tsv"));
      write_table(out, t);
    }
  }
  if (output.value("curves", true)) {
    for (const auto& c : record.curves) {
      auto out = open(directory / (prefix + "." + c.name + ".curve.txt"));
      write_curve(out, c.curve, c.metadata);
    }
  }
  return written;
}

ExperimentConfig config_from_record(const Json& record) {
  if (!record.is_object() || !record.contains("config")) {
    throw ConfigParseError("config", "record has no config snapshot");
  }
  return parse_config(record.at("config"));
}

std::string tool_version() { return SSFLAB_VERSION; }

}  // namespace ssflab
