// SPDX-License-Identifier: Apache-2.0
#include "qrfem/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <thread>
#include <type_traits>

namespace qrfem {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

template <typename T>
struct is_vector : std::false_type {};
template <typename T>
struct is_vector<std::vector<T>> : std::true_type {};

/// The json library wraps negative numbers into unsigned targets; refuse them.
template <typename T>
void check_sign(const json& j, const char* key) {
  if constexpr (is_vector<T>::value) {
    if (j.is_array()) {
      for (const auto& item : j) check_sign<typename T::value_type>(item, key);
    }
  } else if constexpr (std::is_unsigned_v<T>) {
    if (j.is_number_integer() && !j.is_number_unsigned()) {
      throw ConfigError(std::string("config key '") + key + "' must be non-negative");
    }
  }
}

template <typename T>
T get_as(const json& j, const char* key) {
  check_sign<T>(j, key);
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

Side parse_side(const std::string& s) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  if (s == "bottom") return Side::Bottom;
  if (s == "top") return Side::Top;
  throw ConfigError("unknown boundary side '" + s + "'");
}

Box parse_box(const json& j, const char* key) {
  const auto v = get_as<std::vector<double>>(j, key);
  if (v.size() != 4) throw ConfigError(std::string("config key '") + key + "' needs [x0,x1,y0,y1]");
  Box b{v[0], v[1], v[2], v[3]};
  if (!(b.x0 <= b.x1 && b.y0 <= b.y1) || !b.within(Box{})) {
    throw ConfigError(std::string("config key '") + key + "' must be a sub-box of [0,1]^2");
  }
  return b;
}

/// Runs job(i) for i in [0, count) on up to `threads` workers and rethrows the
/// first failure in job order.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct SolveJob {
  int m = 1;
  int n = 1;
  std::size_t mesh = 8;
  double epsilon = 0.0;
  double delta = 0.0;
};

ErrorReport run_solve(const ExperimentConfig& config, const SolveJob& job) {
  SchemeConfig scheme = scheme_for(config, job.m, job.n);
  if (job.epsilon > 0.0) scheme.epsilon = job.epsilon;
  if (job.delta > 0.0) scheme.noise = NoiseSpec{job.delta, config.seed};
  const DiscreteSystem sys = build_system(scheme, tagged_mesh(config, job.mesh));
  const Solution sol = solve(sys);
  ErrorReport r = make_report(sys, sol, exact_solution(HadamardProblem{job.n}));
  r.n = job.n;
  if (scheme.noise) r.delta = job.delta;
  return r;
}

std::string dual_label(const ExperimentConfig& c, int m) {
  return c.dual_family == Family::CrouzeixRaviart ? "cr1" : "m" + std::to_string(m);
}

std::vector<int> dual_degrees(const ExperimentConfig& c) {
  if (c.dual_family == Family::CrouzeixRaviart) return {1};
  return c.dual_degrees;
}

ExperimentResult convergence_like(const ExperimentConfig& config, bool interior, unsigned threads) {
  std::vector<SolveJob> jobs;
  for (int m : dual_degrees(config)) {
    for (int n : config.oscillations) {
      for (std::size_t mesh : config.meshes) jobs.push_back({m, n, mesh});
    }
  }
  std::vector<ErrorReport> reports(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) { reports[i] = run_solve(config, jobs[i]); });

  ExperimentResult result;
  const std::string prefix = interior ? "interior_rate_" : "convergence_";
  CsvFile fit{interior ? "interior_rate_fit.csv" : "convergence_fit.csv",
              "dual,n,l2_slope,h1_slope", {}};
  std::size_t i = 0;
  for (int m : dual_degrees(config)) {
    for (int n : config.oscillations) {
      CsvFile file{prefix + dual_label(config, m) + "_n" + std::to_string(n) + ".csv", csv_header,
                   {}};
      std::vector<double> hs, l2, h1;
      for (std::size_t k = 0; k < config.meshes.size(); ++k, ++i) {
        const ErrorReport& r = reports[i];
        file.rows.push_back(to_csv_row(r));
        hs.push_back(r.h);
        l2.push_back(interior ? r.l2_g.value() : r.l2_omega.value());
        h1.push_back(interior ? r.h1_g.value() : r.h1_omega.value());
      }
      result.files.push_back(std::move(file));
      if (hs.size() >= 3) {
        const double s2 = fit_rate(hs, l2);
        const double s1 = fit_rate(hs, h1);
        fit.rows.push_back(dual_label(config, m) + ',' + std::to_string(n) + ',' + fmt(s2) + ',' +
                           fmt(s1));
        std::string line = (interior ? "interior " : "global ") + dual_label(config, m) +
                           " n=" + std::to_string(n) + ": L2 slope " + fmt(s2) + ", H1 slope " +
                           fmt(s1);
        if (config.min_rate) {
          const bool ok = s1 >= *config.min_rate;
          result.thresholds_met = result.thresholds_met && ok;
          line += ok ? " [PASS]" : " [FAIL]";
          line += " (H1 slope >= " + fmt(*config.min_rate) + ")";
        }
        result.summary.push_back(line);
      }
    }
  }
  result.files.push_back(std::move(fit));
  return result;
}

ExperimentResult error_field(const ExperimentConfig& config, unsigned threads) {
  const int n = config.oscillations.front();
  const auto degrees = dual_degrees(config);
  ExperimentResult result;
  result.files.resize(degrees.size());
  std::vector<double> maxima(degrees.size());
  parallel_for(degrees.size(), threads, [&](std::size_t i) {
    const int m = degrees[i];
    const auto mesh = tagged_mesh(config, config.field_mesh);
    const DiscreteSystem sys = build_system(scheme_for(config, m, n), mesh);
    const Solution sol = solve(sys);
    const HadamardProblem exact{n};
    // Vertex values through the first cell that contains each vertex.
    std::vector<std::pair<Index, int>> owner(mesh->num_vertices(), {invalid_index, 0});
    for (Index c = 0; c < mesh->num_cells(); ++c) {
      for (int j = 0; j < 3; ++j) {
        auto& o = owner[mesh->cell(c)[j]];
        if (o.first == invalid_index) o = {c, j};
      }
    }
    CsvFile file{"error_field_" + dual_label(config, m) + "_n" + std::to_string(n) + ".csv",
                 "x,y,error", {}};
    double emax = 0.0;
    for (Index v = 0; v < mesh->num_vertices(); ++v) {
      Eigen::Vector3d bary = Eigen::Vector3d::Zero();
      bary[owner[v].second] = 1.0;
      const Point& x = mesh->vertex(v);
      const double e = sol.u.value(owner[v].first, bary) - exact.value(x);
      emax = std::max(emax, std::abs(e));
      file.rows.push_back(fmt(x.x()) + ',' + fmt(x.y()) + ',' + fmt(e));
    }
    maxima[i] = emax;
    result.files[i] = std::move(file);
  });
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    result.summary.push_back("error field " + dual_label(config, degrees[i]) + " n=" +
                             std::to_string(n) + ": max |u_h - u| = " + fmt(maxima[i]));
  }
  return result;
}

ExperimentResult condition_sweep(const ExperimentConfig& config, unsigned threads) {
  struct Job {
    int m;
    std::size_t mesh;
    double eps;
  };
  std::vector<Job> jobs;
  for (int m : dual_degrees(config)) {
    for (std::size_t mesh : config.meshes) {
      for (double eps : config.epsilons) jobs.push_back({m, mesh, eps});
    }
  }
  std::vector<ErrorReport> reports(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    SchemeConfig scheme = scheme_for(config, job.m, config.oscillations.front());
    scheme.epsilon = job.eps;
    const DiscreteSystem sys = build_system(scheme, tagged_mesh(config, job.mesh));
    const SparseMatrix k = sys.blocks.matrix();
    ErrorReport r;
    r.h = sys.primal->mesh().h();
    r.dofs_primal = sys.primal->dimension();
    r.dofs_dual = sys.dual->dimension();
    r.epsilon = job.eps;
    r.gamma = config.gamma;
    r.kappa2 = condition_number(k, k.rows() <= dense_limit ? ConditionMethod::DenseExact
                                                           : ConditionMethod::PowerIteration);
    reports[i] = r;
  });
  ExperimentResult result;
  std::size_t i = 0;
  for (int m : dual_degrees(config)) {
    CsvFile file{"condition_" + dual_label(config, m) + ".csv", csv_header, {}};
    for (std::size_t k = 0; k < config.meshes.size() * config.epsilons.size(); ++k, ++i) {
      file.rows.push_back(to_csv_row(reports[i]));
      result.summary.push_back("kappa2 " + dual_label(config, m) + " h=" + fmt(reports[i].h) +
                               " eps=" + fmt(*reports[i].epsilon) + ": " +
                               fmt(*reports[i].kappa2));
    }
    result.files.push_back(std::move(file));
  }
  return result;
}

ExperimentResult infsup_sweep(const ExperimentConfig& config, unsigned threads) {
  struct Job {
    int m;
    std::size_t mesh;
  };
  std::vector<Job> jobs;
  for (int m : dual_degrees(config)) {
    for (std::size_t mesh : config.meshes) jobs.push_back({m, mesh});
  }
  std::vector<ErrorReport> reports(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const DiscreteSystem sys =
        build_system(scheme_for(config, jobs[i].m, config.oscillations.front()),
                     tagged_mesh(config, jobs[i].mesh));
    const SparseMatrix gram = triple_norm_gram(sys);
    ErrorReport r;
    r.h = sys.primal->mesh().h();
    r.dofs_primal = sys.primal->dimension();
    r.dofs_dual = sys.dual->dimension();
    if (config.variant != Variant::Unregularized) r.epsilon = config.epsilon;
    r.gamma = config.gamma;
    r.sigma_min = infsup_constant(sys.blocks.matrix(), gram, gram);
    reports[i] = r;
  });
  ExperimentResult result;
  std::size_t i = 0;
  for (int m : dual_degrees(config)) {
    CsvFile file{"infsup_" + dual_label(config, m) + ".csv", csv_header, {}};
    for (std::size_t k = 0; k < config.meshes.size(); ++k, ++i) {
      file.rows.push_back(to_csv_row(reports[i]));
      result.summary.push_back("sigma_min P" + std::to_string(config.primal_degree) + "-" +
                               dual_label(config, m) + " h=" + fmt(reports[i].h) + ": " +
                               fmt(*reports[i].sigma_min));
    }
    result.files.push_back(std::move(file));
  }
  return result;
}

ExperimentResult perturbation_sweep(const ExperimentConfig& config, unsigned threads) {
  const int m = dual_degrees(config).back();
  const int n = config.oscillations.front();
  std::vector<ErrorReport> reports(config.deltas.size());
  parallel_for(config.deltas.size(), threads, [&](std::size_t i) {
    reports[i] = run_solve(config, {m, n, config.perturbation_mesh, 0.0, config.deltas[i]});
    reports[i].delta = config.deltas[i];
  });
  ExperimentResult result;
  CsvFile file{"perturbation_" + dual_label(config, m) + "_n" + std::to_string(n) + ".csv",
               csv_header, {}};
  for (std::size_t i = 0; i < reports.size(); ++i) {
    file.rows.push_back(to_csv_row(reports[i]));
    result.summary.push_back("delta=" + fmt(config.deltas[i]) + ": H1(G) error " +
                             fmt(reports[i].h1_g.value_or(reports[i].h1_omega.value())));
  }
  result.files.push_back(std::move(file));
  return result;
}

ExperimentResult parameter_coupling(const ExperimentConfig& config, unsigned threads) {
  const int m = dual_degrees(config).back();
  const int n = config.oscillations.front();
  std::vector<SolveJob> jobs;
  for (double eps : config.epsilons) {
    const double h = couple_parameters(config.regularity, eps, config.coupling);
    const std::size_t mesh = std::min(max_solve_mesh, snap_mesh_size(h));
    jobs.push_back({m, n, mesh, eps});
  }
  std::vector<ErrorReport> reports(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) { reports[i] = run_solve(config, jobs[i]); });
  ExperimentResult result;
  CsvFile file{"parameter_coupling_" + dual_label(config, m) + "_n" + std::to_string(n) + ".csv",
               csv_header, {}};
  for (std::size_t i = 0; i < reports.size(); ++i) {
    file.rows.push_back(to_csv_row(reports[i]));
    result.summary.push_back("eps=" + fmt(jobs[i].epsilon) + " -> mesh " +
                             std::to_string(jobs[i].mesh) + ": H1 error " +
                             fmt(*reports[i].h1_omega));
  }
  result.files.push_back(std::move(file));
  return result;
}

}  // namespace

Experiment parse_experiment(const std::string& name) {
  static const std::map<std::string, Experiment> table{
      {"convergence", Experiment::Convergence},
      {"error_field", Experiment::ErrorField},
      {"interior_rate", Experiment::InteriorRate},
      {"condition_sweep", Experiment::ConditionSweep},
      {"infsup_sweep", Experiment::InfsupSweep},
      {"perturbation_sweep", Experiment::PerturbationSweep},
      {"parameter_coupling", Experiment::ParameterCoupling},
  };
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown experiment '" + name + "'");
  return it->second;
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Convergence: return "convergence";
    case Experiment::ErrorField: return "error_field";
    case Experiment::InteriorRate: return "interior_rate";
    case Experiment::ConditionSweep: return "condition_sweep";
    case Experiment::InfsupSweep: return "infsup_sweep";
    case Experiment::PerturbationSweep: return "perturbation_sweep";
    case Experiment::ParameterCoupling: return "parameter_coupling";
  }
  return "unknown";
}

ExperimentConfig parse_config(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  for (const auto& [key, v] : j.items()) {
    const char* k = key.c_str();
    if (key == "problem") {
      const auto s = get_as<std::string>(v, k);
      if (s == "cauchy") c.problem = Problem::Cauchy;
      else if (s == "unique_continuation") c.problem = Problem::UniqueContinuation;
      else throw ConfigError("unknown problem '" + s + "'");
    } else if (key == "variant") {
      const auto s = get_as<std::string>(v, k);
      if (s == "regularized") c.variant = Variant::Regularized;
      else if (s == "l2_stabilized") c.variant = Variant::L2Stabilized;
      else if (s == "unregularized") c.variant = Variant::Unregularized;
      else throw ConfigError("unknown variant '" + s + "'");
    } else if (key == "k") {
      c.primal_degree = get_as<int>(v, k);
    } else if (key == "dual") {
      if (!v.is_object()) throw ConfigError("config key 'dual' must be an object");
      for (const auto& [dk, dv] : v.items()) {
        if (dk == "family") {
          const auto s = get_as<std::string>(dv, "dual.family");
          if (s == "lagrange") c.dual_family = Family::Lagrange;
          else if (s == "cr") c.dual_family = Family::CrouzeixRaviart;
          else throw ConfigError("unknown dual family '" + s + "'");
        } else if (dk == "degrees") {
          c.dual_degrees = get_as<std::vector<int>>(dv, "dual.degrees");
        } else {
          throw ConfigError("unknown config key 'dual." + dk + "'");
        }
      }
    } else if (key == "epsilon") {
      c.epsilon = get_as<double>(v, k);
    } else if (key == "epsilons") {
      c.epsilons = get_as<std::vector<double>>(v, k);
    } else if (key == "gamma") {
      c.gamma = get_as<double>(v, k);
    } else if (key == "n") {
      c.oscillations = get_as<std::vector<int>>(v, k);
    } else if (key == "meshes") {
      c.meshes = get_as<std::vector<std::size_t>>(v, k);
    } else if (key == "gamma0") {
      c.gamma0.clear();
      for (const auto& s : get_as<std::vector<std::string>>(v, k)) c.gamma0.insert(parse_side(s));
    } else if (key == "omega") {
      c.omega = parse_box(v, k);
    } else if (key == "g_region") {
      c.g_region = parse_box(v, k);
    } else if (key == "field_mesh") {
      c.field_mesh = get_as<std::size_t>(v, k);
    } else if (key == "perturbation_mesh") {
      c.perturbation_mesh = get_as<std::size_t>(v, k);
    } else if (key == "noise") {
      if (!v.is_object()) throw ConfigError("config key 'noise' must be an object");
      for (const auto& [nk, nv] : v.items()) {
        if (nk == "amplitudes") c.deltas = get_as<std::vector<double>>(nv, "noise.amplitudes");
        else if (nk == "seed") c.seed = get_as<std::uint64_t>(nv, "noise.seed");
        else throw ConfigError("unknown config key 'noise." + nk + "'");
      }
    } else if (key == "regularity") {
      c.regularity = get_as<double>(v, k);
    } else if (key == "coupling") {
      const auto s = get_as<std::string>(v, k);
      if (s == "standard") c.coupling = CouplingRule::Standard;
      else if (s == "l2stab") c.coupling = CouplingRule::L2Stabilized;
      else throw ConfigError("unknown coupling rule '" + s + "'");
    } else if (key == "min_rate") {
      c.min_rate = get_as<double>(v, k);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

void check_config(const ExperimentConfig& c, Experiment e) {
  const auto fail = [](const std::string& why) { throw ConfigError(why); };
  if (c.meshes.empty()) fail("mesh list is empty");
  if (c.oscillations.empty()) fail("oscillation list 'n' is empty");
  if (c.dual_family == Family::Lagrange && c.dual_degrees.empty()) fail("dual degree list is empty");
  for (int n : c.oscillations) {
    if (n < 1) fail("oscillation n must be positive");
  }
  const bool eigen = e == Experiment::ConditionSweep || e == Experiment::InfsupSweep;
  const std::size_t cap = eigen ? max_eigen_mesh : max_solve_mesh;
  for (std::size_t m : c.meshes) {
    if (m < 1 || m > cap) {
      fail("mesh size " + std::to_string(m) + " outside [1, " + std::to_string(cap) + "] for " +
           to_string(e));
    }
  }
  if (e == Experiment::ErrorField && (c.field_mesh < 1 || c.field_mesh > max_solve_mesh)) {
    fail("field_mesh outside [1, 128]");
  }
  if (e == Experiment::PerturbationSweep &&
      (c.perturbation_mesh < 1 || c.perturbation_mesh > max_solve_mesh)) {
    fail("perturbation_mesh outside [1, 128]");
  }
  if ((e == Experiment::ConditionSweep || e == Experiment::ParameterCoupling) && c.epsilons.empty()) {
    fail("epsilon list is empty");
  }
  if (e == Experiment::PerturbationSweep && c.deltas.empty()) fail("noise amplitude list is empty");
  if (c.problem == Problem::Cauchy && c.gamma0.empty()) fail("the Cauchy problem needs gamma0 sides");
  if (e == Experiment::InteriorRate || e == Experiment::PerturbationSweep) {
    if (c.g_region.x1 <= c.g_region.x0 || c.g_region.y1 <= c.g_region.y0) fail("g_region is empty");
  }
  if (c.problem == Problem::UniqueContinuation &&
      (c.omega.x1 <= c.omega.x0 || c.omega.y1 <= c.omega.y0)) {
    fail("omega is empty");
  }
  if (e == Experiment::InteriorRate) {
    for (std::size_t m : c.meshes) {
      if (tagged_mesh(c, m)->count_region(Region::InteriorG) == 0) {
        fail("g_region contains no cell barycenter on mesh " + std::to_string(m));
      }
    }
  }
  try {
    validate(scheme_for(c, dual_degrees(c).front(), c.oscillations.front()));
  } catch (const std::invalid_argument& ex) {
    fail(ex.what());
  }
}

std::shared_ptr<const TriangleMesh> tagged_mesh(const ExperimentConfig& config, std::size_t n) {
  TriangleMesh mesh = build_structured_mesh(n, n);
  mesh = tag_boundary(std::move(mesh), config.problem == Problem::Cauchy ? config.gamma0
                                                                         : std::set<Side>{});
  if (config.problem == Problem::UniqueContinuation) {
    mesh = tag_region(std::move(mesh), config.omega, Region::OmegaData);
  }
  mesh = tag_region(std::move(mesh), config.g_region, Region::InteriorG);
  return std::make_shared<const TriangleMesh>(std::move(mesh));
}

SchemeConfig scheme_for(const ExperimentConfig& config, int m, int n) {
  SchemeConfig s;
  s.problem = config.problem;
  s.variant = config.variant;
  s.primal_degree = config.primal_degree;
  s.dual = config.dual_family == Family::CrouzeixRaviart ? ElementType::crouzeix_raviart()
                                                          : ElementType::lagrange(m);
  s.epsilon = config.epsilon;
  s.gamma = config.gamma;
  s.data = HadamardProblem{n}.data();
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config, Experiment experiment,
                                unsigned threads) {
  check_config(config, experiment);
  switch (experiment) {
    case Experiment::Convergence: return convergence_like(config, false, threads);
    case Experiment::InteriorRate: return convergence_like(config, true, threads);
    case Experiment::ErrorField: return error_field(config, threads);
    case Experiment::ConditionSweep: return condition_sweep(config, threads);
    case Experiment::InfsupSweep: return infsup_sweep(config, threads);
    case Experiment::PerturbationSweep: return perturbation_sweep(config, threads);
    case Experiment::ParameterCoupling: return parameter_coupling(config, threads);
  }
  throw ConfigError("unknown experiment");
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const CsvFile& file : result.files) {
    std::ofstream out(dir / file.name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / file.name).string());
    out << file.header << '\n';
    for (const auto& row : file.rows) out << row << '\n';
  }
}

}  // namespace qrfem
