#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "opinf/config.hpp"
#include "opinf/core.hpp"
#include "opinf/inference.hpp"
#include "opinf/io.hpp"
#include "opinf/metrics.hpp"
#include "opinf/paper_configs.hpp"
#include "opinf/pde_models.hpp"
#include "opinf/pod.hpp"
#include "opinf/rng.hpp"
#include "opinf/tensor_ops.hpp"

namespace opinf::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

/// Run fn(i) for i in [0, count) on a small worker pool.  Work items must be
/// independent; each writes only its own output slot, so results do not
/// depend on scheduling.
template <class F>
void parallel_for(Index count, F&& fn, unsigned workers = 0) {
  if (count <= 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 2;
  unsigned pool = workers ? workers : std::min<unsigned>(hw, 8);
  pool = std::min<unsigned>(pool, static_cast<unsigned>(count));
  if (pool <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  std::vector<std::thread> threads;
  threads.reserve(pool);
  for (unsigned t = 0; t < pool; ++t)
    threads.emplace_back([&] {
      for (;;) {
        const Index i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& th : threads) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// Inventory of one pipeline stage: config hash, per-stage timings, and a
/// checksum for every file the stage wrote.
class RunManifest {
 public:
  RunManifest(std::uint64_t config_hash, std::string stage)
      : stage_(std::move(stage)) {
    j_["config_hash"] = config_hash;
    j_["toolkit_version"] = kVersion;
    j_["stage"] = stage_;
    j_["files"] = json::array();
    j_["timings"] = json::array();
  }

  void add_file(const fs::path& root, const fs::path& file) {
    j_["files"].push_back({{"path", fs::relative(file, root).generic_string()},
                           {"fnv1a", io::fnv1a_file(file)}});
  }

  void add_timing(const std::string& name, double seconds) {
    j_["timings"].push_back({{"name", name}, {"seconds", seconds}});
  }

  void write(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << j_.dump(2) << "\n";
  }

 private:
  std::string stage_;
  json j_;
};

class StageTimer {
 public:
  explicit StageTimer(RunManifest& m, std::string name)
      : manifest_(m), name_(std::move(name)), start_(clock::now()) {}
  ~StageTimer() {
    manifest_.add_timing(name_, std::chrono::duration<double>(clock::now() - start_).count());
  }

 private:
  using clock = std::chrono::steady_clock;
  RunManifest& manifest_;
  std::string name_;
  clock::time_point start_;
};

using IcParams = std::map<std::string, double>;

inline Grid1D build_grid(const ExperimentConfig& cfg) {
  return Grid1D::uniform(cfg.n, cfg.length);
}

inline QuadraticModel build_model(const ExperimentConfig& cfg) {
  const Grid1D grid = build_grid(cfg);
  return cfg.problem == Problem::Burgers ? assemble_burgers(grid, cfg.mu)
                                         : assemble_kse(grid, cfg.mu);
}

inline Vector build_ic(const ExperimentConfig& cfg, const Grid1D& grid, const IcParams& p) {
  if (cfg.problem == Problem::Burgers)
    return burgers_ic(grid, p.at("A"), static_cast<Index>(p.at("f")), p.at("phi"));
  return kse_ic(grid, p.at("a"), p.at("b"));
}

/// Cross product of the per-parameter training lists, outer-to-inner in the
/// canonical parameter order (A, f, phi for Burgers; a, b for KSE).
inline std::vector<IcParams> training_ic_params(const ExperimentConfig& cfg) {
  const std::vector<std::string> order = cfg.problem == Problem::Burgers
                                             ? std::vector<std::string>{"A", "f", "phi"}
                                             : std::vector<std::string>{"a", "b"};
  std::vector<IcParams> out{{}};
  for (const auto& name : order) {
    const auto& values = cfg.training_ics.at(name);
    std::vector<IcParams> next;
    next.reserve(out.size() * values.size());
    for (const auto& base : out)
      for (double v : values) {
        IcParams p = base;
        p[name] = v;
        next.push_back(std::move(p));
      }
    out = std::move(next);
  }
  return out;
}

/// Draw `count` initial conditions.  Each IC uses a stream keyed by its
/// index, so enlarging the set never perturbs earlier draws.  Parameters are
/// drawn in canonical order within a stream.
inline std::vector<IcParams> sampled_ic_params(const ExperimentConfig& cfg,
                                               const TestSampler& sampler) {
  const std::vector<std::string> order = cfg.problem == Problem::Burgers
                                             ? std::vector<std::string>{"A", "f", "phi"}
                                             : std::vector<std::string>{"a", "b"};
  std::vector<IcParams> out;
  out.reserve(static_cast<std::size_t>(sampler.count));
  for (Index i = 0; i < sampler.count; ++i) {
    CounterRng rng(sampler.seed, static_cast<std::uint64_t>(i));
    IcParams p;
    for (const auto& name : order) {
      const auto& spec = sampler.params.at(name);
      if (sampler.integer_params.count(name)) {
        p[name] = spec[rng.pick(spec.size())];
      } else if (sampler.inside) {
        p[name] = rng.uniform(spec[0], spec[1]);
      } else {
        const double len1 = spec[1] - spec[0];
        const double len2 = spec[3] - spec[2];
        const double u = rng.uniform() * (len1 + len2);
        p[name] = u < len1 ? spec[0] + u : spec[2] + (u - len1);
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

namespace detail {

inline std::string snapshot_trailer(const ExperimentConfig& cfg, const SnapshotSet& snaps) {
  json j;
  j["schema"] = "snapshot";
  j["n"] = snaps.states.rows();
  j["dt"] = snaps.dt_sim;
  j["stride"] = snaps.stride;
  j["derivatives"] = cfg.derivative_mode;
  j["ic"] = json(snaps.ic_params);
  return j.dump();
}

inline std::string snapshot_filename(Index idx) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "train_%03lld.oimx", static_cast<long long>(idx));
  return buf;
}

}  // namespace detail

/// Persist a snapshot set as a single stacked matrix [states; derivs] with a
/// JSON metadata trailer.
inline void write_snapshot(const fs::path& path, const ExperimentConfig& cfg,
                           const SnapshotSet& snaps) {
  Matrix stacked(2 * snaps.states.rows(), snaps.states.cols());
  stacked.topRows(snaps.states.rows()) = snaps.states;
  stacked.bottomRows(snaps.derivs.rows()) = snaps.derivs;
  io::write_matrix(path, stacked, detail::snapshot_trailer(cfg, snaps));
}

inline SnapshotSet read_snapshot(const fs::path& path) {
  std::string trailer;
  Matrix stacked = io::read_matrix(path, &trailer);
  if (trailer.empty()) throw ConfigError("snapshot file missing metadata trailer: " + path.string());
  json j = json::parse(trailer);
  SnapshotSet snaps;
  const Index n = j.at("n").get<Index>();
  if (stacked.rows() != 2 * n)
    throw ConfigError("snapshot file row count inconsistent with metadata: " + path.string());
  snaps.states = stacked.topRows(n);
  snaps.derivs = stacked.bottomRows(n);
  snaps.dt_sim = j.at("dt").get<double>();
  snaps.stride = j.at("stride").get<Index>();
  if (j.contains("ic"))
    for (const auto& [k, v] : j.at("ic").items()) snaps.ic_params[k] = v.get<double>();
  snaps.times.resize(stacked.cols());
  for (Index c = 0; c < stacked.cols(); ++c)
    snaps.times(c) = static_cast<double>(c) * static_cast<double>(snaps.stride) * snaps.dt_sim;
  return snaps;
}

inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
  return io::fnv1a(cfg.raw_text);
}

/// Simulate every training initial condition and persist one snapshot file
/// per IC under <out>/snapshots/.
inline void cmd_simulate(const ExperimentConfig& cfg, const fs::path& out) {
  const fs::path snapdir = out / "snapshots";
  fs::create_directories(snapdir);
  RunManifest manifest(config_hash(cfg), "simulate");
  const QuadraticModel model = build_model(cfg);
  const Grid1D grid = build_grid(cfg);
  const std::vector<IcParams> ics = training_ic_params(cfg);

  {
    StageTimer timer(manifest, "simulate");
    std::vector<std::string> errors(ics.size());
    parallel_for(static_cast<Index>(ics.size()), [&](Index i) {
      try {
        SnapshotSet snaps = simulate(model, build_ic(cfg, grid, ics[i]), cfg.dt, cfg.T,
                                     cfg.stride, cfg.scheme);
        if (cfg.derivative_mode == "finite-difference") finite_difference_derivatives(snaps);
        snaps.ic_params = ics[i];
        write_snapshot(snapdir / detail::snapshot_filename(i), cfg, snaps);
      } catch (const NumericalError& e) {
        errors[i] = e.what();
        throw;
      }
    });
    for (std::size_t i = 0; i < errors.size(); ++i)
      if (!errors[i].empty())
        throw NumericalError("simulate: IC index " + std::to_string(i) + ": " + errors[i]);
  }
  for (Index i = 0; i < static_cast<Index>(ics.size()); ++i)
    manifest.add_file(out, snapdir / detail::snapshot_filename(i));
  manifest.write(out / "manifest_simulate.json");
}

inline std::vector<SnapshotSet> load_training_snapshots(const ExperimentConfig& cfg,
                                                        const fs::path& out) {
  const fs::path snapdir = out / "snapshots";
  const auto count = static_cast<Index>(training_ic_params(cfg).size());
  std::vector<SnapshotSet> sets;
  sets.reserve(count);
  for (Index i = 0; i < count; ++i) {
    const fs::path p = snapdir / detail::snapshot_filename(i);
    if (!fs::exists(p))
      throw MissingInputError("missing snapshot file (run `simulate` first): " + p.string());
    sets.push_back(read_snapshot(p));
  }
  return sets;
}

inline fs::path operator_file(const fs::path& out, const std::string& method) {
  return out / ("operators_" + method + ".oimx");
}

/// Train at r_max only; submodels for r < r_max are extracted later.  Writes
/// the POD basis (V and full spectrum) plus one stacked [A | F] operator file
/// per requested method, and records solver diagnostics in the manifest.
inline void cmd_train(const ExperimentConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  RunManifest manifest(config_hash(cfg), "train");
  const std::vector<SnapshotSet> sets = load_training_snapshots(cfg, out);

  PODBasis basis;
  {
    StageTimer timer(manifest, "pod");
    basis = compute_pod(sets, cfg.r_max);
    io::write_matrix(out / "basis_V.oimx", basis.V);
    io::write_matrix(out / "basis_sigma.oimx", basis.sigma);
  }
  manifest.add_file(out, out / "basis_V.oimx");
  manifest.add_file(out, out / "basis_sigma.oimx");

  const bool needs_lsq = std::any_of(cfg.method_list.begin(), cfg.method_list.end(),
                                     [](const std::string& m) { return m != "intrusive"; });
  LsqSystem sys;
  if (needs_lsq) {
    StageTimer timer(manifest, "assemble-lsq");
    sys = assemble_lsq(project(basis, sets, cfg.r_max));
  }

  json diag = json::array();
  for (const std::string& method : cfg.method_list) {
    StageTimer timer(manifest, "fit-" + method);
    ReducedModel model;
    if (method == "intrusive") {
      model = intrusive_reduce(build_model(cfg), basis, cfg.r_max);
    } else if (method == "opinf") {
      model = standard_opinf(sys, cfg.ridge);
    } else {
      model = ep_opinf(sys, build_constraint_matrix(cfg.r_max), cfg.ridge);
    }
    Matrix stacked(model.r, model.r + vech_len(model.r));
    stacked.leftCols(model.r) = model.A_hat;
    stacked.rightCols(vech_len(model.r)) = model.F_hat.entries;
    io::write_matrix(operator_file(out, method), stacked);
    manifest.add_file(out, operator_file(out, method));
    diag.push_back({{"method", method},
                    {"residual_fro", model.diagnostics.residual_fro},
                    {"constraint_residual_inf", model.diagnostics.constraint_residual_inf},
                    {"cond_estimate", model.diagnostics.cond_estimate},
                    {"ridge", model.diagnostics.ridge},
                    {"ep_violation", ep_violation(model.F_hat)}});
  }
  {
    std::ofstream js(out / "train_diagnostics.json", std::ios::binary | std::ios::trunc);
    js << diag.dump(2) << "\n";
  }
  manifest.add_file(out, out / "train_diagnostics.json");
  manifest.write(out / "manifest_train.json");
}

inline ReducedModel load_operators(const fs::path& out, const std::string& method,
                                   Provenance prov) {
  const fs::path p = operator_file(out, method);
  if (!fs::exists(p))
    throw MissingInputError("missing operator file (run `train` first): " + p.string());
  Matrix stacked = io::read_matrix(p);
  const Index r = stacked.rows();
  if (stacked.cols() != r + vech_len(r))
    throw ConfigError("operator file has inconsistent shape: " + p.string());
  ReducedModel m;
  m.r = r;
  m.provenance = prov;
  m.A_hat = stacked.leftCols(r);
  m.F_hat = QuadOpCompact{stacked.rightCols(vech_len(r)), r};
  return m;
}

inline PODBasis load_basis(const fs::path& out) {
  const fs::path pv = out / "basis_V.oimx";
  const fs::path ps = out / "basis_sigma.oimx";
  if (!fs::exists(pv) || !fs::exists(ps))
    throw MissingInputError("missing basis files (run `train` first) under " + out.string());
  PODBasis basis;
  basis.V = io::read_matrix(pv);
  Matrix sig = io::read_matrix(ps);
  basis.sigma = sig.col(0);
  basis.n = basis.V.rows();
  basis.r_max = basis.V.cols();
  return basis;
}

struct EvaluateOptions {
  bool state_errors = true;
  bool autocorrelation = true;
  // The violation table is always emitted; it only needs the operators.
};

namespace detail {

inline Provenance provenance_of(const std::string& method) {
  if (method == "intrusive") return Provenance::Intrusive;
  if (method == "opinf") return Provenance::OpInf;
  return Provenance::EpOpInf;
}

struct EvalSet {
  std::string name;
  std::vector<IcParams> ics;
};

inline Matrix autocorr_window(const Matrix& states, Index burn_in) {
  if (burn_in <= 0) return states;
  if (burn_in >= states.cols())
    throw ConfigError("autocorr_burn_in leaves no samples");
  return states.rightCols(states.cols() - burn_in);
}

}  // namespace detail

/// Evaluate trained operators: for each r in r_list extract submodels,
/// integrate the reduced models with the FOM scheme and step size, and write
/// per-set CSV tables (relative state error, NACE, averaged autocorrelation)
/// plus the constraint-violation table over every r <= r_max.
inline void cmd_evaluate(const ExperimentConfig& cfg, const fs::path& out,
                         const EvaluateOptions& opts = {}) {
  fs::create_directories(out);
  RunManifest manifest(config_hash(cfg), "evaluate");
  const PODBasis basis = load_basis(out);
  if (basis.r_max != cfg.r_max)
    throw ConfigError("basis r_max does not match config r_max");

  std::vector<std::pair<std::string, ReducedModel>> trained;
  for (const std::string& method : cfg.method_list)
    trained.emplace_back(method, load_operators(out, method, detail::provenance_of(method)));

  // Constraint-violation table over all r <= r_max.
  {
    StageTimer timer(manifest, "violation-table");
    std::vector<std::vector<std::string>> rows;
    for (Index r = 1; r <= cfg.r_max; ++r) {
      std::vector<std::string> row{io::format_value(r)};
      for (const auto& [method, model] : trained) {
        auto [a_sub, f_sub] = extract_submodel(model.A_hat, model.F_hat, r);
        row.push_back(io::format_value(ep_violation(f_sub)));
      }
      rows.push_back(std::move(row));
    }
    std::vector<std::string> header{"r"};
    for (const auto& [method, _] : trained) header.push_back(method);
    io::write_csv(out / "constraint_violation.csv", header, rows);
    manifest.add_file(out, out / "constraint_violation.csv");
  }

  if (!opts.state_errors && !opts.autocorrelation) {
    manifest.write(out / "manifest_evaluate.json");
    return;
  }

  const Grid1D grid = build_grid(cfg);
  const QuadraticModel model = build_model(cfg);

  // Assemble evaluation sets: training ICs (from persisted snapshots) plus
  // each configured sampler (simulated on the fly).
  std::vector<detail::EvalSet> eval_sets;
  eval_sets.push_back({"training", training_ic_params(cfg)});
  for (const auto& sampler : cfg.test_ics)
    eval_sets.push_back({sampler.name, sampled_ic_params(cfg, sampler)});

  const double inf = std::numeric_limits<double>::infinity();

  for (const auto& eval_set : eval_sets) {
    StageTimer timer(manifest, "evaluate-" + eval_set.name);
    const auto ic_count = static_cast<Index>(eval_set.ics.size());

    // Full-model trajectories for this set.
    std::vector<SnapshotSet> full(static_cast<std::size_t>(ic_count));
    if (eval_set.name == "training") {
      full = load_training_snapshots(cfg, out);
    } else {
      parallel_for(ic_count, [&](Index i) {
        full[static_cast<std::size_t>(i)] =
            simulate(model, build_ic(cfg, grid, eval_set.ics[i]), cfg.dt, cfg.T, cfg.stride,
                     cfg.scheme);
      });
    }

    // Full-model autocorrelations, shared across methods and r.
    std::vector<AutocorrSeries> full_rho;
    Index k_max = cfg.autocorr_k_max;
    if (opts.autocorrelation) {
      full_rho.resize(static_cast<std::size_t>(ic_count));
      for (const auto& snaps : full)
        k_max = std::min(k_max, snaps.states.cols() - cfg.autocorr_burn_in - 1);
      if (k_max < 1) throw ConfigError("autocorr window too short for k_max >= 1");
      parallel_for(ic_count, [&](Index i) {
        full_rho[static_cast<std::size_t>(i)] = field_autocorrelation(
            detail::autocorr_window(full[static_cast<std::size_t>(i)].states,
                                    cfg.autocorr_burn_in),
            k_max);
      });
    }

    std::vector<std::vector<std::string>> err_rows, nace_rows;
    for (Index r : cfg.r_list) {
      const auto vr = basis.V.leftCols(r);
      std::vector<std::string> err_row{io::format_value(r)};
      std::vector<std::string> nace_row{io::format_value(r)};
      // Lag-indexed table for this (set, r): full average plus per method.
      std::vector<Vector> method_rho_avg;
      Vector full_avg;

      for (const auto& [method, fitted] : trained) {
        auto [a_sub, f_sub] = extract_submodel(fitted.A_hat, fitted.F_hat, r);
        const QuadraticModel rom{a_sub, f_sub, r};

        std::vector<Matrix> reduced(static_cast<std::size_t>(ic_count));
        std::vector<char> blew_up(static_cast<std::size_t>(ic_count), 0);
        parallel_for(ic_count, [&](Index i) {
          try {
            reduced[static_cast<std::size_t>(i)] =
                simulate(rom, vr.transpose() * full[static_cast<std::size_t>(i)].states.col(0),
                         cfg.dt, cfg.T, cfg.stride, cfg.scheme)
                    .states;
          } catch (const NumericalError&) {
            blew_up[static_cast<std::size_t>(i)] = 1;  // sentinel row below
          }
        });
        const bool any_blow_up =
            std::any_of(blew_up.begin(), blew_up.end(), [](char b) { return b != 0; });

        if (opts.state_errors) {
          if (any_blow_up) {
            err_row.push_back(io::format_value(inf));
          } else {
            std::vector<TrajectoryPair> pairs;
            pairs.reserve(static_cast<std::size_t>(ic_count));
            for (Index i = 0; i < ic_count; ++i)
              pairs.push_back({full[static_cast<std::size_t>(i)].states,
                               reduced[static_cast<std::size_t>(i)], vr});
            err_row.push_back(io::format_value(relative_state_error(pairs)));
          }
        }

        if (opts.autocorrelation) {
          if (any_blow_up) {
            nace_row.push_back(io::format_value(inf));
            method_rho_avg.push_back(Vector::Constant(k_max + 1, inf));
          } else {
            std::vector<AutocorrSeries> red_rho(static_cast<std::size_t>(ic_count));
            parallel_for(ic_count, [&](Index i) {
              red_rho[static_cast<std::size_t>(i)] = field_autocorrelation(
                  detail::autocorr_window(vr * reduced[static_cast<std::size_t>(i)],
                                          cfg.autocorr_burn_in),
                  k_max);
              red_rho[static_cast<std::size_t>(i)].source = SeriesSource::Reduced;
            });
            nace_row.push_back(io::format_value(nace(full_rho, red_rho)));
            Vector avg = Vector::Zero(k_max + 1);
            for (const auto& s : red_rho) avg += s.rho;
            method_rho_avg.push_back(avg / static_cast<double>(ic_count));
          }
        }
      }

      if (opts.autocorrelation) {
        full_avg = Vector::Zero(k_max + 1);
        for (const auto& s : full_rho) full_avg += s.rho;
        full_avg /= static_cast<double>(ic_count);
        std::vector<std::string> header{"lag", "full"};
        for (const auto& [method, _] : trained) header.push_back(method);
        std::vector<std::vector<std::string>> rows;
        for (Index k = 0; k <= k_max; ++k) {
          std::vector<std::string> row{io::format_value(k), io::format_value(full_avg(k))};
          for (const auto& avg : method_rho_avg) row.push_back(io::format_value(avg(k)));
          rows.push_back(std::move(row));
        }
        const fs::path p =
            out / ("autocorr_" + eval_set.name + "_r" + std::to_string(r) + ".csv");
        io::write_csv(p, header, rows);
        manifest.add_file(out, p);
      }

      if (opts.state_errors) err_rows.push_back(std::move(err_row));
      if (opts.autocorrelation) nace_rows.push_back(std::move(nace_row));
    }

    std::vector<std::string> header{"r"};
    for (const auto& [method, _] : trained) header.push_back(method);
    if (opts.state_errors) {
      const fs::path p = out / ("state_error_" + eval_set.name + ".csv");
      io::write_csv(p, header, err_rows);
      manifest.add_file(out, p);
    }
    if (opts.autocorrelation) {
      const fs::path p = out / ("nace_" + eval_set.name + ".csv");
      io::write_csv(p, header, nace_rows);
      manifest.add_file(out, p);
    }
  }
  manifest.write(out / "manifest_evaluate.json");
}

enum class Figure {
  BurgersError,
  BurgersViolation,
  KseAutocorr,
  KseNace,
  KseViolation,
};

inline Figure figure_from_name(const std::string& name) {
  if (name == "burgers-error") return Figure::BurgersError;
  if (name == "burgers-violation") return Figure::BurgersViolation;
  if (name == "kse-autocorr") return Figure::KseAutocorr;
  if (name == "kse-nace") return Figure::KseNace;
  if (name == "kse-violation") return Figure::KseViolation;
  throw ConfigError(
      "unknown figure '" + name +
      "' (expected burgers-error, burgers-violation, kse-autocorr, kse-nace, kse-violation)");
}

inline const char* figure_name(Figure f) {
  switch (f) {
    case Figure::BurgersError: return "burgers-error";
    case Figure::BurgersViolation: return "burgers-violation";
    case Figure::KseAutocorr: return "kse-autocorr";
    case Figure::KseNace: return "kse-nace";
    case Figure::KseViolation: return "kse-violation";
  }
  return "?";
}

enum class Profile { Desk, Paper };

/// Built-in profile text for a figure.  Burgers runs at full scale in both
/// profiles (it is desk-cheap already); KSE desk is the CI-sized profile and
/// KSE paper is the opt-in long run.
inline std::string_view profile_config_text(Figure figure, Profile profile) {
  switch (figure) {
    case Figure::BurgersError:
    case Figure::BurgersViolation:
      return kBurgersPaperConfig;
    default:
      return profile == Profile::Paper ? kKsePaperConfig : kKseDeskConfig;
  }
}

inline ExperimentConfig reproduce_config(Figure figure, Profile profile,
                                         std::optional<std::uint64_t> seed_override,
                                         const std::optional<fs::path>& config_override) {
  ExperimentConfig cfg;
  if (config_override) {
    cfg = load_config(*config_override);
  } else {
    cfg = parse_config(std::string(profile_config_text(figure, profile)));
    validate_config(cfg);
  }
  if (seed_override) {
    std::uint64_t s = *seed_override;
    std::string note;
    for (auto& sampler : cfg.test_ics) {
      sampler.seed = s++;
      note += "\n# seed_override " + sampler.name + " = " + std::to_string(sampler.seed);
    }
    cfg.raw_text += note;  // keep the config hash sensitive to the override
  }
  return cfg;
}

namespace detail {

inline void write_figure_readme(Figure figure, const fs::path& dir) {
  std::ofstream out(dir / "README.md", std::ios::binary | std::ios::trunc);
  out << "# Figure data: " << figure_name(figure) << "\n\n";
  switch (figure) {
    case Figure::BurgersError:
      out << "`state_error_<set>.csv` - x axis: column `r` (reduced dimension); "
             "y axis: average relative state error per method column "
             "(`intrusive`, `opinf`, `ep-opinf`), log scale recommended.\n"
             "Sets: training, interpolation (test 1), extrapolation (test 2).\n";
      break;
    case Figure::BurgersViolation:
    case Figure::KseViolation:
      out << "`constraint_violation.csv` - x axis: column `r` (reduced dimension); "
             "y axis: energy-preservation violation (sum of |h_ijk + h_jik + h_kji| "
             "over all index triples) per method column, log scale recommended.\n";
      break;
    case Figure::KseAutocorr:
      out << "`autocorr_<set>_r<r>.csv` - x axis: column `lag` (stored-sample lag); "
             "y axis: normalized autocorrelation averaged over the set's initial "
             "conditions; `full` is the full-order reference and each method column "
             "is its reduced reconstruction at dimension r.\n";
      break;
    case Figure::KseNace:
      out << "`nace_<set>.csv` - x axis: column `r` (reduced dimension); y axis: "
             "average normalized autocorrelation error per method column, log scale "
             "recommended.\n";
      break;
  }
}

}  // namespace detail

/// Full pipeline behind one figure: simulate + train + the evaluation slice
/// that produces the figure's data, plus a README describing the axes.
inline void cmd_reproduce(Figure figure, Profile profile, const fs::path& out_root,
                          std::optional<std::uint64_t> seed_override = std::nullopt,
                          const std::optional<fs::path>& config_override = std::nullopt) {
  const ExperimentConfig cfg = reproduce_config(figure, profile, seed_override, config_override);
  const fs::path out = out_root / figure_name(figure);
  fs::create_directories(out);

  EvaluateOptions opts;
  switch (figure) {
    case Figure::BurgersViolation:
    case Figure::KseViolation:
      opts.state_errors = false;
      opts.autocorrelation = false;
      break;
    case Figure::BurgersError:
      opts.autocorrelation = false;
      break;
    default:
      break;
  }

  cmd_simulate(cfg, out);
  cmd_train(cfg, out);
  cmd_evaluate(cfg, out, opts);
  detail::write_figure_readme(figure, out);
}

}  // namespace opinf::pipeline
