#include "ntkm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <thread>

#include <json.hpp>

#include "ntkm/csv.hpp"
#include "ntkm/fingerprint.hpp"
#include "ntkm/rng.hpp"
#include "ntkm/svg_plot.hpp"
#include "ntkm/trainers.hpp"

namespace ntkm::bench {

using nlohmann::json;

bool RunManifest::any_failed() const {
  return std::any_of(cells.begin(), cells.end(),
                     [](const CellResult& c) { return c.failed; });
}

std::uint64_t data_seed(std::uint64_t seed) { return splitmix64(seed ^ 0xDA7Aull); }
std::uint64_t ensemble_seed(std::uint64_t seed) { return splitmix64(seed ^ 0x0E56ull); }

namespace {

int resolve_threads() {
  if (const char* env = std::getenv("BENCH_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

double mean_loss(const Dataset& ds, const LossSpec& loss,
                 const std::function<Vector(const Vector&)>& predict) {
  double sum = 0.0;
  for (const Example& ex : ds.examples()) {
    sum += loss_value(loss, predict(ex.x), ex.y);
  }
  return sum / static_cast<double>(ds.size());
}

struct CellTask {
  ModelKind kind;
  WidthSpec width;
  std::uint64_t seed;
};

TrainConfig cell_train_config(const RunConfig& config, ModelKind kind,
                              std::uint64_t seed) {
  TrainConfig tc;
  tc.alpha = (kind == ModelKind::MlpFrozen || kind == ModelKind::KernelSgd)
                 ? config.train.alpha_sgd
                 : config.train.alpha_adam;
  tc.beta1 = config.train.beta1;
  tc.beta2 = config.train.beta2;
  tc.epsilon = config.train.epsilon;
  tc.steps = config.train.steps;
  tc.seed = seed;
  return tc;
}

CellResult run_cell(const RunConfig& config, const CellTask& task) {
  CellResult result;
  result.kind = task.kind;
  result.width = task.width;
  result.seed = task.seed;

  const auto start = std::chrono::steady_clock::now();
  const LossSpec loss;

  try {
    // One draw for train + eval so both come from the same task instance.
    const Dataset full = generate_dataset(config.task, config.n_train + config.n_eval,
                                          data_seed(task.seed), config.input_dim,
                                          config.output_dim);
    std::vector<Example> train_ex(full.examples().begin(),
                                  full.examples().begin() + config.n_train);
    const Dataset train_ds(std::move(train_ex), full.name() + "-train");
    std::optional<Dataset> eval_ds;
    if (config.n_eval > 0) {
      std::vector<Example> eval_ex(full.examples().begin() + config.n_train,
                                   full.examples().end());
      eval_ds.emplace(std::move(eval_ex), full.name() + "-eval");
    }

    const TrainConfig tc = cell_train_config(config, task.kind, task.seed);

    auto record = [&](long step, const std::function<Vector(const Vector&)>& predict) {
      if (step % config.eval_every != 0 && step != tc.steps) return;
      CurvePoint point;
      point.step = step;
      point.train_loss = mean_loss(train_ds, loss, predict);
      if (eval_ds) point.eval_loss = mean_loss(*eval_ds, loss, predict);
      result.curve.push_back(point);
    };

    std::shared_ptr<const FeatureEnsemble> ensemble;
    if (!task.width.infinite) {
      const OmegaSampler sampler{OmegaSampler::Kind::StandardGaussian,
                                 config.input_dim, ensemble_seed(task.seed)};
      ensemble = std::make_shared<const FeatureEnsemble>(
          sample_ensemble(sampler, FeatureKind::ReluDot, task.width.h));
      result.ensemble_fingerprint = fingerprint_hex(ensemble->fingerprint());
    }

    if (is_kernel_kind(task.kind)) {
      const KernelSpec spec = task.width.infinite
                                  ? KernelSpec::analytic_relu_gaussian(config.input_dim)
                                  : KernelSpec::empirical(ensemble);
      result.gram_fingerprint = fingerprint_hex(gram(spec, train_ds).fingerprint());

      const TrainerMode mode = task.kind == ModelKind::KernelSgd ? TrainerMode::Sgd
                                                                 : TrainerMode::AdamStar;
      KernelMachine machine(spec, tc, mode, config.output_dim);
      auto predict = [&machine](const Vector& x) { return machine.predict(x); };
      for (long t = 1; t <= tc.steps; ++t) {
        machine.step(train_ds.example_for_step(t), loss);
        record(t, predict);
      }
    } else if (task.kind == ModelKind::MlpUnfrozen) {
      const OmegaSampler sampler{OmegaSampler::Kind::StandardGaussian,
                                 config.input_dim, ensemble_seed(task.seed)};
      train_finite_mlp_full(task.width.h, sampler, FeatureKind::ReluDot, train_ds,
                            loss, OptimizerKind::Adam, tc, {},
                            [&](const MlpStepInfo& info) {
                              record(info.step, [&](const Vector& x) {
                                return info.model.predict(x);
                              });
                            });
    } else {
      OptimizerKind optimizer = OptimizerKind::Sgd;
      if (task.kind == ModelKind::MlpFrozenAdam) optimizer = OptimizerKind::Adam;
      if (task.kind == ModelKind::MlpFrozenAdamStar) optimizer = OptimizerKind::AdamStar;
      train_finite_frozen(ensemble, train_ds, loss, optimizer, tc,
                          [&](const FrozenStepInfo& info) {
                            record(info.step, [&](const Vector& x) {
                              return info.model.predict(x);
                            });
                          });
    }

    if (!result.curve.empty() && result.curve.back().step == tc.steps) {
      result.final_train_loss = result.curve.back().train_loss;
      result.final_eval_loss = result.curve.back().eval_loss;
    }
  } catch (const DivergenceError& e) {
    result.failed = true;
    result.error = e.what();
    result.failed_step = e.step_index();
  } catch (const std::exception& e) {
    result.failed = true;
    result.error = e.what();
  }

  result.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return result;
}

// Sort key making CSV row order independent of execution order.
bool row_less(const LossRow& a, const LossRow& b) {
  auto width_value = [](const std::string& w) {
    return w == "inf" ? std::numeric_limits<double>::infinity() : std::stod(w);
  };
  if (a.model_kind != b.model_kind) return a.model_kind < b.model_kind;
  if (width_value(a.width) != width_value(b.width)) {
    return width_value(a.width) < width_value(b.width);
  }
  if (a.seed != b.seed) return a.seed < b.seed;
  return a.step < b.step;
}

json cell_to_json(const CellResult& cell) {
  json j;
  j["model_kind"] = to_string(cell.kind);
  j["width"] = cell.width.label();
  j["seed"] = cell.seed;
  j["status"] = cell.failed ? "failed" : "ok";
  if (cell.failed) {
    j["error"] = cell.error;
    if (cell.failed_step >= 0) j["failed_step"] = cell.failed_step;
  }
  j["ensemble_fingerprint"] = cell.ensemble_fingerprint;
  j["gram_fingerprint"] = cell.gram_fingerprint;
  if (cell.final_train_loss) {
    j["final_train_loss"] = *cell.final_train_loss;
  } else {
    j["final_train_loss"] = nullptr;
  }
  if (cell.final_eval_loss) {
    j["final_eval_loss"] = *cell.final_eval_loss;
  } else {
    j["final_eval_loss"] = nullptr;
  }
  j["wall_ms"] = cell.wall_ms;
  return j;
}

}  // namespace

RunManifest run_experiment(const RunConfig& config, const std::string& out_dir) {
  config.validate();
  std::filesystem::create_directories(out_dir);

  RunManifest manifest;
  manifest.config = config;
  {
    Fnv1a h;
    h.update(config.canonical_json());
    manifest.run_id = "r" + fingerprint_hex(h.digest());
  }

  std::vector<CellTask> tasks;
  for (ModelKind kind : config.model_kinds) {
    for (const WidthSpec& width : config.widths) {
      if (width.infinite && !is_kernel_kind(kind)) continue;  // rejected by validate
      for (int k = 0; k < config.n_seeds; ++k) {
        tasks.push_back({kind, width, config.train.seed + static_cast<std::uint64_t>(k)});
      }
    }
  }

  manifest.cells.resize(tasks.size());
  const int threads = std::min<int>(resolve_threads(), static_cast<int>(tasks.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      manifest.cells[i] = run_cell(config, tasks[i]);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) break;
        manifest.cells[i] = run_cell(config, tasks[i]);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // CSV rows, sorted so output never depends on scheduling. wall_ms stays
  // empty here: the byte-identical reruns guarantee forbids clock values in
  // CSVs, so timings live in the manifest instead.
  std::vector<LossRow> curve_rows;
  std::vector<LossRow> final_rows;
  for (const CellResult& cell : manifest.cells) {
    for (const CurvePoint& point : cell.curve) {
      LossRow row;
      row.run_id = manifest.run_id;
      row.task = to_string(config.task);
      row.model_kind = to_string(cell.kind);
      row.width = cell.width.label();
      row.seed = cell.seed;
      row.step = point.step;
      row.train_loss = point.train_loss;
      row.eval_loss = point.eval_loss;
      curve_rows.push_back(row);
      if (!cell.failed && point.step == config.train.steps) final_rows.push_back(row);
    }
  }
  std::sort(curve_rows.begin(), curve_rows.end(), row_less);
  std::sort(final_rows.begin(), final_rows.end(), row_less);

  namespace fs = std::filesystem;
  const std::string curves_path = (fs::path(out_dir) / "loss_curves.csv").string();
  const std::string finals_path = (fs::path(out_dir) / "final_losses.csv").string();
  const std::string plot_path = (fs::path(out_dir) / "plot.svg").string();
  const std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();

  write_csv_atomic(curves_path, curve_rows);
  write_csv_atomic(finals_path, final_rows);
  emit_plot(finals_path, plot_path);

  manifest.files = {"final_losses.csv", "loss_curves.csv", "manifest.json", "plot.svg"};

  json j;
  j["run_id"] = manifest.run_id;
  j["config"] = json::parse(config.canonical_json());
  json cells = json::array();
  for (const CellResult& cell : manifest.cells) cells.push_back(cell_to_json(cell));
  j["cells"] = cells;
  j["files"] = manifest.files;
  write_text_atomic(manifest_path, j.dump(2) + "\n");

  return manifest;
}

}  // namespace ntkm::bench
