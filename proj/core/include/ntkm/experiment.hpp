#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ntkm/run_config.hpp"

namespace ntkm::bench {

struct CurvePoint {
  long step = 0;
  double train_loss = 0.0;
  std::optional<double> eval_loss;
};

// Outcome of one (model kind, width, seed) grid cell. A diverged cell is
// recorded as failed and the rest of the grid still runs.
struct CellResult {
  ModelKind kind = ModelKind::KernelSgd;
  WidthSpec width;
  std::uint64_t seed = 0;

  bool failed = false;
  std::string error;
  long failed_step = -1;

  std::vector<CurvePoint> curve;
  std::optional<double> final_train_loss;
  std::optional<double> final_eval_loss;
  double wall_ms = 0.0;  // manifest only; CSVs keep this column empty

  std::string ensemble_fingerprint;  // empty for the analytic stand-in
  std::string gram_fingerprint;      // kernel cells only
};

struct RunManifest {
  std::string run_id;
  RunConfig config;
  std::vector<CellResult> cells;
  std::vector<std::string> files;

  bool any_failed() const;
};

// Sub-seeds derived from one cell seed. The ensemble seed is shared across
// widths so wider ensembles extend narrower ones row for row.
std::uint64_t data_seed(std::uint64_t seed);
std::uint64_t ensemble_seed(std::uint64_t seed);

// Runs the full grid (parallel up to BENCH_THREADS), then writes
// loss_curves.csv, final_losses.csv, plot.svg and manifest.json under
// out_dir. Output bytes depend only on (config, seeds), never on scheduling.
RunManifest run_experiment(const RunConfig& config, const std::string& out_dir);

}  // namespace ntkm::bench
