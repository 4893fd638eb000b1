#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ntkm::bench {

// Shortest decimal form that round-trips the exact double. Locale-independent,
// so identical values always serialize to identical bytes.
std::string format_double(double v);

// Schema shared by loss_curves.csv and final_losses.csv, in this exact column
// order. Missing values are empty fields, never zeros.
inline constexpr const char* kCsvHeader =
    "run_id,task,model_kind,width,seed,step,train_loss,eval_loss,wall_ms";

struct LossRow {
  std::string run_id;
  std::string task;
  std::string model_kind;
  std::string width;  // decimal H, or "inf" for the analytic-kernel stand-in
  std::uint64_t seed = 0;
  long step = 0;
  std::optional<double> train_loss;
  std::optional<double> eval_loss;
  std::optional<double> wall_ms;
};

std::string to_csv_line(const LossRow& row);

// Writes header plus rows to a temp file, then renames into place.
void write_csv_atomic(const std::string& path, const std::vector<LossRow>& rows);

// Strict reader for the schema above; any malformed line reports its number.
std::vector<LossRow> read_csv(const std::string& path);

void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace ntkm::bench
