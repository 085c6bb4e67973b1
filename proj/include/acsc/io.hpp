#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "acsc/core.hpp"
#include "acsc/experiments.hpp"

namespace acsc {

/// Unreadable/unwritable files and malformed contents. Messages carry the
/// path and, where it applies, a line or byte offset.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary trials file, little-endian: "ACSC", u32 version (1), u64 N, u64 T,
/// then N*T float64 in row-major order.
void write_trials(const std::string& path, const TrialSet& x);
/// Reads the binary format, or CSV (one trial per row) when the path ends in
/// ".csv".
TrialSet read_trials(const std::string& path);

/// Contents of a model or ground-truth file. Weights, corruption mask and
/// noise level are optional.
struct ModelFile {
  Dictionary dictionary;
  ActivationSet activations;
  std::optional<WeightField> weights;
  std::optional<std::vector<bool>> corrupted;
  std::optional<double> noise_std;
};

std::string model_to_json(const ModelFile& model);
ModelFile model_from_json(const std::string& text, const std::string& origin = "<string>");
void write_model(const std::string& path, const ModelFile& model);
ModelFile read_model(const std::string& path);

/// One JSON object per line.
std::string history_to_jsonl(const FitHistory& history);
void write_history(const std::string& path, const FitHistory& history);
FitHistory read_history(const std::string& path);

std::string bench_records_to_json(const std::vector<BenchRecord>& records);
std::vector<BenchRecord> bench_records_from_json(const std::string& text);
/// Header plus one row per (setting, solver).
std::string bench_summary_to_csv(const std::vector<BenchSummaryRow>& rows);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace acsc
