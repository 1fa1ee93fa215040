#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "ssacpd/detectors.hpp"
#include "ssacpd/evaluation.hpp"
#include "ssacpd/model_order.hpp"
#include "ssacpd/ssa.hpp"
#include "ssacpd/synthgen.hpp"
#include "ssacpd/timeseries.hpp"

namespace ssacpd {

using json = nlohmann::json;

// One row per sample, one column per channel, optional header row,
// locale-independent decimal points.
TimeSeries read_csv_timeseries(const std::filesystem::path& path);
void write_csv_timeseries(const std::filesystem::path& path, const TimeSeries& series,
                          bool header = true);

// Writes are atomic: a temp file in the same directory is renamed into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

// Rejects keys outside `allowed`; context names the object in the message.
void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& context);

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

json to_json(const EpochStats& stats);
EpochStats epoch_stats_from_json(const json& j);
json to_json(const WhiteningTransform& w);
WhiteningTransform whitening_from_json(const json& j);
json to_json(const DemixingModel& model);
DemixingModel demixing_from_json(const json& j);
json to_json(const OrderSelection& sel);
json to_json(const BniseReport& report);
json to_json(const ChangePointReport& report);
ChangePointReport report_from_json(const json& j);
json to_json(const RocCurve& roc);
RocCurve roc_from_json(const json& j);
json to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const json& j);
json sidecar_to_json(const SynthDataset& ds, const SynthConfig& config);
json to_json(const ExperimentResult& result);
ExperimentResult experiment_result_from_json(const json& j);

std::string format_double(double v); // shortest round-trip representation

std::string order_selection_csv(const OrderSelection& sel);
std::string bnise_csv(const BniseReport& report);
std::string report_csv(const ChangePointReport& report);
std::string roc_csv(const RocCurve& roc);
std::string experiment_csv(const ExperimentResult& result);

} // namespace ssacpd
