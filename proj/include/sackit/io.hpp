#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "sackit/model.hpp"
#include "sackit/types.hpp"

namespace sackit {

enum class StreamFormat { Auto, Jsonl, Csv };

/// Reads tracker samples in file order. Rows flagged invalid are kept with
/// valid = false. Throws ParseError on malformed rows and StructuralError on
/// decreasing time, both naming the file line.
std::vector<GazeSample> read_gaze_stream(const std::filesystem::path& path,
                                         StreamFormat format = StreamFormat::Auto);
std::vector<GazeSample> read_gaze_stream(std::istream& in, StreamFormat format);

void write_gaze_stream(const std::filesystem::path& path, const std::vector<GazeSample>& samples);

inline constexpr char kContainerMagic[] = "SACKIT";
inline constexpr std::uint32_t kContainerVersion = 1;

/// Contents of a container file. Any subset of sections may be present.
struct Container {
  nlohmann::json metadata = nlohmann::json::object();
  std::optional<SaccadeDataset> dataset;
  std::vector<MeanProfile> means;
  std::optional<PredictionModel> model;
  std::vector<SaccadeTrace> traces;
};

void write_container(std::ostream& out, const Container& container);
Container read_container(std::istream& in);
void write_container(const std::filesystem::path& path, const Container& container);
Container read_container(const std::filesystem::path& path);

void write_dataset(const std::filesystem::path& path, const SaccadeDataset& dataset);
SaccadeDataset read_dataset(const std::filesystem::path& path);
void write_model(const std::filesystem::path& path, const PredictionModel& model);
PredictionModel read_model(const std::filesystem::path& path);
void write_means(const std::filesystem::path& path, const std::vector<MeanProfile>& means);
std::vector<MeanProfile> read_means(const std::filesystem::path& path);

}  // namespace sackit
