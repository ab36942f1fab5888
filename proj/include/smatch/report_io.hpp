#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "smatch/engines.hpp"
#include "smatch/experiments.hpp"

namespace smatch {

// RFC 4180 writer: CRLF row endings, fields quoted when they contain a
// comma, quote, or line break, embedded quotes doubled.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

std::string csv_escape(const std::string& field);

// Canonical serialized config (sorted keys) and its FNV-1a 64 hash; the hash
// identifies a run in summaries and manifests.
nlohmann::json config_json(const SimConfig& cfg);
std::string config_hash(const SimConfig& cfg);
std::uint64_t fnv1a64(const std::string& text);

nlohmann::json report_json(const CostReport& report);
nlohmann::json summary_json(const SimConfig& cfg, const CostReport& report);
nlohmann::json fit_json(const ScalingFit& fit);
nlohmann::json per_level_json(const CostReport& report);

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> outputs;
  std::string command_line;
};

nlohmann::json manifest_json(const RunManifest& manifest);

std::string iso8601_utc_now();

// Minimal structural validator for the shipped summary schema: supports
// type, required, properties, items, and enum.
bool validate_against_schema(const nlohmann::json& doc,
                             const nlohmann::json& schema, std::string* why);

}  // namespace smatch
