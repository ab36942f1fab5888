#include "smatch/report_io.hpp"

#include <chrono>
#include <cmath>
#include <ctime>

#include "smatch/version.hpp"

namespace smatch {

std::string csv_escape(const std::string& field) {
  bool needs_quote = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quote) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(fields[i]);
  }
  out_ << "\r\n";
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

namespace {

nlohmann::json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

nlohmann::json config_json(const SimConfig& cfg) {
  nlohmann::json j;
  j["d"] = cfg.d;
  j["model"] = to_string(cfg.model);
  j["N"] = cfg.N;
  j["M"] = cfg.M;
  j["m"] = cfg.m;
  j["n"] = cfg.n;
  j["policy"] = to_string(cfg.policy);
  j["init"] = to_string(cfg.init);
  j["seed"] = cfg.seed;
  j["replications"] = cfg.replications;
  j["warmup"] = cfg.warmup;
  j["norm"] = to_string(cfg.norm);
  j["beta_override"] = cfg.beta_override;
  j["l0_override"] = cfg.l0_override;
  j["leaf_pick"] =
      cfg.leaf_pick == LeafPick::nearest ? "nearest" : "last_inserted";
  j["debug_invariants"] = cfg.debug_invariants;
  j["flow_cap"] = cfg.flow_cap;
  return j;
}

std::string config_hash(const SimConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_json(cfg).dump())));
  return buf;
}

nlohmann::json per_level_json(const CostReport& report) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : report.per_level) {
    nlohmann::json row;
    row["level"] = l.level;
    row["match_count"] = l.match_count;
    row["total_cost"] = l.total_cost;
    levels.push_back(row);
  }
  return levels;
}

nlohmann::json report_json(const CostReport& report) {
  nlohmann::json j;
  j["mean_cost"] = report.mean_cost;
  j["stderr_cost"] = number_or_null(report.stderr_cost);
  j["per_level"] = per_level_json(report);
  j["transient_estimate"] = report.transient_estimate;
  j["transient_complete"] = report.transient_complete;
  j["periods"] = report.periods;
  j["matched"] = report.matched;
  j["warmup_used"] = report.warmup_used;
  j["warmup_clamped"] = report.warmup_clamped;
  j["invariant_violations"] = report.invariant_violations;
  j["first_violation"] = report.first_violation.empty()
                             ? nlohmann::json(nullptr)
                             : nlohmann::json(report.first_violation);
  j["stockouts"] = report.stockouts;
  j["supply_cost_per_period"] = report.supply_cost_per_period;
  j["total_cost_per_period"] = report.total_cost_per_period;
  if (report.stationarity.computed) {
    nlohmann::json s;
    s["second_half_mean"] = report.stationarity.second_half_mean;
    s["last_quarter_mean"] = report.stationarity.last_quarter_mean;
    s["z"] = report.stationarity.z;
    s["ok"] = report.stationarity.ok;
    j["stationarity"] = s;
  } else {
    j["stationarity"] = nullptr;
  }
  return j;
}

nlohmann::json summary_json(const SimConfig& cfg, const CostReport& report) {
  nlohmann::json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["tool"] = "smatch";
  j["version"] = kVersion;
  j["config"] = config_json(cfg);
  j["config_hash"] = config_hash(cfg);
  j["results"] = report_json(report);
  return j;
}

nlohmann::json fit_json(const ScalingFit& fit) {
  nlohmann::json j;
  j["exponent"] = fit.exponent;
  j["intercept"] = fit.intercept;
  j["exponent_stderr"] = number_or_null(fit.exponent_stderr);
  j["r2"] = fit.r2;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : fit.points) {
    nlohmann::json row;
    row["scale"] = p.scale;
    row["cost"] = p.cost;
    row["stderr"] = number_or_null(p.stderr);
    pts.push_back(row);
  }
  j["points"] = pts;
  return j;
}

nlohmann::json manifest_json(const RunManifest& manifest) {
  nlohmann::json j;
  j["config_hash"] = manifest.config_hash;
  j["seed"] = manifest.seed;
  j["version"] = manifest.version;
  j["started_at"] = manifest.started_at;
  j["finished_at"] = manifest.finished_at;
  j["outputs"] = manifest.outputs;
  j["command_line"] = manifest.command_line;
  return j;
}

std::string iso8601_utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

bool type_matches(const nlohmann::json& doc, const std::string& type) {
  if (type == "object") return doc.is_object();
  if (type == "array") return doc.is_array();
  if (type == "string") return doc.is_string();
  if (type == "integer") return doc.is_number_integer();
  if (type == "number") return doc.is_number();
  if (type == "boolean") return doc.is_boolean();
  if (type == "null") return doc.is_null();
  return false;
}

}  // namespace

bool validate_against_schema(const nlohmann::json& doc,
                             const nlohmann::json& schema, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (schema.contains("type")) {
    const auto& type = schema["type"];
    bool ok = false;
    if (type.is_string()) {
      ok = type_matches(doc, type.get<std::string>());
    } else if (type.is_array()) {
      for (const auto& t : type)
        ok = ok || type_matches(doc, t.get<std::string>());
    }
    if (!ok) return fail("type mismatch: got " + std::string(doc.type_name()));
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& v : schema["enum"]) found = found || v == doc;
    if (!found) return fail("value not in enum: " + doc.dump());
  }
  if (schema.contains("required") && doc.is_object()) {
    for (const auto& key : schema["required"])
      if (!doc.contains(key.get<std::string>()))
        return fail("missing required key: " + key.get<std::string>());
  }
  if (schema.contains("properties") && doc.is_object()) {
    for (auto it = schema["properties"].begin(); it != schema["properties"].end();
         ++it) {
      if (!doc.contains(it.key())) continue;
      std::string sub;
      if (!validate_against_schema(doc[it.key()], it.value(), &sub))
        return fail(it.key() + ": " + sub);
    }
  }
  if (schema.contains("items") && doc.is_array()) {
    for (const auto& el : doc) {
      std::string sub;
      if (!validate_against_schema(el, schema["items"], &sub))
        return fail("item: " + sub);
    }
  }
  return true;
}

}  // namespace smatch
