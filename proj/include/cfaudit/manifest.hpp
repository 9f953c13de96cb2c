#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

namespace cfaudit {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

// One manifest per pipeline stage invocation. run_id is deterministic
// (version, command, config hash, input digests, seed); wall-clock
// timestamps live only here so reports stay byte-reproducible.
struct AuditRunManifest {
  std::string run_id;
  std::string command;
  std::string tool_version;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::map<std::string, std::string> input_digests;  // path -> sha256
  std::map<std::string, std::uint64_t> counts;
  std::string started_at;
  std::string finished_at;
};

AuditRunManifest make_manifest(const std::string& command,
                               const std::string& config_hash,
                               const std::map<std::string, std::string>& input_digests,
                               std::uint64_t seed);

void finish_manifest(AuditRunManifest& m);  // stamps finished_at

nlohmann::json manifest_to_json(const AuditRunManifest& m);
void write_manifest(const AuditRunManifest& m, const std::string& path);

std::string iso8601_utc_now();

}  // namespace cfaudit
