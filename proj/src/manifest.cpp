#include "cfaudit/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "cfaudit/errors.hpp"

namespace cfaudit {

namespace {

std::string digest_to_hex(const unsigned char* digest, unsigned len) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

struct EvpCtx {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  ~EvpCtx() { EVP_MD_CTX_free(ctx); }
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  EvpCtx md;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (!md.ctx || EVP_DigestInit_ex(md.ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(md.ctx, bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(md.ctx, digest, &len) != 1)
    throw DataError("sha256 failure");
  return digest_to_hex(digest, len);
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  EvpCtx md;
  if (!md.ctx || EVP_DigestInit_ex(md.ctx, EVP_sha256(), nullptr) != 1)
    throw DataError("sha256 failure");
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    const auto got = in.gcount();
    if (got > 0 && EVP_DigestUpdate(md.ctx, buf, static_cast<std::size_t>(got)) != 1)
      throw DataError("sha256 failure");
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_DigestFinal_ex(md.ctx, digest, &len) != 1)
    throw DataError("sha256 failure");
  return digest_to_hex(digest, len);
}

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

AuditRunManifest make_manifest(const std::string& command,
                               const std::string& config_hash,
                               const std::map<std::string, std::string>& input_digests,
                               std::uint64_t seed) {
  AuditRunManifest m;
  m.command = command;
  m.tool_version = CFAUDIT_VERSION;
  m.seed = seed;
  m.config_hash = config_hash.empty() ? "-" : config_hash;
  m.input_digests = input_digests;
  std::ostringstream id;
  id << m.tool_version << '|' << m.command << '|' << m.config_hash << '|' << seed;
  for (const auto& [path, digest] : m.input_digests) id << '|' << digest;
  m.run_id = sha256_hex(id.str()).substr(0, 16);
  m.started_at = iso8601_utc_now();
  return m;
}

void finish_manifest(AuditRunManifest& m) { m.finished_at = iso8601_utc_now(); }

nlohmann::json manifest_to_json(const AuditRunManifest& m) {
  nlohmann::json j;
  j["schema"] = "v1";
  j["run_id"] = m.run_id;
  j["command"] = m.command;
  j["tool_version"] = m.tool_version;
  j["seed"] = m.seed;
  j["config_hash"] = m.config_hash;
  j["inputs"] = m.input_digests;
  j["counts"] = m.counts;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  return j;
}

void write_manifest(const AuditRunManifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << manifest_to_json(m).dump(2) << '\n';
}

}  // namespace cfaudit
