#include "manifest.hpp"

#include <array>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <memory>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "atlasbench/errors.hpp"

#ifndef ATLASBENCH_VERSION
#define ATLASBENCH_VERSION "0.0.0"
#endif

namespace atlasbench::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

void RunManifest::write(const std::filesystem::path& path) const {
  using nlohmann::json;
  auto hashed = [](const std::vector<std::string>& paths) {
    json a = json::array();
    for (const auto& p : paths) a.push_back({{"path", p}, {"sha256", sha256_file(p)}});
    return a;
  };
  json j{{"tool", "atlasbench"},
         {"version", ATLASBENCH_VERSION},
         {"subcommand", subcommand},
         {"config", config ? json(*config) : json(nullptr)},
         {"seed", seed ? json(*seed) : json(nullptr)},
         {"threads", threads},
         {"inputs", hashed(inputs)},
         {"outputs", hashed(outputs)}};
  if (config) j["config_sha256"] = sha256_file(*config);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

int thread_cap() {
  const char* v = std::getenv("ATLASBENCH_THREADS");
  if (v == nullptr || *v == '\0') return 1;
  int n = 0;
  const std::string s(v);
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || end != s.data() + s.size() || n < 1) {
    throw ConfigError("ATLASBENCH_THREADS must be a positive integer, got '" + s + "'");
  }
  return n;
}

}  // namespace atlasbench::cli
