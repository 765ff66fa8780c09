#include "common.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <iterator>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "renalci/error.hpp"
#include "renalci/fileio.hpp"

namespace renalci::cli {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string Provenance::read(const fs::path& path) {
  std::string bytes = read_file(path);
  inputs_.emplace_back(path.generic_string(), sha256_hex(bytes));
  return bytes;
}

Json Provenance::to_json(std::uint64_t seed) const {
  Json inputs = Json::array();
  for (const auto& [path, digest] : inputs_) {
    inputs.push_back(Json{{"path", path}, {"sha256", digest}});
  }
  Json j;
  j["tool"] = "renalci";
  j["version"] = RENALCI_VERSION;
  j["command"] = command_;
  j["seed"] = seed;
  j["config"] = config_;
  j["inputs"] = std::move(inputs);
  return j;
}

void Outputs::add(fs::path path, std::string bytes) {
  files_.emplace_back(std::move(path), std::move(bytes));
}

void Outputs::commit() const {
  for (const auto& [path, bytes] : files_) {
    if (path.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(path.parent_path(), ec);
      if (ec) {
        throw IoError(fmt::format("cannot create directory '{}': {}",
                                  path.parent_path().string(), ec.message()));
      }
    }
    write_file(path, bytes);
  }
}

std::string report(const Provenance& prov, std::uint64_t seed, Json result) {
  Json j;
  j["provenance"] = prov.to_json(seed);
  j["result"] = std::move(result);
  return j.dump(2) + "\n";
}

fs::path out_dir(const Globals& g) {
  if (g.out.empty()) throw ConfigError("--out is required for this command");
  return fs::path(g.out);
}

std::vector<fs::path> list_files(const fs::path& dir, std::string_view extension) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw IoError(fmt::format("'{}' is not a directory", dir.string()));
  }
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string JsonConfig::to_config(const CLI::App* app, bool default_also, bool,
                                  std::string) const {
  Json j = Json::object();
  for (const CLI::Option* opt : app->get_options({})) {
    if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
    const auto& name = opt->get_lnames().front();
    if (opt->count() > 0) {
      const auto& results = opt->results();
      j[name] = results.size() == 1 ? Json(results.front()) : Json(results);
    } else if (default_also && !opt->get_default_str().empty()) {
      j[name] = opt->get_default_str();
    }
  }
  return j.dump(2) + "\n";
}

namespace {

void flatten(const Json& j, std::vector<std::string>& parents,
             std::vector<CLI::ConfigItem>& out) {
  for (const auto& item : j.items()) {
    const Json& v = item.value();
    if (v.is_object()) {
      parents.push_back(item.key());
      flatten(v, parents, out);
      parents.pop_back();
      continue;
    }
    CLI::ConfigItem ci;
    ci.parents = parents;
    ci.name = item.key();
    auto scalar = [](const Json& x) {
      return x.is_string() ? x.get<std::string>() : x.dump();
    };
    if (v.is_array()) {
      for (const auto& x : v) ci.inputs.push_back(scalar(x));
    } else {
      ci.inputs.push_back(scalar(v));
    }
    out.push_back(std::move(ci));
  }
}

}  // namespace

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
  const std::string text(std::istreambuf_iterator<char>(input), {});
  const Json j = parse_json(text, "--config");
  if (!j.is_object()) throw ConfigError("--config: expected a JSON object");
  std::vector<CLI::ConfigItem> items;
  std::vector<std::string> parents;
  flatten(j, parents, items);
  return items;
}

}  // namespace renalci::cli
