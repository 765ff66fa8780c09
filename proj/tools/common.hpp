#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "renalci/serialize.hpp"

namespace renalci::cli {

namespace fs = std::filesystem;

struct Globals {
  std::uint64_t seed = 0;
  unsigned jobs = 0;  // 0 = all cores
  std::string out;
};

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitComputation = 2;
inline constexpr int kExitPartial = 3;

std::string sha256_hex(std::string_view bytes);

/// Inputs read for one command, with digests for the report.
class Provenance {
 public:
  explicit Provenance(std::string command) : command_(std::move(command)) {}

  /// Reads a whole file and records its digest.
  std::string read(const fs::path& path);

  /// Resolved options echoed into the report. --jobs is left out on purpose:
  /// it never changes results.
  Json& config() { return config_; }

  Json to_json(std::uint64_t seed) const;

 private:
  std::string command_;
  Json config_ = Json::object();
  std::vector<std::pair<std::string, std::string>> inputs_;
};

/// Files staged in memory and written together at the end, so a failing
/// command leaves nothing behind.
class Outputs {
 public:
  void add(fs::path path, std::string bytes);
  void commit() const;

 private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

/// {"tool": ..., "provenance": ..., "result": ...} pretty-printed with a
/// trailing newline.
std::string report(const Provenance& prov, std::uint64_t seed, Json result);

/// The --out directory; throws ConfigError when it was not given.
fs::path out_dir(const Globals& g);

/// Every regular file with the given extension directly inside `dir`,
/// sorted by name.
std::vector<fs::path> list_files(const fs::path& dir, std::string_view extension);

/// JSON reader for --config: nested objects address subcommands, e.g.
/// {"seed": 7, "survival": {"cox": {"ties": "breslow"}}}.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;
};

void add_slide_commands(CLI::App& app, Globals& g, int& exit_code);
void add_eval_commands(CLI::App& app, Globals& g, int& exit_code);
void add_survival_commands(CLI::App& app, Globals& g, int& exit_code);
void add_synth_commands(CLI::App& app, Globals& g, int& exit_code);

}  // namespace renalci::cli
