#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pks/diagnostics.hpp"
#include "pks/field.hpp"
#include "pks/stepper.hpp"

namespace pks::io {

/// Parse error carrying the 1-based line number (0 when not tied to a line).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0);
  int line() const { return line_; }

 private:
  int line_;
};

/// Line-oriented `key = value` file. `#` starts a comment; dotted keys group
/// the init block. Duplicate keys are an error.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig parse_file(const std::filesystem::path& path);
  static KeyValueConfig parse_string(const std::string& text);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& require(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;
  int line_of(const std::string& key) const;

  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  std::vector<double> get_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::pair<std::string, int>>& entries() const { return entries_; }

  /// Throws ConfigError naming the first key not in `allowed`.
  void reject_unknown(const std::vector<std::string>& allowed) const;

 private:
  std::map<std::string, std::pair<std::string, int>> entries_;  // value, line
};

enum class SnapshotFormat { text, binary };

/// Everything `simulate` needs beyond SimConfig.
struct RunSettings {
  SimConfig sim;
  std::filesystem::path out_dir = "out";
  SnapshotFormat snapshot_format = SnapshotFormat::text;
  bool scale_to_mass = false;
};

/// Keys accepted by simulate/sweep configs.
const std::vector<std::string>& simulation_keys();

/// Builds run settings; throws ConfigError for missing, unknown, or invalid keys.
RunSettings settings_from(const KeyValueConfig& cfg);

// ---- CSV --------------------------------------------------------------------

/// Fixed record schema, one row per step.
const std::string& records_header();
std::string format_record(const StepRecord& r);
void write_records_csv(std::ostream& out, const std::vector<StepRecord>& records);
std::vector<StepRecord> read_records_csv(std::istream& in);

/// 17 significant digits, enough to round-trip a double.
std::string format_double(double v);

// ---- Snapshots --------------------------------------------------------------

struct Snapshot {
  std::string name;
  ScalarField field;
  double t = 0.0;
  double epsilon = 0.0;
  double A = 0.0;
  double target_mass = 1.0;
};

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap, SnapshotFormat format);
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace pks::io
