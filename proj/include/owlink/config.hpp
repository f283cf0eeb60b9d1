#ifndef OWLINK_CONFIG_HPP
#define OWLINK_CONFIG_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace owlink {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat key=value configuration. Lines starting with '#' are comments.
class KeyValueConfig {
public:
    static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");
    static KeyValueConfig load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::optional<std::string> raw(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Keys present here but absent from `known`.
    std::vector<std::string> unknown_keys(const std::set<std::string>& known) const;

    /// Canonical text: sorted "key = value" lines.
    std::string to_string() const;
    const std::map<std::string, std::string>& values() const { return values_; }

    /// Later values win.
    void merge(const KeyValueConfig& other);

private:
    std::map<std::string, std::string> values_;
    std::string origin_;
};

/// Directory holding the shipped preset files (name.conf).
std::filesystem::path preset_dir();
KeyValueConfig load_preset(const std::string& name);
std::vector<std::string> list_presets();

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
/// FNV-1a over the file bytes, hex encoded.
std::string file_checksum(const std::filesystem::path& path);

/// Per-run provenance record written next to every artifact.
struct RunManifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::filesystem::path> outputs;
    double wall_seconds = 0.0;

    /// Writes `manifest.txt` into `dir` with checksums of every output.
    void write(const std::filesystem::path& dir) const;
};

}  // namespace owlink

#endif
