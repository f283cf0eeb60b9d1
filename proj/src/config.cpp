#include "owlink/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace owlink {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(no) + ": expected key = value");
        auto key = trim(std::string_view(t).substr(0, eq));
        auto value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(no) + ": empty key");
        cfg.values_[key] = value;
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

std::optional<std::string> KeyValueConfig::raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    return raw(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        double d = std::stod(*v, &used);
        if (used != v->size()) throw std::invalid_argument(*v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": '" + key + "' is not a number: " + *v);
    }
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || p != v->data() + v->size())
        throw ConfigError(origin_ + ": '" + key + "' is not an integer: " + *v);
    return out;
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key, std::uint64_t fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || p != v->data() + v->size())
        throw ConfigError(origin_ + ": '" + key + "' is not a non-negative integer: " + *v);
    return out;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(origin_ + ": '" + key + "' is not a boolean: " + *v);
}

std::vector<std::string> KeyValueConfig::unknown_keys(const std::set<std::string>& known) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        if (!known.count(k)) out.push_back(k);
    return out;
}

std::string KeyValueConfig::to_string() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

void KeyValueConfig::merge(const KeyValueConfig& other) {
    for (const auto& [k, v] : other.values_) values_[k] = v;
}

fs::path preset_dir() {
    if (const char* env = std::getenv("OWLINK_PRESETS")) return env;
    return OWLINK_PRESET_DIR;
}

KeyValueConfig load_preset(const std::string& name) {
    auto path = preset_dir() / (name + ".conf");
    if (!fs::exists(path)) throw ConfigError("unknown preset '" + name + "'");
    return KeyValueConfig::load(path);
}

std::vector<std::string> list_presets() {
    std::vector<std::string> out;
    if (!fs::is_directory(preset_dir())) return out;
    for (const auto& e : fs::directory_iterator(preset_dir()))
        if (e.path().extension() == ".conf") out.push_back(e.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t h) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string file_checksum(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 15];
    while (in) {
        in.read(buf, sizeof buf);
        h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
    }
    return hex64(h);
}

void RunManifest::write(const fs::path& dir) const {
    fs::create_directories(dir);
    std::ofstream out(dir / "manifest.txt");
    if (!out) throw std::runtime_error("unwritable path: " + dir.string());
    out << "command = " << command << "\n";
    out << "config_hash = " << config_hash << "\n";
    out << "seed = " << seed << "\n";
    for (const auto& i : inputs) out << "input = " << i << "\n";
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", wall_seconds);
    out << "wall_seconds = " << wall << "\n";
    for (const auto& o : outputs) out << "artifact = " << o.filename().string() << " " << file_checksum(o) << "\n";
}

}  // namespace owlink
