#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace omnifuse {

// A TOML subset: `[section]`, `[[array_of_tables]]`, `key = value` with
// numbers, booleans, "strings" and flat [arrays], and `#` comments.
struct ConfigValue {
    enum class Kind { Bool, Number, String, Array };
    Kind kind = Kind::Number;
    bool boolean = false;
    double number = 0.0;
    std::string text;
    std::vector<ConfigValue> items;
    std::size_t line = 0;
};

using ConfigTable = std::map<std::string, ConfigValue>;

// Typed read access to one table. Missing keys fall back to the default;
// a present key of the wrong type is a ConfigError naming file and line.
class ConfigSection {
  public:
    ConfigSection(const ConfigTable *table, std::string source, std::string name)
        : table_(table), source_(std::move(source)), name_(std::move(name)) {}

    bool has(const std::string &key) const;
    double number(const std::string &key, double fallback) const;
    std::int64_t integer(const std::string &key, std::int64_t fallback) const;
    bool boolean(const std::string &key, bool fallback) const;
    std::string string(const std::string &key, const std::string &fallback) const;
    std::vector<double> numbers(const std::string &key) const;
    const std::string &name() const { return name_; }

  private:
    const ConfigValue *find(const std::string &key) const;
    [[noreturn]] void fail(const ConfigValue &v, const std::string &key, const std::string &what) const;

    const ConfigTable *table_;
    std::string source_;
    std::string name_;
};

class Config {
  public:
    // Throws ParseError with the line of the offending text.
    static Config parse(std::istream &in, const std::string &source = "<config>");
    // Throws InputError when the file cannot be opened.
    static Config load(const std::string &path);

    // Empty name is the top-level table. Missing sections read as empty.
    ConfigSection section(const std::string &name) const;
    std::vector<ConfigSection> array(const std::string &name) const;

  private:
    std::string source_;
    std::map<std::string, ConfigTable> tables_;
    std::map<std::string, std::vector<ConfigTable>> arrays_;
};

} // namespace omnifuse
