#include "omnifuse/config.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "omnifuse/errors.h"

namespace omnifuse {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

bool valid_key(std::string_view k) {
    if (k.empty())
        return false;
    for (char ch : k) {
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.'))
            return false;
    }
    return true;
}

class ValueParser {
  public:
    ValueParser(std::string_view text, const std::string &source, std::size_t line)
        : s_(text), source_(source), line_(line) {}

    ConfigValue parse_all() {
        ConfigValue v = parse_value();
        skip_space();
        if (pos_ != s_.size() && s_[pos_] != '#')
            fail("unexpected text after value");
        return v;
    }

  private:
    ConfigValue parse_value() {
        skip_space();
        if (pos_ >= s_.size())
            fail("missing value");
        ConfigValue v;
        v.line = line_;
        const char ch = s_[pos_];
        if (ch == '"') {
            v.kind = ConfigValue::Kind::String;
            ++pos_;
            while (pos_ < s_.size() && s_[pos_] != '"') {
                if (s_[pos_] == '\\' && pos_ + 1 < s_.size())
                    ++pos_;
                v.text += s_[pos_++];
            }
            if (pos_ >= s_.size())
                fail("unterminated string");
            ++pos_;
        } else if (ch == '[') {
            v.kind = ConfigValue::Kind::Array;
            ++pos_;
            skip_space();
            if (pos_ < s_.size() && s_[pos_] == ']') {
                ++pos_;
                return v;
            }
            while (true) {
                ConfigValue item = parse_value();
                if (item.kind == ConfigValue::Kind::Array)
                    fail("nested arrays are not supported");
                v.items.push_back(std::move(item));
                skip_space();
                if (pos_ < s_.size() && s_[pos_] == ',') {
                    ++pos_;
                    skip_space();
                    if (pos_ < s_.size() && s_[pos_] == ']') {
                        ++pos_;
                        break;
                    }
                    continue;
                }
                if (pos_ < s_.size() && s_[pos_] == ']') {
                    ++pos_;
                    break;
                }
                fail("expected ',' or ']' in array");
            }
        } else if (s_.substr(pos_, 4) == "true") {
            v.kind = ConfigValue::Kind::Bool;
            v.boolean = true;
            pos_ += 4;
        } else if (s_.substr(pos_, 5) == "false") {
            v.kind = ConfigValue::Kind::Bool;
            pos_ += 5;
        } else {
            v.kind = ConfigValue::Kind::Number;
            std::size_t end = pos_;
            while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                                       s_[end] == '-' || s_[end] == '+' || s_[end] == '_'))
                ++end;
            std::string token;
            for (char c : s_.substr(pos_, end - pos_)) {
                if (c != '_')
                    token += c;
            }
            if (!token.empty() && token.front() == '+')
                token.erase(0, 1);
            auto res = std::from_chars(token.data(), token.data() + token.size(), v.number);
            if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size() ||
                !std::isfinite(v.number))
                fail("not a value: '" + std::string(s_.substr(pos_, end - pos_)) + "'");
            pos_ = end;
        }
        return v;
    }

    void skip_space() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    [[noreturn]] void fail(const std::string &what) const { throw ParseError(source_, line_, what); }

    std::string_view s_;
    const std::string &source_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

const char *kind_name(ConfigValue::Kind k) {
    switch (k) {
    case ConfigValue::Kind::Bool:
        return "a boolean";
    case ConfigValue::Kind::Number:
        return "a number";
    case ConfigValue::Kind::String:
        return "a string";
    case ConfigValue::Kind::Array:
        return "an array";
    }
    return "a value";
}

} // namespace

Config Config::parse(std::istream &in, const std::string &source) {
    Config cfg;
    cfg.source_ = source;
    cfg.tables_[""];
    ConfigTable *current = &cfg.tables_[""];
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view s = trim(raw);
        if (s.empty() || s.front() == '#')
            continue;
        if (s.substr(0, 2) == "[[") {
            const auto close = s.find("]]");
            if (close == std::string_view::npos || !trim(s.substr(close + 2)).empty())
                throw ParseError(source, line, "malformed array-of-tables header");
            const std::string name(trim(s.substr(2, close - 2)));
            if (!valid_key(name))
                throw ParseError(source, line, "invalid table name '" + name + "'");
            auto &arr = cfg.arrays_[name];
            arr.emplace_back();
            current = &arr.back();
            continue;
        }
        if (s.front() == '[') {
            const auto close = s.find(']');
            if (close == std::string_view::npos || !trim(s.substr(close + 1)).empty())
                throw ParseError(source, line, "malformed section header");
            const std::string name(trim(s.substr(1, close - 1)));
            if (!valid_key(name))
                throw ParseError(source, line, "invalid section name '" + name + "'");
            current = &cfg.tables_[name];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(source, line, "expected 'key = value'");
        const std::string key(trim(s.substr(0, eq)));
        if (!valid_key(key))
            throw ParseError(source, line, "invalid key '" + key + "'");
        if (current->count(key))
            throw ParseError(source, line, "duplicate key '" + key + "'");
        (*current)[key] = ValueParser(s.substr(eq + 1), source, line).parse_all();
    }
    return cfg;
}

Config Config::load(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open config file '" + path + "'");
    return parse(in, path);
}

ConfigSection Config::section(const std::string &name) const {
    auto it = tables_.find(name);
    return ConfigSection(it == tables_.end() ? nullptr : &it->second, source_, name);
}

std::vector<ConfigSection> Config::array(const std::string &name) const {
    std::vector<ConfigSection> out;
    auto it = arrays_.find(name);
    if (it == arrays_.end())
        return out;
    for (std::size_t i = 0; i < it->second.size(); ++i)
        out.emplace_back(&it->second[i], source_, name + "[" + std::to_string(i) + "]");
    return out;
}

const ConfigValue *ConfigSection::find(const std::string &key) const {
    if (!table_)
        return nullptr;
    auto it = table_->find(key);
    return it == table_->end() ? nullptr : &it->second;
}

void ConfigSection::fail(const ConfigValue &v, const std::string &key, const std::string &what) const {
    throw ConfigError(source_ + ":" + std::to_string(v.line) + ": " + name_ + (name_.empty() ? "" : ".") + key +
                      " " + what);
}

bool ConfigSection::has(const std::string &key) const { return find(key) != nullptr; }

double ConfigSection::number(const std::string &key, double fallback) const {
    const ConfigValue *v = find(key);
    if (!v)
        return fallback;
    if (v->kind != ConfigValue::Kind::Number)
        fail(*v, key, std::string("must be a number, got ") + kind_name(v->kind));
    return v->number;
}

std::int64_t ConfigSection::integer(const std::string &key, std::int64_t fallback) const {
    const ConfigValue *v = find(key);
    if (!v)
        return fallback;
    if (v->kind != ConfigValue::Kind::Number || v->number != std::floor(v->number) || std::abs(v->number) > 9.0e15)
        fail(*v, key, "must be an integer");
    return static_cast<std::int64_t>(v->number);
}

bool ConfigSection::boolean(const std::string &key, bool fallback) const {
    const ConfigValue *v = find(key);
    if (!v)
        return fallback;
    if (v->kind != ConfigValue::Kind::Bool)
        fail(*v, key, std::string("must be a boolean, got ") + kind_name(v->kind));
    return v->boolean;
}

std::string ConfigSection::string(const std::string &key, const std::string &fallback) const {
    const ConfigValue *v = find(key);
    if (!v)
        return fallback;
    if (v->kind != ConfigValue::Kind::String)
        fail(*v, key, std::string("must be a string, got ") + kind_name(v->kind));
    return v->text;
}

std::vector<double> ConfigSection::numbers(const std::string &key) const {
    const ConfigValue *v = find(key);
    if (!v)
        return {};
    if (v->kind != ConfigValue::Kind::Array)
        fail(*v, key, std::string("must be an array, got ") + kind_name(v->kind));
    std::vector<double> out;
    for (const auto &item : v->items) {
        if (item.kind != ConfigValue::Kind::Number)
            fail(*v, key, "must hold numbers only");
        out.push_back(item.number);
    }
    return out;
}

} // namespace omnifuse
