#pragma once

#include <map>
#include <string>
#include <vector>

namespace rampsim {

/// Flat "key = value" configuration text shared by printer profiles and
/// trojan configurations. '#' and ';' start comments; keys are dotted
/// lowercase paths. Unknown keys are an error so typos fail loudly.
class ConfigFile {
public:
    static ConfigFile parse(const std::string& text);
    static ConfigFile load(const std::string& path);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_number(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Override or add a single entry ("key=value" pair already split).
    void set(const std::string& key, const std::string& value);

    /// Keys never read through one of the getters. Callers report these as
    /// configuration errors after consuming everything they understand.
    std::vector<std::string> unused_keys() const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
    mutable std::map<std::string, bool> used_;
};

}  // namespace rampsim
