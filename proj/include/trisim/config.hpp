#pragma once

#include <initializer_list>
#include <istream>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "trisim/error.hpp"

namespace trisim {

/// Flat key = value configuration with [section] headers. Keys address as
/// "section.key". Unknown keys are rejected by require_known, and every parse
/// error carries its line number.
class Config {
public:
    static Config parse(std::istream& in, const std::string& origin) {
        Config cfg;
        cfg.origin_ = origin;
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string text = strip(line);
            if (text.empty() || text[0] == '#') continue;
            if (text.front() == '[') {
                if (text.back() != ']')
                    throw Error(origin + ":" + std::to_string(lineno) + ": unterminated section header");
                section = strip(text.substr(1, text.size() - 2));
                if (section.empty())
                    throw Error(origin + ":" + std::to_string(lineno) + ": empty section name");
                continue;
            }
            const auto eq = text.find('=');
            if (eq == std::string::npos)
                throw Error(origin + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key = strip(text.substr(0, eq));
            const std::string value = strip(text.substr(eq + 1));
            if (key.empty())
                throw Error(origin + ":" + std::to_string(lineno) + ": empty key");
            const std::string full = section.empty() ? key : section + "." + key;
            if (cfg.entries_.count(full))
                throw Error(origin + ":" + std::to_string(lineno) + ": duplicate key `" + full + "`");
            cfg.entries_[full] = {value, lineno};
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open config file: " + path);
        return parse(in, path);
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string get_string(const std::string& key) const { return entry(key).value; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        return has(key) ? entries_.at(key).value : fallback;
    }

    double get_double(const std::string& key) const { return to_double(key, entry(key).value); }

    double get_double(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }

    int get_int(const std::string& key, int fallback) const {
        if (!has(key)) return fallback;
        const double v = get_double(key);
        const int n = static_cast<int>(v);
        if (static_cast<double>(n) != v) throw Error(where(key) + ": expected integer");
        return n;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string& v = entries_.at(key).value;
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw Error(where(key) + ": expected boolean, got `" + v + "`");
    }

    std::vector<double> get_doubles(const std::string& key) const {
        std::istringstream in(entry(key).value);
        std::vector<double> out;
        for (std::string tok; in >> tok;) out.push_back(to_double(key, tok));
        return out;
    }

    /// Rejects any key not in the allowed list, naming it with its line.
    void require_known(std::initializer_list<const char*> allowed) const {
        for (const auto& [key, e] : entries_) {
            bool known = false;
            for (const char* a : allowed)
                if (key == a) {
                    known = true;
                    break;
                }
            if (!known)
                throw Error(origin_ + ":" + std::to_string(e.line) + ": unknown key `" + key + "`");
        }
    }

    std::string where(const std::string& key) const {
        return origin_ + ":" + std::to_string(entry(key).line);
    }

private:
    struct Entry {
        std::string value;
        int line;
    };

    const Entry& entry(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) throw Error(origin_ + ": missing required key `" + key + "`");
        return it->second;
    }

    double to_double(const std::string& key, const std::string& text) const {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(text, &pos);
        } catch (const std::exception&) {
            throw Error(where(key) + ": bad number `" + text + "`");
        }
        if (pos != text.size()) throw Error(where(key) + ": bad number `" + text + "`");
        return v;
    }

    static std::string strip(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, Entry> entries_;
    std::string origin_;
};

} // namespace trisim
