#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace landau {

/// Shortest round-trip decimal for a double (%.17g keeps bit-identity).
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Long-format CSV writer with a fixed header row.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& cols) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open " + path);
        for (std::size_t i = 0; i < cols.size(); ++i)
            out_ << (i ? "," : "") << cols[i];
        out_ << "\n";
    }
    void row(const std::vector<double>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i)
            out_ << (i ? "," : "") << fmt_double(vals[i]);
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

/// Flat key=value text, optionally grouped in [sections]. Section names are
/// folded into keys as "section.key". Used for configs, metadata sidecars
/// and machine-readable run summaries.
class KeyValueFile {
  public:
    KeyValueFile() = default;

    static KeyValueFile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path);
        KeyValueFile kv;
        std::string line, section;
        while (std::getline(in, line)) {
            std::string s = trim(line);
            if (s.empty() || s[0] == '#') continue;
            if (s.front() == '[' && s.back() == ']') {
                section = trim(s.substr(1, s.size() - 2));
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("bad config line: " + line);
            std::string key = trim(s.substr(0, eq));
            std::string val = trim(s.substr(eq + 1));
            if (!section.empty()) key = section + "." + key;
            kv.set(key, val);
        }
        return kv;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path);
        for (const auto& k : order_) out << k << " = " << data_.at(k) << "\n";
    }

    bool has(const std::string& key) const { return data_.count(key) != 0; }

    void set(const std::string& key, const std::string& val) {
        if (!data_.count(key)) order_.push_back(key);
        data_[key] = val;
    }
    void set(const std::string& key, double v) { set(key, fmt_double(v)); }
    void set(const std::string& key, std::int64_t v) { set(key, std::to_string(v)); }

    std::string str(const std::string& key) const {
        auto it = data_.find(key);
        if (it == data_.end()) throw std::runtime_error("missing key: " + key);
        return it->second;
    }
    std::string str_or(const std::string& key, const std::string& dflt) const {
        auto it = data_.find(key);
        return it == data_.end() ? dflt : it->second;
    }
    double num(const std::string& key) const { return std::stod(str(key)); }
    double num_or(const std::string& key, double dflt) const {
        return has(key) ? num(key) : dflt;
    }
    std::int64_t integer_or(const std::string& key, std::int64_t dflt) const {
        return has(key) ? std::stoll(str(key)) : dflt;
    }

    const std::vector<std::string>& keys() const { return order_; }

  private:
    static std::string trim(const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        std::size_t e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> data_;
    std::vector<std::string> order_;
};

} // namespace landau
