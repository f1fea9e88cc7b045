#pragma once

// CSV (RFC 4180) and JSON-lines output. Numbers use the shortest round-trip
// representation so equal values give equal bytes.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "flatlyap/errors.hpp"

namespace flatlyap {

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Quotes a field when it contains a comma, quote, CR or LF; inner quotes are doubled.
inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw Error("cannot write '" + path.string() + "'");
    }

    CsvWriter& row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << csv_escape(fields[i]);
        }
        out_ << "\r\n";
        return *this;
    }

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

/// Parses one RFC 4180 record per line (no embedded newlines); used by tests and replay.
inline std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

class JsonLines {
public:
    explicit JsonLines(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw Error("cannot write '" + path.string() + "'");
    }

    void write(const nlohmann::json& j) {
        out_ << j.dump() << '\n';
        out_.flush();
    }

private:
    std::ofstream out_;
};

/// Exclusive lock file in an output directory, removed on destruction.
class DirectoryLock {
public:
    explicit DirectoryLock(const std::filesystem::path& dir) : path_(dir / ".lock") {
        std::FILE* f = std::fopen(path_.string().c_str(), "wx");
        if (!f) throw Error("output directory '" + dir.string() + "' is locked by another run (" + path_.string() + ")");
        std::fclose(f);
    }
    ~DirectoryLock() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    std::filesystem::path path_;
};

}  // namespace flatlyap
