#pragma once

// Deterministic CSV tables, run manifests and a bounded parallel map.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "flatwire/errors.hpp"

namespace flatwire::report {

inline constexpr std::string_view tool_version = "1.0.0";

/// Shortest text that parses back to the same double.
inline std::string number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// In-memory CSV table; each header names its unit, e.g. "Rac[ohm]".
class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != header_.size()) throw IoError("csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                                                          std::to_string(header_.size()));
        rows_.push_back(std::move(cells));
    }
    void add_row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(number(v));
        add_row(std::move(cells));
    }

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    std::string str() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (size_t i = 0; i < cells.size(); ++i) {
                if (i) out += ',';
                out += quote(cells[i]);
            }
            out += '\n';
        };
        line(header_);
        for (const auto& r : rows_) line(r);
        return out;
    }

private:
    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + '"';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

inline void write_file(const std::filesystem::path& path, std::string_view text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << text;
    if (!f) throw IoError("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// 64-bit FNV-1a, hex.
inline std::string fnv1a(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    static constexpr char digits[] = "0123456789abcdef";
    for (int i = 15; i >= 0; --i, h >>= 4) buf[i] = digits[h & 0xf];
    buf[16] = 0;
    return buf;
}

struct Manifest {
    std::string command;
    std::string config_hash;
    nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
    std::vector<std::string> outputs;

    std::string str() const {
        nlohmann::ordered_json j;
        j["tool"] = "flatwire";
        j["version"] = tool_version;
        j["command"] = command;
        j["config_hash"] = config_hash;
        j["parameters"] = parameters;
        j["outputs"] = outputs;
        return j.dump(2) + "\n";
    }
};

/// Outcome of one job of a parallel map.
template <class T>
struct Outcome {
    std::optional<T> value;
    std::string error;
    int category = 0;  ///< ErrorCategory of the failure, 0 on success
};

/// Runs f(0..n-1) on at most `jobs` threads; results keep index order.
template <class T>
std::vector<Outcome<T>> parallel_map(int n, int jobs, const std::function<T(int)>& f) {
    std::vector<Outcome<T>> out(static_cast<size_t>(std::max(n, 0)));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                out[i].value = f(i);
            } catch (const Error& e) {
                out[i].error = e.what();
                out[i].category = static_cast<int>(e.category());
            } catch (const std::exception& e) {
                out[i].error = e.what();
                out[i].category = static_cast<int>(ErrorCategory::numerical);
            }
        }
    };
    const int workers = std::max(1, std::min(jobs, n));
    if (workers == 1) {
        worker();
        return out;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return out;
}

}  // namespace flatwire::report
