#include "igsim/inferkit/frame.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "igsim/common/errors.hpp"

namespace igsim::inferkit {

void Frame::check_length(const std::string& name, std::size_t n) {
    if (has(name)) throw ValidationError("frame: duplicate column " + name);
    if (!order_.empty() && n != rows_)
        throw ValidationError("frame: column " + name + " has " + std::to_string(n) + " rows, expected " +
                              std::to_string(rows_));
    rows_ = n;
    order_.push_back(name);
}

void Frame::add_numeric(const std::string& name, std::vector<double> values) {
    check_length(name, values.size());
    numeric_.emplace(name, std::move(values));
}

void Frame::add_text(const std::string& name, std::vector<std::string> values) {
    check_length(name, values.size());
    text_.emplace(name, std::move(values));
}

bool Frame::has(const std::string& name) const { return numeric_.count(name) || text_.count(name); }

const std::vector<double>& Frame::numeric(const std::string& name) const {
    auto it = numeric_.find(name);
    if (it == numeric_.end()) throw ValidationError("frame: missing numeric column '" + name + "'");
    return it->second;
}

const std::vector<std::string>& Frame::text(const std::string& name) const {
    auto it = text_.find(name);
    if (it == text_.end()) throw ValidationError("frame: missing text column '" + name + "'");
    return it->second;
}

Frame Frame::take(std::span<const std::size_t> rows) const {
    Frame out;
    for (const auto& name : order_) {
        if (auto it = numeric_.find(name); it != numeric_.end()) {
            std::vector<double> v;
            v.reserve(rows.size());
            for (auto r : rows) v.push_back(it->second.at(r));
            out.add_numeric(name, std::move(v));
        } else {
            const auto& src = text_.at(name);
            std::vector<std::string> v;
            v.reserve(rows.size());
            for (auto r : rows) v.push_back(src.at(r));
            out.add_text(name, std::move(v));
        }
    }
    out.rows_ = rows.size();
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(std::move(cur));
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    if (s == "NA" || s == "nan" || s == "NaN") {
        out = kMissing;
        return true;
    }
    const char* b = s.data();
    const char* e = b + s.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

Frame Frame::read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("header", path.string() + ": empty CSV");
    const auto header = split_csv_line(line);
    std::vector<std::vector<std::string>> cells(header.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto row = split_csv_line(line);
        if (row.size() != header.size())
            throw SchemaError("row", path.string() + ":" + std::to_string(lineno) + ": expected " +
                                         std::to_string(header.size()) + " cells, got " +
                                         std::to_string(row.size()));
        for (std::size_t c = 0; c < row.size(); ++c) cells[c].push_back(std::move(row[c]));
    }
    Frame f;
    for (std::size_t c = 0; c < header.size(); ++c) {
        std::vector<double> nums;
        nums.reserve(cells[c].size());
        bool numeric = true;
        for (const auto& s : cells[c]) {
            double v = kMissing;
            if (!s.empty() && !parse_double(s, v)) {
                numeric = false;
                break;
            }
            nums.push_back(v);
        }
        if (numeric) f.add_numeric(header[c], std::move(nums));
        else f.add_text(header[c], std::move(cells[c]));
    }
    return f;
}

void Frame::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    for (std::size_t c = 0; c < order_.size(); ++c) out << (c ? "," : "") << csv_escape(order_[c]);
    out << '\n';
    char buf[64];
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < order_.size(); ++c) {
            if (c) out << ',';
            const auto& name = order_[c];
            if (auto it = numeric_.find(name); it != numeric_.end()) {
                const double v = it->second[r];
                if (is_missing(v)) continue;
                auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
                out.write(buf, p - buf);
            } else {
                out << csv_escape(text_.at(name)[r]);
            }
        }
        out << '\n';
    }
}

}  // namespace igsim::inferkit
