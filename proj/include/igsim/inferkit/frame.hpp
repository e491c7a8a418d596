#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace igsim::inferkit {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

/// Column store for model input. Numeric cells use NaN for missing values.
class Frame {
public:
    std::size_t rows() const noexcept { return rows_; }

    void add_numeric(const std::string& name, std::vector<double> values);
    void add_text(const std::string& name, std::vector<std::string> values);

    bool has(const std::string& name) const;
    bool is_text(const std::string& name) const { return text_.count(name) != 0; }
    const std::vector<double>& numeric(const std::string& name) const;
    const std::vector<std::string>& text(const std::string& name) const;

    /// Column names in insertion order.
    const std::vector<std::string>& columns() const noexcept { return order_; }

    /// Row subset (indices may repeat).
    Frame take(std::span<const std::size_t> rows) const;

    /// CSV with a header row. A column is numeric when every non-empty cell parses.
    static Frame read_csv(const std::filesystem::path& path);
    void write_csv(const std::filesystem::path& path) const;

private:
    void check_length(const std::string& name, std::size_t n);

    std::size_t rows_ = 0;
    std::vector<std::string> order_;
    std::map<std::string, std::vector<double>> numeric_;
    std::map<std::string, std::vector<std::string>> text_;
};

}  // namespace igsim::inferkit
