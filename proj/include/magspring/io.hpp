#pragma once

// File formats at the command-line boundary: numeric CSV tables with `#`
// comment lines, the `t,value` time-series layout, drive schedules and
// all-or-nothing output writes.

#include "magspring/signal.hpp"
#include "magspring/sweep.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace magspring {

/// 17 significant digits, enough to round-trip every double.
std::string format_number(double x);

struct CsvTable {
    std::vector<std::string> comments; // without the leading '#'
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    /// Index of `name` in columns, or npos.
    std::size_t find(std::string_view name) const;
    std::vector<double> column(std::size_t index) const;
};

/// Header row of column names, then one numeric row per line. Blank lines and
/// lines starting with '#' are skipped; a UTF-8 byte-order mark is ignored.
/// Malformed cells raise a parse error naming the line and column.
CsvTable parse_csv(std::string_view text, std::string_view source = "<memory>");
CsvTable read_csv(const std::filesystem::path& path);
std::string format_csv(const CsvTable& table);

/// `t,value` file; further columns are ignored. Values are multiplied by
/// `scale` (e.g. degrees to radians). dt is the median spacing; every step
/// must lie within 1e-6 relative of it.
TimeSeries load_timeseries_csv(const std::filesystem::path& path, Unit unit = Unit::rad, double scale = 1.0);
TimeSeries timeseries_from_table(const CsvTable& table, Unit unit = Unit::rad, double scale = 1.0,
                                 std::string_view source = "<memory>");

/// `f_hz,u_amp_v` rows in sweep order; the direction follows the frequencies.
DriveSchedule load_drive_csv(const std::filesystem::path& path);
DriveSchedule drive_from_table(const CsvTable& table, std::string_view source = "<memory>");

/// Files staged in memory and published together: each is written to a
/// temporary sibling and renamed into place only after all writes succeed.
class OutputSet {
public:
    void add(std::filesystem::path path, std::string content);
    void commit();
    const std::vector<std::pair<std::filesystem::path, std::string>>& files() const { return files_; }

private:
    std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

} // namespace magspring
