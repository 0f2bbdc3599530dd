#include "magspring/io.hpp"

#include "magspring/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace magspring {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string where(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line);
}

std::size_t require_column(const CsvTable& t, std::string_view name, std::string_view source) {
    const std::size_t i = t.find(name);
    require(i != std::string::npos, ErrorCode::parse,
            std::string(source) + ": missing column '" + std::string(name) + "'");
    return i;
}

} // namespace

std::string format_number(double x) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

std::size_t CsvTable::find(std::string_view name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? std::string::npos : static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> CsvTable::column(std::size_t index) const {
    require(index < columns.size(), ErrorCode::out_of_range, "column index out of range");
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[index]);
    return out;
}

CsvTable parse_csv(std::string_view text, std::string_view source) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    CsvTable table;
    std::size_t line_no = 0, pos = 0;
    bool have_header = false;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            table.comments.emplace_back(trim(line.substr(1)));
            continue;
        }
        const auto cells = split(line);
        if (!have_header) {
            for (const auto c : cells) {
                require(!c.empty(), ErrorCode::parse, where(source, line_no) + ": empty column name");
                table.columns.emplace_back(c);
            }
            have_header = true;
            continue;
        }
        require(cells.size() == table.columns.size(), ErrorCode::parse,
                where(source, line_no) + ": expected " + std::to_string(table.columns.size()) + " columns, found " +
                    std::to_string(cells.size()));
        std::vector<double> row(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const auto c = cells[j];
            const char* first = c.data();
            if (!c.empty() && c.front() == '+') ++first;
            const auto r = std::from_chars(first, c.data() + c.size(), row[j]);
            require(!c.empty() && r.ec == std::errc() && r.ptr == c.data() + c.size() && std::isfinite(row[j]),
                    ErrorCode::parse,
                    where(source, line_no) + ", column " + std::to_string(j + 1) + " (" + table.columns[j] +
                        "): not a finite number: '" + std::string(c) + "'");
        }
        table.rows.push_back(std::move(row));
    }
    require(have_header, ErrorCode::parse, std::string(source) + ": no header row");
    return table;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    require(!in.bad(), ErrorCode::io, "cannot read " + path.string());
    return ss.str();
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text_file(path), path.string()); }

std::string format_csv(const CsvTable& table) {
    std::string out;
    for (const auto& c : table.comments) out += "# " + c + "\n";
    for (std::size_t j = 0; j < table.columns.size(); ++j) out += (j ? "," : "") + table.columns[j];
    out += "\n";
    for (const auto& r : table.rows) {
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j) out += ',';
            out += format_number(r[j]);
        }
        out += '\n';
    }
    return out;
}

TimeSeries timeseries_from_table(const CsvTable& table, Unit unit, double scale, std::string_view source) {
    require(table.columns.size() >= 2 && table.columns[0] == "t" && table.columns[1] == "value", ErrorCode::parse,
            std::string(source) + ": header must start with 't,value'");
    const std::size_t n = table.rows.size();
    require(n >= 2, ErrorCode::too_short, std::string(source) + ": a time series needs at least 2 rows");
    std::vector<double> steps(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        steps[i] = table.rows[i + 1][0] - table.rows[i][0];
        require(steps[i] > 0.0, ErrorCode::non_uniform,
                std::string(source) + ": time is not strictly increasing at data row " + std::to_string(i + 2));
    }
    std::vector<double> sorted = steps;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    double dt = sorted[sorted.size() / 2];
    if (sorted.size() % 2 == 0) {
        const double lower = *std::max_element(sorted.begin(), sorted.begin() + sorted.size() / 2);
        dt = 0.5 * (dt + lower);
    }
    for (std::size_t i = 0; i < steps.size(); ++i)
        require(std::abs(steps[i] - dt) <= 1e-6 * dt, ErrorCode::non_uniform,
                std::string(source) + ": sampling step at data row " + std::to_string(i + 2) +
                    " deviates from the median by more than 1e-6 relative");
    TimeSeries s{table.rows[0][0], dt, std::vector<double>(n), unit};
    for (std::size_t i = 0; i < n; ++i) s.values[i] = table.rows[i][1] * scale;
    return s;
}

TimeSeries load_timeseries_csv(const std::filesystem::path& path, Unit unit, double scale) {
    return timeseries_from_table(read_csv(path), unit, scale, path.string());
}

DriveSchedule drive_from_table(const CsvTable& table, std::string_view source) {
    const std::size_t fi = require_column(table, "f_hz", source);
    const std::size_t ui = require_column(table, "u_amp_v", source);
    require(table.rows.size() >= 1, ErrorCode::too_short, std::string(source) + ": empty drive schedule");
    DriveSchedule d;
    for (const auto& r : table.rows) d.points.push_back({r[fi], r[ui]});
    if (d.points.size() >= 2 && d.points[1].f_hz < d.points[0].f_hz) d.direction = SweepDirection::backward;
    d.validate();
    return d;
}

DriveSchedule load_drive_csv(const std::filesystem::path& path) {
    return drive_from_table(read_csv(path), path.string());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    OutputSet set;
    set.add(path, content);
    set.commit();
}

void OutputSet::add(std::filesystem::path path, std::string content) {
    files_.emplace_back(std::move(path), std::move(content));
}

void OutputSet::commit() {
    std::vector<std::filesystem::path> temps;
    auto discard = [&] {
        std::error_code ec;
        for (const auto& t : temps) std::filesystem::remove(t, ec);
    };
    for (const auto& [path, content] : files_) {
        std::filesystem::path tmp = path;
        tmp += ".partial";
        temps.push_back(tmp);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        out.close();
        if (!out) {
            discard();
            fail(ErrorCode::io, "cannot write " + path.string());
        }
    }
    for (std::size_t i = 0; i < files_.size(); ++i) {
        std::error_code ec;
        std::filesystem::rename(temps[i], files_[i].first, ec);
        if (ec) {
            discard();
            fail(ErrorCode::io, "cannot move output into place at " + files_[i].first.string() + ": " + ec.message());
        }
    }
    files_.clear();
}

} // namespace magspring
