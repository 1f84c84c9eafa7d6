#pragma once

// Result tables and their CSV / line-delimited JSON renderings.
//
// CSV layout:
//   # mirrorless <version>
//   # workflow = <name>
//   # config_sha256 = <hex>
//   # wall_time_s = <seconds>          (optional)
//   # result.<key> = <value>           (workflow summaries, e.g. S_star)
//   #@ <canonical config line>         (one per line; re-runnable)
//   name,name,...
//   unit,unit,...
//   rows

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mirrorless::report {

struct Column {
    std::string name;
    std::string unit; // "1" for dimensionless
};

class ResultTable {
public:
    explicit ResultTable(std::vector<Column> columns);

    /// Throws std::invalid_argument unless the row matches the column count.
    void add_row(std::vector<double> row);

    /// Workflow summaries; values are preformatted strings.
    void add_result(std::string key, std::string value);
    void add_result(std::string key, double value);

    const std::vector<Column>& columns() const { return columns_; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }
    const std::vector<std::pair<std::string, std::string>>& results() const { return results_; }
    std::optional<std::string> result(std::string_view key) const;

private:
    std::vector<Column> columns_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::pair<std::string, std::string>> results_;
};

struct Provenance {
    std::string version;
    std::string workflow;
    std::string config;        // canonical config text
    std::string config_sha256; // of `config`
    std::optional<double> wall_time;
};

std::string sha256_hex(std::string_view data);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

void write_csv(std::ostream& out, const ResultTable& table, const Provenance& provenance);

/// First line holds the provenance, columns and results; then one object per row.
void write_json(std::ostream& out, const ResultTable& table, const Provenance& provenance);

/// Canonical config text recovered from the `#@ ` lines of a CSV file, or the
/// provenance line of a JSON file.
std::string embedded_config(std::istream& in);

} // namespace mirrorless::report
