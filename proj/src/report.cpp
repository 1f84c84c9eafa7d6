#include "mirrorless/report.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <memory>
#include <stdexcept>

namespace mirrorless::report {

ResultTable::ResultTable(std::vector<Column> columns) : columns_(std::move(columns))
{
    for (const auto& c : columns_)
        if (c.name.empty() || c.unit.empty())
            throw std::invalid_argument("every column needs a name and a unit");
}

void ResultTable::add_row(std::vector<double> row)
{
    if (row.size() != columns_.size())
        throw std::invalid_argument("row has " + std::to_string(row.size()) + " values for " +
                                    std::to_string(columns_.size()) + " columns");
    rows_.push_back(std::move(row));
}

void ResultTable::add_result(std::string key, std::string value) { results_.emplace_back(std::move(key), std::move(value)); }

void ResultTable::add_result(std::string key, double value) { add_result(std::move(key), format_double(value)); }

std::optional<std::string> ResultTable::result(std::string_view key) const
{
    for (const auto& [k, v] : results_)
        if (k == key)
            return v;
    return std::nullopt;
}

std::string sha256_hex(std::string_view data)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string format_double(double v)
{
    std::array<char, 32> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), r.ptr);
}

void write_csv(std::ostream& out, const ResultTable& table, const Provenance& p)
{
    out << "# mirrorless " << p.version << "\n";
    out << "# workflow = " << p.workflow << "\n";
    out << "# config_sha256 = " << p.config_sha256 << "\n";
    if (p.wall_time)
        out << "# wall_time_s = " << format_double(*p.wall_time) << "\n";
    for (const auto& [k, v] : table.results())
        out << "# result." << k << " = " << v << "\n";
    std::size_t start = 0;
    while (start < p.config.size()) {
        auto end = p.config.find('\n', start);
        if (end == std::string::npos)
            end = p.config.size();
        out << "#@ " << std::string_view(p.config).substr(start, end - start) << "\n";
        start = end + 1;
    }

    const auto& cols = table.columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i].name;
    out << "\n";
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i].unit;
    out << "\n";
    for (const auto& row : table.rows()) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
}

void write_json(std::ostream& out, const ResultTable& table, const Provenance& p)
{
    using nlohmann::ordered_json;
    ordered_json head;
    head["version"] = p.version;
    head["workflow"] = p.workflow;
    head["config_sha256"] = p.config_sha256;
    if (p.wall_time)
        head["wall_time_s"] = *p.wall_time;
    head["config"] = p.config;
    ordered_json cols = ordered_json::array();
    for (const auto& c : table.columns())
        cols.push_back({{"name", c.name}, {"unit", c.unit}});
    head["columns"] = cols;
    ordered_json results = ordered_json::object();
    for (const auto& [k, v] : table.results())
        results[k] = v;
    head["results"] = results;
    out << ordered_json{{"provenance", head}}.dump() << "\n";

    for (const auto& row : table.rows()) {
        ordered_json r;
        for (std::size_t i = 0; i < row.size(); ++i)
            r[table.columns()[i].name] = row[i];
        out << r.dump() << "\n";
    }
}

std::string embedded_config(std::istream& in)
{
    std::string line, config;
    bool json = false;
    while (std::getline(in, line)) {
        if (line.starts_with("{\"provenance\"")) {
            json = true;
            config = nlohmann::json::parse(line).at("provenance").at("config").get<std::string>();
            break;
        }
        if (line.starts_with("#@ "))
            config += line.substr(3) + "\n";
        else if (line == "#@")
            config += "\n";
        else if (!line.starts_with("#"))
            break;
    }
    if (config.empty() && !json)
        throw std::runtime_error("no embedded config found");
    return config;
}

} // namespace mirrorless::report
