#include "hypfin/io.hpp"

#include "hypfin/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hypfin::io {

namespace {

std::vector<std::string> split_fields(const std::string &line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

struct Line {
  std::size_t number;
  std::string text;
};

// Reads all lines, stripping CR, a leading BOM and trailing blank lines.
std::vector<Line> read_lines(std::istream &in) {
  std::vector<Line> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (!text.empty() && text.back() == '\r')
      text.pop_back();
    if (number == 1 && text.rfind("\xEF\xBB\xBF", 0) == 0)
      text.erase(0, 3);
    lines.push_back({number, text});
  }
  while (!lines.empty() && lines.back().text.empty())
    lines.pop_back();
  return lines;
}

bool is_plain_decimal(const std::string &s) {
  bool digits = false;
  bool dot = false;
  for (char c : s) {
    if (c >= '0' && c <= '9') {
      digits = true;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digits;
}

double parse_value(const std::string &field, std::size_t line, std::size_t column) {
  if (!is_plain_decimal(field))
    throw SchemaError("expected a nonnegative plain decimal, got '" + field + "'", line, column);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value,
                                         std::chars_format::fixed);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value))
    throw SchemaError("unparseable number '" + field + "'", line, column);
  return value;
}

void check_identifier(const std::string &id, std::size_t line, std::size_t column) {
  if (id.empty())
    throw SchemaError("empty identifier", line, column);
  if (id.front() == '"')
    throw SchemaError("quoted fields are not supported", line, column);
}

std::ifstream open_input(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

} // namespace

netinfer::PortfolioMatrix read_portfolio_csv(std::istream &in) {
  const std::vector<Line> lines = read_lines(in);
  if (lines.empty())
    throw SchemaError("empty portfolio file", 1, 0);

  const auto header = split_fields(lines.front().text);
  if (header.front() != "bank_id")
    throw SchemaError("first header field must be 'bank_id'", 1, 1);
  if (header.size() < 2)
    throw SchemaError("header lists no asset columns", 1, 0);

  netinfer::PortfolioMatrix p;
  std::set<std::string> seen;
  for (std::size_t c = 1; c < header.size(); ++c) {
    check_identifier(header[c], 1, c + 1);
    if (!seen.insert(header[c]).second)
      throw SchemaError("duplicate asset id '" + header[c] + "'", 1, c + 1);
    p.assets.push_back(header[c]);
  }

  const auto m = p.assets.size();
  std::vector<double> values;
  seen.clear();
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto &line = lines[r];
    const auto fields = split_fields(line.text);
    if (fields.size() != m + 1)
      throw SchemaError("expected " + std::to_string(m + 1) + " fields, found " +
                            std::to_string(fields.size()),
                        line.number, fields.size() < m + 1 ? fields.size() + 1 : m + 2);
    check_identifier(fields[0], line.number, 1);
    if (!seen.insert(fields[0]).second)
      throw SchemaError("duplicate bank id '" + fields[0] + "'", line.number, 1);
    p.banks.push_back(fields[0]);
    for (std::size_t c = 1; c <= m; ++c)
      values.push_back(parse_value(fields[c], line.number, c + 1));
  }
  if (p.banks.size() < 2)
    throw SchemaError("portfolio needs at least 2 bank rows", lines.back().number, 0);

  p.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(p.banks.size()), static_cast<Eigen::Index>(m));
  return p;
}

netinfer::PortfolioMatrix read_portfolio_csv(const std::filesystem::path &path) {
  auto in = open_input(path);
  return read_portfolio_csv(in);
}

void write_portfolio_csv(std::ostream &out, const netinfer::PortfolioMatrix &portfolio) {
  out << "bank_id";
  for (const auto &a : portfolio.assets)
    out << ',' << a;
  out << '\n';
  char buf[400];
  for (std::size_t i = 0; i < portfolio.banks.size(); ++i) {
    out << portfolio.banks[i];
    for (Eigen::Index k = 0; k < portfolio.values.cols(); ++k) {
      const auto res = std::to_chars(buf, buf + sizeof buf,
                                     portfolio.values(static_cast<Eigen::Index>(i), k),
                                     std::chars_format::fixed);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

const std::vector<std::string> &region_names() {
  static const std::vector<std::string> names = {
      "ES", "DE", "FR", "IT", "UK/IE", "Nordic", "Benelux", "Southern", "Central/Eastern"};
  return names;
}

RegionMap RegionMap::defaults() {
  // Same content as data/regions.json.
  return from_json_text(R"({
    "ES": ["ES"],
    "DE": ["DE"],
    "FR": ["FR"],
    "IT": ["IT"],
    "UK/IE": ["UK", "IE"],
    "Nordic": ["EE", "NO", "SE", "DK", "FI", "IS"],
    "Benelux": ["BE", "NE", "NL", "LU"],
    "Southern": ["GR", "CY", "MT", "PT"],
    "Central/Eastern": ["AT", "BG", "HU", "LV", "RO", "SI"]
  })");
}

RegionMap RegionMap::from_json_text(const std::string &text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw SchemaError(std::string("region map: ") + e.what());
  }
  if (!doc.is_object())
    throw SchemaError("region map must be a JSON object");

  const auto &known = region_names();
  RegionMap map;
  for (const auto &[region, countries] : doc.items()) {
    if (std::find(known.begin(), known.end(), region) == known.end())
      throw SchemaError("region map: unknown region '" + region + "'");
    if (!countries.is_array())
      throw SchemaError("region map: '" + region + "' must list country codes");
    for (const auto &c : countries) {
      if (!c.is_string())
        throw SchemaError("region map: country codes must be strings");
      if (!map.by_country_.emplace(c.get<std::string>(), region).second)
        throw SchemaError("region map: country '" + c.get<std::string>() +
                          "' assigned twice");
    }
  }
  return map;
}

RegionMap RegionMap::from_json_file(const std::filesystem::path &path) {
  auto in = open_input(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string RegionMap::region_of_bank(const std::string &bank_id) const {
  const auto it = by_country_.find(bank_id.substr(0, 2));
  return it == by_country_.end() ? kUnassigned : it->second;
}

std::vector<NodeAnnotation> read_annotations_csv(std::istream &in, const RegionMap &regions) {
  const std::vector<Line> lines = read_lines(in);
  if (lines.empty() || lines.front().text != "bank_id,gsib,region")
    throw SchemaError("annotation header must be 'bank_id,gsib,region'", 1, 1);

  const auto &known = region_names();
  std::vector<NodeAnnotation> out;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_fields(lines[r].text);
    const auto line = lines[r].number;
    if (fields.size() != 3)
      throw SchemaError("expected 3 fields, found " + std::to_string(fields.size()), line, 0);
    check_identifier(fields[0], line, 1);
    if (!seen.insert(fields[0]).second)
      throw SchemaError("duplicate bank id '" + fields[0] + "'", line, 1);

    NodeAnnotation a;
    a.bank_id = fields[0];
    std::string flag = fields[1];
    std::transform(flag.begin(), flag.end(), flag.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (flag == "1" || flag == "true" || flag == "yes")
      a.gsib = true;
    else if (flag == "0" || flag == "false" || flag == "no")
      a.gsib = false;
    else
      throw SchemaError("gsib must be one of 1/0/true/false/yes/no, got '" + fields[1] + "'",
                        line, 2);

    if (fields[2].empty()) {
      a.region = regions.region_of_bank(a.bank_id);
    } else if (fields[2] == kUnassigned ||
               std::find(known.begin(), known.end(), fields[2]) != known.end()) {
      a.region = fields[2];
    } else {
      throw SchemaError("unknown region '" + fields[2] + "'", line, 3);
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<NodeAnnotation> read_annotations_csv(const std::filesystem::path &path,
                                                 const RegionMap &regions) {
  auto in = open_input(path);
  return read_annotations_csv(in, regions);
}

} // namespace hypfin::io
