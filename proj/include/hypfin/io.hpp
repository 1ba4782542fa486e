#pragma once

// File formats: the portfolio CSV, the per-year annotation CSV and the region
// mapping.

#include "hypfin/netinfer.hpp"

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace hypfin::io {

/// Portfolio CSV layout, as printed by `hypfin --help`.
inline constexpr const char *kPortfolioCsvSchema =
    "portfolio.csv: UTF-8 text (a leading byte-order mark is ignored), fields\n"
    "separated by ',' with no quoting, lines ending in LF or CRLF.\n"
    "  header: bank_id,<asset_id_1>,...,<asset_id_m>\n"
    "  rows:   <bank_id>,<value_1>,...,<value_m>   (one row per bank)\n"
    "Values are nonnegative EUR amounts written as plain decimals: digits with an\n"
    "optional '.' decimal point (e.g. 1250000 or 1250000.75). No sign, exponent,\n"
    "thousands separator or empty field. Bank and asset identifiers must be\n"
    "non-empty and unique. Asset ids conventionally read <country>_<bucket> with\n"
    "bucket in {0M-3M, 3M-2Y, 2Y-10Y+}.";

/// Throws SchemaError (with line and column) on any deviation from the schema.
netinfer::PortfolioMatrix read_portfolio_csv(std::istream &in);
netinfer::PortfolioMatrix read_portfolio_csv(const std::filesystem::path &path);

/// Writes the same layout back; values use the shortest round-trip form
/// without exponent.
void write_portfolio_csv(std::ostream &out, const netinfer::PortfolioMatrix &portfolio);

/// The nine regional groups plus the explicit "unassigned" marker.
inline constexpr const char *kUnassigned = "unassigned";
const std::vector<std::string> &region_names();

/// Country code (first two characters of a bank id) -> region name.
class RegionMap {
public:
  /// The nine groups: ES, DE, FR, IT, UK/IE, Nordic, Benelux, Southern,
  /// Central/Eastern.
  static RegionMap defaults();
  /// JSON object {"<region>": ["<country>", ...], ...}; regions must be known.
  static RegionMap from_json_file(const std::filesystem::path &path);
  static RegionMap from_json_text(const std::string &text);

  /// Region of a bank by its country prefix, or "unassigned".
  std::string region_of_bank(const std::string &bank_id) const;
  const std::map<std::string, std::string> &countries() const { return by_country_; }

private:
  std::map<std::string, std::string> by_country_;
};

struct NodeAnnotation {
  std::string bank_id;
  bool gsib = false;
  std::string region;
};

/// CSV with header `bank_id,gsib,region`. gsib accepts 1/0/true/false/yes/no;
/// an empty region is filled from `regions` via the bank id's country prefix.
std::vector<NodeAnnotation> read_annotations_csv(std::istream &in, const RegionMap &regions);
std::vector<NodeAnnotation> read_annotations_csv(const std::filesystem::path &path,
                                                 const RegionMap &regions);

} // namespace hypfin::io
