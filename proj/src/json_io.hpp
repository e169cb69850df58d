#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

#include "rainfall/carma.hpp"
#include "rainfall/diagnostics.hpp"
#include "rainfall/fit.hpp"
#include "rainfall/hougaard.hpp"
#include "rainfall/seasonality.hpp"
#include "rainfall/series.hpp"

namespace rainfall {

using Json = nlohmann::ordered_json;

Json to_json(const SeasonalityModel& model);
Json to_json(const CarmaSpec& spec);
Json to_json(const HougaardParams& params);
Json to_json(const FittedModel& model);
Json to_json(const SeriesSummary& summary);
Json to_json(const BootstrapResult& result);
Json summary_json(const EnsembleDiagnostics& diagnostics);

/// Parsers validate the component invariants and throw InvalidArgument with the
/// offending field named.
SeasonalityModel seasonality_from_json(const Json& j);
CarmaSpec carma_from_json(const Json& j, bool allow_negative_weights = false);
HougaardParams hougaard_from_json(const Json& j);
FittedModel model_from_json(const Json& j);
CsvFormat csv_format_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rainfall
