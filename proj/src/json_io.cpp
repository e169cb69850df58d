#include "json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "rainfall/error.hpp"

namespace rainfall {

namespace {

template <class T>
T field(const Json& j, const char* name) {
    if (!j.is_object() || !j.contains(name)) throw InvalidArgument(std::string("missing field '") + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw InvalidArgument(std::string("field '") + name + "' has the wrong type");
    }
}

template <class T>
T field_or(const Json& j, const char* name, T fallback) {
    if (!j.is_object() || !j.contains(name) || j.at(name).is_null()) return fallback;
    return field<T>(j, name);
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json to_json(const SeasonalityModel& model) {
    return Json{{"order", model.order}, {"a0", model.a0}, {"a", model.a}, {"b", model.b}};
}

Json to_json(const CarmaSpec& spec) {
    return Json{{"p", spec.p()}, {"lambdas", spec.lambdas}, {"weights", spec.weights}};
}

Json to_json(const HougaardParams& params) {
    return Json{{"mu", params.mu}, {"rho", params.rho}, {"kappa", params.kappa}};
}

Json to_json(const FittedModel& model) {
    const auto& d = model.diagnostics;
    return Json{
        {"seasonality", to_json(model.seasonality)},
        {"carma", to_json(model.carma)},
        {"hougaard", to_json(model.hougaard)},
        {"delta", model.delta},
        {"step_seconds", model.step.count()},
        {"unit", to_string(model.unit)},
        {"quantum", model.quantum},
        {"diagnostics",
         {{"prediction_error_sse", d.objective},
          {"initial_sse", d.initial_objective},
          {"objective_evaluations", d.evaluations},
          {"converged", d.converged},
          {"sample_moments",
           {{"mean", d.moments.mean}, {"variance", d.moments.variance}, {"third_central", d.moments.third_central}}},
          {"warnings", d.warnings}}},
    };
}

Json to_json(const SeriesSummary& s) {
    return Json{{"zero_proportion", s.zero_proportion},
                {"mean", s.mean},
                {"variance", s.variance},
                {"skewness", s.skewness},
                {"sample_acf", s.sample_acf}};
}

Json to_json(const BootstrapResult& result) {
    Json params = Json::array();
    for (const auto& p : result.parameters)
        params.push_back({{"name", p.name},
                          {"estimate", p.estimate},
                          {"lower", p.lower},
                          {"upper", p.upper},
                          {"replicates", p.replicates}});
    return Json{{"parameters", params}, {"failed_replicates", result.failed}, {"warnings", result.warnings}};
}

Json summary_json(const EnsembleDiagnostics& d) {
    Json acf = Json::array();
    for (const auto& r : d.acf)
        acf.push_back({{"lag", r.lag}, {"empirical", r.empirical}, {"theoretical", r.theoretical}, {"simulated", r.simulated}});
    Json monthly = Json::array();
    for (const auto& r : d.monthly)
        monthly.push_back({{"month", r.month},
                           {"empirical", number_or_null(r.empirical)},
                           {"fitted", r.fitted},
                           {"simulated", number_or_null(r.simulated)}});
    return Json{{"zero_proportion", {{"data", d.empirical_zero_proportion},
                                     {"simulation_average", d.simulated_zero_proportion},
                                     {"per_simulation", d.zero_proportions}}},
                {"acf", acf},
                {"monthly_means", monthly}};
}

SeasonalityModel seasonality_from_json(const Json& j) {
    SeasonalityModel m;
    m.order = field<int>(j, "order");
    m.a0 = field<double>(j, "a0");
    m.a = field_or<std::vector<double>>(j, "a", {});
    m.b = field_or<std::vector<double>>(j, "b", {});
    m.check();
    return m;
}

CarmaSpec carma_from_json(const Json& j, bool allow_negative_weights) {
    auto lambdas = field<std::vector<double>>(j, "lambdas");
    auto weights = field<std::vector<double>>(j, "weights");
    if (j.contains("p") && field<int>(j, "p") != static_cast<int>(lambdas.size()))
        throw InvalidArgument("field 'p' disagrees with the number of lambdas");
    return CarmaSpec::make(std::move(lambdas), std::move(weights), allow_negative_weights);
}

HougaardParams hougaard_from_json(const Json& j) {
    HougaardParams p{field<double>(j, "mu"), field<double>(j, "rho"), field<double>(j, "kappa")};
    p.check();
    return p;
}

FittedModel model_from_json(const Json& j) {
    FittedModel m;
    m.seasonality = j.contains("seasonality") ? seasonality_from_json(j.at("seasonality")) : SeasonalityModel{};
    if (!j.contains("carma")) throw InvalidArgument("missing field 'carma'");
    m.carma = carma_from_json(j.at("carma"), field_or<bool>(j, "allow_negative_weights", false));
    if (!j.contains("hougaard")) throw InvalidArgument("missing field 'hougaard'");
    m.hougaard = hougaard_from_json(j.at("hougaard"));
    m.delta = field_or<double>(j, "delta", 1.0);
    if (!(m.delta > 0.0)) throw InvalidArgument("field 'delta' must be positive");
    m.step = Duration(field_or<long long>(j, "step_seconds", 86400));
    if (m.step <= Duration::zero()) throw InvalidArgument("field 'step_seconds' must be positive");
    m.unit = unit_from_string(field_or<std::string>(j, "unit", "mm"));
    m.quantum = field_or<double>(j, "quantum", 0.1);
    if (!(m.quantum > 0.0)) throw InvalidArgument("field 'quantum' must be positive");
    return m;
}

CsvFormat csv_format_from_json(const Json& j) {
    CsvFormat f;
    if (j.is_null()) return f;
    f.timestamp_column = field_or<std::string>(j, "timestamp_column", f.timestamp_column);
    f.value_column = field_or<std::string>(j, "value_column", f.value_column);
    f.unit = unit_from_string(field_or<std::string>(j, "unit", to_string(f.unit)));
    f.quantum = field_or<double>(j, "quantum", f.quantum);
    const auto gaps = field_or<std::string>(j, "gaps", "strict");
    if (gaps == "strict") {
        f.gaps = GapPolicy::strict;
    } else if (gaps == "zero_fill") {
        f.gaps = GapPolicy::zero_fill;
    } else {
        throw InvalidArgument("field 'gaps' must be 'strict' or 'zero_fill'");
    }
    f.raw = field_or<bool>(j, "raw", false);
    if (j.contains("step_seconds")) f.step = Duration(field<long long>(j, "step_seconds"));
    return f;
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace rainfall
