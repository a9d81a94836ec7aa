#include "ntnpos/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "ntnpos/checksum.hpp"
#include "ntnpos/errors.hpp"

namespace ntnpos {

namespace {

using nlohmann::json;

std::string join(const std::string& parent, std::string_view key) {
    return parent.empty() ? std::string(key) : parent + "." + std::string(key);
}

// Walks one JSON object, tracking which keys were consumed.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_, "expected an object");
    }

    const json* find(std::string_view key) {
        const auto it = obj_.find(std::string(key));
        if (it == obj_.end()) return nullptr;
        seen_.insert(std::string(key));
        return &*it;
    }

    std::string path(std::string_view key) const { return join(path_, key); }

    void number(std::string_view key, double& out, double scale = 1.0) {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw ConfigError(path(key), "expected a number");
            out = v->get<double>() * scale;
        }
    }

    template <typename Int>
    void integer(std::string_view key, Int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) throw ConfigError(path(key), "expected an integer");
            if (v->is_number_unsigned()) {
                out = static_cast<Int>(v->get<std::uint64_t>());
            } else {
                const auto x = v->get<std::int64_t>();
                if (x < 0 && std::is_unsigned_v<Int>) throw ConfigError(path(key), "must be non-negative");
                out = static_cast<Int>(x);
            }
        }
    }

    void boolean(std::string_view key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(path(key), "expected true or false");
            out = v->get<bool>();
        }
    }

    void string(std::string_view key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(path(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(path(it.key()), "unknown key");
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

void readLink(ObjectReader& parent, std::string_view key, LinkParams& p) {
    const json* v = parent.find(key);
    if (!v) return;
    ObjectReader r(*v, parent.path(key));
    r.number("carrier_hz", p.carrier);
    r.number("bandwidth_hz", p.bandwidth);
    r.number("eirp_dbw", p.eirpDbw);
    r.number("g_over_t_db_k", p.gOverTDbK);
    r.number("extra_loss_db", p.extraLossDb);
    r.number("cn0_db_hz", p.cn0DbHz);
    r.number("integration_time_s", p.integrationTime);
    r.finish();
}

json linkToJson(const LinkParams& p) {
    return json{{"carrier_hz", p.carrier},           {"bandwidth_hz", p.bandwidth},
                {"eirp_dbw", p.eirpDbw},             {"g_over_t_db_k", p.gOverTDbK},
                {"extra_loss_db", p.extraLossDb},    {"cn0_db_hz", p.cn0DbHz},
                {"integration_time_s", p.integrationTime}};
}

std::string_view antennaModelName(AntennaModel m) {
    return m == AntennaModel::BesselAperture ? "bessel" : "gaussian";
}

}  // namespace

ScenarioConfig parseConfig(const json& doc) {
    if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
    ObjectReader r(doc, "");

    std::string variantName;
    r.string("variant", variantName);
    if (variantName.empty()) throw ConfigError("variant", "required (single-leo, multi-leo, gnss-leo or gnss-only)");
    ScenarioConfig c;
    try {
        c = ScenarioConfig::defaults(variantFromString(variantName));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("variant", e.what());
    }

    r.number("leo_altitude_m", c.leoAltitude);
    r.number("gnss_altitude_m", c.gnssAltitude);
    if (const json* v = r.find("measurement_times_s")) {
        if (!v->is_array()) throw ConfigError(r.path("measurement_times_s"), "expected an array of numbers");
        c.measurementTimes.clear();
        for (const auto& t : *v) {
            if (!t.is_number()) throw ConfigError(r.path("measurement_times_s"), "expected an array of numbers");
            c.measurementTimes.push_back(t.get<double>());
        }
    }
    r.integer("n_virtual_anchors", c.virtualAnchors);
    if (const json* v = r.find("n_active_satellites")) {
        const json list = v->is_array() ? *v : json::array({*v});
        c.activeSatellites.clear();
        for (const auto& k : list) {
            if (!k.is_number_integer()) throw ConfigError(r.path("n_active_satellites"), "expected an integer or array");
            c.activeSatellites.push_back(k.get<int>());
        }
    }
    if (const json* v = r.find("rtt_augmentation")) {
        const json list = v->is_array() ? *v : json::array({*v});
        c.rttAugmentation.clear();
        for (const auto& b : list) {
            if (!b.is_boolean()) throw ConfigError(r.path("rtt_augmentation"), "expected a boolean or array");
            c.rttAugmentation.push_back(b.get<bool>());
        }
    }
    r.number("rtt_measurement_time_s", c.rttMeasurementTime);
    r.integer("n_ue_drops", c.ueDrops);
    r.integer("seed", c.seed);

    std::string scenarioClass(toString(c.scenarioClass));
    r.string("scenario_class", scenarioClass);
    try {
        c.scenarioClass = scenarioClassFromString(scenarioClass);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(r.path("scenario_class"), e.what());
    }
    r.boolean("los_only", c.losOnly);
    r.number("gnss_elevation_mask_deg", c.gnssElevationMask, deg2rad(1.0));
    r.number("tdoa_sync_error_m", c.tdoaSyncError);
    r.number("degenerate_threshold", c.degenerateThreshold);
    std::string assetDir = c.assetDir.string();
    r.string("asset_dir", assetDir);
    c.assetDir = assetDir;

    if (const json* v = r.find("coverage_center")) {
        ObjectReader cc(*v, "coverage_center");
        cc.number("lat_deg", c.coverageCenter.latitude, deg2rad(1.0));
        cc.number("lon_deg", c.coverageCenter.longitude, deg2rad(1.0));
        cc.finish();
    }
    if (const json* v = r.find("hex")) {
        ObjectReader hex(*v, "hex");
        hex.number("lon_gap_deg", c.hexLonGap, deg2rad(1.0));
        hex.number("lat_gap_deg", c.hexLatGap, deg2rad(1.0));
        hex.finish();
    }
    if (const json* v = r.find("antenna")) {
        ObjectReader a(*v, "antenna");
        a.number("peak_gain_dbi", c.links.pattern.peakGainDbi);
        a.number("beamwidth_deg", c.links.pattern.beamwidth, deg2rad(1.0));
        std::string model(antennaModelName(c.links.pattern.model));
        a.string("model", model);
        if (model == "bessel") {
            c.links.pattern.model = AntennaModel::BesselAperture;
        } else if (model == "gaussian") {
            c.links.pattern.model = AntennaModel::GaussianApprox;
        } else {
            throw ConfigError("antenna.model", "expected bessel or gaussian");
        }
        a.finish();
    }
    if (const json* v = r.find("links")) {
        ObjectReader l(*v, "links");
        l.number("processing_gain_db", c.links.processingGainDb);
        l.number("neighbor_penalty_db", c.links.neighborPenaltyDb);
        readLink(l, "leo_downlink", c.links.leoDownlink);
        readLink(l, "leo_uplink", c.links.leoUplink);
        readLink(l, "gnss_downlink", c.links.gnssDownlink);
        l.finish();
    }
    if (const json* v = r.find("validation")) {
        ObjectReader val(*v, "validation");
        val.integer("trials", c.validation.trials);
        val.number("snr_boost_db", c.validation.snrBoostDb);
        val.number("ue_offset_m", c.validation.ueOffset);
        val.number("ue_bearing_deg", c.validation.ueBearing, deg2rad(1.0));
        val.integer("n_active_satellites", c.validation.activeSatellites);
        val.boolean("rtt_augmentation", c.validation.rttAugmentation);
        val.finish();
    }
    r.finish();

    validateConfig(c);
    return c;
}

ScenarioConfig parseConfigText(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    return parseConfig(doc);
}

ScenarioConfig parseConfigFile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parseConfigText(buf.str());
}

json toJson(const ScenarioConfig& c) {
    json j;
    j["variant"] = std::string(toString(c.variant));
    j["leo_altitude_m"] = c.leoAltitude;
    j["gnss_altitude_m"] = c.gnssAltitude;
    j["measurement_times_s"] = c.measurementTimes;
    j["n_virtual_anchors"] = c.virtualAnchors;
    j["n_active_satellites"] = c.activeSatellites;
    j["rtt_augmentation"] = json::array();
    for (bool b : c.rttAugmentation) j["rtt_augmentation"].push_back(b);
    j["rtt_measurement_time_s"] = c.rttMeasurementTime;
    j["n_ue_drops"] = c.ueDrops;
    j["seed"] = c.seed;
    j["scenario_class"] = std::string(toString(c.scenarioClass));
    j["los_only"] = c.losOnly;
    j["gnss_elevation_mask_deg"] = rad2deg(c.gnssElevationMask);
    j["tdoa_sync_error_m"] = c.tdoaSyncError;
    j["degenerate_threshold"] = c.degenerateThreshold;
    j["asset_dir"] = c.assetDir.string();
    j["coverage_center"] = {{"lat_deg", rad2deg(c.coverageCenter.latitude)},
                            {"lon_deg", rad2deg(c.coverageCenter.longitude)}};
    j["hex"] = {{"lon_gap_deg", rad2deg(c.hexLonGap)}, {"lat_gap_deg", rad2deg(c.hexLatGap)}};
    j["antenna"] = {{"peak_gain_dbi", c.links.pattern.peakGainDbi},
                    {"beamwidth_deg", rad2deg(c.links.pattern.beamwidth)},
                    {"model", std::string(antennaModelName(c.links.pattern.model))}};
    j["links"] = {{"processing_gain_db", c.links.processingGainDb},
                  {"neighbor_penalty_db", c.links.neighborPenaltyDb},
                  {"leo_downlink", linkToJson(c.links.leoDownlink)},
                  {"leo_uplink", linkToJson(c.links.leoUplink)},
                  {"gnss_downlink", linkToJson(c.links.gnssDownlink)}};
    j["validation"] = {{"trials", c.validation.trials},
                       {"snr_boost_db", c.validation.snrBoostDb},
                       {"ue_offset_m", c.validation.ueOffset},
                       {"ue_bearing_deg", rad2deg(c.validation.ueBearing)},
                       {"n_active_satellites", c.validation.activeSatellites},
                       {"rtt_augmentation", c.validation.rttAugmentation}};
    return j;
}

std::string configHash(const ScenarioConfig& config) { return sha256Hex(toJson(config).dump()); }

}  // namespace ntnpos
