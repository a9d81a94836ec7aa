#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ntnpos/channel.hpp"
#include "ntnpos/checksum.hpp"
#include "ntnpos/errors.hpp"

namespace ntnpos {

namespace {

// S-band large-scale parameters for satellite links, asset version 1.
const std::map<std::string, std::string> kPinned = {
    {"dense_urban_clutter_loss.csv", "7c43100ed80ae1ca2d458f8b2a695f8ddbff0e76529f03fdfc3c7447a27a57d8"},
    {"dense_urban_los_probability.csv", "43412876a22029d925d4a060ea80d8ab8cb13037a4b505b3ea431196468d92ff"},
    {"dense_urban_sf_sigma_los.csv", "73770ad8b523dd4c33e3ee98779e5e75695df3299003f387866659578145dba7"},
    {"dense_urban_sf_sigma_nlos.csv", "d0ff18b6ecffe3b1013de3e82d7f69e0239f37c371995cdd21f8dde2f6b5b84e"},
    {"suburban_rural_clutter_loss.csv", "614f278d43351ed23dd46c9f1484e398999847139165c7849d692fe395807f43"},
    {"suburban_rural_los_probability.csv", "fb9164bdf8b56c18aae4913ee7ed786f2b862c8469949925f20248ba7b608ace"},
    {"suburban_rural_sf_sigma_los.csv", "a4be9e961afd7030eb0a92e16c8bc4f9b7c273aeb27dd4d7afcdaba52e109920"},
    {"suburban_rural_sf_sigma_nlos.csv", "88e9185533ff998ac2f9bcea7c66a0866a6bc38d4d007f5acf61d735f591f429"},
    {"urban_clutter_loss.csv", "7c43100ed80ae1ca2d458f8b2a695f8ddbff0e76529f03fdfc3c7447a27a57d8"},
    {"urban_los_probability.csv", "a696f00078ff2958b034838049988280dbf5ed8c67eb0263fba01d7f40cba8e4"},
    {"urban_sf_sigma_los.csv", "265afcd312f8bef29c906c80a8811108c73628b8846c35bfbb6bf9f809c63675"},
    {"urban_sf_sigma_nlos.csv", "2011f3955af7b2ef4cbef72c4fbe5d275107070c1ca714334563e41603fcb814"},
};

constexpr const char* kClassPrefix[] = {"dense_urban", "urban", "suburban_rural"};

ElevationTable readTable(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open channel table " + path.string());

    std::string line;
    if (!std::getline(in, line) || line.rfind("elevation_deg,value", 0) != 0) {
        throw std::runtime_error(path.string() + ": expected header 'elevation_deg,value'");
    }
    ElevationTable table;
    int lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty() || line == "\r") continue;
        std::istringstream row(line);
        std::string elev, value;
        if (!std::getline(row, elev, ',') || !std::getline(row, value)) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineNo) + ": malformed row");
        }
        try {
            table.elevationsDeg.push_back(std::stod(elev));
            table.values.push_back(std::stod(value));
        } catch (const std::exception&) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineNo) + ": non-numeric field");
        }
    }
    if (table.values.size() < 2) throw std::runtime_error(path.string() + ": need at least two rows");
    for (std::size_t i = 1; i < table.elevationsDeg.size(); ++i) {
        if (!(table.elevationsDeg[i] > table.elevationsDeg[i - 1])) {
            throw std::runtime_error(path.string() + ": elevations must be strictly increasing");
        }
    }
    return table;
}

}  // namespace

const std::map<std::string, std::string>& ChannelTables::pinnedChecksums() { return kPinned; }

const std::filesystem::path& ChannelTables::defaultDirectory() {
    static const std::filesystem::path dir{NTNPOS_DEFAULT_ASSET_DIR};
    return dir;
}

ChannelTables ChannelTables::load(const std::filesystem::path& dir) {
    ChannelTables tables;
    tables.dir_ = dir;
    for (std::size_t c = 0; c < 3; ++c) {
        auto read = [&](const char* quantity) {
            const std::string name = std::string(kClassPrefix[c]) + "_" + quantity + ".csv";
            const auto path = dir / name;
            ElevationTable t = readTable(path);
            const std::string digest = sha256File(path);
            tables.checksums_[name] = digest;
            const auto pinned = kPinned.find(name);
            if (pinned == kPinned.end() || pinned->second != digest) tables.mismatches_.push_back(name);
            return t;
        };
        ClassTables& ct = tables.classes_[c];
        ct.losProbability = read("los_probability");
        ct.sigmaLos = read("sf_sigma_los");
        ct.sigmaNlos = read("sf_sigma_nlos");
        ct.clutterLoss = read("clutter_loss");

        const auto& p = ct.losProbability.values;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] < 0.0 || p[i] > 1.0) throw std::runtime_error("LOS probability outside [0, 1] for " + std::string(kClassPrefix[c]));
            if (i > 0 && p[i] < p[i - 1]) {
                throw std::runtime_error("LOS probability must be non-decreasing in elevation for " +
                                         std::string(kClassPrefix[c]));
            }
        }
        for (const ElevationTable* t : {&ct.sigmaLos, &ct.sigmaNlos, &ct.clutterLoss}) {
            for (double v : t->values) {
                if (v < 0.0) throw std::runtime_error("negative shadowing/clutter entry for " + std::string(kClassPrefix[c]));
            }
        }
    }
    return tables;
}

double ChannelTables::losProbability(ScenarioClass c, double elevation) const {
    return forClass(c).losProbability.at(elevation);
}

ShadowingParams ChannelTables::shadowing(ScenarioClass c, double elevation, bool los) const {
    const ClassTables& t = forClass(c);
    if (los) return {t.sigmaLos.at(elevation), 0.0};
    return {t.sigmaNlos.at(elevation), t.clutterLoss.at(elevation)};
}

}  // namespace ntnpos
