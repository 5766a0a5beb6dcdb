#include <fstream>

#include "fcm/io.hpp"
#include "fcm/network.hpp"
#include "fcm/scenario.hpp"

namespace fcm {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ValidationError(where + ": missing \"" + key + "\"");
  return obj.at(key);
}

std::array<double, kPhaseCount> phase_triple(const json& obj, const char* key, const std::string& where) {
  const auto& arr = require(obj, key, where);
  if (!arr.is_array() || arr.size() != kPhaseCount)
    throw ValidationError(where + ": \"" + key + "\" must list one value per phase (a, b, c)");
  std::array<double, kPhaseCount> out{};
  for (std::size_t i = 0; i < kPhaseCount; ++i) {
    if (!arr[i].is_number()) throw ValidationError(where + ": \"" + key + "\" entries must be numbers");
    out[i] = arr[i].get<double>();
  }
  return out;
}

LineImpedance impedance_from(const json& obj, const std::string& where) {
  return LineImpedance{phase_triple(obj, "r", where), phase_triple(obj, "x", where)};
}

SyntheticConverterSpec synthetic_from(const json& obj) {
  SyntheticConverterSpec spec;
  spec.seed = obj.value("seed", spec.seed);
  spec.switching_length = obj.value("switching_length", spec.switching_length);
  spec.series_r = obj.value("series_r", spec.series_r);
  spec.series_x = obj.value("series_x", spec.series_x);
  spec.dc_r = obj.value("dc_r", spec.dc_r);
  spec.dc_cap_x = obj.value("dc_cap_x", spec.dc_cap_x);
  spec.normalize = obj.value("normalize", spec.normalize);
  return spec;
}

Fcm converter_fcm(const json& c, const HarmonicConfig& cfg, const NetworkBuildOptions& options, const std::string& where) {
  if (c.contains("load")) return load_fcm(cfg, impedance_from(c.at("load"), where + ".load"));
  const auto& payload = require(c, "fcm", where);
  if (payload.contains("synthetic")) return synth_converter_fcm(synthetic_from(payload.at("synthetic")), cfg);
  if (payload.contains("file")) {
    std::filesystem::path file = payload.at("file").get<std::string>();
    if (file.is_relative()) file = options.base_dir / file;
    const auto m = io::read_matrix_file(file);
    if (m.K != cfg.K) throw ValidationError(where + ": FCM file has K = " + std::to_string(m.K) + ", network uses " + std::to_string(cfg.K));
    return Fcm(m.matrix);
  }
  throw ValidationError(where + ": \"fcm\" must hold \"synthetic\" or \"file\"");
}

}  // namespace

HarmonicNetwork build_network(const nlohmann::json& doc, const NetworkBuildOptions& options) {
  try {
    if (!doc.is_object()) throw ValidationError("network document must be a JSON object");
    int K = options.default_K;
    if (doc.contains("K")) K = doc.at("K").get<int>();
    if (options.force_K >= 0) K = options.force_K;
    const HarmonicConfig cfg(K);

    std::vector<int> nodes = require(doc, "nodes", "network").get<std::vector<int>>();
    const int root = require(doc, "root", "network").get<int>();

    std::vector<Line> lines;
    const auto& jl = doc.value("lines", json::array());
    for (std::size_t i = 0; i < jl.size(); ++i) {
      const std::string where = "lines[" + std::to_string(i) + "]";
      Line line;
      line.from = require(jl[i], "from", where).get<int>();
      line.to = require(jl[i], "to", where).get<int>();
      line.impedance = impedance_from(jl[i], where);
      lines.push_back(line);
    }

    std::vector<Converter> converters;
    const auto& jc = doc.value("converters", json::array());
    for (std::size_t i = 0; i < jc.size(); ++i) {
      const std::string where = "converters[" + std::to_string(i) + "]";
      Converter conv;
      conv.name = jc[i].value("name", "C" + std::to_string(i + 1));
      conv.node = require(jc[i], "node", where).get<int>();
      conv.dc_current = jc[i].value("i_dc", 0.0);
      conv.fcm = converter_fcm(jc[i], cfg, options, where);
      converters.push_back(std::move(conv));
    }
    return HarmonicNetwork(cfg, std::move(nodes), root, std::move(lines), std::move(converters));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("network document: ") + e.what());
  }
}

HarmonicNetwork load_network(const std::filesystem::path& path, NetworkBuildOptions options) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open network document '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("network document '" + path.string() + "': " + e.what());
  }
  if (options.base_dir.empty()) options.base_dir = path.parent_path();
  return build_network(doc, options);
}

}  // namespace fcm
