#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bdca/network.hpp"

namespace bdca {

using nlohmann::json;

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

int positive_int(const json& doc, const char* field) {
  if (!doc.contains(field)) throw SchemaError(std::string("missing field '") + field + "'");
  const json& v = doc.at(field);
  if (!v.is_number_integer() || v.get<long long>() <= 0)
    throw SchemaError(std::string("field '") + field + "': expected a positive integer");
  return v.get<int>();
}

std::vector<StoichEntry> read_entries(const json& doc, const char* field, int m, int n) {
  if (!doc.contains(field)) throw SchemaError(std::string("missing field '") + field + "'");
  const json& arr = doc.at(field);
  if (!arr.is_array()) throw SchemaError(std::string("field '") + field + "': expected an array of [i,j,v]");
  std::vector<StoichEntry> out;
  std::set<std::pair<int, int>> seen;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const json& t = arr[k];
    const std::string where = std::string("field '") + field + "' entry " + std::to_string(k);
    if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() || !t[1].is_number_integer() ||
        !t[2].is_number_integer())
      throw SchemaError(where + ": expected [species, reaction, value] integers");
    StoichEntry e{t[0].get<int>(), t[1].get<int>(), t[2].get<int>()};
    if (e.species < 0 || e.species >= m) throw SchemaError(where + ": species index out of range");
    if (e.reaction < 0 || e.reaction >= n) throw SchemaError(where + ": reaction index out of range");
    if (e.value < 0) throw SchemaError(where + ": negative stoichiometry");
    if (!seen.emplace(e.species, e.reaction).second) throw SchemaError(where + ": duplicate (species, reaction)");
    out.push_back(e);
  }
  return out;
}

json entries_json(const std::vector<StoichEntry>& entries) {
  json arr = json::array();
  for (const StoichEntry& e : entries) arr.push_back({e.species, e.reaction, e.value});
  return arr;
}

}  // namespace

ReactionNetwork network_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("JSON syntax error at line " + std::to_string(line_of_offset(text, e.byte)) + ": " +
                      e.what());
  }
  if (!doc.is_object()) throw SchemaError("model must be a JSON object");

  ReactionNetwork net;
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) throw SchemaError("field 'name': expected a string");
    net.name = doc.at("name").get<std::string>();
  }
  net.m = positive_int(doc, "m");
  net.n = positive_int(doc, "n");
  net.forward = read_entries(doc, "F", net.m, net.n);
  net.reverse = read_entries(doc, "R", net.m, net.n);

  if (!doc.contains("w")) throw SchemaError("missing field 'w'");
  const json& w = doc.at("w");
  if (!w.is_array()) throw SchemaError("field 'w': expected an array of numbers");
  if (w.size() != static_cast<std::size_t>(2 * net.n))
    throw SchemaError("field 'w': expected length 2n = " + std::to_string(2 * net.n) + ", got " +
                      std::to_string(w.size()));
  net.w.resize(2 * net.n);
  for (int i = 0; i < 2 * net.n; ++i) {
    if (!w[i].is_number()) throw SchemaError("field 'w' entry " + std::to_string(i) + ": expected a number");
    net.w[i] = w[i].get<double>();
  }
  return net;
}

std::string network_to_json_text(const ReactionNetwork& network) {
  json doc;
  doc["name"] = network.name;
  doc["m"] = network.m;
  doc["n"] = network.n;
  doc["F"] = entries_json(network.forward);
  doc["R"] = entries_json(network.reverse);
  doc["w"] = std::vector<double>(network.w.data(), network.w.data() + network.w.size());
  return doc.dump() + "\n";
}

ReactionNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return network_from_json_text(ss.str());
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void save_network(const ReactionNetwork& network, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  out << network_to_json_text(network);
  if (!out) throw std::runtime_error("failed writing model file: " + path);
}

}  // namespace bdca
