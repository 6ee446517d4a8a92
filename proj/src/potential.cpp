#include "symdyn/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "symdyn/error.hpp"

namespace symdyn {

namespace {

constexpr std::size_t kMaxTableSize = 1u << 24;

std::size_t table_size(int alphabet, int memory) {
  std::size_t size = 1;
  for (int i = 0; i < memory; ++i) {
    size *= static_cast<std::size_t>(alphabet);
    if (size > kMaxTableSize) throw ConfigError("potential memory too large for the alphabet");
  }
  return size;
}

}  // namespace

Potential::Potential(const ShiftSystem& sys, int memory, const std::map<Word, double>& table)
    : alphabet_size_(sys.alphabet_size()), memory_(memory) {
  if (memory < 1) throw ConfigError("potential memory must be >= 1");
  values_.assign(table_size(alphabet_size_, memory),
                 std::numeric_limits<double>::quiet_NaN());
  words_ = list_words(sys, memory, kMaxTableSize);

  std::vector<std::string> bad;
  for (const auto& [w, v] : table) {
    if (static_cast<int>(w.size()) != memory || !sys.admissible(w)) {
      bad.push_back(word_to_string(w));
      continue;
    }
    if (!std::isfinite(v)) throw ConfigError("potential value for " + word_to_string(w) + " is not finite");
    std::size_t code = 0;
    for (Symbol s : w) code = code * alphabet_size_ + s;
    values_[code] = v;
  }
  if (!bad.empty()) {
    std::string msg = "potential has entries for inadmissible or wrong-length words:";
    for (const auto& b : bad) msg += " " + b;
    throw ConfigError(msg);
  }
  std::vector<std::string> missing;
  for (const auto& w : words_) {
    if (std::isnan((*this)(w))) missing.push_back(word_to_string(w));
  }
  if (!missing.empty()) {
    std::string msg = "potential is missing admissible words:";
    for (const auto& m : missing) msg += " " + m;
    throw ConfigError(msg);
  }
  finish();
}

void Potential::finish() {
  min_ = std::numeric_limits<double>::infinity();
  max_ = -std::numeric_limits<double>::infinity();
  for (const auto& w : words_) {
    min_ = std::min(min_, (*this)(w));
    max_ = std::max(max_, (*this)(w));
  }
}

Potential Potential::constant(const ShiftSystem& sys, double c) {
  std::map<Word, double> table;
  for (int a = 0; a < sys.alphabet_size(); ++a) table[{static_cast<Symbol>(a)}] = c;
  return Potential(sys, 1, table);
}

Potential Potential::by_symbol(const ShiftSystem& sys, const std::vector<double>& values) {
  if (static_cast<int>(values.size()) != sys.alphabet_size()) {
    throw ConfigError("by_symbol potential needs one value per symbol");
  }
  std::map<Word, double> table;
  for (int a = 0; a < sys.alphabet_size(); ++a) table[{static_cast<Symbol>(a)}] = values[a];
  return Potential(sys, 1, table);
}

Potential Potential::shifted(double c) const {
  Potential out = *this;
  for (double& v : out.values_) {
    if (!std::isnan(v)) v += c;
  }
  out.finish();
  return out;
}

nlohmann::json Potential::to_json() const {
  nlohmann::json table = nlohmann::json::object();
  for (const auto& w : words_) table[word_to_string(w)] = (*this)(w);
  return {{"memory", memory_}, {"table", table}};
}

Potential Potential::from_json(const ShiftSystem& sys, const nlohmann::json& j) {
  if (j.is_object() && j.contains("constant")) {
    if (!j["constant"].is_number()) throw ConfigError("potential \"constant\" must be a number");
    const double c = j["constant"].get<double>();
    if (!std::isfinite(c)) throw ConfigError("potential constant is not finite");
    return constant(sys, c);
  }
  if (!j.is_object() || !j.contains("memory") || !j["memory"].is_number_integer()) {
    throw ConfigError("potential needs an integer \"memory\" field");
  }
  if (!j.contains("table") || !j["table"].is_object()) {
    throw ConfigError("potential needs a \"table\" object");
  }
  std::map<Word, double> table;
  for (const auto& [key, value] : j["table"].items()) {
    if (!value.is_number()) throw ConfigError("potential value for \"" + key + "\" is not a number");
    table[word_from_string(key, sys.alphabet_size())] = value.get<double>();
  }
  return Potential(sys, j["memory"].get<int>(), table);
}

Potential Potential::load(const ShiftSystem& sys, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open potential file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse potential file " + path + ": " + e.what());
  }
  return from_json(sys, j);
}

}  // namespace symdyn
