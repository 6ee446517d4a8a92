#include "symdyn/decomposition.hpp"

#include <array>
#include <fstream>
#include <map>
#include <memory>
#include <set>

#include "symdyn/error.hpp"

namespace symdyn {

namespace {

using Segment = std::pair<Word, int>;

Segment prefix_segment(std::span<const Symbol> w, int n) { return {Word(w.begin(), w.begin() + n), n}; }

}  // namespace

CTDecomposition CTDecomposition::trivial() {
  CTDecomposition d;
  d.name = "trivial";
  d.split = [](std::span<const Symbol>, int n) { return Split{0, n, 0}; };
  d.config = {{"type", "trivial"}};
  return d;
}

CTDecomposition CTDecomposition::prefix_run(Symbol symbol, int cap) {
  if (cap < 0) throw ConfigError("prefix-run cap must be >= 0");
  CTDecomposition d;
  d.name = "prefix-run";
  d.p = SegmentClass::from_predicate("runs of " + std::to_string(symbol), [symbol](std::span<const Symbol> w, int n) {
    for (int i = 0; i < n; ++i) {
      if (w[i] != symbol) return false;
    }
    return true;
  });
  d.split = [symbol, cap](std::span<const Symbol> w, int n) {
    int run = 0;
    while (run < n && run < cap && w[run] == symbol) ++run;
    return Split{run, n - run, 0};
  };
  d.config = {{"type", "prefix-run"}, {"symbol", symbol}, {"cap", cap}};
  return d;
}

CTDecomposition CTDecomposition::p_all(int cap) {
  CTDecomposition d;
  d.name = "p-all";
  d.p = SegmentClass::all("P=all");
  d.split = [cap](std::span<const Symbol>, int n) {
    const int p = cap < 0 ? n : std::min(n, cap);
    return Split{p, n - p, 0};
  };
  d.config = {{"type", "p-all"}, {"cap", cap}};
  return d;
}

CTDecomposition CTDecomposition::table(const nlohmann::json& rows) {
  if (!rows.is_array()) throw ConfigError("decomposition table must be an array of rows");
  auto splits = std::make_shared<std::map<Segment, Split>>();
  auto pieces = std::make_shared<std::array<std::set<Segment>, 3>>();
  for (const auto& r : rows) {
    if (!r.is_object() || !r.contains("word") || !r.contains("p") || !r.contains("g") || !r.contains("s")) {
      throw ConfigError("decomposition table rows need word, p, g, s");
    }
    const Word w = word_from_string(r["word"].get<std::string>(), 256);
    const int n = r.value("n", static_cast<int>(w.size()));
    const Split sp{r["p"].get<int>(), r["g"].get<int>(), r["s"].get<int>()};
    if (sp.p < 0 || sp.g < 0 || sp.s < 0 || sp.p + sp.g + sp.s != n || n > static_cast<int>(w.size()) || n < 1) {
      throw ConfigError("decomposition table row " + r["word"].get<std::string>() + " has p+g+s != n");
    }
    (*splits)[{Word(w.begin(), w.begin() + n), n}] = sp;
    (*pieces)[0].insert({Word(w.begin(), w.begin() + sp.p), sp.p});
    (*pieces)[1].insert({Word(w.begin() + sp.p, w.begin() + sp.p + sp.g), sp.g});
    (*pieces)[2].insert({Word(w.begin() + sp.p + sp.g, w.begin() + n), sp.s});
  }
  auto member_of = [pieces](int which) {
    return [pieces, which](std::span<const Symbol> w, int n) {
      return (*pieces)[which].count(prefix_segment(w, n)) > 0;
    };
  };
  CTDecomposition d;
  d.name = "table";
  d.d = SegmentClass::from_predicate("table D", [splits](std::span<const Symbol> w, int n) {
    return splits->count(prefix_segment(w, n)) > 0;
  });
  d.p = SegmentClass::from_predicate("table P", member_of(0));
  d.g = SegmentClass::from_predicate("table G", member_of(1));
  d.s = SegmentClass::from_predicate("table S", member_of(2));
  d.split = [splits](std::span<const Symbol> w, int n) {
    const auto it = splits->find(prefix_segment(w, n));
    return it == splits->end() ? Split{0, n, 0} : it->second;
  };
  d.config = {{"type", "table"}, {"rows", rows}};
  return d;
}

CTDecomposition CTDecomposition::from_json(const nlohmann::json& j) {
  if (j.is_string()) return from_json(nlohmann::json{{"type", j}});
  if (!j.is_object() || !j.contains("type")) throw ConfigError("decomposition needs a \"type\" field");
  const auto type = j["type"].get<std::string>();
  try {
    if (type == "trivial") return trivial();
    if (type == "prefix-run") return prefix_run(j.at("symbol").get<Symbol>(), j.at("cap").get<int>());
    if (type == "p-all") return p_all(j.value("cap", -1));
    if (type == "table") return table(j.at("rows"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("decomposition \"" + type + "\": " + e.what());
  }
  throw ConfigError("unknown decomposition type \"" + type + "\" (expected trivial, prefix-run, p-all, table)");
}

CTDecomposition CTDecomposition::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open decomposition file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse decomposition file " + path + ": " + e.what());
  }
  return from_json(j);
}

bool CTDecomposition::split_valid(std::span<const Symbol> word, int n) const {
  if (!d.contains(word, n)) return true;
  const Split sp = split(word, n);
  if (sp.p < 0 || sp.g < 0 || sp.s < 0 || sp.p + sp.g + sp.s != n) return false;
  return p.contains(word, sp.p) && g.contains(word.subspan(static_cast<std::size_t>(sp.p)), sp.g) &&
         s.contains(word.subspan(static_cast<std::size_t>(sp.p + sp.g)), sp.s);
}

SegmentClass restrict_gm(const CTDecomposition& dec, int m) {
  if (m < 0) throw ConfigError("M must be >= 0");
  const std::string label = "G_" + std::to_string(m) + "(" + dec.name + ")";
  // Built-ins whose p and s never exceed M make the filter vacuous.
  if (dec.d.kind() == SegmentClass::Kind::kAll) {
    if (dec.name == "trivial") return SegmentClass::all(label);
    const int cap = dec.config.value("cap", -1);
    if ((dec.name == "prefix-run" || dec.name == "p-all") && cap >= 0 && cap <= m) return SegmentClass::all(label);
  }
  return SegmentClass::from_predicate(label, [dec, m](std::span<const Symbol> w, int n) {
    if (!dec.d.contains(w, n)) return false;
    const Split sp = dec.split(w, n);
    return sp.p <= m && sp.s <= m;
  });
}

}  // namespace symdyn
