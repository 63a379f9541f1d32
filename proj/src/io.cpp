#include "ptycho/io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

namespace ptycho {

using nlohmann::json;

std::string fmt_real(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_grid_csv(std::ostream& os, const MeasurementGrid& y, const std::string& comment) {
  std::istringstream cs(comment);
  std::string line;
  while (std::getline(cs, line)) os << "# " << line << '\n';
  os << "ell,j,value\n";
  for (Index j = 0; j < y.D; ++j)
    for (Index l = 0; l < y.dBar; ++l) os << l << ',' << j + 1 << ',' << fmt_real(y.values(l, j)) << '\n';
}

MeasurementGrid read_grid_csv(std::istream& is) {
  std::string line;
  bool header = false;
  std::vector<std::tuple<Index, Index, double>> rows;
  Index L = 0, D = 0;
  Index lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "ell,j,value") throw ValidationError("measurement CSV: expected header 'ell,j,value'");
      header = true;
      continue;
    }
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
      throw ValidationError("measurement CSV: malformed row at line " + std::to_string(lineno));
    try {
      Index l = std::stoll(a), j = std::stoll(b);
      double v = std::stod(c);
      if (l < 0 || j < 1) throw std::out_of_range("index");
      rows.emplace_back(l, j - 1, v);
      L = std::max(L, l + 1);
      D = std::max(D, j);
    } catch (const std::exception&) {
      throw ValidationError("measurement CSV: bad value at line " + std::to_string(lineno));
    }
  }
  if (!header) throw ValidationError("measurement CSV: missing header");
  if (Index(rows.size()) != L * D) throw ValidationError("measurement CSV: grid is incomplete");
  MeasurementGrid y(L, D);
  for (auto [l, j, v] : rows) y.values(l, j) = v;
  return y;
}

std::string grid_to_json(const MeasurementGrid& y) {
  json j;
  j["dBar"] = y.dBar;
  j["D"] = y.D;
  j["ordering"] = "j*dBar+ell";
  std::vector<double> v(y.values.data(), y.values.data() + y.values.size());
  j["values"] = v;
  return j.dump(1);
}

MeasurementGrid grid_from_json(const std::string& text) {
  try {
    json j = json::parse(text);
    Index L = j.at("dBar").get<Index>(), D = j.at("D").get<Index>();
    auto v = j.at("values").get<std::vector<double>>();
    return MeasurementGrid::from_stacked(Eigen::Map<const RVec>(v.data(), Index(v.size())), L, D);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("measurement JSON: ") + e.what());
  }
}

namespace {

json cvec_json(const CVec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
  return a;
}

CVec cvec_from(const json& a) {
  CVec v(Index(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(Index(i)) = cplx(a[i].at(0).get<double>(), a[i].at(1).get<double>());
  return v;
}

}  // namespace

std::string banded_to_json(const BandedHermitian& X) {
  const auto& sp = X.spec();
  json j;
  j["d"] = sp.d;
  j["delta"] = sp.delta;
  j["s"] = sp.s;
  json dg = json::array();
  for (Index m = 0; m < sp.delta; ++m) dg.push_back(cvec_json(X.stored(m)));
  j["diagonals"] = dg;
  return j.dump(1);
}

BandedHermitian banded_from_json(const std::string& text) {
  try {
    json j = json::parse(text);
    BandSpec sp{j.at("d").get<Index>(), j.at("delta").get<Index>(), j.at("s").get<Index>()};
    std::vector<CVec> dg;
    for (const auto& a : j.at("diagonals")) dg.push_back(cvec_from(a));
    return BandedHermitian(sp, std::move(dg));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("banded JSON: ") + e.what());
  }
}

std::string family_to_json(const MaskFamily& f) {
  json j;
  j["d"] = f.d;
  j["delta"] = f.delta;
  j["D"] = f.D();
  j["kind"] = f.kind;
  json p = json::object();
  for (const auto& [k, v] : f.params) p[k] = v;
  if (f.fourier) {
    p["K"] = f.fourier->K;
    p["window"] = cvec_json(f.fourier->window.values);
  }
  j["params"] = p;
  json ms = json::array();
  for (const auto& m : f.masks) ms.push_back(cvec_json(m));
  j["masks"] = ms;
  return j.dump(1);
}

MaskFamily family_from_json(const std::string& text) {
  try {
    json j = json::parse(text);
    MaskFamily f;
    f.d = j.at("d").get<Index>();
    f.delta = j.at("delta").get<Index>();
    f.kind = j.value("kind", "custom");
    for (const auto& m : j.at("masks")) f.masks.push_back(cvec_from(m));
    if (j.contains("D") && j["D"].get<Index>() != f.D()) throw ValidationError("mask JSON: D disagrees with mask count");
    if (j.contains("params")) {
      const auto& p = j["params"];
      for (auto it = p.begin(); it != p.end(); ++it)
        if (it.value().is_number()) f.params[it.key()] = it.value().get<double>();
      if (p.contains("window") && p.contains("K")) {
        Mask w(f.d, f.delta, cvec_from(p["window"]));
        f.fourier = FourierStructure{w, p["K"].get<Index>()};
      }
    }
    f.validate();
    return f;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("mask JSON: ") + e.what());
  }
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

MaskFamily read_family_json(const std::string& path) { return family_from_json(slurp(path)); }

MeasurementGrid read_grid_file(const std::string& path) {
  std::string text = slurp(path);
  auto first = text.find_first_not_of(" \t\r\n");
  bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  if (is_json || (first != std::string::npos && text[first] == '{')) return grid_from_json(text);
  std::istringstream is(text);
  return read_grid_csv(is);
}

}  // namespace ptycho
