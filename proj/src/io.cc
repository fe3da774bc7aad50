#include "footstep/io.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "footstep/errors.h"

namespace footstep::io {

using nlohmann::json;

namespace {

std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ExpectWord(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word)
    throw FormatError("map header: expected '" + word + "', got '" + got + "'");
}

double ReadNumber(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok)) throw FormatError(std::string("map: missing ") + what);
  if (tok == "nan" || tok == "NaN") return std::numeric_limits<double>::quiet_NaN();
  try {
    size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw FormatError(std::string("map: bad ") + what + " '" + tok + "'");
  }
}

}  // namespace

void WriteMap(std::ostream& out, const ElevationMap& map) {
  out << "FSMAP 1\n";
  out << "size " << map.width() << ' ' << map.height() << '\n';
  out << "resolution " << Num(map.resolution) << '\n';
  out << "origin " << Num(map.origin.x()) << ' ' << Num(map.origin.y()) << '\n';
  for (int j = 0; j < map.height(); ++j) {
    for (int i = 0; i < map.width(); ++i) {
      if (i) out << ' ';
      out << (map.valid(i, j) ? Num(map.heights(i, j)) : "nan");
    }
    out << '\n';
  }
}

ElevationMap ReadMap(std::istream& in) {
  ExpectWord(in, "FSMAP");
  ExpectWord(in, "1");
  ExpectWord(in, "size");
  const double w = ReadNumber(in, "width"), h = ReadNumber(in, "height");
  if (!(w >= 1 && h >= 1 && w == std::floor(w) && h == std::floor(h) && w * h <= 1e8))
    throw FormatError("map: size must be two positive integers");
  ExpectWord(in, "resolution");
  const double res = ReadNumber(in, "resolution");
  if (!(res > 0)) throw FormatError("map: resolution must be positive");
  ExpectWord(in, "origin");
  const double ox = ReadNumber(in, "origin x"), oy = ReadNumber(in, "origin y");
  if (std::isnan(ox) || std::isnan(oy)) throw FormatError("map: origin must be finite");

  ElevationMap map;
  map.origin = {ox, oy};
  map.resolution = res;
  map.heights.resize(static_cast<int>(w), static_cast<int>(h));
  map.valid.resize(static_cast<int>(w), static_cast<int>(h));
  for (int j = 0; j < map.height(); ++j)
    for (int i = 0; i < map.width(); ++i) {
      const double z = ReadNumber(in, "height value");
      map.heights(i, j) = z;
      map.valid(i, j) = !std::isnan(z);
    }
  std::string extra;
  if (in >> extra) throw FormatError("map: trailing data '" + extra + "'");
  return map;
}

ElevationMap LoadMap(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open map file " + path);
  return ReadMap(in);
}

void SaveMap(const std::string& path, const ElevationMap& map) {
  std::ostringstream out;
  WriteMap(out, map);
  WriteFile(path, out.str());
}

void WritePgm(std::ostream& out, const MaskGrid& mask) {
  const int w = static_cast<int>(mask.rows()), h = static_cast<int>(mask.cols());
  out << "P5\n" << w << ' ' << h << "\n255\n";
  std::string row(w, '\0');
  for (int r = 0; r < h; ++r) {
    const int j = h - 1 - r;
    for (int i = 0; i < w; ++i) row[i] = mask(i, j) ? char(255) : char(0);
    out.write(row.data(), w);
  }
}

namespace {

// PGM header token, skipping '#' comments.
int PgmInt(std::istream& in) {
  in >> std::ws;
  while (in.peek() == '#') {
    std::string skip;
    std::getline(in, skip);
    in >> std::ws;
  }
  int v = -1;
  if (!(in >> v) || v < 0) throw FormatError("pgm: bad header");
  return v;
}

}  // namespace

MaskGrid ReadPgm(std::istream& in) {
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P2") throw FormatError("pgm: expected P5 or P2, got '" + magic + "'");
  const int w = PgmInt(in), h = PgmInt(in), maxval = PgmInt(in);
  if (w < 1 || h < 1 || maxval < 1 || maxval > 255) throw FormatError("pgm: unsupported size or depth");
  MaskGrid mask(w, h);
  if (magic == "P5") {
    in.get();  // single whitespace after maxval
    std::string row(w, '\0');
    for (int r = 0; r < h; ++r) {
      if (!in.read(row.data(), w)) throw FormatError("pgm: truncated pixel data");
      for (int i = 0; i < w; ++i) mask(i, h - 1 - r) = row[i] != 0;
    }
  } else {
    for (int r = 0; r < h; ++r)
      for (int i = 0; i < w; ++i) {
        int v = -1;
        if (!(in >> v) || v < 0 || v > maxval) throw FormatError("pgm: bad pixel value");
        mask(i, h - 1 - r) = v != 0;
      }
  }
  return mask;
}

MaskGrid LoadPgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open mask file " + path);
  return ReadPgm(in);
}

json FootholdsJson(const std::vector<FootholdPolygon>& footholds) {
  json arr = json::array();
  for (const auto& f : footholds) {
    json j;
    j["id"] = f.id;
    json verts = json::array();
    for (const auto& v : f.vertices) verts.push_back({v.x(), v.y()});
    j["vertices"] = verts;
    json F = json::array();
    for (int r = 0; r < f.F.rows(); ++r) F.push_back({f.F(r, 0), f.F(r, 1)});
    j["F"] = F;
    j["c"] = std::vector<double>(f.c.data(), f.c.data() + f.c.size());
    j["f"] = {f.f.x(), f.f.y(), f.f.z()};
    j["b"] = f.b;
    j["area"] = f.Area();
    arr.push_back(j);
  }
  return arr;
}

std::vector<FootholdPolygon> ParseFootholds(const json& j) {
  if (!j.is_array()) throw FormatError("footholds: expected an array");
  std::vector<FootholdPolygon> out;
  try {
    for (const auto& e : j) {
      Vertices2d verts;
      for (const auto& v : e.at("vertices")) verts.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
      const auto& f = e.at("f");
      out.push_back(FootholdPolygon::FromVertices(
          verts, Eigen::Vector3d(f.at(0).get<double>(), f.at(1).get<double>(), f.at(2).get<double>()),
          e.at("b").get<double>(), e.at("id").get<int>()));
    }
  } catch (const json::exception& ex) {
    throw FormatError(std::string("footholds: ") + ex.what());
  }
  return out;
}

std::string CriteriaCsv(const ElevationMap& map, const s3::Segmentation& seg) {
  std::string out = "i,j,x,y,z,curvature,inclination,score,safe\n";
  char buf[256];
  for (int j = 0; j < map.height(); ++j)
    for (int i = 0; i < map.width(); ++i) {
      const Eigen::Vector2d c = map.CellCenter(i, j);
      std::snprintf(buf, sizeof buf, "%d,%d,%.4f,%.4f,%.6f,%.6f,%.6f,%.6f,%d\n", i, j, c.x(), c.y(),
                    map.heights(i, j), seg.curvature(i, j), seg.inclination(i, j), seg.score(i, j),
                    seg.mask.safe(i, j) ? 1 : 0);
      out += buf;
    }
  return out;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string Fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

}  // namespace

std::string SuccessRateSvg(const sim::ExperimentResult& result) {
  const double W = 640, H = 420, L = 70, R = 180, T = 30, B = 60;
  double lo = 1e9, hi = -1e9;
  for (const auto& r : result.rows) lo = std::min(lo, r.d_min), hi = std::max(hi, r.d_min);
  if (!(hi > lo)) lo -= 0.05, hi += 0.05;
  auto X = [&](double d) { return L + (d - lo) / (hi - lo) * (W - L - R); };
  auto Y = [&](double rate) { return H - B - rate * (H - T - B); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = Y(k / 4.0);
    s << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << y << "\" y2=\"" << y
      << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << L - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
      << Fmt("%.2f", k / 4.0) << "</text>\n";
  }
  std::set<double> ds;
  for (const auto& r : result.rows) ds.insert(r.d_min);
  for (double d : ds)
    s << "<text x=\"" << X(d) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
      << Fmt("%.2f", d) << "</text>\n";
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15
    << "\" text-anchor=\"middle\">d_min (m)</text>\n";
  s << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 18 " << (T + H - B) / 2
    << ")\" text-anchor=\"middle\">success rate</text>\n";

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> lines;
  for (const auto& r : result.rows) {
    const std::string name = sim::ToString(r.mode);
    if (!lines.count(name)) order.push_back(name);
    lines[name].emplace_back(r.d_min, r.rate);
  }
  for (size_t m = 0; m < order.size(); ++m) {
    auto pts = lines[order[m]];
    std::sort(pts.begin(), pts.end());
    const char* color = kPalette[m % 6];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [d, rate] : pts) s << X(d) << ',' << Y(rate) << ' ';
    s << "\"/>\n";
    for (const auto& [d, rate] : pts)
      s << "<circle cx=\"" << X(d) << "\" cy=\"" << Y(rate) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = T + 20 * m;
    s << "<line x1=\"" << W - R + 15 << "\" x2=\"" << W - R + 40 << "\" y1=\"" << ly << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << W - R + 46 << "\" y=\"" << ly + 4 << "\">" << order[m] << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string EpisodeSvg(const sim::SimResult& result, const terrain::TerrainModel& model) {
  Eigen::AlignedBox2d box;
  for (const auto& s : result.samples) box.extend(s.com);
  for (const auto& f : result.footsteps) box.extend(Eigen::Vector2d(f.realized.head<2>()));
  if (box.isEmpty()) box.extend(Eigen::Vector2d(0, 0));
  box.min() -= Eigen::Vector2d(0.5, 0.5);
  box.max() += Eigen::Vector2d(0.5, 0.5);
  const double scale = 200.0;
  const Eigen::Vector2d span = box.sizes() * scale;
  auto PX = [&](const Eigen::Vector2d& p) { return Fmt("%.1f", (p.x() - box.min().x()) * scale); };
  auto PY = [&](const Eigen::Vector2d& p) { return Fmt("%.1f", (box.max().y() - p.y()) * scale); };
  auto P = [&](const Eigen::Vector2d& p) { return PX(p) + "," + PY(p); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << span.x() << "\" height=\"" << span.y()
    << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& f : model.Footholds()) {
    if (!f.BoundingBox().intersects(box)) continue;
    s << "<polygon fill=\"#cfd8dc\" stroke=\"#607d8b\" points=\"";
    for (const auto& v : f.vertices) s << P(v) << ' ';
    s << "\"/>\n";
  }
  s << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (size_t k = 0; k < result.samples.size(); k += 10) s << P(result.samples[k].com) << ' ';
  s << "\"/>\n";
  for (const auto& f : result.footsteps) {
    const char* color = !f.supported ? "#d62728" : f.stance == alip::Stance::kLeft ? "#2ca02c" : "#ff7f0e";
    const Eigen::Vector2d p = f.realized.head<2>();
    s << "<circle cx=\"" << PX(p) << "\" cy=\"" << PY(p) << "\" r=\"4\" fill=\"" << color << "\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

// ---------------------------------------------------------------------------
// Config

namespace {

// Reads keys out of one JSON object and remembers which ones were used, so
// anything left over can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParameterError(Where() + " must be an object");
  }

  bool Has(const std::string& key) {
    if (!j_.contains(key)) return false;
    used_.insert(key);
    return true;
  }
  const json& At(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }
  std::string Where(const std::string& key = "") const {
    std::string p = path_.empty() ? "config" : path_;
    return key.empty() ? p : p + "." + key;
  }

  void Read(const std::string& key, double& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ParameterError(Where(key) + " must be a number");
    out = v.get<double>();
  }
  void Read(const std::string& key, int& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ParameterError(Where(key) + " must be an integer");
    out = v.get<int>();
  }
  void Read(const std::string& key, std::uint64_t& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
      throw ParameterError(Where(key) + " must be a non-negative integer");
    out = v.get<std::uint64_t>();
  }
  void Read(const std::string& key, bool& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ParameterError(Where(key) + " must be true or false");
    out = v.get<bool>();
  }
  template <int N>
  void Read(const std::string& key, Eigen::Matrix<double, N, 1>& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array() || static_cast<int>(v.size()) != N)
      throw ParameterError(Where(key) + " must be an array of " + std::to_string(N) + " numbers");
    for (int i = 0; i < N; ++i) {
      if (!v[i].is_number()) throw ParameterError(Where(key) + " must hold numbers");
      out(i) = v[i].get<double>();
    }
  }
  template <int N>
  void ReadDiag(const std::string& key, Eigen::Matrix<double, N, N>& out) {
    Eigen::Matrix<double, N, 1> d = out.diagonal();
    Read(key, d);
    out = d.asDiagonal();
  }

  void Finish() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.count(key)) throw ParameterError("unknown key " + Where(key));
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

alip::ResetMode ParseResetMode(const std::string& s) {
  for (auto m : {alip::ResetMode::kLinearRamp, alip::ResetMode::kInstantaneous,
                 alip::ResetMode::kMixedCassie})
    if (s == alip::ToString(m)) return m;
  throw ParameterError("unknown reset_mode '" + s + "'");
}

template <int N>
json Arr(const Eigen::Matrix<double, N, 1>& v) {
  return std::vector<double>(v.data(), v.data() + N);
}

}  // namespace

terrain::TerrainSpec ParseTerrain(const json& j) {
  Section sec(j, "terrain");
  terrain::TerrainSpec spec;
  std::string type = "flat";
  if (sec.Has("type")) {
    if (!j.at("type").is_string()) throw ParameterError("terrain.type must be a string");
    type = j.at("type").get<std::string>();
  }
  sec.Read("seed", spec.seed);
  if (type == "flat") {
    spec.variant = terrain::Flat{};
  } else if (type == "stairs") {
    terrain::Stairs s;
    sec.Read("rise", s.rise);
    sec.Read("depth", s.depth);
    sec.Read("count", s.count);
    spec.variant = s;
  } else if (type == "beam") {
    terrain::Beam b;
    sec.Read("width", b.width);
    spec.variant = b;
  } else if (type == "stepping_stones") {
    terrain::SteppingStones s;
    sec.Read("d_min", s.d_min);
    sec.Read("platforms", s.platforms);
    spec.variant = s;
  } else if (type == "sinusoid") {
    terrain::Sinusoid s;
    sec.Read("amplitude", s.amplitude);
    sec.Read("period", s.period);
    spec.variant = s;
  } else {
    throw ParameterError("unknown terrain.type '" + type + "'");
  }
  sec.Finish();
  spec.Validate();
  return spec;
}

json TerrainJson(const terrain::TerrainSpec& spec) {
  json j;
  j["type"] = terrain::VariantName(spec.variant);
  j["seed"] = spec.seed;
  std::visit(
      [&](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, terrain::Stairs>) {
          j["rise"] = v.rise;
          j["depth"] = v.depth;
          j["count"] = v.count;
        } else if constexpr (std::is_same_v<V, terrain::Beam>) {
          j["width"] = v.width;
        } else if constexpr (std::is_same_v<V, terrain::SteppingStones>) {
          j["d_min"] = v.d_min;
          j["platforms"] = v.platforms;
        } else if constexpr (std::is_same_v<V, terrain::Sinusoid>) {
          j["amplitude"] = v.amplitude;
          j["period"] = v.period;
        }
      },
      spec.variant);
  return j;
}

RunConfig ParseConfig(const json& j) {
  RunConfig cfg;
  Section top(j, "");
  auto& sim = cfg.sim;
  auto& mpfc = sim.mpfc;

  if (top.Has("alip")) {
    Section s(j.at("alip"), "alip");
    s.Read("m", mpfc.alip.m);
    s.Read("H", mpfc.alip.H);
    s.Read("g", mpfc.alip.g);
    s.Read("T_ss", mpfc.alip.T_ss);
    s.Read("T_ds", mpfc.alip.T_ds);
    if (s.Has("reset_mode")) {
      if (!j["alip"]["reset_mode"].is_string()) throw ParameterError("alip.reset_mode must be a string");
      mpfc.reset_mode = ParseResetMode(j["alip"]["reset_mode"].get<std::string>());
    }
    s.Finish();
  }
  if (top.Has("mpfc")) {
    Section s(j.at("mpfc"), "mpfc");
    s.Read("N", mpfc.N);
    s.Read("t_min", mpfc.t_min);
    s.Read("t_max", mpfc.t_max);
    s.Read("v_des", mpfc.v_des);
    s.Read("step_width", mpfc.step_width);
    s.ReadDiag("Q", mpfc.Q);
    s.ReadDiag("Q_N", mpfc.Q_N);
    s.ReadDiag("R", mpfc.R);
    s.Read("w_T", mpfc.w_T);
    s.Read("w_u", mpfc.w_u);
    s.Read("u_max", mpfc.u_max);
    s.Read("com_limit", mpfc.com_limit);
    s.Read("com_penalty", mpfc.com_penalty);
    s.Read("big_m", mpfc.big_m);
    s.Read("trust_region_rate", mpfc.trust_region_rate);
    s.Read("foothold_radius", mpfc.foothold_radius);
    s.Read("max_footholds", mpfc.max_footholds);
    s.Read("crossover_margin", mpfc.crossover_margin);
    s.Read("use_relaxation_bounds", mpfc.use_relaxation_bounds);
    s.Finish();
  }
  if (top.Has("s3")) {
    Section s(j.at("s3"), "s3");
    s.Read("k_hyst", sim.s3.k_hyst);
    s.Read("k_safe", sim.s3.k_safe);
    s.Read("sigma_log", sim.s3.sigma_log);
    s.Read("alpha_c", sim.s3.alpha_c);
    s.Read("inc_kernel", sim.s3.inc_kernel);
    s.Read("margin_kernel", sim.s3.margin_kernel);
    s.Finish();
  }
  if (top.Has("decomp")) {
    Section s(j.at("decomp"), "decomp");
    s.Read("concavity", sim.decomp.concavity);
    s.Read("min_area", sim.decomp.min_area);
    s.Finish();
  }
  if (top.Has("sim")) {
    Section s(j.at("sim"), "sim");
    s.Read("duration", sim.duration);
    s.Read("dt", sim.dt);
    s.Read("control_rate", sim.control_rate);
    s.Read("perception_rate", sim.perception_rate);
    s.Read("map_size", sim.map_size);
    s.Read("map_resolution", sim.map_resolution);
    s.Read("map_noise", sim.map_noise);
    s.Read("touchdown_noise", sim.touchdown_noise);
    s.Read("swing_clearance", sim.swing_clearance);
    s.Read("fall_limit", sim.fall_limit);
    s.Read("stall_limit", sim.stall_limit);
    s.Read("start_x", sim.start_x);
    s.Read("initial_offset", sim.initial_offset);
    s.Finish();
  }
  if (top.Has("terrain")) cfg.terrain = ParseTerrain(j.at("terrain"));
  if (top.Has("experiment")) {
    Section s(j.at("experiment"), "experiment");
    auto& e = cfg.experiment;
    if (s.Has("sweep")) {
      const json& v = j["experiment"]["sweep"];
      if (v.is_string()) {
        e.d_min = sim::ParseSweep(v.get<std::string>());
      } else if (v.is_array() && !v.empty()) {
        e.d_min.clear();
        for (const auto& d : v) {
          if (!d.is_number()) throw ParameterError("experiment.sweep must hold numbers");
          e.d_min.push_back(d.get<double>());
        }
      } else {
        throw ParameterError("experiment.sweep must be \"lo:hi:step\" or an array of numbers");
      }
    }
    s.Read("trials", e.trials);
    s.Read("seed", e.seed);
    s.Read("flat_override", e.flat_override);
    if (s.Has("modes")) {
      const json& v = j["experiment"]["modes"];
      if (!v.is_array() || v.empty()) throw ParameterError("experiment.modes must be a non-empty array");
      e.modes.clear();
      for (const auto& m : v) {
        if (!m.is_string()) throw ParameterError("experiment.modes must hold strings");
        e.modes.push_back(sim::ParseMode(m.get<std::string>()));
      }
    }
    s.Finish();
  }
  top.Finish();

  sim.Validate();
  cfg.experiment.sim = sim;
  cfg.experiment.Validate();
  return cfg;
}

json ConfigJson(const RunConfig& cfg) {
  const auto& sim = cfg.sim;
  const auto& mpfc = sim.mpfc;
  json j;
  j["alip"] = {{"m", mpfc.alip.m},
               {"H", mpfc.alip.H},
               {"g", mpfc.alip.g},
               {"T_ss", mpfc.alip.T_ss},
               {"T_ds", mpfc.alip.T_ds},
               {"reset_mode", alip::ToString(mpfc.reset_mode)}};
  j["mpfc"] = {{"N", mpfc.N},
               {"t_min", mpfc.t_min},
               {"t_max", mpfc.t_max},
               {"v_des", Arr<2>(mpfc.v_des)},
               {"step_width", mpfc.step_width},
               {"Q", Arr<4>(mpfc.Q.diagonal())},
               {"Q_N", Arr<4>(mpfc.Q_N.diagonal())},
               {"R", Arr<3>(mpfc.R.diagonal())},
               {"w_T", mpfc.w_T},
               {"w_u", mpfc.w_u},
               {"u_max", mpfc.u_max},
               {"com_limit", mpfc.com_limit},
               {"com_penalty", mpfc.com_penalty},
               {"big_m", mpfc.big_m},
               {"trust_region_rate", mpfc.trust_region_rate},
               {"foothold_radius", mpfc.foothold_radius},
               {"max_footholds", mpfc.max_footholds},
               {"crossover_margin", mpfc.crossover_margin},
               {"use_relaxation_bounds", mpfc.use_relaxation_bounds}};
  j["s3"] = {{"k_hyst", sim.s3.k_hyst},         {"k_safe", sim.s3.k_safe},
             {"sigma_log", sim.s3.sigma_log},   {"alpha_c", sim.s3.alpha_c},
             {"inc_kernel", sim.s3.inc_kernel}, {"margin_kernel", sim.s3.margin_kernel}};
  j["decomp"] = {{"concavity", sim.decomp.concavity}, {"min_area", sim.decomp.min_area}};
  j["sim"] = {{"duration", sim.duration},
              {"dt", sim.dt},
              {"control_rate", sim.control_rate},
              {"perception_rate", sim.perception_rate},
              {"map_size", sim.map_size},
              {"map_resolution", sim.map_resolution},
              {"map_noise", sim.map_noise},
              {"touchdown_noise", sim.touchdown_noise},
              {"swing_clearance", sim.swing_clearance},
              {"fall_limit", sim.fall_limit},
              {"stall_limit", sim.stall_limit},
              {"start_x", sim.start_x},
              {"initial_offset", Arr<4>(sim.initial_offset)}};
  j["terrain"] = TerrainJson(cfg.terrain);
  json modes = json::array();
  for (const auto& m : cfg.experiment.modes) modes.push_back(sim::ToString(m));
  j["experiment"] = {{"sweep", cfg.experiment.d_min},
                     {"trials", cfg.experiment.trials},
                     {"seed", cfg.experiment.seed},
                     {"flat_override", cfg.experiment.flat_override},
                     {"modes", modes}};
  return j;
}

RunConfig LoadConfig(const std::string& path) {
  json j;
  try {
    j = json::parse(ReadFile(path));
  } catch (const json::parse_error& e) {
    throw FormatError("config " + path + ": " + e.what());
  }
  return ParseConfig(j);
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << contents;
  if (!out) throw FormatError("write failed for " + path);
}

}  // namespace footstep::io
