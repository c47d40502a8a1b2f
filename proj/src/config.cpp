#include "blimp/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "blimp/csv.hpp"

namespace blimp {

namespace pt = boost::property_tree;

namespace {

pt::ptree read_tree(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open parameter file " + path.string());
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kConfigError, path.string() + ": " + e.message() + " (line " +
                                             std::to_string(e.line()) + ")");
  }
  return tree;
}

std::vector<double> parse_list(const std::string& text, const std::string& key,
                               const std::filesystem::path& path) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfigError,
                  path.string() + ": key '" + key + "' has a non-numeric entry '" + item + "'");
    }
  }
  return out;
}

class Section {
 public:
  Section(const pt::ptree& tree, const std::string& name, const std::filesystem::path& path)
      : path_(path), name_(name) {
    auto child = tree.get_child_optional(name);
    if (!child) throw Error(ErrorCode::kConfigError, path.string() + ": missing section [" + name + "]");
    node_ = *child;
  }

  bool has(const std::string& key) const { return node_.get_child_optional(key).has_value(); }

  std::vector<double> list(const std::string& key, std::size_t n) const {
    auto v = node_.get_optional<std::string>(key);
    if (!v) {
      throw Error(ErrorCode::kConfigError,
                  path_.string() + ": missing key '" + key + "' in [" + name_ + "]");
    }
    auto vals = parse_list(*v, name_ + "." + key, path_);
    if (vals.size() != n) {
      throw Error(ErrorCode::kConfigError, path_.string() + ": key '" + name_ + "." + key +
                                               "' expects " + std::to_string(n) + " values, got " +
                                               std::to_string(vals.size()));
    }
    return vals;
  }

  double scalar(const std::string& key) const { return list(key, 1)[0]; }

  Vec3 vec3(const std::string& key) const {
    auto v = list(key, 3);
    return {v[0], v[1], v[2]};
  }

 private:
  pt::ptree node_;
  std::filesystem::path path_;
  std::string name_;
};

AeroModel read_aero(const pt::ptree& tree, const std::filesystem::path& path,
                    double default_area) {
  const Section s(tree, "aero", path);
  AeroModel m;
  for (Channel c : kAllChannels) {
    auto v = s.list(std::string("C") + channel_name(c), 3);
    m[c] = {v[0], v[1], v[2]};
  }
  m.K = s.vec3("K");
  m.A_ref = s.has("A_ref_m2") ? s.scalar("A_ref_m2") : default_area;
  if (s.has("alpha_stall_deg")) m.alpha_stall = deg_to_rad(s.scalar("alpha_stall_deg"));
  if (s.has("beta_limit_deg")) m.beta_limit = deg_to_rad(s.scalar("beta_limit_deg"));
  m.validate();
  return m;
}

std::string fmt3(const Vec3& v, double scale = 1.0) {
  return format_number(v.x() * scale) + ", " + format_number(v.y() * scale) + ", " +
         format_number(v.z() * scale);
}

void write_comment(std::ostream& out, const std::string& header) {
  std::stringstream ss(header);
  std::string line;
  while (std::getline(ss, line)) out << "# " << line << '\n';
}

void write_aero_section(std::ostream& out, const AeroModel& m) {
  out << "[aero]\n";
  for (Channel c : kAllChannels) {
    out << 'C' << channel_name(c) << " = " << format_number(m[c].c0) << ", "
        << format_number(m[c].calpha) << ", " << format_number(m[c].cbeta) << '\n';
  }
  out << "K = " << fmt3(m.K) << '\n';
  out << "A_ref_m2 = " << format_number(m.A_ref) << '\n';
  out << "alpha_stall_deg = " << format_number(rad_to_deg(m.alpha_stall)) << '\n';
  out << "beta_limit_deg = " << format_number(rad_to_deg(m.beta_limit)) << '\n';
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

}  // namespace

VehicleConfig load_vehicle_file(const std::filesystem::path& path) {
  const pt::ptree tree = read_tree(path);
  VehicleConfig cfg;
  VehicleParams& p = cfg.params;

  const Section mass(tree, "mass", path);
  p.m = mass.scalar("m_kg");
  p.mbar = mass.scalar("mbar_kg");
  auto in = mass.list("inertia_kgm2", 6);
  p.inertia << in[0], in[3], in[4],
               in[3], in[1], in[5],
               in[4], in[5], in[2];

  const Section env(tree, "environment", path);
  p.g = env.scalar("g_mps2");
  p.rho = env.scalar("rho_kgpm3");
  p.reynolds = env.has("reynolds") ? env.scalar("reynolds") : 0.0;
  // Buoyancy is recorded in gram-force, using the file's own g.
  p.B = mass.scalar("buoyancy_gf") * 1e-3 * p.g;

  const Section geo(tree, "geometry", path);
  p.r = geo.vec3("r_mm") * 1e-3;
  p.rbar0 = geo.vec3("rbar0_mm") * 1e-3;
  p.d = geo.scalar("d_mm") * 1e-3;
  p.V_He = geo.scalar("V_He_m3");
  if (geo.has("rail_limit_mm")) p.rail_limit = geo.scalar("rail_limit_mm") * 1e-3;
  p.A_ref = reference_area_from_volume(p.V_He);

  cfg.aero = read_aero(tree, path, p.A_ref);
  p.A_ref = cfg.aero.A_ref;
  p.validate();
  return cfg;
}

AeroModel load_aero_file(const std::filesystem::path& path, double default_area) {
  return read_aero(read_tree(path), path, default_area);
}

void write_vehicle_file(const std::filesystem::path& path, const VehicleConfig& cfg,
                        const std::string& header_comment) {
  const VehicleParams& p = cfg.params;
  auto out = open_out(path);
  write_comment(out, header_comment);
  out << "[mass]\n";
  out << "m_kg = " << format_number(p.m) << '\n';
  out << "mbar_kg = " << format_number(p.mbar) << '\n';
  out << "buoyancy_gf = " << format_number(p.B / p.g * 1e3) << '\n';
  out << "inertia_kgm2 = " << format_number(p.inertia(0, 0)) << ", "
      << format_number(p.inertia(1, 1)) << ", " << format_number(p.inertia(2, 2)) << ", "
      << format_number(p.inertia(0, 1)) << ", " << format_number(p.inertia(0, 2)) << ", "
      << format_number(p.inertia(1, 2)) << "\n\n";
  out << "[geometry]\n";
  out << "r_mm = " << fmt3(p.r, 1e3) << '\n';
  out << "rbar0_mm = " << fmt3(p.rbar0, 1e3) << '\n';
  out << "d_mm = " << format_number(p.d * 1e3) << '\n';
  out << "V_He_m3 = " << format_number(p.V_He) << '\n';
  out << "rail_limit_mm = " << format_number(p.rail_limit * 1e3) << "\n\n";
  out << "[environment]\n";
  out << "g_mps2 = " << format_number(p.g) << '\n';
  out << "rho_kgpm3 = " << format_number(p.rho) << '\n';
  out << "reynolds = " << format_number(p.reynolds) << "\n\n";
  write_aero_section(out, cfg.aero);
}

void write_aero_file(const std::filesystem::path& path, const AeroModel& model,
                     const std::string& header_comment) {
  auto out = open_out(path);
  write_comment(out, header_comment);
  write_aero_section(out, model);
}

}  // namespace blimp
