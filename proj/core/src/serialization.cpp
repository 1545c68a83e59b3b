#include "superrad/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "superrad/errors.hpp"

namespace superrad {

namespace {

Vec3 vec3_from(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ParseError(std::string(what) + " must be a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::string matrix_digest(const Eigen::MatrixXd& m) {
  std::ostringstream os;
  write_matrix_csv(os, m);
  return fnv1a_hex(os.str());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

ordered_json emitters_to_json(const EmitterArray& array) {
  ordered_json doc;
  doc["lambda0_nm"] = array.lambda0_nm();
  ordered_json list = ordered_json::array();
  for (std::size_t i = 0; i < array.size(); ++i) {
    ordered_json e;
    const auto& p = array.positions_nm()[i];
    const auto& d = array.dipoles()[i];
    e["pos_nm"] = {p[0], p[1], p[2]};
    e["dip"] = {d[0], d[1], d[2]};
    list.push_back(std::move(e));
  }
  doc["emitters"] = std::move(list);
  return doc;
}

EmitterArray emitters_from_json(const nlohmann::json& doc, bool allow_coincident) {
  try {
    std::vector<Vec3> pos;
    std::vector<Vec3> dip;
    for (const auto& e : doc.at("emitters")) {
      pos.push_back(vec3_from(e.at("pos_nm"), "pos_nm"));
      dip.push_back(vec3_from(e.at("dip"), "dip"));
    }
    return EmitterArray(std::move(pos), std::move(dip), doc.at("lambda0_nm").get<double>(),
                        allow_coincident);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("emitter JSON: ") + e.what());
  }
}

ordered_json lattice_to_json(const LatticeSpec& spec) {
  ordered_json j;
  j["n_side"] = spec.n_side;
  j["lattice_const_nm"] = spec.lattice_const_nm;
  j["offset_x0_nm"] = spec.offset_x0_nm;
  j["height_nm"] = spec.height_nm;
  j["dipole_axis"] = {spec.dipole_axis[0], spec.dipole_axis[1], spec.dipole_axis[2]};
  j["allow_coincident"] = spec.allow_coincident;
  return j;
}

LatticeSpec lattice_from_json(const nlohmann::json& doc, LatticeSpec spec) {
  if (doc.contains("n_side")) spec.n_side = doc["n_side"].get<int>();
  if (doc.contains("lattice_const_nm")) spec.lattice_const_nm = doc["lattice_const_nm"].get<double>();
  if (doc.contains("offset_x0_nm")) spec.offset_x0_nm = doc["offset_x0_nm"].get<double>();
  if (doc.contains("height_nm")) spec.height_nm = doc["height_nm"].get<double>();
  if (doc.contains("dipole_axis")) spec.dipole_axis = vec3_from(doc["dipole_axis"], "dipole_axis");
  if (doc.contains("allow_coincident")) spec.allow_coincident = doc["allow_coincident"].get<bool>();
  return spec;
}

ordered_json environment_to_json(const EnvironmentModel& model) {
  ordered_json j;
  j["type"] = environment_name(model);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SingleModeBIC>) {
          j["gamma"] = m.gamma;
          j["beta"] = m.beta;
        } else if constexpr (std::is_same_v<T, IdealDicke> || std::is_same_v<T, Independent>) {
          j["gamma"] = m.gamma;
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          j["n"] = m.decay.size();
          j["gamma_digest"] = matrix_digest(m.decay.rates());
          if (m.coupling) j["delta_digest"] = matrix_digest(m.coupling->shifts());
        }
      },
      model);
  return j;
}

EnvironmentModel environment_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  const auto type = doc.at("type").get<std::string>();
  const double gamma = doc.value("gamma", 1.0);
  if (type == "freespace") return FreeSpace{};
  if (type == "bic") return SingleModeBIC{gamma, doc.value("beta", 0.8179)};
  if (type == "dicke") return IdealDicke{gamma};
  if (type == "independent") return Independent{gamma};
  if (type == "tabulated") {
    std::filesystem::path path = doc.at("path").get<std::string>();
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    std::optional<std::filesystem::path> delta;
    if (doc.contains("delta_path")) {
      delta = doc["delta_path"].get<std::string>();
      if (delta->is_relative() && !base_dir.empty()) delta = base_dir / *delta;
    }
    auto imported = import_decay_matrix(path, delta);
    return Tabulated{std::move(imported.decay), std::move(imported.coupling)};
  }
  throw ParseError("unknown environment type '" + type + "'");
}

ordered_json mode_to_json(const DisorderMode& mode) {
  ordered_json j;
  j["type"] = mode_name(mode);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FillingMode>) {
          j["eta"] = m.eta;
        } else if constexpr (std::is_same_v<T, PositionMode>) {
          j["delta_r_nm"] = m.delta_r_nm;
          j["steps"] = m.steps;
        } else {
          j["delta_theta_deg"] = m.delta_theta_deg;
          j["steps"] = m.steps;
        }
      },
      mode);
  return j;
}

DisorderMode mode_from_json(const nlohmann::json& doc) {
  const auto type = doc.at("type").get<std::string>();
  if (type == "filling") return FillingMode{doc.value("eta", 1.0)};
  if (type == "position") return PositionMode{doc.value("delta_r_nm", 10.0), doc.value("steps", 50)};
  if (type == "orientation")
    return OrientationMode{doc.value("delta_theta_deg", 30.0), doc.value("steps", 100)};
  throw ParseError("unknown disorder mode '" + type + "'");
}

ordered_json config_to_json(const DisorderConfig& config) {
  ordered_json j;
  j["lattice"] = lattice_to_json(config.lattice);
  j["lambda0_nm"] = config.lambda0_nm;
  j["environment"] = environment_to_json(config.environment);
  j["mode"] = mode_to_json(config.mode);
  j["n_samples"] = config.n_samples;
  j["master_seed"] = config.master_seed;
  return j;
}

ordered_json distribution_to_json(const DisorderDistribution& dist, const DisorderConfig& config) {
  ordered_json j;
  j["config"] = config_to_json(config);
  j["config_hash"] = dist.config_hash;
  j["samples"] = dist.samples;
  j["mean"] = dist.stats.mean;
  j["std"] = dist.stats.std;
  if (dist.stats.skewness_defined)
    j["skewness"] = dist.stats.skewness;
  else
    j["skewness"] = nullptr;
  return j;
}

DisorderDistribution distribution_from_json(const nlohmann::json& doc) {
  try {
    DisorderDistribution d;
    d.samples = doc.at("samples").get<std::vector<double>>();
    d.stats.mean = doc.at("mean").get<double>();
    d.stats.std = doc.at("std").get<double>();
    d.stats.skewness_defined = !doc.at("skewness").is_null();
    d.stats.skewness = d.stats.skewness_defined ? doc["skewness"].get<double>() : std::nan("");
    d.config_hash = doc.value("config_hash", "");
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("distribution JSON: ") + e.what());
  }
}

void write_trace_csv(std::ostream& out, const RateTrace& trace) {
  const bool with_n = trace.excitation.has_value();
  out << (with_n ? "t,rate,n\n" : "t,rate\n");
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    out << format_double(trace.times[i]) << ',' << format_double(trace.rate[i]);
    if (with_n) out << ',' << format_double((*trace.excitation)[i]);
    out << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin_left,bin_right,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    out << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1]) << ',' << h.counts[i]
        << '\n';
}

void write_stats_csv(std::ostream& out, const SummaryStats& stats) {
  out << "mean,std,skewness\n"
      << format_double(stats.mean) << ',' << format_double(stats.std) << ','
      << (stats.skewness_defined ? format_double(stats.skewness) : std::string("nan")) << '\n';
}

std::vector<ReferenceRow> read_reference_table(std::istream& in) {
  std::vector<ReferenceRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_csv_line(line);
    if (header) {
      if (fields.size() != 4 || fields[1] != "mu" || fields[2] != "sigma" || fields[3] != "gamma")
        throw ParseError("reference table header must be 'noise,mu,sigma,gamma'");
      header = false;
      continue;
    }
    if (fields.size() != 4) throw ParseError("reference row needs four fields: " + line);
    try {
      rows.push_back({fields[0], {std::stod(fields[1]), std::stod(fields[2]), std::stod(fields[3]), true}});
    } catch (const std::exception&) {
      throw ParseError("bad number in reference row: " + line);
    }
  }
  if (header) throw ParseError("reference table is empty");
  return rows;
}

void write_reference_table(std::ostream& out, const std::vector<ReferenceRow>& rows) {
  out << "noise,mu,sigma,gamma\n";
  for (const auto& r : rows)
    out << r.label << ',' << format_double(r.stats.mean) << ',' << format_double(r.stats.std) << ','
        << format_double(r.stats.skewness) << '\n';
}

}  // namespace superrad
