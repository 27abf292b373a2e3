#ifndef PULSEFORGE_SCHEDULE_IO_HPP
#define PULSEFORGE_SCHEDULE_IO_HPP

// Schedule and trajectory files.
//
// Schedule CSV: `# key=value` header lines, then `t,tau,re_alpha,im_alpha`.
// Keys: delta, T, theta, gamma_final, n_samples, gate, branch, ansatz,
// theta_candidates, and optionally psi0 / target (four complex amplitudes
// written as `re:im` pairs separated by `;`). Numbers use 17 significant
// digits so a write/read cycle is lossless.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "propagator.hpp"

namespace pulseforge::io {

enum class Format { Csv, Json };

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidInput, "cannot parse " + what + ": '" + text + "'");
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used != text.size())
    throw Error(ErrorKind::InvalidInput, "trailing characters in " + what + ": '" + text + "'");
  return v;
}

inline std::string format_state(const Vector4c& c) {
  std::string out;
  for (int i = 0; i < 4; ++i) {
    if (i) out += ';';
    out += fmt(c(i).real()) + ":" + fmt(c(i).imag());
  }
  return out;
}

inline Vector4c parse_state(const std::string& text) {
  Vector4c c;
  std::stringstream ss(text);
  std::string item;
  int i = 0;
  while (std::getline(ss, item, ';')) {
    if (i >= 4) throw Error(ErrorKind::InvalidInput, "state has more than four amplitudes");
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw Error(ErrorKind::InvalidInput, "amplitude must be written re:im, got '" + item + "'");
    c(i++) = {parse_double(item.substr(0, colon), "amplitude"),
              parse_double(item.substr(colon + 1), "amplitude")};
  }
  if (i != 4) throw Error(ErrorKind::InvalidInput, "state needs four amplitudes");
  return c;
}

/// Writes `content` to a sibling temp file and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorKind::InvalidInput, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Schedules

namespace detail {

inline std::map<std::string, std::string> header_of(const ControlSchedule& s) {
  std::map<std::string, std::string> h;
  h["delta"] = fmt(s.params.delta);
  h["T"] = fmt(s.duration);
  h["theta"] = fmt(s.meta.theta);
  h["gamma_final"] = fmt(s.meta.gamma_final);
  h["n_samples"] = std::to_string(s.samples.size());
  h["gate"] = s.meta.gate;
  h["branch"] = s.meta.branch;
  h["ansatz"] = to_string(s.meta.family);
  std::string cands;
  for (double th : s.meta.theta_candidates) cands += (cands.empty() ? "" : ";") + fmt(th);
  if (!cands.empty()) h["theta_candidates"] = cands;
  if (s.meta.psi0) h["psi0"] = format_state(*s.meta.psi0);
  if (s.meta.target) h["target"] = format_state(*s.meta.target);
  return h;
}

/// Rebuilds a schedule from header keys and sample columns. File-loaded
/// schedules always integrate from their samples; the cosine-ramp metadata is
/// kept only so the analytic propagator can be compared against them.
inline ControlSchedule assemble(const std::map<std::string, std::string>& h,
                                std::vector<ControlSample> samples) {
  auto need = [&](const char* key) -> const std::string& {
    auto it = h.find(key);
    if (it == h.end())
      throw Error(ErrorKind::InvalidInput, std::string("schedule header lacks '") + key + "'");
    return it->second;
  };
  ControlSchedule s;
  s.params.delta = parse_double(need("delta"), "delta");
  s.duration = parse_double(need("T"), "T");
  s.samples = std::move(samples);
  if (auto it = h.find("n_samples"); it != h.end()) {
    if (parse_double(it->second, "n_samples") != static_cast<double>(s.samples.size()))
      throw Error(ErrorKind::InvalidInput, "n_samples does not match the number of rows");
  }
  if (auto it = h.find("gate"); it != h.end()) s.meta.gate = it->second;
  if (auto it = h.find("branch"); it != h.end()) s.meta.branch = it->second;
  if (auto it = h.find("psi0"); it != h.end()) s.meta.psi0 = parse_state(it->second);
  if (auto it = h.find("target"); it != h.end()) s.meta.target = parse_state(it->second);
  if (auto it = h.find("theta_candidates"); it != h.end()) {
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ';'))
      s.meta.theta_candidates.push_back(parse_double(item, "theta candidate"));
  }
  const bool has_theta = h.count("theta") && h.count("gamma_final");
  if (has_theta) {
    s.meta.theta = parse_double(h.at("theta"), "theta");
    s.meta.gamma_final = parse_double(h.at("gamma_final"), "gamma_final");
  }
  const auto ansatz = h.find("ansatz");
  if (ansatz != h.end() && ansatz->second == "sampled") {
    s.meta.family = AnsatzFamily::UserSampledGamma;
  } else if (ansatz != h.end() && ansatz->second != "cosine") {
    throw Error(ErrorKind::InvalidInput, "unknown ansatz '" + ansatz->second + "'");
  }
  if (has_theta && s.meta.family == AnsatzFamily::CosineRamp)
    s.profile = GammaProfile::cosine(s.meta.gamma_final);
  s.analytic_controls = false;
  validate_schedule(s);
  return s;
}

}  // namespace detail

inline std::string schedule_to_csv(const ControlSchedule& s) {
  std::string out;
  for (const auto& [k, v] : detail::header_of(s)) out += "# " + k + "=" + v + "\n";
  out += "t,tau,re_alpha,im_alpha\n";
  for (const auto& c : s.samples)
    out += fmt(c.t) + "," + fmt(c.tau) + "," + fmt(c.alpha.real()) + "," + fmt(c.alpha.imag()) + "\n";
  return out;
}

inline std::string schedule_to_json(const ControlSchedule& s) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : detail::header_of(s)) j["header"][k] = v;
  auto& cols = j["samples"];
  cols["t"] = nlohmann::json::array();
  cols["tau"] = nlohmann::json::array();
  cols["re_alpha"] = nlohmann::json::array();
  cols["im_alpha"] = nlohmann::json::array();
  for (const auto& c : s.samples) {
    cols["t"].push_back(c.t);
    cols["tau"].push_back(c.tau);
    cols["re_alpha"].push_back(c.alpha.real());
    cols["im_alpha"].push_back(c.alpha.imag());
  }
  return j.dump(1) + "\n";
}

inline ControlSchedule schedule_from_csv(const std::string& text) {
  std::map<std::string, std::string> header;
  std::vector<ControlSample> samples;
  std::stringstream ss(text);
  std::string line;
  bool saw_columns = false;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      key.erase(key.find_last_not_of(' ') + 1);
      header[key] = line.substr(eq + 1);
      continue;
    }
    if (!saw_columns) {
      if (line != "t,tau,re_alpha,im_alpha")
        throw Error(ErrorKind::InvalidInput, "expected column header t,tau,re_alpha,im_alpha");
      saw_columns = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    if (cells.size() != 4)
      throw Error(ErrorKind::InvalidInput, "line " + std::to_string(line_no) + " needs 4 columns");
    double v[4];
    for (int i = 0; i < 4; ++i)
      v[i] = parse_double(cells[i], "sample on line " + std::to_string(line_no));
    samples.push_back({v[0], v[1], {v[2], v[3]}});
  }
  if (!saw_columns) throw Error(ErrorKind::InvalidInput, "schedule has no column header");
  return detail::assemble(header, std::move(samples));
}

inline ControlSchedule schedule_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    std::map<std::string, std::string> header;
    for (const auto& [k, v] : j.at("header").items()) header[k] = v.get<std::string>();
    const auto& cols = j.at("samples");
    const auto& t = cols.at("t");
    const auto& tau = cols.at("tau");
    const auto& re = cols.at("re_alpha");
    const auto& im = cols.at("im_alpha");
    if (tau.size() != t.size() || re.size() != t.size() || im.size() != t.size())
      throw Error(ErrorKind::InvalidInput, "sample columns differ in length");
    std::vector<ControlSample> samples;
    for (std::size_t i = 0; i < t.size(); ++i)
      samples.push_back({t[i].get<double>(), tau[i].get<double>(),
                         {re[i].get<double>(), im[i].get<double>()}});
    return detail::assemble(header, std::move(samples));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("malformed schedule JSON: ") + e.what());
  }
}

inline ControlSchedule parse_schedule(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return schedule_from_json(text);
  return schedule_from_csv(text);
}

inline ControlSchedule load_schedule(const std::filesystem::path& path) {
  return parse_schedule(read_file(path));
}

inline void save_schedule(const std::filesystem::path& path, const ControlSchedule& s,
                          Format format = Format::Csv) {
  write_atomic(path, format == Format::Csv ? schedule_to_csv(s) : schedule_to_json(s));
}

// ---------------------------------------------------------------------------
// Trajectories

inline constexpr const char* trajectory_columns =
    "t,tau,re_alpha,im_alpha,p1,p2,p3,p4,re_c1,im_c1,re_c2,im_c2,re_c3,im_c3,re_c4,im_c4,fidelity";

/// `fidelity` may be empty, in which case the column holds `nan`.
inline std::string trajectory_to_csv(const Trajectory& traj, const FidelityTrace* fidelity) {
  std::string out = std::string(trajectory_columns) + "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& c = traj.controls[k];
    out += fmt(traj.times[k]) + "," + fmt(c.tau) + "," + fmt(c.alpha.real()) + "," +
           fmt(c.alpha.imag());
    for (double p : traj.populations[k]) out += "," + fmt(p);
    for (int i = 0; i < 4; ++i)
      out += "," + fmt(traj.states[k](i).real()) + "," + fmt(traj.states[k](i).imag());
    out += "," + (fidelity ? fmt(fidelity->fidelity[k]) : std::string("nan")) + "\n";
  }
  return out;
}

inline std::string trajectory_to_json(const Trajectory& traj, const FidelityTrace* fidelity) {
  nlohmann::ordered_json j;
  std::vector<std::string> names;
  std::stringstream ss(trajectory_columns);
  for (std::string n; std::getline(ss, n, ',');) names.push_back(n);
  for (const auto& n : names) j[n] = nlohmann::json::array();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& c = traj.controls[k];
    j["t"].push_back(traj.times[k]);
    j["tau"].push_back(c.tau);
    j["re_alpha"].push_back(c.alpha.real());
    j["im_alpha"].push_back(c.alpha.imag());
    for (int i = 0; i < 4; ++i) {
      j["p" + std::to_string(i + 1)].push_back(traj.populations[k][i]);
      j["re_c" + std::to_string(i + 1)].push_back(traj.states[k](i).real());
      j["im_c" + std::to_string(i + 1)].push_back(traj.states[k](i).imag());
    }
    if (fidelity) j["fidelity"].push_back(fidelity->fidelity[k]);
    else j["fidelity"].push_back(nullptr);
  }
  return j.dump(1) + "\n";
}

}  // namespace pulseforge::io

#endif
