#ifndef PULSEFORGE_PLAN_HPP
#define PULSEFORGE_PLAN_HPP

// Plan documents: JSON descriptions of a system and an ordered list of gate
// stages. Angles may be plain radians or strings such as "pi/4", "-pi/3",
// "0.25pi", "60deg". Complex amplitudes are a number, a [re, im] pair, or
// {"mag": r, "phase": angle}.

#include <cctype>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulse_synth.hpp"
#include "schedule_io.hpp"

namespace pulseforge::plan {

/// Bohr magneton over hbar, rad s^-1 T^-1 (CODATA 2018).
inline constexpr double bohr_magneton_angular = 9.2740100783e-24 / 1.054571817e-34;

/// Zeeman splitting mu_B |g B| / hbar.
inline double zeeman_splitting(double b_field_tesla, double g_factor) {
  return bohr_magneton_angular * std::abs(g_factor * b_field_tesla);
}

inline double parse_angle(const std::string& raw) {
  std::string s;
  for (char ch : raw)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += static_cast<char>(std::tolower(ch));
  if (s.empty()) throw Error(ErrorKind::InvalidInput, "empty angle literal");
  double sign = 1.0;
  if (s[0] == '-' || s[0] == '+') {
    if (s[0] == '-') sign = -1.0;
    s.erase(0, 1);
  }
  auto number = [&](const std::string& t) { return io::parse_double(t, "angle '" + raw + "'"); };
  auto ends_with = [&](const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with("deg")) return sign * number(s.substr(0, s.size() - 3)) * pi / 180.0;
  if (ends_with("rad")) return sign * number(s.substr(0, s.size() - 3));
  const auto p = s.find("pi");
  if (p == std::string::npos) return sign * number(s);
  std::string coef = s.substr(0, p);
  if (!coef.empty() && coef.back() == '*') coef.pop_back();
  const double c = coef.empty() ? 1.0 : number(coef);
  std::string rest = s.substr(p + 2);
  double d = 1.0;
  if (!rest.empty()) {
    if (rest[0] != '/') throw Error(ErrorKind::InvalidInput, "cannot parse angle '" + raw + "'");
    d = number(rest.substr(1));
    if (d == 0.0) throw Error(ErrorKind::InvalidInput, "division by zero in angle '" + raw + "'");
  }
  return sign * c * pi / d;
}

inline double angle_from_json(const nlohmann::json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_angle(j.get<std::string>());
  throw Error(ErrorKind::InvalidInput, what + " must be a number or angle string");
}

inline double number_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_number()) throw Error(ErrorKind::InvalidInput, what + " must be a number");
  return j.get<double>();
}

inline cplx complex_from_json(const nlohmann::json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object() && j.contains("mag")) {
    const double phase = j.contains("phase") ? angle_from_json(j.at("phase"), what + ".phase") : 0.0;
    return std::polar(number_from_json(j.at("mag"), what + ".mag"), phase);
  }
  throw Error(ErrorKind::InvalidInput,
              what + " must be a number, [re, im], or {\"mag\": r, \"phase\": angle}");
}

struct Stage {
  std::string label;
  GateSpec gate;
  bool has_initial = false;  // false for chain stages that inherit their input
  AnsatzSpec ansatz;
  std::optional<BranchRule> branch;
};

struct Plan {
  SystemParams system;
  std::vector<Stage> stages;
  std::filesystem::path out_dir = "out";
  io::Format format = io::Format::Csv;
  std::size_t steps = default_steps;
};

inline BranchRule parse_branch(const std::string& text) {
  if (text == "min-theta") return BranchRule::min_theta();
  try {
    const double v = io::parse_double(text, "branch");
    if (v < 0.0 || v != std::floor(v)) throw Error(ErrorKind::InvalidInput, "");
    return BranchRule::at(static_cast<std::size_t>(v));
  } catch (const Error&) {
    throw Error(ErrorKind::InvalidInput, "branch must be 'min-theta' or a non-negative index");
  }
}

namespace detail {

inline QubitAngles qubit_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("chi"))
    throw Error(ErrorKind::InvalidInput, what + " needs {\"chi\": angle, \"mu\": angle}");
  QubitAngles q{angle_from_json(j.at("chi"), what + ".chi"),
                j.contains("mu") ? angle_from_json(j.at("mu"), what + ".mu") : 0.0};
  return normalize_qubit(q);
}

inline AnsatzSpec ansatz_from_json(const nlohmann::json& j, const std::string& what) {
  AnsatzSpec a;
  if (j.is_null()) return a;
  if (!j.is_object()) throw Error(ErrorKind::InvalidInput, what + " must be an object");
  const std::string family = j.value("family", std::string("cosine"));
  if (family == "cosine") {
    a.family = AnsatzFamily::CosineRamp;
    if (j.contains("gamma_final")) a.gamma_final = angle_from_json(j.at("gamma_final"), what + ".gamma_final");
  } else if (family == "sampled") {
    a.family = AnsatzFamily::UserSampledGamma;
    if (!j.contains("gamma_samples") || !j.at("gamma_samples").is_array())
      throw Error(ErrorKind::InvalidInput, what + ".gamma_samples must be an array");
    for (const auto& g : j.at("gamma_samples"))
      a.gamma_samples.push_back(angle_from_json(g, what + ".gamma_samples"));
    if (a.gamma_samples.empty())
      throw Error(ErrorKind::InvalidInput, what + ".gamma_samples is empty");
    a.gamma_final = a.gamma_samples.back();
  } else {
    throw Error(ErrorKind::InvalidInput, what + ".family must be 'cosine' or 'sampled'");
  }
  if (j.contains("duration_ns")) a.duration = number_from_json(j.at("duration_ns"), what) * 1e-9;
  if (j.contains("max_duration_ns"))
    a.max_duration = number_from_json(j.at("max_duration_ns"), what) * 1e-9;
  if (j.contains("extra_periods")) {
    const double k = number_from_json(j.at("extra_periods"), what + ".extra_periods");
    if (k < 0 || k != std::floor(k))
      throw Error(ErrorKind::InvalidInput, what + ".extra_periods must be a non-negative integer");
    a.extra_periods = static_cast<int>(k);
  }
  if (j.contains("samples")) {
    const double n = number_from_json(j.at("samples"), what + ".samples");
    if (n < 2 || n != std::floor(n))
      throw Error(ErrorKind::InvalidInput, what + ".samples must be an integer >= 2");
    a.n_samples = static_cast<std::size_t>(n);
  }
  return a;
}

inline Stage stage_from_json(const nlohmann::json& j, std::size_t index) {
  const std::string what = "stages[" + std::to_string(index) + "]";
  if (!j.is_object()) throw Error(ErrorKind::InvalidInput, what + " must be an object");
  Stage st;
  st.label = j.value("label", "stage " + std::to_string(index + 1));
  if (!j.contains("gate") || !j.at("gate").is_string())
    throw Error(ErrorKind::InvalidInput, what + ".gate must be prepare|phase|not|transport");
  const std::string kind = j.at("gate").get<std::string>();

  QubitAngles initial;
  if (j.contains("initial")) {
    initial = qubit_from_json(j.at("initial"), what + ".initial");
    st.has_initial = true;
  }
  if (kind == "prepare") {
    PrepareGate g;
    if (!j.contains("target") || !j.at("target").is_object())
      throw Error(ErrorKind::InvalidInput, what + ".target must list b2, b3 (and optionally b1, b4)");
    const auto& t = j.at("target");
    for (int n = 1; n <= 4; ++n) {
      const std::string key = "b" + std::to_string(n);
      if (t.contains(key)) g.target[n - 1] = complex_from_json(t.at(key), what + ".target." + key);
    }
    st.gate = g;
    st.has_initial = true;  // always starts from |1>
  } else if (kind == "phase") {
    PhaseGate g{initial, 0.0};
    if (j.contains("phase_shift")) g.phase_shift = angle_from_json(j.at("phase_shift"), what + ".phase_shift");
    st.gate = g;
  } else if (kind == "not") {
    st.gate = NotGate{initial};
  } else if (kind == "transport") {
    CustomTransport g{initial};
    if (!j.contains("A") || !j.contains("B"))
      throw Error(ErrorKind::InvalidInput, what + " needs target amplitudes A and B");
    g.A = number_from_json(j.at("A"), what + ".A");
    g.B = number_from_json(j.at("B"), what + ".B");
    g.lambda = j.contains("lambda") ? angle_from_json(j.at("lambda"), what + ".lambda") : 0.0;
    st.gate = g;
  } else {
    throw Error(ErrorKind::InvalidInput, what + ".gate '" + kind + "' is not prepare|phase|not|transport");
  }
  st.ansatz = ansatz_from_json(j.contains("ansatz") ? j.at("ansatz") : nlohmann::json(), what + ".ansatz");
  if (j.contains("branch")) {
    const auto& b = j.at("branch");
    st.branch = parse_branch(b.is_string() ? b.get<std::string>() : b.dump());
  }
  return st;
}

}  // namespace detail

inline SystemParams system_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "plan needs a 'system' object");
  const bool has_delta = j.contains("delta_rad_per_s") || j.contains("delta_ghz");
  const bool has_field = j.contains("b_field_mT") || j.contains("g_factor");
  if (has_delta == has_field)
    throw Error(ErrorKind::InvalidInput,
                "system must give exactly one of a Zeeman splitting (delta_rad_per_s or "
                "delta_ghz) or a field (b_field_mT with g_factor)");
  if (j.contains("delta_rad_per_s") && j.contains("delta_ghz"))
    throw Error(ErrorKind::InvalidInput, "give delta_rad_per_s or delta_ghz, not both");
  SystemParams p;
  if (j.contains("delta_rad_per_s")) {
    p.delta = number_from_json(j.at("delta_rad_per_s"), "system.delta_rad_per_s");
  } else if (j.contains("delta_ghz")) {
    p.delta = 2.0 * pi * 1e9 * number_from_json(j.at("delta_ghz"), "system.delta_ghz");
  } else {
    if (!j.contains("b_field_mT") || !j.contains("g_factor"))
      throw Error(ErrorKind::InvalidInput, "b_field_mT and g_factor must be given together");
    p.delta = zeeman_splitting(number_from_json(j.at("b_field_mT"), "system.b_field_mT") * 1e-3,
                               number_from_json(j.at("g_factor"), "system.g_factor"));
  }
  p.validate();
  return p;
}

inline Plan parse_plan(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("plan is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "plan must be a JSON object");
    Plan p;
    p.system = system_from_json(j.contains("system") ? j.at("system") : nlohmann::json());
    if (!j.contains("stages") || !j.at("stages").is_array() || j.at("stages").empty())
      throw Error(ErrorKind::InvalidInput, "plan needs a non-empty 'stages' array");
    for (std::size_t i = 0; i < j.at("stages").size(); ++i)
      p.stages.push_back(detail::stage_from_json(j.at("stages")[i], i));
    if (j.contains("io")) {
      const auto& o = j.at("io");
      if (o.contains("out_dir")) p.out_dir = o.at("out_dir").get<std::string>();
      if (o.contains("format")) {
        const auto f = o.at("format").get<std::string>();
        if (f == "csv") p.format = io::Format::Csv;
        else if (f == "json") p.format = io::Format::Json;
        else throw Error(ErrorKind::InvalidInput, "io.format must be csv or json");
      }
      if (o.contains("steps")) {
        const double n = number_from_json(o.at("steps"), "io.steps");
        if (n < 1 || n != std::floor(n))
          throw Error(ErrorKind::InvalidInput, "io.steps must be a positive integer");
        p.steps = static_cast<std::size_t>(n);
      }
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("malformed plan: ") + e.what());
  }
}

inline Plan load_plan(const std::filesystem::path& path) { return parse_plan(io::read_file(path)); }

}  // namespace pulseforge::plan

#endif
