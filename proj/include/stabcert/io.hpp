#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stabcert/certificates.hpp"
#include "stabcert/spectral_model.hpp"
#include "stabcert/verification.hpp"

namespace stabcert {

using Json = nlohmann::ordered_json;

// JSON has no inf/nan literals; encode them as strings so certificates with
// vacuous (infinite) budget terms round-trip.
inline Json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double number_from_json(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.get<double>();
}

inline Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2)
    throw InvalidInputError("expected complex number as [re, im] pair");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

// ---------------------------------------------------------------------------
// Model files: {kind, params:{...}, N or node counts}.
// ---------------------------------------------------------------------------

inline Json model_to_json(const SpectralModel& model) {
  Json j;
  j["kind"] = to_string(model.kind());
  Json params;
  if (model.kind() == ModelKind::DiskMultiplication && model.disk_support()) {
    params["center"] = complex_to_json(model.disk_support()->center);
    params["radius"] = model.disk_support()->radius;
  } else {
    Json ev = Json::array();
    for (Index i = 0; i < model.size(); ++i) ev.push_back(complex_to_json(model.eigenvalues()[i]));
    params["eigenvalues"] = ev;
    Json w = Json::array();
    for (Index i = 0; i < model.size(); ++i) w.push_back(model.weights()[i]);
    params["weights"] = w;
    Json cp = Json::array();
    for (const Complex& z : model.closure_points()) cp.push_back(complex_to_json(z));
    params["closure_points"] = cp;
  }
  j["params"] = params;
  j["N"] = model.size();
  j["truncation_note"] = model.truncation_note();
  return j;
}

inline SpectralModel model_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "diagonal_sequence") {
    const Json& params = j.at("params");
    const Index n = j.at("N").get<Index>();
    if (params.contains("rule")) {
      const std::string rule = params.at("rule").get<std::string>();
      if (rule == "neg_inverse") return build_diagonal_model(rule_neg_inverse(), n);
      if (rule == "neg_inverse_plus_ik")
        return build_diagonal_model(rule_neg_inverse_plus_ik(), n);
      if (rule == "neg_linear") return build_diagonal_model(rule_neg_linear(), n);
      throw InvalidInputError("model file: unknown diagonal rule '" + rule + "'");
    }
    // explicit eigenvalue list with unit weights
    const Json& evj = params.at("eigenvalues");
    ComplexVector ev(static_cast<Index>(evj.size()));
    for (std::size_t i = 0; i < evj.size(); ++i) ev[static_cast<Index>(i)] = complex_from_json(evj[i]);
    std::vector<Complex> closure;
    if (params.contains("closure_points"))
      for (const auto& z : params.at("closure_points")) closure.push_back(complex_from_json(z));
    return SpectralModel(ModelKind::DiagonalSequence, std::move(ev),
                         RealVector::Ones(static_cast<Index>(evj.size())), std::move(closure),
                         "explicit diagonal list");
  }
  if (kind == "disk_multiplication") {
    const Json& params = j.at("params");
    const Complex center = complex_from_json(params.at("center"));
    const double radius = params.at("radius").get<double>();
    const int n_radial = j.at("n_radial").get<int>();
    const int n_angular = j.at("n_angular").get<int>();
    return build_disk_model(center, radius, n_radial, n_angular);
  }
  if (kind == "custom_normal") {
    const Json& params = j.at("params");
    const Json& evj = params.at("eigenvalues");
    ComplexVector ev(static_cast<Index>(evj.size()));
    for (std::size_t i = 0; i < evj.size(); ++i) ev[static_cast<Index>(i)] = complex_from_json(evj[i]);
    RealVector w = RealVector::Ones(ev.size());
    if (params.contains("weights")) {
      const Json& wj = params.at("weights");
      if (static_cast<Index>(wj.size()) != ev.size())
        throw InvalidInputError("model file: weights length mismatch");
      for (std::size_t i = 0; i < wj.size(); ++i) w[static_cast<Index>(i)] = wj[i].get<double>();
    }
    std::vector<Complex> closure;
    if (params.contains("closure_points"))
      for (const auto& z : params.at("closure_points")) closure.push_back(complex_from_json(z));
    return build_custom_model(std::move(ev), std::move(w), std::move(closure));
  }
  throw InvalidInputError("model file: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Perturbation files: {rank, b: [[re,im],...] per column, c: likewise}.
// ---------------------------------------------------------------------------

inline Json factors_to_json(const PerturbationFactors& f) {
  Json j;
  j["rank"] = f.rank();
  auto cols_to_json = [](const ComplexMatrix& m) {
    Json cols = Json::array();
    for (Index k = 0; k < m.cols(); ++k) {
      Json col = Json::array();
      for (Index i = 0; i < m.rows(); ++i) col.push_back(complex_to_json(m(i, k)));
      cols.push_back(col);
    }
    return cols;
  };
  j["b"] = cols_to_json(f.b_columns());
  j["c"] = cols_to_json(f.c_columns());
  return j;
}

inline PerturbationFactors factors_from_json(const Json& j) {
  const Index rank = j.at("rank").get<Index>();
  auto cols_from_json = [&](const Json& cols) {
    if (static_cast<Index>(cols.size()) != rank)
      throw InvalidInputError("perturbation file: rank does not match column count");
    const Index n = static_cast<Index>(cols.at(0).size());
    ComplexMatrix m(n, rank);
    for (Index k = 0; k < rank; ++k) {
      const Json& col = cols[static_cast<std::size_t>(k)];
      if (static_cast<Index>(col.size()) != n)
        throw InvalidInputError("perturbation file: ragged columns");
      for (Index i = 0; i < n; ++i) m(i, k) = complex_from_json(col[static_cast<std::size_t>(i)]);
    }
    return m;
  };
  return PerturbationFactors(cols_from_json(j.at("b")), cols_from_json(j.at("c")));
}

// ---------------------------------------------------------------------------
// Certificates.
// ---------------------------------------------------------------------------

inline Json profile_to_json(const ResolventProfile& p) {
  Json j;
  j["resonances"] = p.resonances;
  j["alpha"] = p.alpha;
  j["eps_A"] = p.eps_a;
  j["M_A"] = p.m_a;
  j["M_A_raw"] = p.m_a_raw;
  j["d_A"] = json_number(p.d_a);
  j["semigroup_bound"] = p.semigroup_bound;
  j["off_resonance_sup"] = p.off_resonance_sup;
  Json ladder = Json::array();
  for (const auto& r : p.ladder) {
    Json lr;
    lr["alpha"] = r.alpha;
    lr["sup"] = json_number(r.sup);
    lr["edge_value"] = r.edge_value;
    lr["ratio"] = json_number(r.ratio);
    lr["bounded"] = r.bounded;
    ladder.push_back(lr);
  }
  j["ladder"] = ladder;
  j["resonance_confirmed_as_local_max"] = p.resonance_confirmed_as_local_max;
  Json scan;
  scan["off_min"] = p.scan.off_min;
  scan["offsets_per_resonance"] = p.scan.offsets_per_resonance;
  scan["window"] = p.scan.window;
  scan["off_resonance_points"] = p.scan.off_resonance_points;
  scan["ladder_start"] = p.scan.ladder_start;
  scan["ladder_step"] = p.scan.ladder_step;
  scan["ladder_max"] = p.scan.ladder_max;
  scan["divergence_margin"] = p.scan.divergence_margin;
  scan["headroom"] = p.scan.headroom;
  j["scan"] = scan;
  return j;
}

inline ResolventProfile profile_from_json(const Json& j) {
  ResolventProfile p;
  p.resonances = j.at("resonances").get<std::vector<double>>();
  p.alpha = j.at("alpha").get<double>();
  p.eps_a = j.at("eps_A").get<double>();
  p.m_a = j.at("M_A").get<double>();
  p.m_a_raw = j.at("M_A_raw").get<double>();
  p.d_a = number_from_json(j.at("d_A"));
  p.semigroup_bound = j.at("semigroup_bound").get<double>();
  p.off_resonance_sup = j.at("off_resonance_sup").get<double>();
  if (j.contains("resonance_confirmed_as_local_max"))
    p.resonance_confirmed_as_local_max =
        j.at("resonance_confirmed_as_local_max").get<std::vector<bool>>();
  if (j.contains("scan")) {
    const Json& s = j.at("scan");
    p.scan.off_min = s.at("off_min").get<double>();
    p.scan.offsets_per_resonance = s.at("offsets_per_resonance").get<int>();
    p.scan.window = s.at("window").get<double>();
    p.scan.off_resonance_points = s.at("off_resonance_points").get<int>();
    p.scan.ladder_start = s.at("ladder_start").get<double>();
    p.scan.ladder_step = s.at("ladder_step").get<double>();
    p.scan.ladder_max = s.at("ladder_max").get<double>();
    p.scan.divergence_margin = s.at("divergence_margin").get<double>();
    p.scan.headroom = s.at("headroom").get<double>();
  }
  return p;
}

inline Json certificate_to_json(const RobustnessCertificate& cert) {
  Json j;
  j["profile"] = profile_to_json(cert.profile);
  j["beta"] = cert.beta;
  j["gamma"] = cert.gamma;
  j["c"] = cert.c;
  j["M0"] = cert.m0;
  j["M1"] = cert.m1;
  j["M1_source"] = cert.m1_source;
  j["M2"] = cert.m2;
  j["M2_raw"] = cert.m2_raw;
  j["M2_source"] = cert.m2_source;
  Json chain;
  chain["m"] = cert.chain.m;
  chain["n"] = cert.chain.n;
  chain["extra_split"] = cert.chain.extra_split;
  chain["direct"] = cert.chain.direct;
  chain["coefficient"] = cert.chain.coefficient();
  j["chain"] = chain;
  j["delta1"] = json_number(cert.delta1);
  j["delta1_solvable"] = cert.delta1_solvable;
  j["delta2"] = json_number(cert.delta2);
  j["sqrt_c_over_M2"] = cert.sqrt_c_over_m2;
  j["delta"] = cert.delta;
  j["binding"] = cert.binding;
  j["omega_region"] = "0 < |lambda - i omega_k| <= eps_A, Re lambda >= 0";
  return j;
}

inline RobustnessCertificate certificate_from_json(const Json& j) {
  RobustnessCertificate cert;
  cert.profile = profile_from_json(j.at("profile"));
  cert.beta = j.at("beta").get<double>();
  cert.gamma = j.at("gamma").get<double>();
  cert.c = j.at("c").get<double>();
  cert.m0 = j.at("M0").get<double>();
  cert.m1 = j.at("M1").get<double>();
  cert.m1_source = j.at("M1_source").get<std::string>();
  cert.m2 = j.at("M2").get<double>();
  cert.m2_raw = j.at("M2_raw").get<double>();
  cert.m2_source = j.at("M2_source").get<std::string>();
  const Json& chain = j.at("chain");
  cert.chain.m = chain.at("m").get<int>();
  cert.chain.n = chain.at("n").get<int>();
  cert.chain.extra_split = chain.at("extra_split").get<bool>();
  cert.chain.direct = chain.at("direct").get<bool>();
  cert.chain.m1 = cert.m1;
  cert.delta1 = number_from_json(j.at("delta1"));
  cert.delta1_solvable = j.at("delta1_solvable").get<bool>();
  cert.delta2 = number_from_json(j.at("delta2"));
  cert.sqrt_c_over_m2 = j.at("sqrt_c_over_M2").get<double>();
  cert.delta = j.at("delta").get<double>();
  cert.binding = j.at("binding").get<std::string>();
  return cert;
}

// ---------------------------------------------------------------------------
// Reports and plot tables.
// ---------------------------------------------------------------------------

inline Json report_to_json(const VerificationReport& report) {
  Json j;
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    Json cj;
    cj["name"] = c.name;
    cj["spec"] = c.spec;
    cj["measured"] = json_number(c.measured);
    cj["threshold"] = json_number(c.threshold);
    cj["tolerance"] = c.tolerance;
    cj["pass"] = c.pass;
    if (!c.note.empty()) cj["note"] = c.note;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  Json fits;
  for (const auto& [k, v] : report.fitted_exponents) fits[k] = json_number(v);
  j["fitted_exponents"] = fits;
  j["pass"] = report.pass();
  return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot open output file: " + path);
  out << content;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json load_json(const std::string& path) {
  return Json::parse(read_text_file(path));
}

inline void save_json(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

inline std::string plot_table_to_csv(const PlotTable& table) {
  std::ostringstream os;
  os.precision(17);
  os << table.x_label << "," << table.y_label << "\n";
  for (const auto& [x, y] : table.rows) os << x << "," << y << "\n";
  return os.str();
}

inline void write_plot_tables(const std::string& dir, const std::vector<PlotTable>& tables) {
  for (const auto& t : tables) write_text_file(dir + "/" + t.name + ".csv", plot_table_to_csv(t));
}

}  // namespace stabcert
