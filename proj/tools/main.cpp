// clab: command-line front end producing JSON reports.
//
// Exit codes: 0 verdict true / success, 1 verdict false, 2 input error,
// 3 numerical failure.

#include "contraction_lab/contraction_lab.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>

using namespace clab;

namespace {

constexpr int kExitTrue = 0;
constexpr int kExitFalse = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Input {
  std::string path;
  std::string text;
  json doc;
};

Input read_input(const std::string& path) {
  Input in;
  in.path = path;
  in.text = read_text_file(path);
  in.doc = parse_json_text(in.text, path);
  return in;
}

json input_echo(const std::vector<Input>& ins) {
  json a = json::array();
  for (const auto& in : ins) a.push_back({{"path", in.path}, {"fnv1a64", fnv1a_hex(in.text)}});
  return a;
}

json subspace_json(const Subspace& s) { return {{"dim", s.dim()}, {"ambient", s.ambient_dim()}}; }

json optional_matrix(const std::optional<CMatrix>& m) { return m ? matrix_to_json(*m) : json(nullptr); }

json optional_vector(const std::optional<CVector>& v) { return v ? vector_to_json(*v) : json(nullptr); }

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

SchurPoly poly_from_json(const json& j) {
  const json& arr = j.is_object() && j.contains("coeffs") ? j["coeffs"] : j;
  if (!arr.is_array() || arr.empty()) throw JsonFormatError("polynomial JSON must be a nonempty array of matrices or {\"coeffs\": [...]}");
  SchurPoly f;
  for (const auto& c : arr) f.coeffs.push_back(matrix_from_json(c));
  f.validate();
  return f;
}

json poly_to_json(const SchurPoly& f) {
  json a = json::array();
  for (const auto& c : f.coeffs) a.push_back(matrix_to_json(c));
  return a;
}

// ---------------------------------------------------------------------------

json analyze(const Contraction& t, const Tolerances& tol) {
  json r;
  Classification k = classify(t, tol);
  r["shape"] = {t.rows(), t.cols()};
  r["norm"] = op_norm(t.matrix());
  r["classification"] = k.names();
  const DefectData& dd = t.defect();
  r["defect"] = {{"rank_d_t", dd.defect_space.dim()}, {"rank_d_tstar", dd.defect_space_star.dim()},
                 {"null_d_t", dd.null_dt.dim()}, {"null_d_tstar", dd.null_dtstar.dim()}};
  if (!t.square()) return r;
  AsymptoticData as = asymptotic_limit(t, tol);
  r["asymptotic"] = {{"s_t", matrix_to_json(as.s_t)},
                     {"iterations", as.iterations},
                     {"last_step", as.last_step},
                     {"idempotent", as.idempotent},
                     {"indeterminate", as.indeterminate},
                     {"null_s", subspace_json(as.null_s)},
                     {"fix_s", subspace_json(as.fix_s)}};
  Triangulation tr = canonical_triangulation(t, tol);
  r["triangulation"] = {{"null_s_dim", tr.null_s.dim()},
                        {"range_s_dim", tr.range_s.dim()},
                        {"lower_left", tr.lower_left},
                        {"q_class_ok", tr.q_class_ok},
                        {"w_class_ok", tr.w_class_ok}};
  PartsData p = parts(t, tol);
  r["parts"] = {{"isometric_dim", p.h_i.dim()}, {"unitary_dim", p.h_u.dim()}};
  r["class"] = p.cls.label();
  r["class_indeterminate"] = p.cls.indeterminate;
  return r;
}

json shmulyan_json(const ShmulyanVerdict& v) {
  return {{"dominates", v.dominates},
          {"routes", {{"i", v.routes.i}, {"ii", v.routes.ii}, {"iv", v.routes.iv}}},
          {"route_agreement", v.route_agreement},
          {"residuals", {{"i", v.residual_i}, {"i_threshold", v.threshold_i}, {"ii", v.residual_ii}, {"ii_threshold", v.threshold_ii}}},
          {"radius", finite_or_null(v.radius)},
          {"x_solution", optional_matrix(v.x_solution)},
          {"y_solution", optional_matrix(v.y_solution)},
          {"witness", optional_vector(v.witness)},
          {"marginal", v.marginal}};
}

json harnack_json(const HarnackVerdict& v) {
  return {{"status", to_string(v.status)},
          {"constants", v.constants},
          {"levels", v.levels_used},
          {"constant", v.status == HarnackStatus::Dominated ? json(v.constant) : json(nullptr)},
          {"limit", finite_or_null(v.limit.value)},
          {"limit_available", v.limit.available},
          {"plateau", v.plateau},
          {"witness", optional_vector(v.witness)},
          {"witness_ratio", v.witness ? finite_or_null(v.witness_ratio) : json(nullptr)},
          {"note", v.note}};
}

json arc_json(const ArcCertificate& c) {
  json arcs = json::array();
  for (const auto& a : c.arcs)
    arcs.push_back({{"coeffs", poly_to_json(a.f)},
                    {"lambda", {{"re", a.lambda.real()}, {"im", a.lambda.imag()}}},
                    {"grid_sup", a.grid_sup},
                    {"sup_bound", a.sup_bound}});
  return {{"arcs", arcs}, {"bound", c.bound}, {"endpoint_residual", c.endpoint_residual}, {"schur_class", c.schur_class}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clab: numerical oracles for contractions on finite-dimensional spaces"};
  app.require_subcommand(1);
  Tolerances tol;
  bool timing = false;
  app.add_option("--rank-rtol", tol.rank_rtol, "relative rank cutoff")->capture_default_str();
  app.add_option("--psd-atol", tol.psd_atol, "absolute PSD tolerance")->capture_default_str();
  app.add_option("--conv-tol", tol.conv_tol, "convergence tolerance")->capture_default_str();
  app.add_option("--contraction-slack", tol.contraction_slack, "norm slack above 1")->capture_default_str();
  app.add_option("--big-ratio", tol.big_ratio, "kernel-escape ratio")->capture_default_str();
  app.add_option("--max-level", tol.max_level, "Harnack level cap")->capture_default_str();
  app.add_option("--grid-points", tol.grid_points, "circle samples")->capture_default_str();
  app.add_flag("--timing", timing, "add wall-clock timing to the report");

  std::string a_path, b_path;
  auto* analyze_cmd = app.add_subcommand("analyze", "classification, asymptotic limit, triangulation, parts");
  analyze_cmd->add_option("matrix", a_path, "matrix JSON")->required();

  std::string order;
  auto* dominate_cmd = app.add_subcommand("dominate", "is A dominated by B?");
  dominate_cmd->add_option("--order", order, "harnack or shmulyan")->required()->check(CLI::IsMember({"harnack", "shmulyan"}));
  dominate_cmd->add_option("A", a_path)->required();
  dominate_cmd->add_option("B", b_path)->required();

  auto* part_cmd = app.add_subcommand("part", "membership in the part of a partial isometry");
  part_cmd->add_option("W", a_path)->required();
  part_cmd->add_option("C", b_path)->required();

  auto* arc_cmd = app.add_subcommand("arc", "chain of Schur-class arcs from A to B");
  arc_cmd->add_option("A", a_path)->required();
  arc_cmd->add_option("B", b_path)->required();

  auto* member_cmd = app.add_subcommand("schur-member", "membership of a polynomial F in the class of a partial isometry W");
  member_cmd->add_option("W", a_path)->required();
  member_cmd->add_option("F", b_path, "polynomial JSON: {\"coeffs\": [matrix, ...]}")->required();

  std::string kind;
  int dim = 2;
  std::uint64_t seed = 0;
  std::vector<std::string> params;
  auto* gen_cmd = app.add_subcommand("gen", "structured random instance");
  gen_cmd->add_option("--kind", kind)->required();
  gen_cmd->add_option("--dim", dim)->capture_default_str();
  gen_cmd->add_option("--seed", seed)->capture_default_str();
  gen_cmd->add_option("--param", params, "key=value, repeatable");

  std::string suite_name;
  int cases = 0;
  std::uint64_t suite_seed = 20261018;
  auto* suite_cmd = app.add_subcommand("suite", "run a named property suite");
  suite_cmd->add_option("--name", suite_name)->required()->check(CLI::IsMember(suite_names()));
  suite_cmd->add_option("--cases", cases, "number of cases (0 = default size)")->capture_default_str();
  suite_cmd->add_option("--seed", suite_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  auto start = std::chrono::steady_clock::now();
  json report;
  json command = json::array();
  for (int i = 1; i < argc; ++i) command.push_back(argv[i]);
  report["command"] = command;
  int code = kExitTrue;
  try {
    tol.validate();
    report["tolerances"] = tolerances_to_json(tol);
    std::vector<Input> inputs;
    auto load = [&](const std::string& p) {
      inputs.push_back(read_input(p));
      return inputs.back().doc;
    };
    if (*analyze_cmd) {
      Contraction t = make_contraction(matrix_from_json(load(a_path)), tol);
      report["result"] = analyze(t, tol);
    } else if (*dominate_cmd) {
      Contraction a = make_contraction(matrix_from_json(load(a_path)), tol);
      Contraction b = make_contraction(matrix_from_json(load(b_path)), tol);
      report["order"] = order;
      if (order == "shmulyan") {
        ShmulyanVerdict v = shmulyan_dominates(a, b, tol);
        report["result"] = shmulyan_json(v);
        code = v.dominates ? kExitTrue : kExitFalse;
      } else {
        require_same_shape(a.matrix(), b.matrix());
        require_square(a.matrix(), "dominate operand");
        HarnackVerdict v = harnack_dominates(a, b, tol);
        report["result"] = harnack_json(v);
        code = v.status == HarnackStatus::Dominated ? kExitTrue : kExitFalse;
      }
    } else if (*part_cmd) {
      Contraction w = make_contraction(matrix_from_json(load(a_path)), tol);
      CMatrix c = matrix_from_json(load(b_path));
      require_same_shape(w.matrix(), c);
      make_contraction(c, tol);
      PartDescription p = partial_isometry_part(w, tol);
      Membership m = p.membership_test(c);
      report["result"] = {{"member", m.member},
                          {"z", matrix_to_json(m.z)},
                          {"z_norm", m.z_norm},
                          {"block_residual", m.block_residual},
                          {"marginal", m.marginal}};
      code = m.member ? kExitTrue : kExitFalse;
    } else if (*arc_cmd) {
      Contraction a = make_contraction(matrix_from_json(load(a_path)), tol);
      Contraction b = make_contraction(matrix_from_json(load(b_path)), tol);
      ArcResult ar = connect_arc(a, b, tol);
      json res = {{"status", to_string(ar.status)}, {"note", ar.note}};
      if (ar.certificate) res.update(arc_json(*ar.certificate));
      KobayashiBound kb = kobayashi_upper_bound(a, b, tol);
      res["kobayashi_upper_bound"] = finite_or_null(kb.value);
      res["kobayashi_method"] = kb.method;
      report["result"] = res;
      code = ar.status == ArcStatus::Connected ? kExitTrue : kExitFalse;
    } else if (*member_cmd) {
      Contraction w = make_contraction(matrix_from_json(load(a_path)), tol);
      SchurPoly f = poly_from_json(load(b_path));
      DeltaInftyResult d = delta_infty_member(w, f, tol);
      report["result"] = {{"member", d.member},
                          {"sup_norm", d.f0_sup.value},
                          {"sup_bound", d.f0_sup.bound},
                          {"sup_method", d.f0_sup.method},
                          {"residual", d.residual},
                          {"marginal", d.marginal},
                          {"f0", poly_to_json(d.f0)}};
      code = d.member ? kExitTrue : kExitFalse;
    } else if (*gen_cmd) {
      GenSpec spec;
      spec.kind = parse_gen_kind(kind);
      spec.dim = dim;
      spec.seed = seed;
      for (const auto& p : params) {
        auto eq = p.find('=');
        if (eq == std::string::npos) throw InvalidSpec("--param expects key=value, got \"" + p + "\"");
        try {
          spec.params[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
        } catch (const std::exception&) {
          throw InvalidSpec("--param value is not a number: \"" + p + "\"");
        }
      }
      Generated g = generate(spec);
      json res = {{"kind", kind}, {"dim", dim}, {"seed", seed}, {"params", spec.params}, {"flags", g.flags}};
      if (g.second)
        res["pair"] = {matrix_to_json(g.first), matrix_to_json(*g.second)};
      else
        res["matrix"] = matrix_to_json(g.first);
      report["result"] = res;
    } else if (*suite_cmd) {
      SuiteResult r = run_suite(suite_name, cases, suite_seed, tol);
      report["seed"] = suite_seed;
      report["result"] = suite_to_json(r);
      code = r.passed() ? kExitTrue : kExitFalse;
    }
    report["inputs"] = input_echo(inputs);
  } catch (const InputError& e) {
    report["error"] = {{"kind", "input"}, {"message", e.what()}};
    code = kExitInput;
  } catch (const NumericalFailure& e) {
    report["error"] = {{"kind", "numerical"}, {"message", e.what()}};
    code = kExitNumeric;
  } catch (const Error& e) {
    report["error"] = {{"kind", "numerical"}, {"message", e.what()}};
    code = kExitNumeric;
  }
  if (timing)
    report["timing_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report["exit_code"] = code;
  std::cout << report.dump(2) << "\n";
  if (report.contains("error")) std::cerr << "clab: " << report["error"]["message"].get<std::string>() << "\n";
  return code;
}
