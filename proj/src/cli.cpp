#include "relaxforge/cli.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "relaxforge/error.hpp"
#include "relaxforge/io.hpp"
#include "relaxforge/kw.hpp"

namespace relaxforge {

namespace {

using io::json;

struct Run {
  bool accepted = true;
  json values = json::object();
  std::optional<VerificationReport> report;
  std::vector<std::string> notes;
};

json exact(const Scalar& s) { return io::scalar_report(s); }

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Usage, "cannot write " + path);
  out << j.dump(1) << "\n";
}

// Bit i of the table is f at index i; the table has exactly `bits` entries.
std::vector<std::uint8_t> table_bits(const std::string& hex, std::size_t bits) { return parse_hex_bits(hex, bits); }

FeasibilityProblem problem_arg(const std::string& path, int p, int h) {
  if (!path.empty()) return io::problem_from(io::read_file(path));
  if (p <= 0 || h <= 0) fail(ErrorKind::Usage, "give --problem or both --pigeons and --holes");
  return relax(php_negation_hqfp(p, h));
}

RelationSpec relation_arg(const std::string& path, int eq) {
  if (!path.empty()) return io::relation_from(io::read_file(path));
  if (eq > 0) return equality_relation(eq);
  fail(ErrorKind::Usage, "give --relation or --eq");
}

void add_report(Run& run, VerificationReport rep) {
  run.accepted = run.accepted && rep.accepted;
  run.report = std::move(rep);
}

std::string text_value(const json& v) {
  if (v.is_object() && v.contains("exact")) {
    return v["exact"].get<std::string>() + " (~" + std::to_string(v["decimal"].get<double>()) + ")";
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"exact verifier for relaxed protocols and pigeonhole refutations", "relaxforge"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "JSON report on stdout");
  app.set_help_all_flag("--help-all");

  std::function<Run()> action;
  std::string command;
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& desc) {
    auto* sub = parent->add_subcommand(name, desc);
    sub->fallthrough();
    return sub;
  };

  // shared argument storage; each subcommand reads only its own
  int pigeons = 0, holes = 0, l = 11, d = 0, n = 0, eq = 0, rows = 0, cols = 0, k = 1, prefix_bits = 0;
  std::size_t samples = 500;
  std::uint64_t seed = 1;
  std::string beta = "1", problem, solution, dualf, cert, protocol, relationf, family, outf, emit_problem, emit_dual,
              fn, formula, mu, exhaustive = "off";
  bool verify = false;

  auto* qphp = app.add_subcommand("qphp", "quantum pigeonhole refutations and bounds");
  qphp->require_subcommand(1);
  auto* qdual = leaf(qphp, "dual", "Farkas witness for the relaxed pigeonhole problem");
  qdual->add_option("--pigeons", pigeons)->required();
  qdual->add_option("--holes", holes)->required();
  qdual->add_option("--emit-problem", emit_problem);
  qdual->add_option("--emit-dual", emit_dual);
  qdual->callback([&] {
    command = "qphp dual";
    action = [&] {
      Run run;
      auto prob = relax(php_negation_hqfp(pigeons, holes));
      auto w = qphp_dual_witness(pigeons, holes);
      if (!emit_problem.empty()) write_json(emit_problem, io::problem(prob));
      if (!emit_dual.empty()) write_json(emit_dual, io::dual(w));
      auto rep = verify_dual(prob, w);
      run.accepted = rep.accepted;
      run.values["value"] = exact(rep.value);
      run.values["expected"] = exact(Rational(1) - Rational(pigeons, holes));
      run.values["psd"] = certifies_psd(rep.certificate);
      run.values["rank"] = rep.rank;
      run.values["constraints"] = prob.constraints.size();
      if (!rep.reason.empty()) run.notes.push_back(rep.reason);
      return run;
    };
  });

  auto* qtight = leaf(qphp, "tight", "tight family for the quantitative bound");
  qtight->add_option("--pigeons", pigeons)->required();
  qtight->add_option("--holes", holes)->required();
  qtight->add_option("--beta", beta);
  qtight->add_option("--out", outf);
  qtight->callback([&] {
    command = "qphp tight";
    action = [&] {
      Run run;
      auto f = tight_example(pigeons, holes, Rational::parse(beta));
      if (!outf.empty()) write_json(outf, io::family(f));
      add_report(run, verify_family(f));
      auto b = check_quantitative_bound(f);
      run.accepted = run.accepted && b.holds && b.tight;
      run.values["beta"] = exact(b.beta);
      run.values["bound"] = exact(b.bound);
      run.values["max_overlap"] = exact(b.overlap.value);
      run.values["at"] = {{"i", b.overlap.i}, {"i2", b.overlap.i2}, {"j", b.overlap.j}};
      run.values["tight"] = b.tight;
      return run;
    };
  });

  auto* qweak = leaf(qphp, "weak", "iterate the weak bound over halvings of the holes");
  qweak->add_option("--family", family);
  qweak->add_option("--pigeons", pigeons);
  qweak->add_option("--holes", holes);
  qweak->add_option("--beta", beta);
  qweak->callback([&] {
    command = "qphp weak";
    action = [&] {
      Run run;
      PigeonFamily f;
      if (!family.empty()) {
        f = io::family_from(io::read_file(family));
      } else {
        if (pigeons <= 0 || holes <= 0) fail(ErrorKind::Usage, "give --family or --pigeons and --holes");
        f = tight_example(pigeons, holes, Rational::parse(beta));
      }
      auto t = iterate_weak_qphp(f);
      run.accepted = t.final_value >= t.guaranteed;
      run.values["start"] = exact(t.start);
      json steps = json::array();
      for (const auto& s : t.steps) steps.push_back({{"holes", s.holes}, {"value", exact(s.value)}});
      run.values["steps"] = steps;
      run.values["final_hole"] = t.final_hole;
      run.values["final_value"] = exact(t.final_value);
      run.values["guaranteed"] = exact(t.guaranteed);
      if (t.witness) {
        run.values["witness"] = {
            {"i", t.witness->i}, {"i2", t.witness->i2}, {"j", t.witness->j}, {"overlap", exact(t.witness->value)}};
      }
      return run;
    };
  });

  auto* conic = app.add_subcommand("conic", "feasibility problems and their certificates");
  conic->require_subcommand(1);
  auto* vp = leaf(conic, "verify-primal", "check a rank-1, vector or Gram solution");
  vp->add_option("--problem", problem)->required();
  vp->add_option("--solution", solution)->required();
  vp->callback([&] {
    command = "conic verify-primal";
    action = [&] {
      Run run;
      auto p = io::problem_from(io::read_file(problem));
      add_report(run, verify_primal(p, io::primal_from(io::read_file(solution))));
      return run;
    };
  });
  auto* vd = leaf(conic, "verify-dual", "check a Farkas witness");
  vd->add_option("--problem", problem);
  vd->add_option("--pigeons", pigeons);
  vd->add_option("--holes", holes);
  vd->add_option("--dual", dualf)->required();
  vd->callback([&] {
    command = "conic verify-dual";
    action = [&] {
      Run run;
      auto p = problem_arg(problem, pigeons, holes);
      auto rep = verify_dual(p, io::dual_from(io::read_file(dualf)));
      run.accepted = rep.accepted;
      run.values["value"] = exact(rep.value);
      run.values["psd"] = certifies_psd(rep.certificate);
      run.values["rank"] = rep.rank;
      if (const auto* neg = std::get_if<NegWitness>(&rep.certificate)) {
        json v = json::array();
        for (const auto& c : neg->v) v.push_back(io::rational(c));
        run.values["negative_direction"] = v;
        run.values["negative_value"] = exact(neg->value);
      }
      if (!rep.reason.empty()) run.notes.push_back(rep.reason);
      return run;
    };
  });

  auto* sos = app.add_subcommand("sos", "degree-2 sum-of-squares refutations");
  sos->require_subcommand(1);
  auto* sx = leaf(sos, "extract", "turn a verified dual into a certificate");
  sx->add_option("--problem", problem);
  sx->add_option("--pigeons", pigeons);
  sx->add_option("--holes", holes);
  sx->add_option("--dual", dualf);
  sx->add_option("--out", outf);
  sx->callback([&] {
    command = "sos extract";
    action = [&] {
      Run run;
      auto p = problem_arg(problem, pigeons, holes);
      DualWitness w;
      if (!dualf.empty()) {
        w = io::dual_from(io::read_file(dualf));
      } else if (pigeons > 0 && holes > 0) {
        w = qphp_dual_witness(pigeons, holes);
      } else {
        fail(ErrorKind::Usage, "give --dual or --pigeons and --holes");
      }
      auto c = sos_from_dual(p, w);
      if (!outf.empty()) write_json(outf, io::sos(c));
      auto rep = verify_sos(c, p);
      run.accepted = rep.accepted;
      run.values["constant"] = exact(c.constant);
      run.values["squares"] = c.squares.size();
      run.values["variables"] = c.dim * c.dim;
      if (!rep.reason.empty()) run.notes.push_back(rep.reason);
      return run;
    };
  });
  auto* sv = leaf(sos, "verify", "expand and check a certificate");
  sv->add_option("--problem", problem);
  sv->add_option("--pigeons", pigeons);
  sv->add_option("--holes", holes);
  sv->add_option("--cert", cert)->required();
  sv->callback([&] {
    command = "sos verify";
    action = [&] {
      Run run;
      auto p = problem_arg(problem, pigeons, holes);
      auto c = io::sos_from(io::read_file(cert));
      auto rep = verify_sos(c, p);
      run.accepted = rep.accepted;
      run.values["constant"] = exact(c.constant);
      run.values["constant_negative"] = rep.constant_negative;
      if (rep.first_mismatch) run.values["first_mismatch"] = monomial_str(*rep.first_mismatch);
      if (!rep.reason.empty()) run.notes.push_back(rep.reason);
      return run;
    };
  });

  auto* g2 = app.add_subcommand("gamma2", "gamma-2 protocols");
  g2->require_subcommand(1);
  auto* gv = leaf(g2, "verify", "check a protocol against a relation");
  gv->add_option("--protocol", protocol)->required();
  gv->add_option("--relation", relationf);
  gv->add_option("--eq", eq);
  gv->callback([&] {
    command = "gamma2 verify";
    action = [&] {
      Run run;
      auto pi = io::gamma2_from(io::read_file(protocol));
      add_report(run, verify_gamma2(pi, relation_arg(relationf, eq)));
      return run;
    };
  });
  auto* ge = leaf(g2, "eq", "the equality protocol");
  ge->add_option("--l", l);
  ge->add_option("--d", d)->required();
  ge->add_flag("--verify", verify);
  ge->add_option("--out", outf);
  ge->callback([&] {
    command = "gamma2 eq";
    action = [&] {
      Run run;
      auto pi = equality_protocol(l, d);
      if (!outf.empty()) write_json(outf, io::gamma2(pi));
      auto c = equality_coefficients(l, d);
      run.values["c"] = exact(c.c);
      run.values["p"] = exact(c.p);
      run.values["q"] = exact(c.q);
      run.values["r"] = exact(c.r);
      run.values["leaves"] = pi.structure.leaves().size();
      if (verify) {
        auto r = equality_relation(d);
        add_report(run, verify_gamma2(pi, r));
        bool sums = leaf_sum_check(pi, pi.structure.leaves());
        auto mf = mf_decomposition_check(pi, r);
        run.accepted = run.accepted && sums && mf.holds;
        run.values["leaf_sum"] = sums;
        run.values["decomposition"] = mf.holds;
        run.values["gamma2_upper_bound"] = mf.one_leaves;
      }
      return run;
    };
  });
  auto* gk = leaf(g2, "kw", "Karchmer-Wigderson protocol built from equality calls");
  gk->add_option("--fn", fn)->required();
  gk->add_option("--n", n)->required();
  gk->add_flag("--verify", verify);
  gk->add_option("--out", outf);
  gk->callback([&] {
    command = "gamma2 kw";
    action = [&] {
      Run run;
      auto kwp = kw_via_equality(TruthTable::from_hex(n, fn));
      if (!outf.empty()) write_json(outf, io::gamma2(kwp.protocol));
      run.values["equality_calls"] = kwp.equality_calls;
      run.values["edge_depth"] = kwp.edge_depth;
      run.values["speaker_rounds"] = kwp.speaker_rounds;
      run.values["bit_depth"] = kwp.bit_depth;
      run.values["round_bound"] = 2 * ceil_log2(static_cast<std::uint64_t>(n)) + 1;
      if (verify) add_report(run, verify_gamma2(kwp.protocol, kwp.relation));
      return run;
    };
  });
  auto* gd = leaf(g2, "disc", "discrepancy by exhaustive rectangles");
  gd->add_option("--fn", fn)->required();
  gd->add_option("--rows", rows)->required();
  gd->add_option("--cols", cols)->required();
  gd->add_option("--mu", mu, "JSON matrix of rationals; uniform when absent");
  gd->callback([&] {
    command = "gamma2 disc";
    action = [&] {
      Run run;
      if (rows < 1 || cols < 1) fail(ErrorKind::Usage, "--rows and --cols must be positive");
      auto bits = table_bits(fn, static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
      std::vector<std::vector<int>> f(static_cast<std::size_t>(rows), std::vector<int>(static_cast<std::size_t>(cols)));
      for (int x = 0; x < rows; ++x)
        for (int y = 0; y < cols; ++y) f[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = bits[static_cast<std::size_t>(x * cols + y)];
      Rational v;
      if (mu.empty()) {
        v = disc_uniform(f);
      } else {
        auto j = io::read_file(mu);
        std::vector<std::vector<Rational>> m;
        for (const auto& row : j) {
          std::vector<Rational> r;
          for (const auto& e : row) r.push_back(io::rational_from(e));
          m.push_back(std::move(r));
        }
        v = discrepancy(f, m);
      }
      run.values["disc"] = exact(v);
      run.values["cap"] = discrepancy_cap();
      return run;
    };
  });
  auto* gf = leaf(g2, "from-formula", "rank-1 protocol of a formula");
  gf->add_option("--formula", formula)->required();
  gf->add_option("--n", n)->required();
  gf->add_flag("--verify", verify);
  gf->add_option("--out", outf);
  gf->callback([&] {
    command = "gamma2 from-formula";
    action = [&] {
      Run run;
      auto phi = parse_formula(formula);
      auto pi = protocol_from_formula(phi, n);
      if (!outf.empty()) write_json(outf, io::gamma2(pi));
      run.values["normalized"] = normalize(phi).str();
      run.values["depth"] = pi.structure.max_edge_depth();
      run.values["truth_table"] = truth_table(phi, n).hex();
      if (verify) add_report(run, verify_gamma2(pi, kw_relation(truth_table(phi, n))));
      return run;
    };
  });

  auto* ql = app.add_subcommand("qlab", "quantum-lab protocols");
  ql->require_subcommand(1);
  auto* qu = leaf(ql, "universal", "three-round protocol for any Boolean function");
  qu->add_option("--fn", fn);
  qu->add_option("--n", n, "input bits per player")->required();
  qu->add_option("--exhaustive", exhaustive)->check(CLI::IsMember({"on", "off"}));
  qu->add_option("--samples", samples);
  qu->add_option("--seed", seed);
  qu->add_flag("--verify", verify);
  qu->add_option("--out", outf);
  qu->callback([&] {
    command = "qlab universal";
    action = [&] {
      Run run;
      if (n < 1 || n > 8) fail(ErrorKind::Usage, "--n must be between 1 and 8");
      const int side = 1 << n;
      if (exhaustive == "on" || fn.empty()) {
        auto s = universal_sweep(side, side, exhaustive == "on", samples, seed);
        run.accepted = s.accepted == s.tables && s.outputs_match == s.tables;
        run.values["tables"] = s.tables;
        run.values["accepted"] = s.accepted;
        run.values["outputs_match"] = s.outputs_match;
        if (s.first_failure) run.values["first_failure"] = hex_bits(*s.first_failure);
        return run;
      }
      auto bits = table_bits(fn, static_cast<std::size_t>(side * side));
      auto f = function_table(side, side, bits);
      auto pi = universal_protocol(f);
      if (!outf.empty()) write_json(outf, io::qlab(pi));
      auto col = output_column(pi);
      run.values["truth_table"] = hex_bits(bits);
      run.values["output_column"] = col ? json(hex_bits(*col)) : json(nullptr);
      run.accepted = col && *col == bits;
      if (verify) add_report(run, verify_qlab(pi, f));
      return run;
    };
  });
  auto* qv = leaf(ql, "verify", "check a quantum-lab protocol");
  qv->add_option("--protocol", protocol)->required();
  qv->add_option("--relation", relationf);
  qv->add_option("--eq", eq);
  qv->add_option("--fn", fn);
  qv->add_option("--n", n);
  qv->callback([&] {
    command = "qlab verify";
    action = [&] {
      Run run;
      auto pi = io::qlab_from(io::read_file(protocol));
      RelationSpec r;
      if (!fn.empty()) {
        if (n < 1 || n > 8) fail(ErrorKind::Usage, "--n must be between 1 and 8");
        const int side = 1 << n;
        r = function_table(side, side, table_bits(fn, static_cast<std::size_t>(side * side)));
      } else {
        r = relation_arg(relationf, eq);
      }
      add_report(run, verify_qlab(pi, r));
      run.values["level_normalized"] = level_normalized(pi);
      return run;
    };
  });
  auto* q2 = leaf(ql, "two-round", "find the overlap that defeats a two-round protocol for equality");
  q2->add_option("--family", family);
  q2->add_option("--pigeons", pigeons);
  q2->add_option("--holes", holes);
  q2->add_option("--beta", beta);
  q2->add_option("--prefix-bits", prefix_bits, "classical protocol: Alice sends the first k of these bits");
  q2->add_option("--k", k);
  q2->callback([&] {
    command = "qlab two-round";
    action = [&] {
      Run run;
      std::vector<std::vector<Vec>> parts;
      if (!family.empty()) {
        parts = alice_decomposition(io::family_from(io::read_file(family)));
      } else if (prefix_bits > 0) {
        if (k < 0 || k > prefix_bits || prefix_bits > 12) fail(ErrorKind::Usage, "need 0 <= --k <= --prefix-bits <= 12");
        auto sp = InnerProductSpace::create();
        Vec e = Vec::atom(sp, sp->add_unit("e"));
        const int m = 1 << k;
        for (int x = 0; x < (1 << prefix_bits); ++x) {
          std::vector<Vec> row(static_cast<std::size_t>(m), Vec(sp));
          row[static_cast<std::size_t>(x >> (prefix_bits - k))] = e;
          parts.push_back(std::move(row));
        }
      } else if (pigeons > 0 && holes > 0) {
        parts = alice_decomposition(tight_example(pigeons, holes, Rational::parse(beta)));
      } else {
        fail(ErrorKind::Usage, "give --family, --prefix-bits or --pigeons and --holes");
      }
      auto w = two_round_violation(parts);
      run.values["message"] = w.message;
      run.values["x"] = w.x;
      run.values["x2"] = w.x2;
      run.values["y"] = w.y;
      run.values["overlap"] = exact(w.overlap);
      run.notes.push_back(w.conclusion);
      return run;
    };
  });

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    if (as_json) out << json{{"schema", io::kSchema}, {"kind", "run"}, {"outcome", "error"}, {"error", e.what()}}.dump(1) << "\n";
    return 2;
  }

  std::string echo;
  for (const auto& a : args) echo += (echo.empty() ? "" : " ") + a;
  const auto t0 = std::chrono::steady_clock::now();
  Run run;
  try {
    run = action();
  } catch (const Error& e) {
    err << "error (" << kind_name(e.kind()) << "): " << e.what() << "\n";
    if (as_json) {
      out << json{{"schema", io::kSchema}, {"kind", "run"}, {"command", echo}, {"outcome", "error"},
                  {"error_kind", kind_name(e.kind())}, {"error", e.what()}}
                 .dump(1)
          << "\n";
    }
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    if (as_json) {
      out << json{{"schema", io::kSchema}, {"kind", "run"}, {"command", echo}, {"outcome", "error"}, {"error", e.what()}}
                 .dump(1)
          << "\n";
    }
    return 2;
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  const std::string outcome = run.accepted ? "accept" : "reject";
  if (as_json) {
    json j{{"schema", io::kSchema}, {"kind", "run"}, {"command", echo}, {"subcommand", command},
           {"outcome", outcome},    {"values", run.values},      {"notes", run.notes}, {"timing_ms", ms}};
    if (run.report) j["report"] = io::report(*run.report);
    out << j.dump(1) << "\n";
  } else {
    out << outcome << "\n";
    for (const auto& [key, v] : run.values.items()) out << "  " << key << ": " << text_value(v) << "\n";
    for (const auto& note : run.notes) out << "  " << note << "\n";
    if (run.report) out << run.report->summary() << "\n";
  }
  return run.accepted ? 0 : 1;
}

}  // namespace relaxforge
