#include "lcn/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "lcn/bp.hpp"
#include "lcn/depgraph.hpp"
#include "lcn/exact.hpp"
#include "lcn/map.hpp"
#include "lcn/mastermind.hpp"
#include "lcn/model.hpp"
#include "lcn/nlp.hpp"
#include "lcn/parser.hpp"

namespace lcn::cli {

using nlohmann::json;

namespace {

struct Loaded {
  LCNProgram program;
  GroundProgram gp;
};

Loaded load_file(const std::string& path, std::ostream& err) {
  std::ifstream in(path);
  if (!in) throw Error::user("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  ParseResult parsed = parse_program(buf.str());
  if (!parsed.ok()) {
    for (const Diagnostic& d : parsed.diagnostics)
      err << path << ":" << d.line << ":" << d.column << ": " << d.message << "\n";
    throw Error::user("parse failed with " + std::to_string(parsed.diagnostics.size()) +
                      " diagnostic(s)");
  }
  Loaded l;
  l.program = std::move(*parsed.program);
  l.gp = ground(l.program);
  return l;
}

Query parse_query_or_throw(const std::string& text, const Loaded& l, std::ostream& err) {
  QueryParseResult qr = parse_query(text, l.program, l.gp);
  if (!qr.ok()) {
    for (const Diagnostic& d : qr.diagnostics)
      err << "query:" << d.line << ":" << d.column << ": " << d.message << "\n";
    throw Error::user("invalid query '" + text + "'");
  }
  return *qr.query;
}

std::string status_name(nlp::SolveStatus s) {
  switch (s) {
    case nlp::SolveStatus::Converged: return "converged";
    case nlp::SolveStatus::MaxIterations: return "max-iterations";
    case nlp::SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

struct CommonOpts {
  std::uint64_t seed = 0;
  int starts = 16;
  double tol_feas = 1e-7;
  int max_iter = 200;
  int threads = 1;
  bool json_out = false;
  bool no_timing = false;

  nlp::SolverConfig solver() const {
    nlp::SolverConfig c;
    c.seed = seed;
    c.starts = starts;
    c.tol_feas = tol_feas;
    c.max_outer = max_iter;
    c.threads = threads;
    return c;
  }
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--seed", o.seed, "random seed controlling all randomness");
  cmd->add_option("--starts", o.starts, "solver multi-start count");
  cmd->add_option("--tol-feas", o.tol_feas, "solver feasibility tolerance");
  cmd->add_option("--max-iter", o.max_iter, "solver outer iteration cap");
  cmd->add_option("--threads", o.threads, "worker thread cap");
  cmd->add_flag("--json", o.json_out, "machine-readable output");
  cmd->add_flag("--no-timing", o.no_timing, "report seconds as 0 for reproducible output");
}

json interval_json(const std::string& query_text, const exact::IntervalResult& r,
                   const std::string& mode, const Loaded& l, double seconds) {
  json atoms = json::array();
  for (const Atom& a : l.gp.atoms) atoms.push_back(a.text);
  return json{{"query", query_text},
              {"lower", r.lower},
              {"upper", r.upper},
              {"mode", mode},
              {"status", {{"lower", status_name(r.lo.status)}, {"upper", status_name(r.hi.status)}}},
              {"atoms", atoms},
              {"seconds", seconds}};
}

int cmd_check(const std::string& file, const CommonOpts& o, std::ostream& out,
              std::ostream& err) {
  Loaded l = load_file(file, err);
  if (o.json_out) {
    json j = {{"file", file},
              {"atoms", l.gp.atoms.size()},
              {"sentences", l.gp.sentences.size()},
              {"ok", true}};
    out << j.dump(2) << "\n";
  } else {
    out << "ok: " << l.gp.atoms.size() << " atoms, " << l.gp.sentences.size()
        << " ground sentences\n";
  }
  return 0;
}

int cmd_ground(const std::string& file, const CommonOpts& o, std::ostream& out,
               std::ostream& err) {
  Loaded l = load_file(file, err);
  if (o.json_out) {
    json atoms = json::array();
    for (const Atom& a : l.gp.atoms) atoms.push_back(a.text);
    json sentences = json::array();
    for (const GroundSentence& s : l.gp.sentences) {
      json js = {{"label", s.label},
                 {"q", to_text(s.q)},
                 {"lower", s.lower},
                 {"upper", s.upper},
                 {"tau", s.tau},
                 {"source", s.source_label}};
      if (s.r) js["r"] = to_text(*s.r);
      sentences.push_back(std::move(js));
    }
    out << json{{"atoms", atoms}, {"sentences", sentences}}.dump(2) << "\n";
  } else {
    out << pretty_print(l.gp.to_program());
  }
  return 0;
}

int cmd_graph(const std::string& file, bool dot, const CommonOpts& o, std::ostream& out,
              std::ostream& err) {
  Loaded l = load_file(file, err);
  DependencyGraph g = build_dependency_graph(l.gp);
  if (dot) {
    out << to_dot(g);
    return 0;
  }
  if (o.json_out) {
    json nodes = json::array(), edges = json::array();
    for (const auto& n : g.nodes) nodes.push_back({{"text", n.text}, {"atom", n.is_atom}});
    for (const auto& [u, v] : g.edges)
      edges.push_back({{"from", g.nodes[u].text}, {"to", g.nodes[v].text}});
    json stmts = json::array();
    for (const IndependenceStatement& st : markov_statements(g)) {
      json given = json::array(), indep = json::array();
      for (int a : st.given) given.push_back(g.nodes[a].text);
      for (int a : st.independent_of) indep.push_back(g.nodes[a].text);
      stmts.push_back(
          {{"atom", g.nodes[st.x].text}, {"given", given}, {"independent_of", indep}});
    }
    out << json{{"nodes", nodes}, {"edges", edges}, {"markov", stmts}}.dump(2) << "\n";
  } else {
    out << g.nodes.size() << " nodes, " << g.edges.size() << " edges\n";
    for (const IndependenceStatement& st : markov_statements(g)) {
      out << g.nodes[st.x].text << " independent of {";
      for (std::size_t i = 0; i < st.independent_of.size(); ++i)
        out << (i ? "," : "") << g.nodes[st.independent_of[i]].text;
      out << "} given {";
      for (std::size_t i = 0; i < st.given.size(); ++i)
        out << (i ? "," : "") << g.nodes[st.given[i]].text;
      out << "}\n";
    }
  }
  return 0;
}

int cmd_infer(const std::string& file, const std::string& query_text, const std::string& method,
              bool no_markov, bool maxent, bool trace, const CommonOpts& o, std::ostream& out,
              std::ostream& err) {
  Loaded l = load_file(file, err);
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    if (o.no_timing) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  if (maxent) {
    if (query_text.empty()) throw Error::user("--maxent needs --query");
    Query q = parse_query_or_throw(query_text, l, err);
    exact::MaxentResult me = exact::query_maxent(l.gp, o.solver());
    double value = q.conditional ? me.prob(q.q, *q.e) : me.prob(q.q);
    if (o.json_out) {
      json j = {{"query", query_text},
                {"value", value},
                {"entropy", me.entropy},
                {"mode", "maxent"},
                {"seconds", elapsed()}};
      out << j.dump(2) << "\n";
    } else {
      out << "P = " << value << " under the maxent model (entropy " << me.entropy << ")\n";
    }
    return 0;
  }

  if (query_text.empty()) throw Error::user("infer needs --query \"P(...)\"");
  Query q = parse_query_or_throw(query_text, l, err);
  exact::IntervalResult res;
  std::string mode;
  int rounds = -1;

  if (method == "exact") {
    exact::Mode m = no_markov ? exact::Mode::NoMarkov : exact::Mode::Markov;
    res = exact::query_interval(l.gp, q, m, o.solver());
    mode = no_markov ? "exact:no-markov" : "exact";
  } else if (method == "factored") {
    res = exact::factored_query_interval(l.gp, q, o.solver());
    mode = "factored";
  } else if (method == "bp") {
    if (q.conditional || !q.q.is_atom())
      throw Error::user("--method bp answers atomic marginal queries only");
    bp::BpConfig cfg;
    cfg.solver = o.solver();
    cfg.solver.starts = std::min(o.starts, 8);
    cfg.trace = trace;
    bp::BpResult r = bp::run_bp(l.gp, cfg);
    int atom = q.q.atom_index;
    res.lower = r.per_atom[atom].lo;
    res.upper = r.per_atom[atom].hi;
    res.lo = {nlp::SolveStatus::Converged, 0.0};
    res.hi = {nlp::SolveStatus::Converged, 0.0};
    rounds = r.rounds;
    mode = "bp";
    if (trace)
      for (const std::string& line : r.trace) err << line << "\n";
  } else {
    throw Error::user("unknown method '" + method + "' (expected exact, factored, or bp)");
  }

  if (o.json_out) {
    json j = interval_json(query_text, res, mode, l, elapsed());
    if (rounds >= 0) j["rounds"] = rounds;
    out << j.dump(2) << "\n";
  } else {
    out << "P in [" << res.lower << ", " << res.upper << "]  (" << mode << ")\n";
  }
  return 0;
}

int cmd_map(const std::string& file, const std::string& vars_csv, const std::string& criterion,
            const std::string& evidence_text, const CommonOpts& o, std::ostream& out,
            std::ostream& err) {
  Loaded l = load_file(file, err);
  map_infer::MapTask task;
  if (criterion == "maximax")
    task.criterion = map_infer::Criterion::Maximax;
  else if (criterion == "maximin")
    task.criterion = map_infer::Criterion::Maximin;
  else if (criterion == "maxent")
    task.criterion = map_infer::Criterion::Maxent;
  else
    throw Error::user("unknown criterion '" + criterion + "'");

  std::stringstream ss(vars_csv);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name.empty()) continue;
    int idx = l.gp.atom_index(name);
    if (idx < 0) throw Error::user("unknown atom '" + name + "' in --vars");
    task.query_atoms.push_back(idx);
  }
  if (task.query_atoms.empty()) throw Error::user("--vars needs at least one atom");

  if (!evidence_text.empty()) {
    Query eq = parse_query_or_throw("P(" + evidence_text + ")", l, err);
    task.evidence = eq.q;
  }

  map_infer::MapResult res = map_infer::map_assignment(l.gp, task, o.solver());

  auto assignment_json = [&](std::uint32_t bits) {
    json a = json::object();
    for (std::size_t k = 0; k < task.query_atoms.size(); ++k)
      a[l.gp.atoms[task.query_atoms[k]].text] = ((bits >> k) & 1u) != 0;
    return a;
  };
  if (o.json_out) {
    json argmax = json::array();
    for (std::uint32_t bits : res.argmax) argmax.push_back(assignment_json(bits));
    json scores = json::object();
    for (const auto& [bits, s] : res.scores) {
      std::string key;
      for (std::size_t k = 0; k < task.query_atoms.size(); ++k) {
        if (k) key += ",";
        key += l.gp.atoms[task.query_atoms[k]].text;
        key += ((bits >> k) & 1u) ? "=true" : "=false";
      }
      scores[key] = s;
    }
    out << json{{"criterion", criterion}, {"argmax", argmax}, {"scores", scores}}.dump(2)
        << "\n";
  } else {
    out << res.argmax.size() << " argmax assignment(s):\n";
    for (std::uint32_t bits : res.argmax) out << "  " << assignment_json(bits).dump() << "\n";
  }
  return 0;
}

int cmd_mastermind_gen(const mastermind::GameConfig& cfg, const std::string& out_dir,
                       const CommonOpts& o, std::ostream& out) {
  mastermind::RunData run = mastermind::generate_run(cfg);
  mastermind::write_run(run, out_dir);
  if (o.json_out) {
    out << json{{"dir", out_dir}, {"puzzles", run.puzzles.size()}, {"seed", cfg.seed}}.dump(2)
        << "\n";
  } else {
    out << "wrote " << run.puzzles.size() << " puzzles to " << out_dir << "\n";
  }
  return 0;
}

int cmd_mastermind_eval(const std::vector<std::string>& dirs, const std::string& methods_csv,
                        const std::string& out_file, const CommonOpts& o, std::ostream& out) {
  std::vector<mastermind::Method> methods;
  std::stringstream ss(methods_csv);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name.empty()) continue;
    auto m = mastermind::method_from_name(name);
    if (!m) throw Error::user("unknown method '" + name + "'");
    methods.push_back(*m);
  }
  if (methods.empty()) throw Error::user("--methods needs at least one method");

  std::vector<mastermind::RunData> runs;
  for (const std::string& d : dirs) runs.push_back(mastermind::read_run(d));

  nlp::SolverConfig solver = o.solver();
  mastermind::EvalResult res = mastermind::evaluate_methods(runs, methods, solver);

  json j = json::object();
  for (mastermind::Method m : methods) {
    json per_seed_any = json::array(), per_seed_first = json::array();
    for (const auto& a : res.per_run[m]) {
      per_seed_any.push_back(a.any_of);
      per_seed_first.push_back(a.first_of);
    }
    j[mastermind::method_name(m)] = {
        {"any_of", {{"mean", res.mean[m].any_of}, {"stdev", res.stdev[m].any_of},
                    {"per_seed", per_seed_any}}},
        {"first_of", {{"mean", res.mean[m].first_of}, {"stdev", res.stdev[m].first_of},
                      {"per_seed", per_seed_first}}}};
  }
  if (!out_file.empty()) {
    std::ofstream f(out_file);
    if (!f) throw Error::user("cannot write '" + out_file + "'");
    f << j.dump(2) << "\n";
  }
  if (o.json_out) {
    out << j.dump(2) << "\n";
  } else {
    for (mastermind::Method m : methods)
      out << method_name(m) << ": " << res.mean[m].any_of * 100 << "% +- "
          << res.stdev[m].any_of * 100 << "% (any-of), " << res.mean[m].first_of * 100
          << "% (first-of)\n";
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Logical credal network toolkit"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string file, query_text, method = "exact", criterion = "maximax";
  std::string vars_csv, evidence_text, out_dir = "mastermind-run", out_file;
  std::vector<std::string> eval_dirs;
  std::string methods_csv =
      "bayes-midpoint,credal-maximax,credal-maximin,lcn-maximax,lcn-maximin,lcn-maxent";
  bool no_markov = false, maxent = false, dot = false, trace = false;
  mastermind::GameConfig mm_cfg;

  CLI::App* check = app.add_subcommand("check", "parse and validate a program");
  check->add_option("file", file)->required();
  add_common(check, o);

  CLI::App* ground_cmd = app.add_subcommand("ground", "print the ground program");
  ground_cmd->add_option("file", file)->required();
  add_common(ground_cmd, o);

  CLI::App* graph = app.add_subcommand("graph", "dependency graph and Markov statements");
  graph->add_option("file", file)->required();
  graph->add_flag("--dot", dot, "emit Graphviz");
  add_common(graph, o);

  CLI::App* infer = app.add_subcommand("infer", "probability interval for a query");
  infer->add_option("file", file)->required();
  infer->add_option("--query", query_text, "query, e.g. \"P(a | b)\"");
  infer->add_option("--method", method, "exact | factored | bp");
  infer->add_flag("--no-markov", no_markov, "drop the Markov condition (Nilsson mode)");
  infer->add_flag("--maxent", maxent, "evaluate the query under the maxent model");
  infer->add_flag("--trace", trace, "per-round message trace (bp)");
  add_common(infer, o);

  CLI::App* map_cmd = app.add_subcommand("map", "MAP assignment over query atoms");
  map_cmd->add_option("file", file)->required();
  map_cmd->add_option("--vars", vars_csv, "comma-separated atom names")->required();
  map_cmd->add_option("--criterion", criterion, "maximax | maximin | maxent");
  map_cmd->add_option("--evidence", evidence_text, "evidence formula");
  add_common(map_cmd, o);

  CLI::App* mm = app.add_subcommand("mastermind", "benchmark harness");
  mm->require_subcommand(1);
  CLI::App* gen = mm->add_subcommand("gen", "generate a puzzle run");
  gen->add_option("--out", out_dir, "output directory");
  gen->add_option("--pegs", mm_cfg.pegs);
  gen->add_option("--colors", mm_cfg.colors);
  gen->add_option("--count", mm_cfg.count, "accepted puzzles");
  gen->add_option("--runs", mm_cfg.knuth_runs, "code-breaker runs per puzzle");
  gen->add_flag("--fixed-priors", mm_cfg.fixed_priors, "hand every method the [0.3,0.7] prior");
  add_common(gen, o);

  CLI::App* eval = mm->add_subcommand("eval", "score methods over generated runs");
  eval->add_option("dirs", eval_dirs, "run directories")->required();
  eval->add_option("--methods", methods_csv, "comma-separated method list");
  eval->add_option("--out", out_file, "write accuracy.json here");
  add_common(eval, o);

  try {
    std::vector<const char*> argv;
    argv.push_back("lcn");
    for (const std::string& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << e.what() << "\n";
    return 1;
  }

  try {
    if (check->parsed()) return cmd_check(file, o, out, err);
    if (ground_cmd->parsed()) return cmd_ground(file, o, out, err);
    if (graph->parsed()) return cmd_graph(file, dot, o, out, err);
    if (infer->parsed())
      return cmd_infer(file, query_text, method, no_markov, maxent, trace, o, out, err);
    if (map_cmd->parsed())
      return cmd_map(file, vars_csv, criterion, evidence_text, o, out, err);
    if (mm->parsed()) {
      mm_cfg.seed = o.seed;
      if (gen->parsed()) return cmd_mastermind_gen(mm_cfg, out_dir, o, out);
      if (eval->parsed()) return cmd_mastermind_eval(eval_dirs, methods_csv, out_file, o, out);
    }
    err << "no subcommand\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::User: return 1;
      case ErrorCode::Infeasible:
      case ErrorCode::Inconsistent: return 2;
      case ErrorCode::Capacity: return 3;
    }
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lcn::cli
