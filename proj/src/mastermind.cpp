#include "lcn/mastermind.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "json.hpp"

#include "lcn/exact.hpp"
#include "lcn/map.hpp"

namespace lcn::mastermind {

using nlohmann::json;

Feedback feedback(const Code& code, const Code& guess) {
  if (code.size() != guess.size())
    throw Error::user("feedback: code and guess lengths differ");
  int blacks = 0;
  std::map<int, int> cc, gc;
  for (std::size_t i = 0; i < code.size(); ++i) {
    if (code[i] == guess[i]) {
      ++blacks;
    } else {
      ++cc[code[i]];
      ++gc[guess[i]];
    }
  }
  int whites = 0;
  for (const auto& [color, n] : cc) {
    auto it = gc.find(color);
    if (it != gc.end()) whites += std::min(n, it->second);
  }
  return {blacks, whites};
}

std::vector<Feedback> feasible_feedbacks(int pegs) {
  std::vector<Feedback> out;
  for (int b = 0; b <= pegs; ++b)
    for (int w = 0; b + w <= pegs; ++w) {
      if (b == pegs - 1 && w == 1) continue;
      out.push_back({b, w});
    }
  return out;
}

Code decode_code(int index, int pegs, int colors) {
  Code c(pegs);
  for (int i = pegs - 1; i >= 0; --i) {
    c[i] = index % colors;
    index /= colors;
  }
  return c;
}

int encode_code(const Code& code, int colors) {
  int v = 0;
  for (int x : code) v = v * colors + x;
  return v;
}

namespace {

int feedback_slot(const Feedback& f, int pegs) { return f.blacks * (pegs + 1) + f.whites; }

int total_codes(int pegs, int colors) {
  int t = 1;
  for (int i = 0; i < pegs; ++i) t *= colors;
  return t;
}

}  // namespace

int knuth_guess(const std::vector<int>& candidates, int pegs, int colors) {
  if (candidates.empty()) throw Error::user("knuth_guess: no candidates");
  if (candidates.size() == 1) return candidates[0];
  const int total = total_codes(pegs, colors);
  std::vector<Code> codes(total);
  for (int i = 0; i < total; ++i) codes[i] = decode_code(i, pegs, colors);
  std::vector<char> is_candidate(total, 0);
  for (int c : candidates) is_candidate[c] = 1;

  int best_guess = -1, best_worst = total + 1;
  bool best_member = false;
  std::vector<int> buckets((pegs + 1) * (pegs + 1));
  for (int g = 0; g < total; ++g) {
    std::fill(buckets.begin(), buckets.end(), 0);
    for (int c : candidates) ++buckets[feedback_slot(feedback(codes[c], codes[g]), pegs)];
    int worst = 0;
    for (int b : buckets) worst = std::max(worst, b);
    bool member = is_candidate[g];
    if (worst < best_worst || (worst == best_worst && member && !best_member)) {
      best_worst = worst;
      best_guess = g;
      best_member = member;
    }
  }
  return best_guess;
}

std::optional<Puzzle> generate_puzzle(const GameConfig& cfg, Rng& rng) {
  const int total = total_codes(cfg.pegs, cfg.colors);
  Puzzle p;
  p.pegs = cfg.pegs;
  p.colors = cfg.colors;
  p.hidden = decode_code(static_cast<int>(rng.next_below(total)), cfg.pegs, cfg.colors);
  const Feedback all_black{cfg.pegs, 0};
  const std::vector<Feedback> feasible = feasible_feedbacks(cfg.pegs);
  bool hidden_guessed = false;

  for (int run = 0; run < cfg.knuth_runs; ++run) {
    std::vector<int> candidates(total);
    for (int i = 0; i < total; ++i) candidates[i] = i;
    for (;;) {
      if (candidates.empty()) break;  // contradiction ends the run
      int gi = knuth_guess(candidates, cfg.pegs, cfg.colors);
      Code guess = decode_code(gi, cfg.pegs, cfg.colors);
      if (guess == p.hidden) hidden_guessed = true;

      double lie_prob = rng.uniform(cfg.prior_lo, cfg.prior_hi);
      Feedback truth = feedback(p.hidden, guess);
      bool lie = rng.bernoulli(lie_prob);
      Feedback fb = truth;
      if (lie) {
        std::vector<Feedback> lies;
        for (const Feedback& f : feasible)
          if (!(f == truth)) lies.push_back(f);
        fb = lies[rng.next_below(lies.size())];
      }
      p.board.push_back({guess, fb});
      p.lie_probs.push_back(lie_prob);
      if (fb == all_black) break;  // the code-breaker believes it succeeded

      std::vector<int> next;
      for (int c : candidates)
        if (feedback(decode_code(c, cfg.pegs, cfg.colors), guess) == fb) next.push_back(c);
      candidates = std::move(next);
    }
  }
  if (hidden_guessed) return std::nullopt;
  return p;
}

std::vector<Knowledge> generate_knowledge(const Puzzle& puzzle, Rng& rng) {
  const int k = static_cast<int>(puzzle.board.size());
  if (k < 2) throw Error::user("knowledge generation needs at least two rounds");
  std::vector<Knowledge> out;
  for (int i = 0; i + 1 < k; ++i) {
    Knowledge kn;
    kn.is_and = (i % 2 == 0);
    kn.first = i;
    double pa = puzzle.lie_probs[i], pb = puzzle.lie_probs[i + 1];
    kn.exact_p = kn.is_and ? pa * pb : pa + pb - pa * pb;
    double x = kn.is_and ? 0.09 : 0.51;
    double y = kn.is_and ? 0.49 : 0.91;
    kn.lo = rng.uniform(x, kn.exact_p);
    kn.hi = rng.uniform(kn.exact_p, y);
    out.push_back(kn);
  }
  return out;
}

std::vector<int> ground_truth_map(const Puzzle& puzzle) {
  const int total = total_codes(puzzle.pegs, puzzle.colors);
  std::vector<double> score(total, 1.0);
  for (int c = 0; c < total; ++c) {
    Code code = decode_code(c, puzzle.pegs, puzzle.colors);
    for (std::size_t r = 0; r < puzzle.board.size(); ++r) {
      bool lied = !(feedback(code, puzzle.board[r].guess) == puzzle.board[r].fb);
      score[c] *= lied ? puzzle.lie_probs[r] : 1.0 - puzzle.lie_probs[r];
    }
  }
  double best = *std::max_element(score.begin(), score.end());
  std::vector<int> out;
  for (int c = 0; c < total; ++c)
    if (score[c] >= best - 1e-12 * std::max(1.0, best)) out.push_back(c);
  return out;
}

PriorIntervals sample_priors(const Puzzle& puzzle, bool fixed, double lo, double hi, Rng& rng) {
  PriorIntervals out;
  for (double p : puzzle.lie_probs) {
    if (fixed)
      out.push_back({lo, hi});
    else
      out.push_back({rng.uniform(lo, p), rng.uniform(p, hi)});
  }
  return out;
}

const char* method_name(Method m) {
  switch (m) {
    case Method::BayesMidpoint: return "bayes-midpoint";
    case Method::CredalMaximax: return "credal-maximax";
    case Method::CredalMaximin: return "credal-maximin";
    case Method::LcnMaximax: return "lcn-maximax";
    case Method::LcnMaximin: return "lcn-maximin";
    case Method::LcnMaxent: return "lcn-maxent";
    case Method::NilssonMaximin: return "nilsson-maximin";
  }
  return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
  for (Method m : {Method::BayesMidpoint, Method::CredalMaximax, Method::CredalMaximin,
                   Method::LcnMaximax, Method::LcnMaximin, Method::LcnMaxent,
                   Method::NilssonMaximin})
    if (name == method_name(m)) return m;
  return std::nullopt;
}

RunData generate_run(const GameConfig& cfg) {
  RunData run;
  run.seed = cfg.seed;
  run.cfg = cfg;
  const int max_attempts = std::max(1000, cfg.count * 500);
  int id = 0;
  for (int attempt = 0; attempt < max_attempts && id < cfg.count; ++attempt) {
    Rng gen(Rng::derive(cfg.seed, attempt));
    std::optional<Puzzle> p = generate_puzzle(cfg, gen);
    if (!p) continue;
    p->id = id;
    Rng krng(Rng::derive(cfg.seed, attempt, 1));
    Rng prng(Rng::derive(cfg.seed, attempt, 2));
    run.knowledge.push_back(generate_knowledge(*p, krng));
    run.priors.push_back(
        sample_priors(*p, cfg.fixed_priors, cfg.prior_lo, cfg.prior_hi, prng));
    run.ground_truth.push_back(ground_truth_map(*p));
    run.puzzles.push_back(std::move(*p));
    ++id;
  }
  if (id < cfg.count)
    throw Error::user("puzzle generation rejected too many attempts; relax the configuration");
  return run;
}

GroundProgram build_lie_program(const PriorIntervals& priors,
                                const std::vector<Knowledge>* knowledge,
                                bool midpoint_priors) {
  GroundProgram gp;
  const int k = static_cast<int>(priors.size());
  for (int i = 0; i < k; ++i) {
    Atom a;
    a.name = "l" + std::to_string(i + 1);
    a.index = i;
    a.text = a.name;
    gp.atoms.push_back(std::move(a));
  }
  auto lie_atom = [&](int i) {
    Formula f = Formula::make_atom(gp.atoms[i].name);
    f.atom_index = i;
    return f;
  };
  for (int i = 0; i < k; ++i) {
    GroundSentence s;
    s.label = "prior_l" + std::to_string(i + 1);
    s.q = lie_atom(i);
    if (midpoint_priors) {
      double mid = 0.5 * (priors[i][0] + priors[i][1]);
      s.lower = s.upper = mid;
    } else {
      s.lower = priors[i][0];
      s.upper = priors[i][1];
    }
    s.source_label = s.label;
    gp.sentences.push_back(std::move(s));
  }
  if (knowledge) {
    for (const Knowledge& kn : *knowledge) {
      GroundSentence s;
      s.label = std::string(kn.is_and ? "and_" : "or_") + std::to_string(kn.first + 1);
      s.q = Formula::make_binary(kn.is_and ? Connective::And : Connective::Or,
                                 lie_atom(kn.first), lie_atom(kn.first + 1));
      s.lower = kn.lo;
      s.upper = kn.hi;
      s.tau = false;  // knowledge must not imply dependency among the lie atoms
      s.source_label = s.label;
      gp.sentences.push_back(std::move(s));
    }
  }
  return gp;
}

namespace {

// Lie pattern of a candidate code against the board, bit r set when round r's
// feedback disagrees with the code.
std::uint64_t lie_pattern(const Puzzle& puzzle, const Code& code) {
  std::uint64_t bits = 0;
  for (std::size_t r = 0; r < puzzle.board.size(); ++r)
    if (!(feedback(code, puzzle.board[r].guess) == puzzle.board[r].fb)) bits |= 1ULL << r;
  return bits;
}

std::vector<std::pair<int, bool>> pattern_literals(std::uint64_t bits, int k) {
  std::vector<std::pair<int, bool>> lits;
  for (int i = 0; i < k; ++i) lits.emplace_back(i, ((bits >> i) & 1ULL) != 0);
  return lits;
}

struct PatternScores {
  std::map<std::uint64_t, double> score;
};

std::vector<int> argmax_codes(const Puzzle& puzzle, const PatternScores& ps) {
  const int total = total_codes(puzzle.pegs, puzzle.colors);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> per_code(total);
  for (int c = 0; c < total; ++c) {
    per_code[c] = ps.score.at(lie_pattern(puzzle, decode_code(c, puzzle.pegs, puzzle.colors)));
    best = std::max(best, per_code[c]);
  }
  std::vector<int> out;
  for (int c = 0; c < total; ++c)
    if (per_code[c] >= best - map_infer::kTieTol) out.push_back(c);
  return out;
}

}  // namespace

MethodScore score_method(Method method, const Puzzle& puzzle, const PriorIntervals& priors,
                         const std::vector<Knowledge>& knowledge,
                         const nlp::SolverConfig& solver) {
  const int total = total_codes(puzzle.pegs, puzzle.colors);
  const int k = static_cast<int>(puzzle.board.size());

  std::set<std::uint64_t> patterns;
  for (int c = 0; c < total; ++c)
    patterns.insert(lie_pattern(puzzle, decode_code(c, puzzle.pegs, puzzle.colors)));

  PatternScores ps;
  switch (method) {
    case Method::BayesMidpoint: {
      GroundProgram gp = build_lie_program(priors, nullptr, true);
      for (std::uint64_t bits : patterns) {
        auto iv = map_infer::score_literals(gp, pattern_literals(bits, k), std::nullopt,
                                            solver, true);
        ps.score[bits] = iv.hi;
      }
      break;
    }
    case Method::CredalMaximax:
    case Method::CredalMaximin: {
      GroundProgram gp = build_lie_program(priors, nullptr, false);
      for (std::uint64_t bits : patterns) {
        auto iv = map_infer::score_literals(gp, pattern_literals(bits, k), std::nullopt,
                                            solver, true);
        ps.score[bits] = method == Method::CredalMaximax ? iv.hi : iv.lo;
      }
      break;
    }
    case Method::LcnMaximax:
    case Method::LcnMaximin: {
      GroundProgram gp = build_lie_program(priors, &knowledge, false);
      for (std::uint64_t bits : patterns) {
        auto iv = map_infer::score_literals(gp, pattern_literals(bits, k), std::nullopt,
                                            solver, true);
        ps.score[bits] = method == Method::LcnMaximax ? iv.hi : iv.lo;
      }
      break;
    }
    case Method::LcnMaxent: {
      GroundProgram gp = build_lie_program(priors, &knowledge, false);
      exact::FactoredMaxent me = exact::factored_query_maxent(gp, solver);
      for (std::uint64_t bits : patterns) {
        double p = 1.0;
        for (int i = 0; i < k; ++i)
          p *= ((bits >> i) & 1ULL) ? me.marginals[i] : 1.0 - me.marginals[i];
        ps.score[bits] = p;
      }
      break;
    }
    case Method::NilssonMaximin: {
      if (k > 12)
        throw Error::capacity("nilsson-maximin needs the full joint over " +
                              std::to_string(k) + " atoms (cap 12)");
      GroundProgram gp = build_lie_program(priors, &knowledge, false);
      for (std::uint64_t bits : patterns) {
        Query q;
        std::vector<Formula> lits;
        for (auto [atom, pos] : pattern_literals(bits, k)) {
          Formula a = Formula::make_atom(gp.atoms[atom].name);
          a.atom_index = atom;
          lits.push_back(pos ? std::move(a) : Formula::make_not(std::move(a)));
        }
        q.q = Formula::make_nary(Connective::And, std::move(lits));
        auto iv = exact::query_interval(gp, q, exact::Mode::NoMarkov, solver);
        ps.score[bits] = iv.lower;
      }
      break;
    }
  }

  MethodScore out;
  out.argmax_codes = argmax_codes(puzzle, ps);
  return out;
}

EvalResult evaluate_methods(const std::vector<RunData>& runs,
                            const std::vector<Method>& methods,
                            const nlp::SolverConfig& solver) {
  EvalResult res;
  for (Method m : methods) {
    for (const RunData& run : runs) {
      int any_hits = 0, first_hits = 0;
      for (std::size_t i = 0; i < run.puzzles.size(); ++i) {
        MethodScore s = score_method(m, run.puzzles[i], run.priors[i], run.knowledge[i], solver);
        const auto& gt = run.ground_truth[i];
        bool any = false;
        for (int c : s.argmax_codes)
          if (std::binary_search(gt.begin(), gt.end(), c)) {
            any = true;
            break;
          }
        if (any) ++any_hits;
        if (!s.argmax_codes.empty() &&
            std::binary_search(gt.begin(), gt.end(), s.argmax_codes.front()))
          ++first_hits;
      }
      Accuracy a;
      a.any_of = run.puzzles.empty() ? 0.0 : double(any_hits) / run.puzzles.size();
      a.first_of = run.puzzles.empty() ? 0.0 : double(first_hits) / run.puzzles.size();
      res.per_run[m].push_back(a);
    }
    const auto& accs = res.per_run[m];
    Accuracy mean{0, 0}, stdev{0, 0};
    for (const Accuracy& a : accs) {
      mean.any_of += a.any_of;
      mean.first_of += a.first_of;
    }
    mean.any_of /= accs.size();
    mean.first_of /= accs.size();
    for (const Accuracy& a : accs) {
      stdev.any_of += (a.any_of - mean.any_of) * (a.any_of - mean.any_of);
      stdev.first_of += (a.first_of - mean.first_of) * (a.first_of - mean.first_of);
    }
    if (accs.size() > 1) {
      stdev.any_of = std::sqrt(stdev.any_of / (accs.size() - 1));
      stdev.first_of = std::sqrt(stdev.first_of / (accs.size() - 1));
    } else {
      stdev = {0, 0};
    }
    res.mean[m] = mean;
    res.stdev[m] = stdev;
  }
  return res;
}

void write_run(const RunData& run, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream puzzles(fs::path(dir) / "puzzles.jsonl");
  std::ofstream hidden(fs::path(dir) / "hidden.jsonl");
  if (!puzzles || !hidden) throw Error::user("cannot write run files under '" + dir + "'");

  for (std::size_t i = 0; i < run.puzzles.size(); ++i) {
    const Puzzle& p = run.puzzles[i];
    json board = json::array();
    for (const Round& r : p.board)
      board.push_back({{"guess", r.guess}, {"feedback", {r.fb.blacks, r.fb.whites}}});
    json knowledge = json::array();
    for (const Knowledge& kn : run.knowledge[i]) {
      std::string fa = "l" + std::to_string(kn.first + 1);
      std::string fb = "l" + std::to_string(kn.first + 2);
      knowledge.push_back({{"formula", "(" + fa + (kn.is_and ? " and " : " or ") + fb + ")"},
                           {"op", kn.is_and ? "and" : "or"},
                           {"first", kn.first},
                           {"lo", kn.lo},
                           {"hi", kn.hi}});
    }
    json priors = json::array();
    for (const auto& pr : run.priors[i]) priors.push_back({pr[0], pr[1]});
    json line = {{"id", p.id},          {"pegs", p.pegs},   {"colors", p.colors},
                 {"board", board},      {"lie_probs", p.lie_probs},
                 {"priors", priors},    {"knowledge", knowledge}};
    puzzles << line.dump() << "\n";
    hidden << json({{"id", p.id}, {"hidden", p.hidden}}).dump() << "\n";
  }

  json meta = {{"seed", run.seed},
               {"pegs", run.cfg.pegs},
               {"colors", run.cfg.colors},
               {"count", static_cast<int>(run.puzzles.size())},
               {"fixed_priors", run.cfg.fixed_priors}};
  std::ofstream(fs::path(dir) / "meta.json") << meta.dump(2) << "\n";
}

RunData read_run(const std::string& dir) {
  namespace fs = std::filesystem;
  RunData run;
  std::ifstream meta_in(fs::path(dir) / "meta.json");
  if (!meta_in) throw Error::user("missing meta.json under '" + dir + "'");
  json meta = json::parse(meta_in);
  run.seed = meta.value("seed", 0ULL);
  run.cfg.seed = run.seed;
  run.cfg.pegs = meta.value("pegs", 0);
  run.cfg.colors = meta.value("colors", 0);
  run.cfg.fixed_priors = meta.value("fixed_priors", false);

  std::ifstream puzzles(fs::path(dir) / "puzzles.jsonl");
  if (!puzzles) throw Error::user("missing puzzles.jsonl under '" + dir + "'");
  std::string line;
  while (std::getline(puzzles, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    Puzzle p;
    p.id = j.at("id").get<int>();
    p.pegs = j.at("pegs").get<int>();
    p.colors = j.at("colors").get<int>();
    for (const json& r : j.at("board")) {
      Round round;
      round.guess = r.at("guess").get<Code>();
      round.fb = {r.at("feedback")[0].get<int>(), r.at("feedback")[1].get<int>()};
      p.board.push_back(std::move(round));
    }
    p.lie_probs = j.at("lie_probs").get<std::vector<double>>();
    std::vector<Knowledge> kns;
    for (const json& k : j.at("knowledge")) {
      Knowledge kn;
      kn.is_and = k.at("op").get<std::string>() == "and";
      kn.first = k.at("first").get<int>();
      kn.lo = k.at("lo").get<double>();
      kn.hi = k.at("hi").get<double>();
      kns.push_back(kn);
    }
    PriorIntervals pr;
    for (const json& b : j.at("priors")) pr.push_back({b[0].get<double>(), b[1].get<double>()});
    run.knowledge.push_back(std::move(kns));
    run.priors.push_back(std::move(pr));
    run.ground_truth.push_back(ground_truth_map(p));
    run.puzzles.push_back(std::move(p));
  }

  std::ifstream hidden(fs::path(dir) / "hidden.jsonl");
  if (hidden) {
    std::size_t i = 0;
    while (std::getline(hidden, line) && i < run.puzzles.size()) {
      if (line.empty()) continue;
      json j = json::parse(line);
      run.puzzles[i++].hidden = j.at("hidden").get<Code>();
    }
  }
  return run;
}

}  // namespace lcn::mastermind
