#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcn/model.hpp"
#include "lcn/nlp.hpp"
#include "lcn/rng.hpp"

namespace lcn::mastermind {

using Code = std::vector<int>;  // one color index per peg

struct Feedback {
  int blacks = 0;
  int whites = 0;
  bool operator==(const Feedback&) const = default;
};

// blacks = positional matches; whites = multiset color intersection - blacks.
Feedback feedback(const Code& code, const Code& guess);

// All (b, w) pairs achievable for the peg count: b + w <= pegs and not
// (b == pegs-1 and w == 1).
std::vector<Feedback> feasible_feedbacks(int pegs);

Code decode_code(int index, int pegs, int colors);
int encode_code(const Code& code, int colors);

// Minimax guess over all codes: minimizes the worst-case surviving candidate
// count; ties prefer candidate members, then the lexicographically smallest.
int knuth_guess(const std::vector<int>& candidates, int pegs, int colors);

struct GameConfig {
  int pegs = 3;
  int colors = 4;
  int knuth_runs = 3;
  double prior_lo = 0.3;
  double prior_hi = 0.7;
  std::uint64_t seed = 0;
  int count = 200;          // accepted puzzles to generate
  bool fixed_priors = false;
};

struct Round {
  Code guess;
  Feedback fb;
};

struct Puzzle {
  int id = 0;
  int pegs = 0;
  int colors = 0;
  std::vector<Round> board;
  Code hidden;                    // withheld from evaluation
  std::vector<double> lie_probs;  // true P(l_i), one per round
};

// One Algorithm-style generation attempt: three minimax runs against a lying
// code-maker; nullopt when the hidden code was guessed (puzzle rejected).
std::optional<Puzzle> generate_puzzle(const GameConfig& cfg, Rng& rng);

struct Knowledge {
  bool is_and = true;  // alternates, starting with AND
  int first = 0;       // lie atoms (first, first+1), 0-based
  double lo = 0.0;
  double hi = 1.0;
  double exact_p = 0.0;
};

// AND/OR of consecutive lie variables with sound sampled bounds: lower from
// [x, p], upper from [p, y] with (x,y) = (0.09,0.49) for AND, (0.51,0.91) for OR.
std::vector<Knowledge> generate_knowledge(const Puzzle& puzzle, Rng& rng);

// Exact MAP over hidden codes from the board and true lie probabilities.
std::vector<int> ground_truth_map(const Puzzle& puzzle);

using PriorIntervals = std::vector<std::array<double, 2>>;

// Per-round prior intervals handed to the inference methods; default mode
// samples a sub-interval of [0.3,0.7] containing the true probability.
PriorIntervals sample_priors(const Puzzle& puzzle, bool fixed, double lo, double hi, Rng& rng);

enum class Method {
  BayesMidpoint,
  CredalMaximax,
  CredalMaximin,
  LcnMaximax,
  LcnMaximin,
  LcnMaxent,
  NilssonMaximin,
};

const char* method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

struct RunData {
  std::uint64_t seed = 0;
  GameConfig cfg;
  std::vector<Puzzle> puzzles;
  std::vector<std::vector<Knowledge>> knowledge;  // per puzzle
  std::vector<PriorIntervals> priors;             // per puzzle
  std::vector<std::vector<int>> ground_truth;     // per puzzle, argmax codes
};

RunData generate_run(const GameConfig& cfg);

// The LCN over lie atoms l1..lK for one puzzle; knowledge sentences enter with
// tau=false so they imply no dependency.
GroundProgram build_lie_program(const PriorIntervals& priors,
                                const std::vector<Knowledge>* knowledge,
                                bool midpoint_priors);

struct MethodScore {
  std::vector<int> argmax_codes;  // tie set, ascending code index
};

MethodScore score_method(Method method, const Puzzle& puzzle, const PriorIntervals& priors,
                         const std::vector<Knowledge>& knowledge,
                         const nlp::SolverConfig& solver);

struct Accuracy {
  double any_of = 0.0;   // argmax set intersects the ground truth
  double first_of = 0.0; // smallest argmax code is in the ground truth
};

struct EvalResult {
  // per method: per-run accuracies plus mean/stdev across runs
  std::map<Method, std::vector<Accuracy>> per_run;
  std::map<Method, Accuracy> mean;
  std::map<Method, Accuracy> stdev;
};

EvalResult evaluate_methods(const std::vector<RunData>& runs,
                            const std::vector<Method>& methods,
                            const nlp::SolverConfig& solver);

// JSONL round trip: puzzles.jsonl + hidden.jsonl under dir.
void write_run(const RunData& run, const std::string& dir);
RunData read_run(const std::string& dir);

}  // namespace lcn::mastermind
