#include "hiericrf/chain.hpp"

#include "hiericrf/error.hpp"

namespace hiericrf {

ChainSchedule ChainSchedule::build(int depth, int iterations) {
  if (depth < 1) throw InvalidArgument("chain depth must be >= 1");
  if (iterations < 0) throw InvalidArgument("chain iterations must be >= 0");

  ChainSchedule s;
  s.depth_ = depth;
  s.iterations_ = iterations;
  for (int v = 1; v <= depth; ++v) s.levels_.push_back(v);
  if (iterations == 0) return s;

  for (int v = depth - 1; v >= 1; --v) s.levels_.push_back(v);
  for (int it = 1; it < iterations; ++it) {
    for (int v = depth; v >= 1; --v) s.levels_.push_back(v);
  }
  return s;
}

std::vector<int> ChainSchedule::readout_positions() const {
  std::vector<int> pos(depth_, -1);
  for (int i = 0; i < length(); ++i) pos[levels_[i] - 1] = i;
  return pos;
}

std::string render_template(std::string_view text, const ChainSchedule& schedule,
                            std::string_view mask_token) {
  if (mask_token.empty()) throw InvalidArgument("mask token must be non-empty");
  std::string out(text);
  out += ". It was";
  for (const int level : schedule.levels()) {
    out += ' ';
    out += std::to_string(level);
    out += " level: ";
    out += mask_token;
  }
  out += '.';
  return out;
}

std::vector<LabelId> golden_sequence(const LabelPath& path,
                                     const ChainSchedule& schedule) {
  if (static_cast<int>(path.size()) != schedule.depth()) {
    throw LengthMismatch("gold path has " + std::to_string(path.size()) +
                         " labels, schedule depth is " +
                         std::to_string(schedule.depth()));
  }
  std::vector<LabelId> seq;
  seq.reserve(schedule.levels().size());
  for (const int level : schedule.levels()) seq.push_back(path[level - 1]);
  return seq;
}

LabelPath read_out(const std::vector<LabelId>& sequence,
                   const ChainSchedule& schedule) {
  if (static_cast<int>(sequence.size()) != schedule.length()) {
    throw LengthMismatch("sequence length " + std::to_string(sequence.size()) +
                         " does not match schedule length " +
                         std::to_string(schedule.length()));
  }
  LabelPath out;
  for (const int pos : schedule.readout_positions()) out.push_back(sequence[pos]);
  return out;
}

}  // namespace hiericrf
