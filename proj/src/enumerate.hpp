#pragma once

// Exact enumeration over codeword pairs and output words shared by the
// induced-distribution and decomposition code paths.

#include <vector>

#include "macres/codebook.hpp"

namespace macres::detail {

// Per-letter density tables indexed [x][y][z] and the sequence thresholds
// they are compared against. A word is atypical when its summed density is
// strictly above the threshold.
struct TypicalityTables {
  std::vector<double> first;
  std::vector<double> second;
  double first_threshold = 0.0;
  double second_threshold = 0.0;
};

// All arrays have |Z|^n entries and are normalized by 1/(M1 M2).
struct OutputMasses {
  std::vector<double> total;
  std::vector<double> atyp1;    // mass of pairs atypical for the first set
  std::vector<double> atyp2;    // mass of pairs atypical for the second set
  std::vector<double> typical;  // mass of pairs typical for both sets
};

OutputMasses accumulate_outputs(const ChannelSpec& ch, const CodebookPair& cb,
                                const TypicalityTables* typ, unsigned threads);

}  // namespace macres::detail
