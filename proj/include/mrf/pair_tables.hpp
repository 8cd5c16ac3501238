#pragma once

#include <array>
#include <iosfwd>
#include <string>

#include "mrf/amino.hpp"

namespace mrf {

// Residues involved in an X sentinel lookup, and probability-0 events
// elsewhere, are charged this cost (= -ln 1e-4).
inline constexpr double kSentinelCost = 9.21;

enum class Exposure : std::uint8_t { Buried, Exposed };

char exposure_code(Exposure e);          // 'b' / 'e'
Exposure exposure_from_code(char c);     // throws ParseError on anything else

// One 21x21 grid of pairwise interaction costs.  Rows are indexed by the
// residue that occurs LATER in the sequence, columns by the EARLIER one;
// the grid is not symmetric, so the order matters.
class PairScoreGrid {
 public:
  PairScoreGrid();

  double at(AminoAcid later, AminoAcid earlier) const {
    return cells_[static_cast<std::size_t>(later.index())]
                 [static_cast<std::size_t>(earlier.index())];
  }
  void set(AminoAcid later, AminoAcid earlier, double value) {
    cells_[static_cast<std::size_t>(later.index())]
          [static_cast<std::size_t>(earlier.index())] = value;
  }

 private:
  std::array<std::array<double, kAlphabetSize>, kAlphabetSize> cells_;
};

// The buried/exposed pair of grids used for strand-pair scoring.
struct PairScoreTables {
  PairScoreGrid buried;
  PairScoreGrid exposed;

  const PairScoreGrid& grid(Exposure e) const {
    return e == Exposure::Buried ? buried : exposed;
  }
  double score(Exposure e, AminoAcid later, AminoAcid earlier) const {
    return grid(e).at(later, earlier);
  }
};

// Parses one grid from tab-separated text: a header row listing the 21
// residue codes, then 21 rows each led by its residue code.  Cells must be
// finite, in (0, 9.21], and every X row/column cell must equal the sentinel.
PairScoreGrid parse_pair_grid(std::istream& in, const std::string& origin);
PairScoreGrid load_pair_grid(const std::string& path);

PairScoreTables load_pair_tables(const std::string& buried_path,
                                 const std::string& exposed_path);

// Writes a grid in the same layout parse_pair_grid accepts (round-trips).
void write_pair_grid(std::ostream& out, const PairScoreGrid& grid);

}  // namespace mrf
