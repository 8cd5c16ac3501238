#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mrf {

// Residue alphabet: the 20 standard one-letter codes in alphabetical order,
// followed by X.  X absorbs every non-standard code (B, J, O, U, Z, ...) so
// that downstream tables can treat index 20 as the catch-all column.
inline constexpr int kStandardResidues = 20;
inline constexpr int kAlphabetSize = 21;
inline constexpr char kResidueCodes[kAlphabetSize + 1] = "ACDEFGHIKLMNPQRSTVWYX";

class AminoAcid {
 public:
  constexpr AminoAcid() : index_(kStandardResidues) {}

  static constexpr AminoAcid from_index(int index) {
    return AminoAcid(static_cast<std::uint8_t>(index));
  }

  // Case-insensitive; anything outside the 20 standard codes maps to X.
  static AminoAcid from_char(char c);

  constexpr int index() const { return index_; }
  constexpr char code() const { return kResidueCodes[index_]; }
  constexpr bool is_unknown() const { return index_ == kStandardResidues; }

  friend constexpr bool operator==(AminoAcid a, AminoAcid b) {
    return a.index_ == b.index_;
  }
  friend constexpr bool operator!=(AminoAcid a, AminoAcid b) {
    return a.index_ != b.index_;
  }

 private:
  explicit constexpr AminoAcid(std::uint8_t index) : index_(index) {}
  std::uint8_t index_;
};

// A query sequence: residues only, no gaps.
struct QuerySequence {
  std::string id;
  std::vector<AminoAcid> residues;

  int length() const { return static_cast<int>(residues.size()); }
  AminoAcid operator[](int i) const { return residues[static_cast<std::size_t>(i)]; }
};

// Builds a sequence from raw text, mapping unknown codes to X.  Whitespace is
// rejected; the caller strips it while parsing FASTA.
QuerySequence make_sequence(std::string id, std::string_view text);

// Background residue frequencies (Robinson & Robinson counts), normalized over
// the 20 standard residues.  X has frequency zero: it never contributes to a
// background model and its emission scores are pinned to the sentinel instead.
const std::array<double, kAlphabetSize>& background_frequencies();

}  // namespace mrf
