#include "mrf/amino.hpp"

#include <cctype>

#include "mrf/errors.hpp"

namespace mrf {

AminoAcid AminoAcid::from_char(char c) {
  const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (int i = 0; i < kStandardResidues; ++i) {
    if (kResidueCodes[i] == upper) return AminoAcid::from_index(i);
  }
  return AminoAcid::from_index(kStandardResidues);
}

QuerySequence make_sequence(std::string id, std::string_view text) {
  QuerySequence seq;
  seq.id = std::move(id);
  seq.residues.reserve(text.size());
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      throw ParseError("sequence '" + seq.id + "' contains whitespace");
    }
    seq.residues.push_back(AminoAcid::from_char(c));
  }
  return seq;
}

const std::array<double, kAlphabetSize>& background_frequencies() {
  static const std::array<double, kAlphabetSize> normalized = [] {
    // Robinson & Robinson amino-acid frequencies, keyed to our alphabet order.
    std::array<double, kAlphabetSize> f{};
    f[AminoAcid::from_char('A').index()] = 0.07805;
    f[AminoAcid::from_char('C').index()] = 0.01925;
    f[AminoAcid::from_char('D').index()] = 0.05364;
    f[AminoAcid::from_char('E').index()] = 0.06295;
    f[AminoAcid::from_char('F').index()] = 0.03856;
    f[AminoAcid::from_char('G').index()] = 0.07377;
    f[AminoAcid::from_char('H').index()] = 0.02199;
    f[AminoAcid::from_char('I').index()] = 0.05142;
    f[AminoAcid::from_char('K').index()] = 0.05744;
    f[AminoAcid::from_char('L').index()] = 0.09019;
    f[AminoAcid::from_char('M').index()] = 0.02243;
    f[AminoAcid::from_char('N').index()] = 0.04487;
    f[AminoAcid::from_char('P').index()] = 0.05203;
    f[AminoAcid::from_char('Q').index()] = 0.04264;
    f[AminoAcid::from_char('R').index()] = 0.05129;
    f[AminoAcid::from_char('S').index()] = 0.07120;
    f[AminoAcid::from_char('T').index()] = 0.05841;
    f[AminoAcid::from_char('V').index()] = 0.06441;
    f[AminoAcid::from_char('W').index()] = 0.01330;
    f[AminoAcid::from_char('Y').index()] = 0.03216;
    double sum = 0.0;
    for (int i = 0; i < kStandardResidues; ++i) sum += f[i];
    for (int i = 0; i < kStandardResidues; ++i) f[i] /= sum;
    f[kStandardResidues] = 0.0;
    return f;
  }();
  return normalized;
}

}  // namespace mrf
