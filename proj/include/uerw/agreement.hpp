#pragma once

#include <optional>
#include <vector>

#include "uerw/torso_frame.hpp"
#include "uerw/workspace.hpp"

namespace uerw {

// Per-frame octant assignment for one system; missing frames stay missing.
struct OctantSequence {
  std::vector<double> timestamps;
  std::vector<std::optional<OctantLabel>> labels;
};

OctantSequence octant_sequence(const LocalWristTrajectory& wrist_local);

// Agreement and directional error rates per reference octant. Frames
// missing in either stream are excluded pairwise. The denominator is the
// reference system's octant occupancy.
struct OctantAgreement {
  OctantLabel octant;
  std::size_t ref_frames = 0;    // reference frames in this octant (both present)
  std::size_t agreements = 0;
  std::size_t err_ml = 0;        // disagreements differing on the ML axis
  std::size_t err_ap = 0;
  std::size_t err_si = 0;

  std::optional<double> agreement_rate() const {
    if (ref_frames == 0) return std::nullopt;
    return 100.0 * static_cast<double>(agreements) / static_cast<double>(ref_frames);
  }
  std::optional<double> rate(std::size_t tally) const {
    if (ref_frames == 0) return std::nullopt;
    return 100.0 * static_cast<double>(tally) / static_cast<double>(ref_frames);
  }
};

struct AgreementReport {
  std::vector<OctantAgreement> octants;  // all 8 octants, indexed by OctantLabel::index

  const OctantAgreement& by_octant(const OctantLabel& o) const { return octants[o.index()]; }
};

// Throws ValidationError on length or timestamp mismatch.
AgreementReport agreement_report(const OctantSequence& ref, const OctantSequence& test);

struct BlandAltmanResult {
  double mean_difference = 0.0;  // test - reference
  double sd = 0.0;               // sample sd, n-1 denominator
  double lower_limit = 0.0;      // mean - 1.96 sd
  double upper_limit = 0.0;      // mean + 1.96 sd
  std::size_t n = 0;
};

// pairs are (test, reference) values. Requires at least 2 pairs.
BlandAltmanResult bland_altman(const std::vector<std::pair<double, double>>& pairs);

// Nearest-timestamp pairing of two sequences, within half the reference
// frame period; frames without a partner become missing in the aligned test
// sequence. Throws on non-overlapping time ranges.
OctantSequence align_to_reference(const OctantSequence& ref, const OctantSequence& test);

}  // namespace uerw
