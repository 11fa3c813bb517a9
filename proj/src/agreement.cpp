#include "uerw/agreement.hpp"

#include <algorithm>
#include <cmath>

#include "uerw/errors.hpp"

namespace uerw {

OctantSequence octant_sequence(const LocalWristTrajectory& wrist_local) {
  OctantSequence seq;
  seq.timestamps = wrist_local.timestamps;
  seq.labels.resize(wrist_local.local.size());
  for (std::size_t f = 0; f < wrist_local.local.size(); ++f)
    if (wrist_local.local[f]) seq.labels[f] = classify_octant(*wrist_local.local[f]);
  return seq;
}

AgreementReport agreement_report(const OctantSequence& ref, const OctantSequence& test) {
  if (ref.labels.size() != test.labels.size())
    throw ValidationError("octant sequence length mismatch");
  for (std::size_t f = 0; f < ref.timestamps.size(); ++f)
    if (ref.timestamps[f] != test.timestamps[f])
      throw ValidationError("octant sequence timestamp mismatch at frame " + std::to_string(f));

  AgreementReport report;
  report.octants.resize(kOctantCount);
  for (int i = 0; i < kOctantCount; ++i) report.octants[i].octant = OctantLabel::from_index(i);

  for (std::size_t f = 0; f < ref.labels.size(); ++f) {
    if (!ref.labels[f] || !test.labels[f]) continue;  // pairwise exclusion
    const OctantLabel r = *ref.labels[f];
    const OctantLabel t = *test.labels[f];
    OctantAgreement& o = report.octants[r.index()];
    ++o.ref_frames;
    if (r == t) {
      ++o.agreements;
    } else {
      // Every differing axis contributes one tally.
      if (r.ml_positive != t.ml_positive) ++o.err_ml;
      if (r.ap_positive != t.ap_positive) ++o.err_ap;
      if (r.v_positive != t.v_positive) ++o.err_si;
    }
  }
  return report;
}

BlandAltmanResult bland_altman(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2)
    throw ValidationError("Bland-Altman needs at least 2 pairs");
  BlandAltmanResult r;
  r.n = pairs.size();
  double sum = 0.0;
  for (const auto& [test, ref] : pairs) sum += test - ref;
  r.mean_difference = sum / static_cast<double>(r.n);
  double ss = 0.0;
  for (const auto& [test, ref] : pairs) {
    const double d = (test - ref) - r.mean_difference;
    ss += d * d;
  }
  r.sd = std::sqrt(ss / static_cast<double>(r.n - 1));
  r.lower_limit = r.mean_difference - 1.96 * r.sd;
  r.upper_limit = r.mean_difference + 1.96 * r.sd;
  return r;
}

OctantSequence align_to_reference(const OctantSequence& ref, const OctantSequence& test) {
  if (ref.timestamps.empty() || test.timestamps.empty())
    throw ValidationError("cannot align empty octant sequences");
  if (ref.timestamps.back() < test.timestamps.front() ||
      test.timestamps.back() < ref.timestamps.front())
    throw ValidationError("octant sequences have non-overlapping time ranges");

  // Half the median reference frame period as the pairing tolerance.
  double tol = 0.0;
  if (ref.timestamps.size() > 1) {
    std::vector<double> dts;
    for (std::size_t i = 1; i < ref.timestamps.size(); ++i)
      dts.push_back(ref.timestamps[i] - ref.timestamps[i - 1]);
    std::nth_element(dts.begin(), dts.begin() + dts.size() / 2, dts.end());
    tol = 0.5 * dts[dts.size() / 2];
  }

  OctantSequence aligned;
  aligned.timestamps = ref.timestamps;
  aligned.labels.resize(ref.timestamps.size());
  for (std::size_t f = 0; f < ref.timestamps.size(); ++f) {
    const double t = ref.timestamps[f];
    auto it = std::lower_bound(test.timestamps.begin(), test.timestamps.end(), t);
    std::size_t best;
    if (it == test.timestamps.end()) {
      best = test.timestamps.size() - 1;
    } else {
      best = static_cast<std::size_t>(it - test.timestamps.begin());
      if (best > 0 && t - test.timestamps[best - 1] < test.timestamps[best] - t) --best;
    }
    if (std::abs(test.timestamps[best] - t) <= tol) aligned.labels[f] = test.labels[best];
  }
  return aligned;
}

}  // namespace uerw
