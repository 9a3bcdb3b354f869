// How much is a helper bit worth?  Support-line and slope diagnostics for
// the one-sided frontier (chain Y - X - Z), plus the two encoder-rate
// variants: independent helper links (where only the decoder-side rate
// matters) and a binned single description (where the encoder link can run
// strictly below the certified decoder-side rate).

#pragma once

#include <span>
#include <vector>

#include "tworate/region.hpp"

namespace tworate {

// J*(lambda) = min I(X;W|U,Z) + lambda I(Y;U|Z) subject to E d <= d, over
// the one-sided family.  Concave and nondecreasing in lambda; every helper
// bit saves at most one description bit, so lambda > 1 never helps beyond
// J*(1).  Throws on lambda < 0 or d below the distortion floor.
double j_star(const SourceModel& m, double lambda, double d, const SearchBudget& budget);

struct SlopeCertificate {
  double max_abs_slope = 0.0;          // steepest rate saving per helper bit
  std::vector<FrontierPoint> frontier; // the enveloped sweep it was read from
};

// Trace the frontier on the grid and report the steepest descent between
// consecutive grid points.  The underlying curve never falls faster than one
// description bit per helper bit.
SlopeCertificate slope_certificate(const SourceModel& m, double d,
                                   std::span<const double> r1_grid,
                                   const SearchBudget& budget);

struct SectionResult {
  double re = 0, rd = 0, d = 0;
  double rate = 0;     // min description rate at helper rate rd, target d
};

// Helper with separate encoder-side and decoder-side links of rates re and
// rd: for re >= rd the region coincides with the single-link region at rd,
// so this returns that section.  re < rd is rejected (open problem, not
// covered here).
SectionResult independent_rates_section(const SourceModel& m, double re, double rd,
                                        double d, const SearchBudget& budget);

struct BinnedRate {
  double re_min = 0;    // I(V;Y) - I(V;X): encoder-side rate after binning
  double r_prime = 0;   // I(V;Y) - I(V;Z): certified decoder-side rate
};

// Single description V of Y, binned against the encoder observation X and
// re-binned against Z.  Under V - Y - X - Z the encoder-side rate never
// exceeds the certified decoder-side rate.  The kernel must target "v"
// conditioned exactly on "y"; the model chain must be Y - X - Z.
BinnedRate binned_encoder_rate(const SourceModel& m, const Kernel& v_given_y);

}  // namespace tworate
