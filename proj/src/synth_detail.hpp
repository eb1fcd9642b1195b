#pragma once

// Pieces shared by the parallel synthesizer and its serial reference.

#include <vector>

#include "twinhet/synth.hpp"

namespace twinhet::detail {

struct AcousticLine {
  double frequency;
  double amplitude;
  double phase;
};

/// Sum of log-spaced lines with 1/f amplitudes (1/f^2 power) between 10 Hz
/// and the configured corner, random phases from the acoustic stream.
std::vector<AcousticLine> acoustic_lines(const SimConfig& config);

/// Sum of the tones on each carrier quadrature at time t.
ModeQuadratures tone_quadratures(const std::vector<Tone>& tones, double t);

}  // namespace twinhet::detail
