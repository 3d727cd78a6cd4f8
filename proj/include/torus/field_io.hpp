#pragma once

#include <string>

#include "torus/spectral_field.hpp"

namespace torus {

// Plain-text field format. Header line "# cutoff=<K> real=<0|1>", then one
// line per mode: "k1 k2 k3 re1 im1 re2 im2 re3 im3". Writers emit modes in
// lexicographic order with %.17g precision (lossless round trip); readers
// accept modes in any order and reject duplicates, k=0, and modes outside the
// declared cutoff.
void write_field(const std::string& path, const SpectralField& u);
SpectralField read_field(const std::string& path);

}  // namespace torus
