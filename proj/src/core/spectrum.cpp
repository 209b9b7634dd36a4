// Copyright 2026 The opufid Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>

#include "core/error.hpp"
#include "core/fiber_model.hpp"
#include "core/ofdr.hpp"

namespace opufid {

namespace {

// FFTW's planner is not reentrant; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

ReflectivityProfile profile_from_samples(std::span<const double> samples,
                                         const Challenge& challenge) {
  require(samples.size() >= 2, "profile needs at least 2 samples");
  const std::size_t n = samples.size();
  const std::size_t bins = n / 2 + 1;

  std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  std::unique_ptr<fftw_complex, FftwFree> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
  }
  std::copy(samples.begin(), samples.end(), in.get());
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }

  ReflectivityProfile profile;
  const double sweep_time = challenge.sweep_time_s;
  profile.resolution_m =
      kSpeedOfLight / (2.0 * challenge.sweep_rate_hz_per_s * kGroupIndex * sweep_time);
  profile.distance_m.resize(bins);
  profile.magnitude.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    profile.distance_m[k] = static_cast<double>(k) * profile.resolution_m;
    profile.magnitude[k] = std::hypot(out.get()[k][0], out.get()[k][1]);
  }
  return profile;
}

ReflectivityProfile reflectivity_profile(const Target& target, const Challenge& challenge) {
  const auto trace = acquire(target, challenge);
  return profile_from_samples(trace.samples, challenge);
}

}  // namespace opufid
