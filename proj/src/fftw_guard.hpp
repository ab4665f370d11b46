// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <mutex>

namespace rfimap::detail {

// The FFTW planner mutates global state; every plan create/destroy in the
// library goes through this lock. Plan execution needs no lock.
std::mutex& fftw_planner_mutex();

}  // namespace rfimap::detail
