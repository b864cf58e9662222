// Copyright 2026 The opt-bench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Umbrella header.

#include "optbench/bench.hpp"
#include "optbench/config.hpp"
#include "optbench/errors.hpp"
#include "optbench/gradcheck.hpp"
#include "optbench/model.hpp"
#include "optbench/numerics.hpp"
#include "optbench/optim/baselines.hpp"
#include "optbench/optim/core.hpp"
#include "optbench/optimizer.hpp"
#include "optbench/report.hpp"
#include "optbench/tasks.hpp"
