// SPDX-License-Identifier: Apache-2.0
//
// taskquant - task-based quantization for multi-user MIMO signal recovery
// Copyright (C) 2026 taskquant contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef TASKQUANT_TASKQUANT_HPP
#define TASKQUANT_TASKQUANT_HPP

#include "taskquant/baselines.hpp"
#include "taskquant/channel.hpp"
#include "taskquant/config.hpp"
#include "taskquant/design.hpp"
#include "taskquant/harness.hpp"
#include "taskquant/io.hpp"
#include "taskquant/linalg.hpp"
#include "taskquant/quantizer.hpp"
#include "taskquant/rng.hpp"
#include "taskquant/validation.hpp"

#endif  // TASKQUANT_TASKQUANT_HPP
