/* Copyright 2026 The rpsense Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <rpsense/core.hpp>
#include <rpsense/pauli.hpp>
#include <rpsense/model.hpp>
#include <rpsense/states.hpp>
#include <rpsense/dynamics.hpp>
#include <rpsense/transfer.hpp>
#include <rpsense/yields.hpp>
#include <rpsense/correlations.hpp>
#include <rpsense/analysis.hpp>
#include <rpsense/commands.hpp>
