// Copyright (c) 2026 The ppct Authors. All Rights Reserved.
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

#pragma once

#include <string>
#include <vector>

namespace ppct::cli {

// Dispatches the subcommand pipeline. Exit codes: 0 success, 1 usage error,
// 2 data error. Errors are printed to stderr with an "ERROR:" prefix.
int run_cli(const std::vector<std::string>& args);

}  // namespace ppct::cli
