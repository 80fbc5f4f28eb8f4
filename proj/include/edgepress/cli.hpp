// Copyright 2026 The edgepress authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

namespace edgepress::cli {

// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric error.
int dispatch(int argc, const char* const* argv);
int dispatch(const std::vector<std::string>& args);

// Full help text (root + every subcommand); golden-tested so every flag
// stays documented.
std::string help_text();

}  // namespace edgepress::cli
