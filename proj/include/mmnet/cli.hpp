/**
 * Copyright 2026 The mmnet authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef MMNET_CLI_HPP_
#define MMNET_CLI_HPP_

namespace mmnet::cli {

/// Subcommand dispatch. Exit codes: 0 success, 1 usage/validation error,
/// 2 runtime error.
int dispatch(int argc, const char* const* argv);

}  // namespace mmnet::cli

#endif  // MMNET_CLI_HPP_
