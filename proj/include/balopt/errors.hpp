// Copyright 2026 The balopt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace balopt {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define BALOPT_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

// Hyperparameter configurations, search spaces, engine settings.
BALOPT_DEFINE_ERROR(InvalidConfig);
BALOPT_DEFINE_ERROR(SingularMatrix);
BALOPT_DEFINE_ERROR(UnknownPreset);
BALOPT_DEFINE_ERROR(InvalidStart);

// Batches and loss computation.
BALOPT_DEFINE_ERROR(InvalidBatch);
BALOPT_DEFINE_ERROR(DegenerateBatch);

// Retrieval metrics.
BALOPT_DEFINE_ERROR(NoRelevantItems);

// Objectives.
BALOPT_DEFINE_ERROR(OutOfDomain);
BALOPT_DEFINE_ERROR(CommandFailed);
BALOPT_DEFINE_ERROR(ParseFailed);
BALOPT_DEFINE_ERROR(TimedOut);

// File formats and I/O.
BALOPT_DEFINE_ERROR(FormatError);
BALOPT_DEFINE_ERROR(IoError);

// Evaluation harness.
BALOPT_DEFINE_ERROR(InsufficientBudget);

#undef BALOPT_DEFINE_ERROR

}  // namespace balopt
