// Copyright 2026 The BSVD Stream Authors. All Rights Reserved.
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

#include <stdexcept>
#include <string>

namespace bsvd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid shapes, channel counts, model parameters or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An operation was issued in a state that does not admit it, e.g. a frame
// pushed into a stream that has already been flushed.
class StateError : public Error {
 public:
  using Error::Error;
};

// The network description cannot be turned into a streaming pipeline.
class CompileError : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated sequence / config files.
class FormatError : public Error {
 public:
  using Error::Error;
};

class WeightFileError : public Error {
 public:
  enum class Kind {
    kIo,
    kBadMagic,
    kVersionMismatch,
    kTruncated,
    kDimMismatch,
    kIncompleteStore,
  };

  WeightFileError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace bsvd
