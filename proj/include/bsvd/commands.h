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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bsvd::cli {

enum ExitCode : int {
  kExitPass = 0,
  kExitVerifyFailed = 1,
  kExitUsage = 2,
};

struct GenOptions {
  int frames = 32;
  int height = 32;
  int width = 32;
  std::string pattern = "translate";  // translate | static
  std::uint64_t seed = 0;
  double sigma = 0.0;                 // AWGN on the 0-255 scale
  std::optional<double> het_a;        // heteroscedastic when a or b is set
  std::optional<double> het_b;
  std::string out_clean;
  std::string out_noisy;
  std::optional<std::string> export_dir;
  bool write_manifest = true;
};

struct DenoiseOptions {
  std::string model;
  std::string weights;
  std::string input;  // sequence file, or a directory of .ppm/.pgm frames
  std::string out;
  std::string mode = "pipeline";  // offline_full | offline_mimo | pipeline | unidirectional
  int t_clip = 8;
  std::string flush = "exact";    // exact | paper
  double sigma = 0.0;             // noise-map level for non-blind models
  std::optional<std::string> export_dir;
  bool write_manifest = true;
  std::ostream* trace = nullptr;  // per-step CSV for pipeline modes
};

struct VerifyOptions {
  std::string a;
  std::string b;
  std::optional<std::string> clean;
  double threshold = 0.0;
  std::optional<std::string> csv_out;
};

struct ProfileOptions {
  std::string model;
  std::optional<std::string> weights;
  std::uint64_t seed = 0;
  std::string mode = "all";  // all | pipeline | mimo | fdvd
  std::vector<int> frames = {32, 64, 128};
  std::vector<int> t_clips = {4, 8, 16};
  int height = 32;
  int width = 32;
};

struct InitOptions {
  std::string model;
  std::uint64_t seed = 0;
  float bias_range = 0.0f;
  std::string out;
};

struct FdvdOptions {
  std::string input;
  std::string out;
  std::string mode = "pipeline";  // pipeline | sliding
  int base_channels = 32;
  std::uint64_t seed = 0;
  double sigma = 25.0;
  std::optional<std::string> report_out;
};

struct AnalyzeOptions {
  std::string model;
  int height = 32;
  int width = 32;
};

// Each command prints human-readable progress to `log` and its report (if
// any) to `out`, returning the process exit code. Usage and I/O errors are
// reported on `log` with kExitUsage.
int cmd_gen(const GenOptions& opt, std::ostream& log);
int cmd_denoise(const DenoiseOptions& opt, std::ostream& log);
int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& log);
int cmd_profile(const ProfileOptions& opt, std::ostream& out, std::ostream& log);
int cmd_init(const InitOptions& opt, std::ostream& log);
int cmd_fdvd(const FdvdOptions& opt, std::ostream& out, std::ostream& log);
int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& log);
// Re-runs the command recorded in a manifest, writing into `out_dir` when
// given (else over the recorded outputs), and compares output digests.
int cmd_replay(const std::string& manifest, const std::optional<std::string>& out_dir,
               std::ostream& log);

}  // namespace bsvd::cli
