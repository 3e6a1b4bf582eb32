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

#include <iostream>

#include "CLI11.hpp"
#include "bsvd/commands.h"

namespace cli = bsvd::cli;

int main(int argc, char** argv) {
  CLI::App app{"Bidirectional streaming video denoiser"};
  app.require_subcommand(1);

  cli::GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic clean/noisy sequence pair");
  g->add_option("--frames", gen.frames);
  g->add_option("--height", gen.height);
  g->add_option("--width", gen.width);
  g->add_option("--pattern", gen.pattern)->check(CLI::IsMember({"translate", "static"}));
  g->add_option("--seed", gen.seed);
  g->add_option("--sigma", gen.sigma);
  g->add_option("--het-a", gen.het_a);
  g->add_option("--het-b", gen.het_b);
  g->add_option("--out-clean", gen.out_clean)->required();
  g->add_option("--out", gen.out_noisy)->required();
  g->add_option("--export", gen.export_dir);
  bool gen_no_manifest = false;
  g->add_flag("--no-manifest", gen_no_manifest);

  cli::InitOptions init;
  auto* in = app.add_subcommand("init", "Write deterministic random weights for a model config");
  in->add_option("--model", init.model)->required();
  in->add_option("--seed", init.seed);
  in->add_option("--bias-range", init.bias_range);
  in->add_option("--out", init.out)->required();

  cli::DenoiseOptions den;
  auto* d = app.add_subcommand("denoise", "Denoise a sequence");
  d->add_option("--model", den.model)->required();
  d->add_option("--weights", den.weights)->required();
  d->add_option("--input", den.input)->required();
  d->add_option("--out", den.out)->required();
  d->add_option("--mode", den.mode)
      ->check(CLI::IsMember({"offline_full", "offline_mimo", "pipeline", "unidirectional"}));
  d->add_option("--t-clip", den.t_clip);
  d->add_option("--flush", den.flush)->check(CLI::IsMember({"paper", "exact"}));
  d->add_option("--sigma", den.sigma);
  d->add_option("--export", den.export_dir);
  bool den_no_manifest = false;
  d->add_flag("--no-manifest", den_no_manifest);

  cli::VerifyOptions ver;
  auto* v = app.add_subcommand("verify", "Compare two sequences");
  v->add_option("a", ver.a)->required();
  v->add_option("b", ver.b)->required();
  v->add_option("--clean", ver.clean);
  v->add_option("--threshold", ver.threshold);
  v->add_option("--csv", ver.csv_out);

  cli::ProfileOptions prof;
  auto* p = app.add_subcommand("profile", "Measure memory and operation counts");
  p->add_option("--model", prof.model)->required();
  p->add_option("--weights", prof.weights);
  p->add_option("--seed", prof.seed);
  p->add_option("--mode", prof.mode)->check(CLI::IsMember({"all", "pipeline", "mimo", "fdvd"}));
  p->add_option("--frames", prof.frames);
  p->add_option("--t-clip", prof.t_clips);
  p->add_option("--height", prof.height);
  p->add_option("--width", prof.width);

  cli::FdvdOptions fd;
  auto* f = app.add_subcommand("fdvd", "Run the two-stage frame-buffered baseline");
  f->add_option("--input", fd.input)->required();
  f->add_option("--out", fd.out)->required();
  f->add_option("--mode", fd.mode)->check(CLI::IsMember({"pipeline", "sliding"}));
  f->add_option("--base-channels", fd.base_channels);
  f->add_option("--seed", fd.seed);
  f->add_option("--sigma", fd.sigma);
  f->add_option("--report", fd.report_out);

  cli::AnalyzeOptions an;
  auto* a = app.add_subcommand("analyze", "Report latency, receptive field and buffer memory");
  a->add_option("--model", an.model)->required();
  a->add_option("--height", an.height);
  a->add_option("--width", an.width);

  std::string manifest;
  std::optional<std::string> replay_dir;
  auto* r = app.add_subcommand("replay", "Re-run a recorded command and compare digests");
  r->add_option("manifest", manifest)->required();
  r->add_option("--out-dir", replay_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitUsage;
  }

  if (g->parsed()) {
    gen.write_manifest = !gen_no_manifest;
    return cli::cmd_gen(gen, std::cerr);
  }
  if (in->parsed()) return cli::cmd_init(init, std::cerr);
  if (d->parsed()) {
    den.write_manifest = !den_no_manifest;
    return cli::cmd_denoise(den, std::cerr);
  }
  if (v->parsed()) return cli::cmd_verify(ver, std::cout, std::cerr);
  if (p->parsed()) return cli::cmd_profile(prof, std::cout, std::cerr);
  if (f->parsed()) return cli::cmd_fdvd(fd, std::cout, std::cerr);
  if (a->parsed()) return cli::cmd_analyze(an, std::cout, std::cerr);
  return cli::cmd_replay(manifest, replay_dir, std::cerr);
}
