// Copyright 2026 The gLSTM Captioner Authors
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

// Command-line driver. Each subcommand is also callable in-process, which is
// how the integration tests exercise it.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace glstm::cli {

struct RunConfig {
  std::string subcommand;
  std::string manifest;
  std::string model;
  std::string cca;
  std::string cell = "lstm";
  std::string guidance;  // ret | emb | img; only with cell == glstm
  std::string norm = "none";
  double norm_power = 1.0;
  std::size_t beam_width = 10;
  std::size_t max_length = 30;
  std::uint64_t seed = 1;
  std::size_t hidden = 256;
  std::size_t embed = 256;
  std::size_t cca_dim = 200;
  double cca_p = 4.0;
  double cca_ridge = 1e-6;
  std::string cca_pairing = "caption";  // caption | image
  std::size_t bow_vocab = 3000;
  std::size_t top_t = 15;
  std::string ret_vocab = "cca";  // cca | lstm
  double lr = 1e-4;
  double dropout = 0.5;
  std::size_t epochs = 50;
  std::size_t patience = 5;
  std::size_t min_count = 5;
  bool zero_guidance_init = false;
  bool no_cell_bias = false;
  std::string resume;
  std::string state_out;
  std::string log;
  std::string generated;
  std::string image_id;
  std::string feature_file;
  std::string split = "test";
  std::string out;
};

// Writes the CCA model to `out` and the caption index to `out` + ".index".
void cmd_cca_fit(const RunConfig& config, std::ostream& out);
void cmd_train(const RunConfig& config, std::ostream& out);
void cmd_generate(const RunConfig& config, std::ostream& out);
void cmd_eval(const RunConfig& config, std::ostream& out, std::ostream& err);
void cmd_retrieve(const RunConfig& config, std::ostream& out);

std::string index_path_for(const std::string& cca_path);

// Parses argv and dispatches. Returns the process exit code: 0 on success,
// 2 bad input, 3 numeric failure, 4 I/O failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace glstm::cli
