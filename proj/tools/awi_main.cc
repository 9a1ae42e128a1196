// Copyright 2026 The AWI Authors. All Rights Reserved.
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
// =============================================================================

// awi: train, evaluate and talk to dialogue models.
//
//   awi synth --seed 7 --n 2200 --out train.jsonl --dev-out dev.jsonl --dev-n 200
//   awi train --train train.jsonl --dev dev.jsonl --out model.awi --epochs 10
//   awi eval  --model model.awi --data dev.jsonl
//   awi chat  --model model.awi
//   awi serve --model model.awi --port 8080 --static-dir webchat/dist

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "awi/checkpoint.h"
#include "awi/corpus.h"
#include "awi/errors.h"
#include "awi/inference.h"
#include "awi/service.h"
#include "awi/trainer.h"

namespace awi {
namespace {

struct SynthArgs {
  std::uint64_t seed = 7;
  std::size_t n = 2200;
  std::string out;
  std::string dev_out;
  std::size_t dev_n = 0;
};

struct TrainArgs {
  TrainConfig config;
  std::string train;
  std::string dev;
  std::string out = "model.awi";
  std::string metrics;
  int min_count = 1;
  std::string init = "uniform";
  bool no_carry_state = false;
};

struct EvalArgs {
  std::string model;
  std::string data;
  std::size_t threads = 1;
};

struct DecodeArgs {
  std::string model;
  bool greedy = false;
  std::size_t beam_width = 4;
  std::size_t max_len = 30;
  double length_norm = 0.6;

  DecodeConfig config() const {
    DecodeConfig c;
    c.mode = greedy ? DecodeMode::kGreedy : DecodeMode::kBeam;
    c.beam_width = beam_width;
    c.max_len = max_len;
    c.length_norm = length_norm;
    return c;
  }
};

struct ServeArgs {
  DecodeArgs decode;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  int idle_minutes = 30;
};

void add_decode_flags(CLI::App* cmd, DecodeArgs& a) {
  cmd->add_option("--model", a.model, "Checkpoint file")->required();
  cmd->add_flag("--greedy", a.greedy, "Greedy decoding instead of beam search");
  cmd->add_option("--beam-width", a.beam_width, "Beam width")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-len", a.max_len, "Longest reply in tokens")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--length-norm", a.length_norm,
                  "Exponent of the length penalty");
}

int run_synth(const SynthArgs& a) {
  if (a.dev_n >= a.n) throw DomainError("--dev-n must be smaller than --n");
  if (a.dev_n > 0 && a.dev_out.empty()) {
    throw DomainError("--dev-n needs --dev-out");
  }
  const std::vector<Dialogue> all = synthetic_generate(a.seed, a.n);
  const auto split = all.end() - static_cast<std::ptrdiff_t>(a.dev_n);
  save_dialogues(a.out, {all.begin(), split});
  if (a.dev_n > 0) save_dialogues(a.dev_out, {split, all.end()});
  std::cout << "wrote " << (a.n - a.dev_n) << " dialogues to " << a.out;
  if (a.dev_n > 0) std::cout << ", " << a.dev_n << " to " << a.dev_out;
  std::cout << "\n";
  return 0;
}

int run_train(TrainArgs a) {
  if (a.init != "uniform" && a.init != "zero") {
    throw ConfigurationError("--init must be 'uniform' or 'zero'");
  }
  a.config.carry_state = !a.no_carry_state;
  const std::vector<Dialogue> train = load_dialogues(a.train);
  const std::vector<Dialogue> dev = load_dialogues(a.dev);
  const Vocab vocab = build_vocab(train, a.min_count);
  const auto train_ids = encode_dialogues(train, vocab);
  const auto dev_ids = encode_dialogues(dev, vocab);
  const ModelConfig mc = a.config.model_config(vocab.size());
  AwiParams params = a.init == "zero" ? AwiParams::Zeros(mc)
                                      : AwiParams::Random(mc, a.config.seed);
  std::cerr << "vocabulary " << vocab.size() << ", " << params.num_values()
            << " parameters, " << train.size() << " training dialogues\n";

  std::ofstream metrics;
  if (!a.metrics.empty()) {
    metrics.open(a.metrics);
    if (!metrics) throw DomainError("cannot write " + a.metrics);
  }
  Trainer trainer(a.config);
  trainer.fit(params, train_ids, dev_ids, [&](const EpochRecord& r) {
    char line[160];
    std::snprintf(line, sizeof(line), "%d,%.17g,%.6f,%.6f", r.epoch, r.lr,
                  r.train_ppl, r.dev_ppl);
    std::cout << "epoch " << line << std::endl;
    if (metrics) metrics << line << std::endl;
    // Keep the newest model on disk so long runs can be interrupted.
    save_checkpoint(params, vocab, a.out);
  });
  save_checkpoint(params, vocab, a.out);
  std::printf("dev perplexity %.4f\n",
              evaluate_perplexity(params, dev_ids, a.config.eval_threads));
  return 0;
}

int run_eval(const EvalArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.model);
  const auto data = encode_dialogues(load_dialogues(a.data), ckpt.vocab);
  std::printf("%.4f\n", evaluate_perplexity(ckpt.params, data, a.threads));
  return 0;
}

int run_chat(const DecodeArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.model);
  Session session(ckpt.vocab, ckpt.params.config().hidden, a.config());
  std::string line;
  while (std::cout << "user> " << std::flush && std::getline(std::cin, line)) {
    if (tokenize(line).empty()) continue;
    if (line == "/reset") {
      session = Session(ckpt.vocab, ckpt.params.config().hidden, a.config());
      continue;
    }
    const Reply reply = respond(session, ckpt.params, line);
    std::cout << "agent> " << reply.text << "\n";
  }
  std::cout << "\n";
  return 0;
}

HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

int run_serve(const ServeArgs& a) {
  Checkpoint ckpt = load_checkpoint(a.decode.model);
  ServiceOptions options;
  options.decode = a.decode.config();
  options.idle_timeout = std::chrono::minutes(a.idle_minutes);
  ChatService service(options);
  service.load_model(std::move(ckpt.params), std::move(ckpt.vocab));
  HttpServer server(service, a.static_dir);
  const int port = server.bind(a.host, a.port);
  std::cerr << "listening on http://" << a.host << ":" << port << "\n";
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  server.listen();
  g_server = nullptr;
  return 0;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Multi-turn neural conversation model with intention memory"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic corpus");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--n", synth.n, "Number of dialogues")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--out", synth.out, "Output corpus")->required();
  synth_cmd->add_option("--dev-out", synth.dev_out,
                        "Write the last --dev-n dialogues here");
  synth_cmd->add_option("--dev-n", synth.dev_n, "Dialogues held out for dev");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  TrainConfig& tc = train.config;
  train_cmd->add_option("--train", train.train, "Training corpus")->required();
  train_cmd->add_option("--dev", train.dev, "Development corpus")->required();
  train_cmd->add_option("--out", train.out, "Checkpoint to write");
  train_cmd->add_option("--metrics", train.metrics,
                        "Per-epoch log: epoch, lr, train_ppl, dev_ppl");
  train_cmd->add_option("--hidden", tc.hidden, "Hidden size H")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--align", tc.align, "Alignment size A")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--embed", tc.embed, "Embedding size D")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--layers", tc.layers, "Encoder/decoder depth")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr0", tc.lr0, "Initial learning rate");
  train_cmd->add_option("--epochs", tc.max_epochs, "Number of epochs")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--seed", tc.seed, "Initialization and shuffle seed");
  train_cmd->add_option("--grad-clip", tc.grad_clip,
                        "Global gradient-norm ceiling, <= 0 disables");
  train_cmd->add_flag("--plain-lstm", tc.plain_lstm,
                      "No depth gates between stacked layers");
  train_cmd->add_flag("--no-carry-state", train.no_carry_state,
                      "Reset the dialogue state at every turn");
  train_cmd->add_option("--eval-threads", tc.eval_threads,
                        "Threads for dev evaluation")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--min-count", train.min_count,
                        "Minimum token frequency for the vocabulary")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--init", train.init, "uniform or zero")
      ->check(CLI::IsMember({"uniform", "zero"}));

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Print corpus perplexity");
  eval_cmd->add_option("--model", eval.model, "Checkpoint file")->required();
  eval_cmd->add_option("--data", eval.data, "Corpus to score")->required();
  eval_cmd->add_option("--threads", eval.threads, "Evaluation threads")
      ->check(CLI::PositiveNumber);

  DecodeArgs chat;
  auto* chat_cmd = app.add_subcommand("chat", "Converse on the terminal");
  add_decode_flags(chat_cmd, chat);

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP chat service");
  add_decode_flags(serve_cmd, serve.decode);
  serve_cmd->add_option("--host", serve.host, "Interface to bind");
  serve_cmd->add_option("--port", serve.port, "Port, 0 picks a free one")
      ->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--static-dir", serve.static_dir,
                        "Directory served at /");
  serve_cmd->add_option("--idle-minutes", serve.idle_minutes,
                        "Evict sessions idle this long")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*train_cmd) return run_train(train);
    if (*eval_cmd) return run_eval(eval);
    if (*chat_cmd) return run_chat(chat);
    if (*serve_cmd) return run_serve(serve);
  } catch (const std::exception& e) {
    std::cerr << "awi: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace
}  // namespace awi

int main(int argc, char** argv) { return awi::cli_main(argc, argv); }
