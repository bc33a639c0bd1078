// Copyright (c) 2026 The offnet Authors. All Rights Reserved.
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

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "core/text_util.hpp"
#include "json.hpp"
#include "offnet/offnet.h"
#include "test_support.hpp"

namespace {

using offnet::testing::TempDir;

void collect(const char* text, size_t len, void* user) {
  static_cast<std::string*>(user)->append(text, len);
}

struct Config {
  Config() { EXPECT_EQ(offnet_config_create(&cfg), OFFNET_OK); }
  ~Config() { offnet_config_destroy(cfg); }
  void set(const std::string& k, const std::string& v) {
    ASSERT_EQ(offnet_config_set(cfg, k.c_str(), v.c_str()), OFFNET_OK) << offnet_last_error();
  }
  offnet_config* cfg = nullptr;
};

TEST(CApi, ConfigErrorsAreUsageErrors) {
  Config c;
  EXPECT_EQ(offnet_config_set(c.cfg, "bogus_key", "1"), OFFNET_ERR_USAGE);
  EXPECT_NE(std::string(offnet_last_error()).find("bogus_key"), std::string::npos);
  EXPECT_EQ(offnet_config_set(nullptr, "seed", "1"), OFFNET_ERR_USAGE);
  EXPECT_EQ(offnet_config_load_file(c.cfg, "/nonexistent.conf"), OFFNET_ERR_USAGE);
  EXPECT_EQ(offnet_run_command(c.cfg, "dance", nullptr, nullptr, nullptr), OFFNET_ERR_USAGE);
  std::string echo;
  EXPECT_EQ(offnet_config_echo(c.cfg, collect, &echo), OFFNET_OK);
  EXPECT_NE(echo.find("subtask = A"), std::string::npos);
}

TEST(CApi, LexiconNormalizes) {
  offnet_lexicon* lex = nullptr;
  ASSERT_EQ(offnet_lexicon_create(nullptr, &lex), OFFNET_OK);
  EXPECT_GT(offnet_lexicon_size(lex), 1000u);
  std::string out;
  EXPECT_EQ(offnet_lexicon_normalize(lex, "you a$$hole", collect, &out), OFFNET_OK);
  EXPECT_EQ(out, "you asshole");
  offnet_lexicon_destroy(lex);
}

TEST(CApi, MetricsReport) {
  std::vector<int> gold, pred;
  auto add = [&](int g, int p, int n) {
    for (int i = 0; i < n; ++i) {
      gold.push_back(g);
      pred.push_back(p);
    }
  };
  add(0, 0, 572);
  add(0, 1, 48);
  add(1, 0, 95);
  add(1, 1, 145);
  std::string json;
  ASSERT_EQ(offnet_metrics_report(gold.data(), pred.data(), gold.size(), 2, collect, &json),
            OFFNET_OK);
  EXPECT_EQ(nlohmann::json::parse(json)["macro_f1"].get<double>(), 0.7793);
  EXPECT_EQ(offnet_metrics_report(gold.data(), pred.data(), 0, 2, collect, &json),
            OFFNET_ERR_DATA);
}

TEST(CApi, TrainLoadPredict) {
  TempDir dir("capi");
  offnet::testing::write_olid_fixture(dir.file("olid.tsv"), 120, 5);
  Config c;
  c.set("olid_train", dir.file("olid.tsv"));
  c.set("out_dir", dir.file("out"));
  c.set("n_val", "20");
  c.set("model", "svm");
  std::string log;
  ASSERT_EQ(offnet_run_command(c.cfg, "prepare", nullptr, collect, &log), OFFNET_OK)
      << offnet_last_error();
  ASSERT_EQ(offnet_run_command(c.cfg, "train", nullptr, collect, &log), OFFNET_OK)
      << offnet_last_error();
  EXPECT_NE(log.find("wrote"), std::string::npos);

  offnet_model* model = nullptr;
  ASSERT_EQ(offnet_model_load(dir.file("out/model.offmdl").c_str(), nullptr, &model), OFFNET_OK);
  const char* texts[] = {"lovely sunny garden walk", "stupid idiot clown"};
  int labels[2];
  double probs[2];
  ASSERT_EQ(offnet_model_predict(model, texts, 2, labels, probs), OFFNET_OK);
  EXPECT_EQ(labels[0], 0);
  EXPECT_EQ(labels[1], 1);
  EXPECT_GE(probs[0], 0.5);
  EXPECT_STREQ(offnet_model_class_name(model, 1), "OFF");
  offnet_model_destroy(model);

  offnet::text::write_file(dir.file("bad.offmdl"), "XXXXXXX\n{}\n");
  EXPECT_EQ(offnet_model_load(dir.file("bad.offmdl").c_str(), nullptr, &model), OFFNET_ERR_DATA);
  EXPECT_NE(std::string(offnet_last_error()).find("magic"), std::string::npos);
}

// ---------------------------------------------------------------------------
// CLI exit codes

int run(const std::string& args, std::string* out = nullptr) {
  const std::string cmd = std::string(OFFNET_CLI_PATH) + " " + args + " 2>/dev/null";
  std::FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return -1;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), p)) > 0)
    if (out) out->append(buf, n);
  const int status = ::pclose(p);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  TempDir dir("cli");
  offnet::testing::write_olid_fixture(dir.file("olid.tsv"), 100, 8);
  offnet::testing::write_embeddings_fixture(dir.file("emb.txt"), 5, 1);
  const std::string out = " --out-dir " + dir.file("out");
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("prepare --set nonsense=1" + out), 1);
  EXPECT_EQ(run("prepare --set n_val" + out), 1);
  EXPECT_EQ(run("prepare --olid-train " + dir.file("missing.tsv") + out), 2);
  EXPECT_EQ(run("prepare --olid-train " + dir.file("olid.tsv") + " --set n_val=20" + out), 0);

  // config file, then CLI flags on top
  offnet::text::write_file(dir.file("run.conf"),
                           "model = svm\nmax_epochs = 99\nembeddings = " + dir.file("emb.txt") +
                               "\nlstm_units = 4\nfc1_units = 4\nconv1_filters = 4\n"
                               "conv2_filters = 4\nchar_emb_dim = 4\n");
  EXPECT_EQ(run("train -c " + dir.file("run.conf") + " --model deep --max-epochs 2" + out), 0);
  const std::string echo = offnet::text::read_file(dir.file("out/config_echo.conf"));
  EXPECT_NE(echo.find("model = deep\n"), std::string::npos);
  EXPECT_NE(echo.find("max_epochs = 2\n"), std::string::npos);
  EXPECT_NE(echo.find("lstm_units = 4\n"), std::string::npos);

  offnet::text::write_file(dir.file("in.txt"), "");
  std::string csv;
  EXPECT_EQ(run("predict --checkpoint " + dir.file("out/model.offmdl") + " --input " +
                    dir.file("in.txt"),
                &csv),
            0);
  EXPECT_EQ(csv, "id,label,probability\n");

  // Diverging optimisation is a numeric failure.
  EXPECT_EQ(run("train -c " + dir.file("run.conf") +
                " --model deep --set learning_rate=1e30 --set max_epochs=5" + out),
            3);
}

}  // namespace
