#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "iest/dataset.hpp"
#include "iest/emoji.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

const std::string kBin = IEST_CLI_BIN;
const std::string kTmp = std::string(IEST_TEST_TMP) + "/cli";

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
  const std::string log = kTmp + "/last_run.log";
  const std::string cmd = kBin + " " + args + " > " + log + " 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.output = slurp(log);
  return r;
}

// overrides shared by every training invocation: small and dropout-free
const std::string kTinyConfig =
    " --set epochs=2 --set batch_size=16 --set word_dim=8 --set lstm_hidden=8"
    " --set fc_hidden=8 --set char_emb_dim=4 --set char_vocab=257"
    " --set cnn_filter_widths=1,2 --set cnn_filter_counts=4,4"
    " --set dropout_word=0 --set dropout_sentence=0 --set dropout_fc=0";

struct Fixture {
  Fixture() {
    std::system(("mkdir -p " + kTmp + "/probs").c_str());
  }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "usage errors exit with code 2") {
  CHECK(run("").exit_code == 2);
  CHECK(run("no-such-command").exit_code == 2);
  CHECK(run("train --train only").exit_code == 2);  // missing required options
}

TEST_CASE_FIXTURE(Fixture, "gen-data is deterministic and balanced") {
  auto r1 = run("gen-data --out " + kTmp + "/gen_a.tsv --num 60 --seed 5");
  auto r2 = run("gen-data --out " + kTmp + "/gen_b.tsv --num 60 --seed 5");
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(kTmp + "/gen_a.tsv") == slurp(kTmp + "/gen_b.tsv"));

  auto r3 = run("gen-data --out " + kTmp + "/gen_c.tsv --num 60 --seed 6");
  REQUIRE(r3.exit_code == 0);
  CHECK(slurp(kTmp + "/gen_a.tsv") != slurp(kTmp + "/gen_c.tsv"));

  CHECK(run("gen-data --out " + kTmp + "/gen_d.tsv --num 3").exit_code == 3);
}

TEST_CASE_FIXTURE(Fixture, "preprocess applies the substitution table") {
  {
    std::ofstream in(kTmp + "/raw.tsv", std::ios::binary);
    in << "joy\tI feel [#TRIGGERWORD#] \U0001F602 [NEWLINE] @USERNAME "
          "http://url.removed\n";
  }
  auto r = run("preprocess --in " + kTmp + "/raw.tsv --out " + kTmp + "/pre.tsv");
  REQUIRE(r.exit_code == 0);
  auto text = slurp(kTmp + "/pre.tsv");
  CHECK(text.find("__TRIGGERWORD__") != std::string::npos);
  CHECK(text.find("__NEWLINE__") != std::string::npos);
  CHECK(text.find("__USERNAME__") != std::string::npos);
  CHECK(text.find("__URL__") != std::string::npos);
  CHECK(text.find("[#TRIGGERWORD#]") == std::string::npos);
  CHECK(text.find("\U0001F602") != std::string::npos);

  auto rs = run("preprocess --in " + kTmp + "/raw.tsv --out " + kTmp +
                "/pre_strip.tsv --strip-emoji");
  REQUIRE(rs.exit_code == 0);
  CHECK(slurp(kTmp + "/pre_strip.tsv").find("\U0001F602") == std::string::npos);
}

TEST_CASE_FIXTURE(Fixture, "train, predict, evaluate, ensemble round trip") {
  const std::string train_tsv = kTmp + "/train.tsv";
  const std::string val_tsv = kTmp + "/val.tsv";
  REQUIRE(run("gen-data --out " + train_tsv + " --num 90 --seed 1 --cue-signal 1.0").exit_code == 0);
  REQUIRE(run("gen-data --out " + val_tsv + " --num 30 --seed 2 --cue-signal 1.0").exit_code == 0);

  // gold labels for the validation file
  auto val_ds = iest::load_dataset(val_tsv, iest::EmojiDatabase::builtin());
  iest::save_label_file(val_ds.labels(), kTmp + "/gold.txt");

  const std::string ckpt = kTmp + "/model.ckpt";
  auto tr = run("train --train " + train_tsv + " --val " + val_tsv + " --out " +
                ckpt + " --history " + kTmp + "/hist.csv --seed 11" + kTinyConfig);
  REQUIRE(tr.exit_code == 0);
  CHECK(tr.output.find("val accuracy") != std::string::npos);

  // manifest references the artifact and records digests
  auto manifest = nlohmann::json::parse(slurp(ckpt + ".manifest.json"));
  CHECK(manifest["artifacts"][0].get<std::string>() == ckpt);
  CHECK(manifest["seeds"][0].get<std::uint64_t>() == 11);
  CHECK(!manifest["dataset_digests"]["train"].get<std::string>().empty());
  CHECK(slurp(kTmp + "/hist.csv").rfind("epoch,train_loss,val_accuracy", 0) == 0);

  auto pr = run("predict --model " + ckpt + " --in " + val_tsv + " --out " +
                kTmp + "/pred.txt --probs " + kTmp + "/probs/m0.ckpt");
  REQUIRE(pr.exit_code == 0);
  auto preds = iest::load_label_file(kTmp + "/pred.txt");
  CHECK(preds.size() == 30);

  auto ev = run("evaluate --pred " + kTmp + "/pred.txt --gold " + kTmp + "/gold.txt");
  REQUIRE(ev.exit_code == 0);
  CHECK(ev.output.find("accuracy\t") != std::string::npos);
  CHECK(ev.output.find("macro\t") != std::string::npos);

  auto evj = run("evaluate --pred " + kTmp + "/pred.txt --gold " + kTmp +
                 "/gold.txt --report json");
  REQUIRE(evj.exit_code == 0);
  CHECK_NOTHROW(nlohmann::json::parse(evj.output));

  // second member for the ensemble search
  const std::string ckpt2 = kTmp + "/model2.ckpt";
  REQUIRE(run("train --train " + train_tsv + " --val " + val_tsv + " --out " +
              ckpt2 + " --seed 12" + kTinyConfig).exit_code == 0);
  REQUIRE(run("predict --model " + ckpt2 + " --in " + val_tsv + " --probs " +
              kTmp + "/probs/m1.ckpt").exit_code == 0);

  auto en = run("ensemble --probs " + kTmp + "/probs --gold " + kTmp + "/gold.txt");
  REQUIRE(en.exit_code == 0);
  CHECK(en.output.rfind("rank\taccuracy\tsize\tmembers", 0) == 0);
  CHECK(en.output.find("m0.ckpt") != std::string::npos);
}

TEST_CASE_FIXTURE(Fixture, "training twice with one seed is byte-identical") {
  const std::string data = kTmp + "/det.tsv";
  REQUIRE(run("gen-data --out " + data + " --num 48 --seed 3").exit_code == 0);
  auto a = run("train --train " + data + " --val " + data + " --out " + kTmp +
               "/det_a.ckpt --seed 7" + kTinyConfig);
  auto b = run("train --train " + data + " --val " + data + " --out " + kTmp +
               "/det_b.ckpt --seed 7" + kTinyConfig);
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(slurp(kTmp + "/det_a.ckpt") == slurp(kTmp + "/det_b.ckpt"));
}

TEST_CASE_FIXTURE(Fixture, "data and config problems exit with code 3") {
  CHECK(run("evaluate --pred " + kTmp + "/nope.txt --gold " + kTmp + "/nope.txt").exit_code == 3);
  {
    std::ofstream bad(kTmp + "/badlabels.txt", std::ios::binary);
    bad << "joy\nhappiness\n";
  }
  CHECK(run("evaluate --pred " + kTmp + "/badlabels.txt --gold " + kTmp +
            "/badlabels.txt").exit_code == 3);

  const std::string data = kTmp + "/det.tsv";
  REQUIRE(run("gen-data --out " + data + " --num 12 --seed 3").exit_code == 0);
  CHECK(run("train --train " + data + " --val " + data + " --out " + kTmp +
            "/x.ckpt --set not_a_key=1" + kTinyConfig).exit_code == 3);
}
