#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = REGRET_CLI_PATH;

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run(const std::string& args) {
  static int counter = 0;
  const fs::path out = fs::temp_directory_path() / ("regret_cli_out_" + std::to_string(counter++));
  const std::string cmd = kCli + " " + args + " > " + out.string() + " 2>/dev/null";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(out);
  std::ostringstream buf;
  buf << in.rdbuf();
  r.stdout_text = buf.str();
  fs::remove(out);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

long line_count(const std::string& text) {
  long n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / name; }

}  // namespace

TEST_CASE("simulate writes a trace with one row per iteration and a summary line") {
  const fs::path trace = temp_file("cli_trace.csv");
  auto r = run("simulate lp --iters 10 --seed 1 --n-vars 3 --n-cons 3 --out " + trace.string());
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("\"relative_gap\"") != std::string::npos);
  CHECK(line_count(slurp(trace)) == 11);  // header + 10 rows
  fs::remove(trace);
}

TEST_CASE("simulate rejects bad configs and requires a seed") {
  CHECK(run("simulate lp --iters 0 --seed 1 --out /tmp/x.csv").exit_code == 2);
  CHECK(run("simulate lp --iters 100 --out /tmp/x.csv").exit_code == 2);  // --seed missing
  CHECK(run("simulate bogus --iters 100 --seed 1").exit_code == 2);
  CHECK(run("simulate lp --iters 100 --seed 1 --bogus-flag 3").exit_code == 2);
}

TEST_CASE("simulate qp summaries include the analytic value") {
  const fs::path trace = temp_file("cli_qp_trace.csv");
  auto r = run("simulate qp --iters 300 --seed 2 --n-vars 4 --out " + trace.string());
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("\"analytic\"") != std::string::npos);
  const std::string text = slurp(trace);
  CHECK(text.find("analytic") != std::string::npos);
  fs::remove(trace);
}

TEST_CASE("fixed seeds make file outputs bit-identical") {
  const fs::path a = temp_file("cli_rep_a.csv"), b = temp_file("cli_rep_b.csv");
  CHECK(run("simulate knapsack --iters 50 --seed 9 --n-vars 6 --out " + a.string()).exit_code == 0);
  CHECK(run("simulate knapsack --iters 50 --seed 9 --n-vars 6 --out " + b.string()).exit_code == 0);
  CHECK(slurp(a) == slurp(b));
  fs::remove(a);
  fs::remove(b);
}

TEST_CASE("estimate replays the toy archive from the documentation") {
  const fs::path pairs = temp_file("cli_pairs.csv");
  std::ofstream(pairs) << "c_0,z_0\n1,2\n3,4\n";
  auto r = run("estimate --pairs " + pairs.string() + " --method cov");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("\"value\":1.0") != std::string::npos);
  CHECK(r.stdout_text.find("\"method\":\"cov\"") != std::string::npos);

  // Known-mean centering: (1/2)(1*2 + 3*4) - 0 = 7 with a zero mean.
  auto centered = run("estimate --pairs " + pairs.string() +
                      " --method cov --known-mean 0 --center known");
  CHECK(centered.exit_code == 0);
  CHECK(centered.stdout_text.find("\"value\":7.0") != std::string::npos);
  CHECK(run("estimate --pairs " + pairs.string() + " --method cov --center known").exit_code == 2);

  // Solver-backed methods require a problem description.
  CHECK(run("estimate --pairs " + pairs.string() + " --method residual").exit_code == 2);
  fs::remove(pairs);
}

TEST_CASE("estimate drives solver-backed methods from an instance file") {
  const fs::path pairs = temp_file("cli_pairs2.csv");
  std::ofstream(pairs) << "c_0,c_1,z_0,z_1\n1,0.5,-0.5,-0.25\n-1,2,0.5,-1\n0.25,0.5,-0.125,-0.25\n"
                       << "2,-0.5,-1,0.25\n-0.5,1,0.25,-0.5\n";
  const fs::path inst = temp_file("cli_inst.json");
  std::ofstream(inst) << R"({"type":"qp","Q":[[1,0],[0,1]],"lambda":1.0})";

  auto res = run("estimate --pairs " + pairs.string() + " --method residual --problem " +
                 inst.string());
  CHECK(res.exit_code == 0);
  CHECK(res.stdout_text.find("\"method\":\"residual\"") != std::string::npos);

  auto ci = run("estimate --pairs " + pairs.string() + " --method ci --level 0.95 --problem " +
                inst.string());
  CHECK(ci.exit_code == 0);
  CHECK(ci.stdout_text.find("\"center\"") != std::string::npos);
  CHECK(ci.stdout_text.find("\"half_width\"") != std::string::npos);

  CHECK(run("estimate --pairs /nonexistent.csv --method cov").exit_code == 2);
  fs::remove(pairs);
  fs::remove(inst);
}

TEST_CASE("simulate archives round-trip through estimate") {
  const fs::path trace = temp_file("cli_rt_trace.csv");
  const fs::path pairs = temp_file("cli_rt_pairs.csv");
  auto sim = run("simulate lp --iters 40 --seed 5 --n-vars 3 --n-cons 3 --out " + trace.string() +
                 " --dump-pairs " + pairs.string());
  CHECK(sim.exit_code == 0);
  auto est = run("estimate --pairs " + pairs.string() + " --method cov");
  CHECK(est.exit_code == 0);
  // The archive covariance equals the trace's final running value.
  const std::string trace_text = slurp(trace);
  const auto last_line = trace_text.substr(trace_text.rfind('\n', trace_text.size() - 2) + 1);
  std::stringstream ss(last_line);
  std::string cell;
  std::getline(ss, cell, ',');  // iter
  std::getline(ss, cell, ',');  // running_empirical
  std::getline(ss, cell, ',');  // running_cov
  CHECK(est.stdout_text.find("\"value\":" + cell.substr(0, 8)) != std::string::npos);
  fs::remove(trace);
  fs::remove(pairs);
}

TEST_CASE("spo train and bench write their logs") {
  const fs::path log = temp_file("cli_spo_log.csv");
  auto train = run("spo train --epochs 1 --train 24 --val 12 --test 12 --seed 3 --out " +
                   log.string());
  CHECK(train.exit_code == 0);
  CHECK(train.stdout_text.find("\"best_epoch\"") != std::string::npos);
  CHECK(line_count(slurp(log)) == 2);  // header + one epoch
  fs::remove(log);

  const fs::path timings = temp_file("cli_spo_bench.csv");
  auto bench = run("spo bench --reps 2 --train 16 --val 16 --test 8 --seed 4 "
                   "--scenario-counts 5,10 --out " + timings.string());
  CHECK(bench.exit_code == 0);
  const std::string text = slurp(timings);
  CHECK(line_count(text) == 4);  // header + cov + two scenario rows
  CHECK(text.find("cov,") != std::string::npos);
  fs::remove(timings);
}

TEST_CASE("spo bench default grid produces one cov row plus six scenario rows") {
  const fs::path timings = temp_file("cli_spo_bench_default.csv");
  auto bench = run("spo bench --reps 2 --train 16 --val 16 --test 8 --seed 4 --out " +
                   timings.string());
  CHECK(bench.exit_code == 0);
  CHECK(line_count(slurp(timings)) == 8);
  fs::remove(timings);
}

TEST_CASE("portfolio run validates its source flags and reproduces itself") {
  CHECK(run("portfolio run --seed 1").exit_code == 2);                   // neither source
  CHECK(run("portfolio run --seed 1 --csv /nonexistent.csv --synthetic").exit_code == 2);
  CHECK(run("portfolio run --seed 1 --csv /nonexistent.csv").exit_code == 2);

  const fs::path a = temp_file("cli_port_a.csv"), b = temp_file("cli_port_b.csv");
  const std::string base = "portfolio run --synthetic --n-stocks 30 --months 30 --window 12 "
                           "--portfolios 5 --stocks 10 --seed 6 --out ";
  auto r1 = run(base + a.string());
  CHECK(r1.exit_code == 0);
  CHECK(r1.stdout_text.find("\"mean_forecast\"") != std::string::npos);
  CHECK(run(base + b.string()).exit_code == 0);
  CHECK(slurp(a) == slurp(b));
  fs::remove(a);
  fs::remove(b);
}

TEST_CASE("json format emits an array of row objects") {
  const fs::path trace = temp_file("cli_trace.json");
  auto r = run("simulate lp --iters 12 --seed 1 --n-vars 3 --n-cons 3 --format json --out " +
               trace.string());
  CHECK(r.exit_code == 0);
  const std::string text = slurp(trace);
  CHECK(text.front() == '[');
  CHECK(text.find("\"running_cov\"") != std::string::npos);
  fs::remove(trace);
}
