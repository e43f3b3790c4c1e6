#include "mem/harness/csv.hpp"

#include <cstdio>

#include "mem/errors.hpp"

namespace mem::harness {

namespace {

void put(std::string& s, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  s += buf;
}

}  // namespace

std::string csv_header() {
  return "step,episode,action,extrinsic_reward,intrinsic_reward,beta,total_reward,loss_diff,loss_con,loss_adv_d,"
         "loss_adv_g,policy_loss,disc_accuracy,eval_return\n";
}

std::string csv_row(const agents::LogRow& r) {
  std::string s = std::to_string(r.step) + "," + std::to_string(r.episode) + "," + std::to_string(r.action);
  for (double v : {r.extrinsic_reward, r.intrinsic_reward, r.beta, r.total_reward, r.loss_diff, r.loss_con,
                   r.loss_adv_d, r.loss_adv_g, r.policy_loss, r.disc_accuracy}) {
    s += ',';
    put(s, v);
  }
  s += ',';
  if (r.eval_return) put(s, *r.eval_return);
  s += '\n';
  return s;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot write " + path.string());
  out_ << csv_header();
}

void CsvWriter::write(const agents::LogRow& row) { out_ << csv_row(row); }

void CsvWriter::close() {
  out_.flush();
  if (!out_) throw IoError("write failed for " + path_.string());
  out_.close();
}

}  // namespace mem::harness
