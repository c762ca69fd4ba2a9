#include "perfmod/repository.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "perfmod/errors.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace perfmod {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// FNV-1a 64-bit over the canonical body text.
std::string fnv1a_hex(const std::string& data) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ordered_json domain_json(const Domain& d) {
  ordered_json out = ordered_json::object();
  for (const auto& [axis, iv] : d) out[axis] = {iv.lo, iv.hi};
  return out;
}

Domain domain_from_json(const ordered_json& j) {
  Domain d;
  for (auto it = j.begin(); it != j.end(); ++it)
    d[it.key()] = Interval{it.value().at(0).get<long long>(),
                           it.value().at(1).get<long long>()};
  return d;
}

ordered_json body_json(const ModelRecord& r) {
  ordered_json body;
  body["key"] = {{"kernel", r.key.kernel},
                 {"flags", flag_string(r.key.binding)},
                 {"machine", r.key.machine},
                 {"threads", r.key.threads}};
  body["metadata"] = {{"created", r.metadata.created},
                      {"strategy", r.metadata.strategy},
                      {"sample_count", r.metadata.sample_count},
                      {"max_rel_err", fmt17(r.metadata.max_rel_err)},
                      {"version", r.metadata.version},
                      {"below_target_accuracy", r.model.below_target_accuracy}};
  body["domain"] = domain_json(r.model.domain);
  ordered_json cells = ordered_json::array();
  for (const Cell& c : r.model.cells) {
    ordered_json cj;
    cj["bounds"] = domain_json(c.bounds);
    ordered_json basis = ordered_json::array();
    for (const BasisTerm& t : c.model.basis) {
      ordered_json term = ordered_json::object();
      for (const auto& [var, e] : t.exps) term[var] = e;
      basis.push_back(term);
    }
    cj["basis"] = basis;
    ordered_json coeffs = ordered_json::object();
    for (Stat st : kAllStats) {
      ordered_json list = ordered_json::array();
      for (double v : c.model.coefficients[static_cast<int>(st)])
        list.push_back(fmt17(v));
      coeffs[stat_name(st)] = list;
    }
    cj["coefficients"] = coeffs;
    cj["diagnostics"] = {{"max_rel_err", fmt17(c.diagnostics.max_rel_err)},
                         {"training_points", c.diagnostics.training_points}};
    cells.push_back(std::move(cj));
  }
  body["cells"] = cells;
  return body;
}

}  // namespace

std::string ModelKey::to_string() const {
  std::string flags = flag_string(binding, '_');
  if (flags.empty()) flags = "noflags";
  return machine + "/" + kernel + "/" + flags + ".t" + std::to_string(threads);
}

std::string serialize_record(const ModelRecord& record) {
  ordered_json body = body_json(record);
  ordered_json file = body;
  file["checksum"] = fnv1a_hex(body.dump());
  return file.dump(2) + "\n";
}

ModelRecord deserialize_record(const std::string& json_text, const std::string& origin) {
  ordered_json file;
  try {
    file = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw IntegrityError(origin + ": unparseable model file (" + e.what() + ")");
  }
  try {
    if (!file.contains("checksum"))
      throw IntegrityError(origin + ": missing checksum");
    std::string stored = file["checksum"].get<std::string>();
    ordered_json body = file;
    body.erase("checksum");
    if (fnv1a_hex(body.dump()) != stored)
      throw IntegrityError(origin + ": checksum mismatch (file corrupted or edited)");

    ModelRecord r;
    r.key.kernel = body["key"]["kernel"].get<std::string>();
    r.key.binding = parse_flag_string(body["key"]["flags"].get<std::string>());
    r.key.machine = body["key"]["machine"].get<std::string>();
    r.key.threads = body["key"]["threads"].get<int>();
    r.metadata.created = body["metadata"]["created"].get<std::string>();
    r.metadata.strategy = body["metadata"]["strategy"].get<std::string>();
    r.metadata.sample_count = body["metadata"]["sample_count"].get<long long>();
    r.metadata.max_rel_err = std::stod(body["metadata"]["max_rel_err"].get<std::string>());
    r.metadata.version = body["metadata"]["version"].get<std::string>();
    r.model.below_target_accuracy = body["metadata"]["below_target_accuracy"].get<bool>();
    r.model.strategy = r.metadata.strategy;
    r.model.global_max_rel_err = r.metadata.max_rel_err;
    r.model.domain = domain_from_json(body["domain"]);
    for (const auto& cj : body["cells"]) {
      Cell c;
      c.bounds = domain_from_json(cj["bounds"]);
      for (const auto& term : cj["basis"]) {
        BasisTerm t;
        for (auto it = term.begin(); it != term.end(); ++it)
          t.exps[it.key()] = it.value().get<int>();
        c.model.basis.push_back(std::move(t));
      }
      for (Stat st : kAllStats)
        for (const auto& v : cj["coefficients"][stat_name(st)])
          c.model.coefficients[static_cast<int>(st)].push_back(
              std::stod(v.get<std::string>()));
      c.diagnostics.max_rel_err =
          std::stod(cj["diagnostics"]["max_rel_err"].get<std::string>());
      c.diagnostics.training_points = cj["diagnostics"]["training_points"].get<int>();
      r.model.cells.push_back(std::move(c));
    }
    if (r.model.cells.empty())
      throw IntegrityError(origin + ": model has no cells");
    return r;
  } catch (const IntegrityError&) {
    throw;
  } catch (const std::exception& e) {
    throw IntegrityError(origin + ": malformed model file (" + e.what() + ")");
  }
}

std::string record_path(const std::string& repo_root, const ModelKey& key) {
  std::string flags = flag_string(key.binding, '_');
  if (flags.empty()) flags = "noflags";
  return (fs::path(repo_root) / key.machine / key.kernel /
          (flags + ".t" + std::to_string(key.threads) + ".model"))
      .string();
}

std::string store(const ModelRecord& record, const std::string& repo_root, bool force) {
  if (record.model.cells.empty())
    throw InputError("refusing to store a model with no cells");
  std::string path = record_path(repo_root, record.key);
  std::error_code ec;
  fs::create_directories(fs::path(path).parent_path(), ec);
  if (ec) throw IoError("cannot create repository directory: " + ec.message());
  if (!force && fs::exists(path))
    throw IoError("model already stored at " + path + " (use force to overwrite)");

  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp);
    out << serialize_record(record);
    if (!out) throw IoError("write failed: " + tmp);
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot finalize " + path + ": " + ec.message());
  return path;
}

ModelRecord lookup(const ModelKey& key, const std::string& repo_root) {
  std::string path = record_path(repo_root, key);
  if (!fs::exists(path)) {
    std::vector<std::string> nearest;
    fs::path kernel_dir = fs::path(repo_root) / key.machine / key.kernel;
    if (fs::is_directory(kernel_dir))
      for (const auto& e : fs::directory_iterator(kernel_dir))
        if (e.path().extension() == ".model")
          nearest.push_back(key.machine + "/" + key.kernel + "/" + e.path().stem().string());
    std::string msg = "no model for " + key.to_string();
    if (!nearest.empty()) {
      msg += "; available: ";
      for (size_t i = 0; i < nearest.size(); ++i)
        msg += (i ? ", " : "") + nearest[i];
    }
    throw MissingModelError(msg, {key.to_string()});
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ModelRecord r = deserialize_record(text, path);
  if (!(r.key == key))
    throw IntegrityError(path + ": stored key " + r.key.to_string() +
                         " does not match path-derived key " + key.to_string());
  return r;
}

std::vector<ModelListing> list_models(const std::string& repo_root,
                                      const std::string& kernel_filter,
                                      const std::string& machine_filter) {
  if (!fs::exists(repo_root)) return {};
  if (!fs::is_directory(repo_root))
    throw IoError("repository root is not a directory: " + repo_root);
  std::vector<ModelListing> out;
  for (const auto& e : fs::recursive_directory_iterator(repo_root)) {
    if (!e.is_regular_file() || e.path().extension() != ".model") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ModelListing l;
    try {
      ModelRecord r = deserialize_record(text, e.path().string());
      l.key = r.key;
      l.metadata = r.metadata;
    } catch (const IntegrityError&) {
      l.key.kernel = "<corrupt>";
      l.metadata.version = "<corrupt>";
    }
    l.path = e.path().string();
    if (!kernel_filter.empty() && l.key.kernel.find(kernel_filter) == std::string::npos)
      continue;
    if (!machine_filter.empty() && l.key.machine.find(machine_filter) == std::string::npos)
      continue;
    out.push_back(std::move(l));
  }
  std::sort(out.begin(), out.end(),
            [](const ModelListing& a, const ModelListing& b) { return a.path < b.path; });
  return out;
}

}  // namespace perfmod
