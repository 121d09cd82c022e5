#include "vmot/certificate.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <unordered_map>

#include <json.hpp>

#include "vmot/error.hpp"

namespace vmot {
namespace {

[[noreturn]] void mismatch(const std::string& what) {
  throw Error(ErrorKind::kMismatchedInstance, what);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

DualCertificate zero_certificate(const PathGrid& grid, Direction direction) {
  DualCertificate cert;
  cert.direction = direction;
  cert.phi.resize(grid.periods());
  for (std::size_t t = 0; t < grid.periods(); ++t) {
    cert.phi[t].resize(grid.assets());
    for (std::size_t i = 0; i < grid.assets(); ++i) {
      cert.phi[t][i].assign(grid.atoms(t, i), 0.0);
    }
  }
  cert.h.resize(grid.periods() - 1);
  for (std::size_t t = 0; t + 1 < grid.periods(); ++t) {
    cert.h[t].assign(grid.prefix_count(t + 1) * grid.assets(), 0.0);
  }
  return cert;
}

void check_certificate_shape(const DualCertificate& cert, const PathGrid& grid) {
  if (cert.periods() != grid.periods() || cert.assets() != grid.assets()) {
    mismatch("certificate has " + std::to_string(cert.periods()) + "x" +
             std::to_string(cert.assets()) + " legs, instance is " +
             std::to_string(grid.periods()) + "x" + std::to_string(grid.assets()));
  }
  for (std::size_t t = 0; t < grid.periods(); ++t) {
    if (cert.phi[t].size() != grid.assets()) mismatch("ragged phi table");
    for (std::size_t i = 0; i < grid.assets(); ++i) {
      if (cert.phi[t][i].size() != grid.atoms(t, i)) {
        mismatch("phi[" + std::to_string(t + 1) + "][" + std::to_string(i + 1) +
                 "] does not match the support size");
      }
      for (double v : cert.phi[t][i]) {
        if (!std::isfinite(v)) mismatch("non-finite phi entry");
      }
    }
  }
  if (cert.h.size() != grid.periods() - 1) mismatch("wrong number of h tables");
  for (std::size_t t = 0; t + 1 < grid.periods(); ++t) {
    if (cert.h[t].size() != grid.prefix_count(t + 1) * grid.assets()) {
      mismatch("h[" + std::to_string(t + 1) + "] does not match the partial-path count");
    }
    for (double v : cert.h[t]) {
      if (!std::isfinite(v)) mismatch("non-finite h entry");
    }
  }
}

double dual_value(const DualCertificate& cert, const MarginalSystem& system) {
  double acc = 0.0;
  for (std::size_t t = 0; t < system.periods(); ++t) {
    for (std::size_t i = 0; i < system.assets(); ++i) {
      const auto w = system.at(t, i).weights();
      for (std::size_t a = 0; a < w.size(); ++a) acc += w[a] * cert.phi[t][i][a];
    }
  }
  return acc;
}

double phi_sum(const DualCertificate& cert, const PathGrid& grid, std::size_t t,
               std::size_t state) {
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.assets(); ++i) {
    acc += cert.phi[t][i][grid.atom_of_state(state, t, i)];
  }
  return acc;
}

double payout(const DualCertificate& cert, const PathGrid& grid, std::size_t path) {
  const std::size_t n_t = grid.periods();
  const std::size_t d = grid.assets();
  double acc = 0.0;
  for (std::size_t t = 0; t < n_t; ++t) {
    for (std::size_t i = 0; i < d; ++i) acc += cert.phi[t][i][grid.atom_of(path, t, i)];
  }
  for (std::size_t t = 0; t + 1 < n_t; ++t) {
    const std::size_t pre = grid.prefix_of(path, t + 1);
    for (std::size_t i = 0; i < d; ++i) {
      const double dx = grid.point(t + 1, i, grid.atom_of(path, t + 1, i)) -
                        grid.point(t, i, grid.atom_of(path, t, i));
      acc += cert.h[t][pre * d + i] * dx;
    }
  }
  return acc;
}

std::vector<double> payouts(const DualCertificate& cert, const PathGrid& grid) {
  std::vector<double> out(grid.path_count());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = payout(cert, grid, p);
  return out;
}

HedgeViolation worst_hedge_violation(const DualCertificate& cert,
                                     const VmotInstance& instance) {
  const double s = sign_of(cert.direction);
  const auto c = instance.costs();
  HedgeViolation worst{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t p = 0; p < c.size(); ++p) {
    const double r = s * (payout(cert, instance.grid(), p) - c[p]);
    if (r > worst.amount) worst = {r, p};
  }
  return worst;
}

std::string certificate_to_json(const DualCertificate& cert, const PathGrid& grid,
                                const std::string& instance_hash) {
  using nlohmann::json;
  json j;
  j["schema"] = 1;
  j["instance_hash"] = instance_hash;
  json meta;
  meta["source"] = cert.source;
  meta["direction"] = to_string(cert.direction);
  meta["N"] = grid.periods();
  meta["d"] = grid.assets();
  meta["anchor"] = cert.anchor ? json(*cert.anchor) : json(nullptr);
  meta["epsilon"] = cert.epsilon ? json(*cert.epsilon) : json(nullptr);
  j["metadata"] = meta;

  json phi = json::array();
  for (std::size_t t = 0; t < grid.periods(); ++t) {
    json row = json::array();
    for (std::size_t i = 0; i < grid.assets(); ++i) {
      json table = json::object();
      for (std::size_t a = 0; a < grid.atoms(t, i); ++a) {
        table[format_double(grid.point(t, i, a))] = cert.phi[t][i][a];
      }
      row.push_back(std::move(table));
    }
    phi.push_back(std::move(row));
  }
  j["phi"] = std::move(phi);

  const std::size_t d = grid.assets();
  json h = json::array();
  for (std::size_t t = 0; t + 1 < grid.periods(); ++t) {
    json table = json::object();
    for (std::size_t pre = 0; pre < grid.prefix_count(t + 1); ++pre) {
      table[grid.prefix_key(pre, t + 1)] =
          std::vector<double>(cert.h[t].begin() + static_cast<std::ptrdiff_t>(pre * d),
                              cert.h[t].begin() + static_cast<std::ptrdiff_t>((pre + 1) * d));
    }
    h.push_back(std::move(table));
  }
  j["h"] = std::move(h);
  return j.dump(1);
}

namespace {

nlohmann::json parse_artifact(std::string_view text, const char* what,
                              std::string* instance_hash) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIo, std::string(what) + ": " + e.what());
  }
  if (!j.is_object() || j.value("schema", 0) != 1) {
    throw Error(ErrorKind::kIo, std::string(what) + ": missing or unsupported schema");
  }
  if (instance_hash) *instance_hash = j.value("instance_hash", std::string{});
  return j;
}

}  // namespace

DualCertificate certificate_from_json(std::string_view text, const PathGrid& grid,
                                      std::string* instance_hash) {
  const nlohmann::json j = parse_artifact(text, "certificate", instance_hash);
  DualCertificate cert = zero_certificate(grid, Direction::kMin);
  try {
    const auto& meta = j.at("metadata");
    cert.direction = parse_direction(meta.at("direction").get<std::string>());
    cert.source = meta.at("source").get<std::string>();
    if (meta.contains("anchor") && !meta.at("anchor").is_null()) {
      cert.anchor = meta.at("anchor").get<std::vector<double>>();
    }
    if (meta.contains("epsilon") && !meta.at("epsilon").is_null()) {
      cert.epsilon = meta.at("epsilon").get<double>();
    }
    const auto& phi = j.at("phi");
    if (phi.size() != grid.periods()) mismatch("certificate phi has wrong period count");
    for (std::size_t t = 0; t < grid.periods(); ++t) {
      if (phi[t].size() != grid.assets()) mismatch("certificate phi has wrong asset count");
      for (std::size_t i = 0; i < grid.assets(); ++i) {
        const auto& table = phi[t][i];
        if (table.size() != grid.atoms(t, i)) mismatch("certificate phi support mismatch");
        for (std::size_t a = 0; a < grid.atoms(t, i); ++a) {
          const std::string key = format_double(grid.point(t, i, a));
          if (!table.contains(key)) mismatch("certificate phi lacks point " + key);
          cert.phi[t][i][a] = table.at(key).get<double>();
        }
      }
    }
    const auto& h = j.at("h");
    if (h.size() + 1 != grid.periods()) mismatch("certificate h has wrong period count");
    const std::size_t d = grid.assets();
    for (std::size_t t = 0; t + 1 < grid.periods(); ++t) {
      const auto& table = h[t];
      if (table.size() != grid.prefix_count(t + 1)) mismatch("certificate h prefix mismatch");
      for (std::size_t pre = 0; pre < grid.prefix_count(t + 1); ++pre) {
        const std::string key = grid.prefix_key(pre, t + 1);
        if (!table.contains(key)) mismatch("certificate h lacks partial path " + key);
        const auto v = table.at(key).get<std::vector<double>>();
        if (v.size() != d) mismatch("certificate h entry has wrong width");
        for (std::size_t i = 0; i < d; ++i) cert.h[t][pre * d + i] = v[i];
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIo, std::string("certificate: ") + e.what());
  }
  check_certificate_shape(cert, grid);
  return cert;
}

std::string coupling_to_json(const Coupling& coupling, const std::string& instance_hash) {
  nlohmann::json j;
  j["schema"] = 1;
  j["instance_hash"] = instance_hash;
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& [p, m] : coupling.atoms()) paths.push_back({p, m});
  j["paths"] = std::move(paths);
  return j.dump(1);
}

Coupling coupling_from_json(std::string_view text, const PathGrid& grid,
                            std::string* instance_hash) {
  const nlohmann::json j = parse_artifact(text, "coupling", instance_hash);
  std::vector<Coupling::Atom> atoms;
  try {
    for (const auto& entry : j.at("paths")) {
      const auto p = entry.at(0).get<std::size_t>();
      const auto m = entry.at(1).get<double>();
      if (p >= grid.path_count()) mismatch("coupling references path " + std::to_string(p));
      if (!std::isfinite(m) || m < 0.0) throw Error(ErrorKind::kIo, "coupling mass invalid");
      atoms.emplace_back(p, m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIo, std::string("coupling: ") + e.what());
  }
  return Coupling(std::move(atoms));
}

}  // namespace vmot
