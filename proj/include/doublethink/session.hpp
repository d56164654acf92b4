#ifndef DOUBLETHINK_SESSION_HPP
#define DOUBLETHINK_SESSION_HPP

#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "doublethink/csv.hpp"
#include "doublethink/ctp.hpp"
#include "doublethink/inference.hpp"
#include "doublethink/scan.hpp"

namespace doublethink {

struct SessionConfig {
  double mu = 0.1;
  double h = 1.0;
  double tau = 9.0;
  CsvOptions csv;
  int declared_nu = 0;  // > scanned nu makes a sub-analysis
  std::vector<std::string> excluded;
  int max_variables = kDefaultMaxVariables;

  /// Stable text form hashed together with the payload.
  std::string canonical() const;
};

/// A fitted analysis: dataset summary, scan and sub-analysis declaration.
/// Immutable once created.
struct Session {
  std::string id;
  std::string created_at;  // UTC, ISO 8601
  int n = 0;
  linmodel::CorrelationMatrix corr;
  ExhaustiveScan scan;
  int declared_nu = 0;
  std::vector<std::string> excluded;

  const std::vector<std::string>& names() const { return scan.names(); }
  ctp::AnalysisContext context() const;
};

/// Hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// Content hash of payload and config (first 128 bits, hex).
std::string session_id(std::string_view csv, const SessionConfig& config);

/// Parses the CSV, scans every model and assembles a session whose id is the
/// content hash of payload and config.
Session build_session(std::string_view csv, const SessionConfig& config);

/// Self-contained binary archive; log odds and log MLRs are stored as
/// little-endian IEEE-754 doubles so a roundtrip is lossless.
std::string export_session(const Session& session);
Session import_session(std::string_view archive);

/// In-memory store. Sessions are write-once; readers get shared snapshots.
/// Concurrent creations with the same content hash share one computation.
class SessionStore {
 public:
  struct Created {
    std::shared_ptr<const Session> session;
    bool created = false;  // false when an identical session already existed
  };

  Created create(std::string_view csv, const SessionConfig& config);
  Created insert(Session session);
  std::shared_ptr<const Session> get(const std::string& id) const;  // throws NotFound
  std::vector<std::shared_ptr<const Session>> list() const;         // ordered by id

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const Session>> sessions_;
  std::map<std::string, std::shared_future<std::shared_ptr<const Session>>> pending_;
};

}  // namespace doublethink

#endif  // DOUBLETHINK_SESSION_HPP
