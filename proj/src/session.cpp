#include "doublethink/session.hpp"

#include <bit>
#include <chrono>
#include <cstring>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "doublethink/errors.hpp"

namespace doublethink {

std::string SessionConfig::canonical() const {
  std::ostringstream out;
  out << std::setprecision(17) << "mu=" << mu << ";h=" << h << ";tau=" << tau << ";outcome=" << csv.outcome
      << ";intercept=" << csv.intercept << ";variance=";
  if (const auto* known = std::get_if<linmodel::KnownVariance>(&csv.variance))
    out << "known:" << known->sigma2;
  else
    out << "profile";
  out << ";nuisance=";
  for (const auto& c : csv.nuisance) out << c.size() << ':' << c;
  out << ";declared_nu=" << declared_nu << ";excluded=";
  for (const auto& c : excluded) out << c.size() << ':' << c;
  out << ";max_variables=" << max_variables;
  return out.str();
}

ctp::AnalysisContext Session::context() const {
  ctp::AnalysisContext ctx;
  ctx.scan = &scan;
  ctx.corr = corr;
  ctx.declared_nu = declared_nu;
  ctx.excluded = excluded;
  return ctx;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
    throw Error(ErrorCode::InvalidArgument, "SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string session_id(std::string_view csv, const SessionConfig& config) {
  std::string hashed = config.canonical();
  hashed += '\n';
  hashed.append(csv);
  return sha256_hex(hashed).substr(0, 32);
}

Session build_session(std::string_view csv, const SessionConfig& config) {
  auto data = parse_csv(csv, config.csv);
  data.validate();
  const inference::Hyperparams hyper{config.mu, config.h, config.tau, static_cast<double>(data.n())};
  hyper.validate();
  if (config.declared_nu != 0 && config.declared_nu < data.nu())
    throw Error(ErrorCode::InvalidArgument, "declared variable count is below the number of CSV candidates");
  if (!config.excluded.empty() && config.declared_nu != 0 &&
      static_cast<int>(config.excluded.size()) != config.declared_nu - data.nu())
    throw Error(ErrorCode::InvalidArgument, "excluded names must number declared nu minus scanned nu");

  Session s{session_id(csv, config),
            utc_now(),
            data.n(),
            linmodel::correlation_matrix(data),
            scan_all_models(data, hyper, ScanOptions{config.max_variables}),
            config.declared_nu,
            config.excluded};
  return s;
}

namespace {

constexpr char kMagic[8] = {'D', 'T', 'S', 'E', 'S', 'S', '0', '1'};

static_assert(std::endian::native == std::endian::little, "archive encoding assumes a little-endian host");

class Writer {
 public:
  void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void i32(std::int32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  void raw(void* p, std::size_t n) {
    if (in_.size() - pos_ < n) throw Error(ErrorCode::ParseError, "session archive is truncated");
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  template <class T>
  T get() {
    T v;
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    const auto n = get<std::uint32_t>();
    if (in_.size() - pos_ < n) throw Error(ErrorCode::ParseError, "session archive is truncated");
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string export_session(const Session& s) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.str(s.id);
  w.str(s.created_at);
  const auto& hyper = s.scan.hyper();
  w.f64(hyper.mu);
  w.f64(hyper.h);
  w.f64(hyper.tau);
  w.f64(hyper.n);
  w.i32(s.n);
  w.i32(s.declared_nu);
  w.u32(static_cast<std::uint32_t>(s.excluded.size()));
  for (const auto& e : s.excluded) w.str(e);
  const int nu = s.scan.nu();
  w.u32(static_cast<std::uint32_t>(nu));
  for (const auto& name : s.names()) w.str(name);
  for (int j = 0; j < nu; ++j)
    for (int k = 0; k < nu; ++k) w.f64(s.corr(j, k));
  w.u64(s.scan.model_count());
  for (double v : s.scan.log_mlr_values()) w.f64(v);
  for (double v : s.scan.log_po_values()) w.f64(v);
  w.u32(static_cast<std::uint32_t>(s.scan.estimates().size()));
  for (const auto& e : s.scan.estimates()) {
    w.i32(e.variable);
    w.f64(e.classical_mean);
    w.f64(e.classical_se);
    w.f64(e.bayes_mean);
    w.f64(e.bayes_se);
    w.f64(e.inclusion_prob);
  }
  return w.take();
}

Session import_session(std::string_view archive) {
  Reader r(archive);
  char magic[sizeof kMagic];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error(ErrorCode::ParseError, "not a session archive");
  std::string id = r.str();
  std::string created_at = r.str();
  inference::Hyperparams hyper;
  hyper.mu = r.get<double>();
  hyper.h = r.get<double>();
  hyper.tau = r.get<double>();
  hyper.n = r.get<double>();
  hyper.validate();
  const int n = r.get<std::int32_t>();
  const int declared_nu = r.get<std::int32_t>();
  std::vector<std::string> excluded(r.get<std::uint32_t>());
  if (excluded.size() > archive.size()) throw Error(ErrorCode::ParseError, "corrupt excluded list");
  for (auto& e : excluded) e = r.str();
  const auto nu = r.get<std::uint32_t>();
  if (nu > static_cast<std::uint32_t>(ModelId::kMaxVariables)) throw Error(ErrorCode::ParseError, "corrupt variable count");
  std::vector<std::string> names(nu);
  for (auto& name : names) name = r.str();
  linmodel::CorrelationMatrix corr(nu, nu);
  for (std::uint32_t j = 0; j < nu; ++j)
    for (std::uint32_t k = 0; k < nu; ++k) corr(j, k) = r.get<double>();
  const auto count = r.get<std::uint64_t>();
  if (count != (std::uint64_t{1} << nu) || count * 16 > archive.size())
    throw Error(ErrorCode::ParseError, "model count does not match the variable count");
  std::vector<double> log_mlr(count), log_po(count);
  r.raw(log_mlr.data(), count * sizeof(double));
  r.raw(log_po.data(), count * sizeof(double));
  std::vector<inference::CoefficientEstimate> estimates(r.get<std::uint32_t>());
  if (estimates.size() > nu) throw Error(ErrorCode::ParseError, "corrupt estimate count");
  for (auto& e : estimates) {
    e.variable = r.get<std::int32_t>();
    e.classical_mean = r.get<double>();
    e.classical_se = r.get<double>();
    e.bayes_mean = r.get<double>();
    e.bayes_se = r.get<double>();
    e.inclusion_prob = r.get<double>();
  }
  if (!r.done()) throw Error(ErrorCode::ParseError, "trailing bytes in session archive");
  return Session{std::move(id),
                 std::move(created_at),
                 n,
                 std::move(corr),
                 ExhaustiveScan(std::move(names), hyper, std::move(log_mlr), std::move(log_po), std::move(estimates)),
                 declared_nu,
                 std::move(excluded)};
}

SessionStore::Created SessionStore::create(std::string_view csv, const SessionConfig& config) {
  const std::string id = session_id(csv, config);

  std::promise<std::shared_ptr<const Session>> promise;
  {
    std::unique_lock lock(mutex_);
    if (auto it = sessions_.find(id); it != sessions_.end()) return {it->second, false};
    if (auto it = pending_.find(id); it != pending_.end()) {
      auto future = it->second;
      lock.unlock();
      return {future.get(), false};
    }
    pending_.emplace(id, promise.get_future().share());
  }
  try {
    auto session = std::make_shared<const Session>(build_session(csv, config));
    std::unique_lock lock(mutex_);
    sessions_.emplace(id, session);
    pending_.erase(id);
    promise.set_value(session);
    return {session, true};
  } catch (...) {
    std::unique_lock lock(mutex_);
    pending_.erase(id);
    promise.set_exception(std::current_exception());
    throw;
  }
}

SessionStore::Created SessionStore::insert(Session session) {
  std::unique_lock lock(mutex_);
  if (auto it = sessions_.find(session.id); it != sessions_.end()) return {it->second, false};
  auto ptr = std::make_shared<const Session>(std::move(session));
  sessions_.emplace(ptr->id, ptr);
  return {ptr, true};
}

std::shared_ptr<const Session> SessionStore::get(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "no session '" + id + "'");
  return it->second;
}

std::vector<std::shared_ptr<const Session>> SessionStore::list() const {
  std::shared_lock lock(mutex_);
  std::vector<std::shared_ptr<const Session>> out;
  for (const auto& [id, s] : sessions_) out.push_back(s);
  return out;
}

}  // namespace doublethink
