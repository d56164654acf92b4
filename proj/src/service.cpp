#include "doublethink/service.hpp"

#include <charconv>
#include <regex>

#include "httplib.h"

namespace doublethink {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::InadmissibleGroup:
    case ErrorCode::TooManyVariables:
    case ErrorCode::ScanCapExceeded:
    case ErrorCode::SearchBudgetExceeded:
    case ErrorCode::RankDeficient:
    case ErrorCode::DegenerateVariance:
    case ErrorCode::ZeroVarianceColumn: return 422;
    case ErrorCode::ConvergenceFailure: return 500;
    default: return 400;
  }
}

SessionConfig session_config_from_json(const Json& j) {
  SessionConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be an object");
  c.mu = j.value("mu", c.mu);
  c.h = j.value("h", c.h);
  c.tau = j.value("tau", c.tau);
  c.csv.outcome = j.value("outcome", std::string{});
  c.csv.intercept = j.value("intercept", false);
  c.csv.variance = parse_variance_mode(j.value("variance", std::string("profile")));
  c.csv.nuisance = j.value("nuisance", std::vector<std::string>{});
  c.declared_nu = j.value("sub_analysis_nu", 0);
  c.excluded = j.value("excluded", std::vector<std::string>{});
  c.max_variables = j.value("max_variables", c.max_variables);
  return c;
}

namespace {

Response json_response(int status, const Json& body) { return {status, "application/json", body.dump()}; }

Response error_response(ErrorCode code, const std::string& detail, Json extra = Json::object()) {
  extra["error"] = std::string(error_code_name(code));
  extra["detail"] = detail;
  return json_response(http_status(code), extra);
}

Json summary(const Session& s) {
  Json mode = {{"kind", s.context().sub_analysis() ? "sub_analysis" : "full"}, {"nu_total", s.context().nu_total()}};
  if (s.context().sub_analysis()) mode["excluded"] = s.excluded;
  Json corr = Json::array();
  for (Eigen::Index j = 0; j < s.corr.rows(); ++j) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < s.corr.cols(); ++k) row.push_back(s.corr(j, k));
    corr.push_back(row);
  }
  return {{"id", s.id},
          {"created_at", s.created_at},
          {"n", s.n},
          {"nu", s.scan.nu()},
          {"names", s.names()},
          {"hyper", to_json(s.scan.hyper())},
          {"mode", mode},
          {"model_count", s.scan.model_count()},
          {"correlation", corr}};
}

double query_double(const Request& r, const std::string& key, double fallback) {
  const auto it = r.query.find(key);
  if (it == r.query.end()) return fallback;
  double v = 0.0;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::InvalidArgument, "query parameter '" + key + "' is not a number");
  return v;
}

Json parse_body(const std::string& body) {
  if (body.empty()) return Json::object();
  try {
    return Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed JSON body: ") + e.what());
  }
}

std::vector<int> tested_indices(const Json& tested, const Session& s) {
  if (!tested.is_array() || tested.empty()) throw Error(ErrorCode::EmptyTestedSet, "'tested' must be a nonempty array");
  std::vector<std::string> names;
  std::vector<int> out;
  for (const auto& t : tested) {
    if (t.is_string())
      names.push_back(t.get<std::string>());
    else if (t.is_number_integer()) {
      const int j = t.get<int>();
      if (j < 0 || j >= s.scan.nu())
        throw Error(ErrorCode::UnknownVariables, "variable index " + std::to_string(j) + " out of range");
      out.push_back(j);
    } else
      throw Error(ErrorCode::InvalidArgument, "'tested' entries must be names or indices");
  }
  for (int j : ctp::resolve_names(s.names(), names)) out.push_back(j);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Response test(const Session& s, const Request& r) {
  const Json body = parse_body(r.body);
  if (!body.is_object()) throw Error(ErrorCode::ParseError, "body must be a JSON object");
  const auto tested = tested_indices(body.value("tested", Json::array()), s);
  ctp::TestOptions options;
  options.rho = body.value("rho", 1.0);
  options.alpha = body.value("alpha", inference::kCensorThreshold);
  if (body.contains("tau")) options.tau = body.at("tau").get<double>();
  options.bypass_admissibility = body.value("bypass_admissibility", false);

  const auto ctx = s.context();
  const auto policy = ctp::build_grouping(ctx.corr, options.rho);
  const auto null = inference::NullHypothesis::of(tested);
  const Json blocks = to_json(policy, s.names());
  if (!options.bypass_admissibility) {
    if (auto block = ctp::violating_block(null, policy)) {
      return error_response(ErrorCode::InadmissibleGroup,
                            "tested set splits an indivisible block at rho = " + std::to_string(options.rho),
                            {{"block", names_of(*block, s.names())}, {"grouping", blocks}});
    }
  }
  const auto report = ctp::test_group(ctx, tested, options);
  Json out = to_json(report);
  out["tested"] = names_of(tested, s.names());
  out["tested_indices"] = tested;
  out["admissible"] = ctp::is_admissible(null, policy);
  out["max_split_correlation"] = ctp::max_split_correlation(null, ctx.corr);
  out["tau"] = options.tau.value_or(s.scan.hyper().tau);
  out["alpha"] = options.alpha;
  out["grouping"] = blocks;
  return json_response(200, out);
}

Response route_session(const Session& s, const std::string& tail, const Request& r) {
  if (tail.empty() && r.method == "GET") return json_response(200, summary(s));
  if (tail == "/test" && r.method == "POST") return test(s, r);
  if (tail == "/groups" && r.method == "GET") {
    return json_response(200, to_json(ctp::build_grouping(s.corr, query_double(r, "rho", 1.0)), s.names()));
  }
  if (tail == "/minimal-groups" && r.method == "GET") {
    const double rho = query_double(r, "rho", 1.0);
    const double tau = query_double(r, "tau", s.scan.hyper().tau);
    const int max_size = static_cast<int>(query_double(r, "max_size", s.scan.nu()));
    Json groups = Json::array();
    for (const auto& g : ctp::minimal_significant_groups(s.context(), rho, tau, max_size)) groups.push_back(names_of(g, s.names()));
    return json_response(200, {{"rho", rho}, {"tau", tau}, {"max_size", max_size}, {"groups", groups}});
  }
  if (tail == "/estimates" && r.method == "GET") {
    Json out = Json::array();
    for (const auto& e : inference::coefficient_estimates(s.scan)) out.push_back(to_json(e, s.names()));
    return json_response(200, out);
  }
  if (tail == "/export" && r.method == "GET") return {200, "application/octet-stream", export_session(s)};
  return error_response(ErrorCode::NotFound, "no route " + r.method + " " + r.path);
}

}  // namespace

Response Service::handle(const Request& r) {
  try {
    if (r.path == "/sessions" && r.method == "POST") {
      const Json body = parse_body(r.body);
      if (!body.is_object() || !body.contains("csv") || !body.at("csv").is_string())
        throw Error(ErrorCode::ParseError, "body must be an object with a 'csv' string");
      const auto created =
          store_.create(body.at("csv").get<std::string>(), session_config_from_json(body.value("config", Json())));
      Json out = summary(*created.session);
      out["created"] = created.created;
      return json_response(created.created ? 201 : 200, out);
    }
    if (r.path == "/sessions" && r.method == "GET") {
      Json out = Json::array();
      for (const auto& s : store_.list()) out.push_back(summary(*s));
      return json_response(200, out);
    }
    if (r.path == "/sessions/import" && r.method == "POST") {
      const auto created = store_.insert(import_session(r.body));
      Json out = summary(*created.session);
      out["created"] = created.created;
      return json_response(created.created ? 201 : 200, out);
    }
    static const std::regex session_path(R"(^/sessions/([0-9A-Za-z_-]+)(/[a-z-]+)?$)");
    std::smatch m;
    if (std::regex_match(r.path, m, session_path)) {
      const auto session = store_.get(m[1].str());
      return route_session(*session, m[2].str(), r);
    }
    if (r.path == "/health" && r.method == "GET") return json_response(200, {{"status", "ok"}});
    return error_response(ErrorCode::NotFound, "no route " + r.method + " " + r.path);
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  } catch (const Json::exception& e) {
    return error_response(ErrorCode::ParseError, e.what());
  }
}

struct HttpServer::Impl {
  explicit Impl(Service& s) : service(s) {}
  Service& service;
  httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto adapt = [this](const httplib::Request& req, httplib::Response& res) {
    Request r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.query[k] = v;
    const auto out = impl_->service.handle(r);
    res.status = out.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(out.body, out.content_type);
  };
  const std::string pattern = R"(/.*)";
  impl_->server.Get(pattern, adapt);
  impl_->server.Post(pattern, adapt);
  impl_->server.Options(pattern, [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::InvalidArgument, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace doublethink
