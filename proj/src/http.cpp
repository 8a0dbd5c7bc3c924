#include <fstream>
#include <sstream>

#include <httplib.h>

#include "logofuse/service.hpp"

namespace logofuse {

namespace {

void send(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

ApiResponse bad_json(const std::string& what) {
  nlohmann::ordered_json j;
  j["error"] = {{"code", "invalid_json"}, {"message", what}};
  return {400, dump_json(j)};
}

std::span<const std::uint8_t> bytes_of(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string content_type_for(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  return "application/octet-stream";
}

// Query handlers accept a JSON body or a multipart form with an "image"
// file, an optional "mask" file and a "request" JSON field.
template <class Handler>
void query_route(const httplib::Request& req, httplib::Response& res, Handler&& handler) {
  nlohmann::json body = nlohmann::json::object();
  std::string image, mask;
  try {
    if (req.is_multipart_form_data()) {
      if (req.has_file("request")) body = nlohmann::json::parse(req.get_file_value("request").content);
      if (req.has_file("image")) image = req.get_file_value("image").content;
      if (req.has_file("mask")) mask = req.get_file_value("mask").content;
    } else if (!req.body.empty()) {
      body = nlohmann::json::parse(req.body);
    }
  } catch (const nlohmann::json::exception& e) {
    send(res, bad_json(e.what()));
    return;
  }
  send(res, handler(body, bytes_of(image), bytes_of(mask)));
}

template <class Handler>
void json_route(const httplib::Request& req, httplib::Response& res, Handler&& handler) {
  nlohmann::json body = nlohmann::json::object();
  try {
    if (!req.body.empty()) body = nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    send(res, bad_json(e.what()));
    return;
  }
  send(res, handler(body));
}

}  // namespace

void Service::install(httplib::Server& server, const std::filesystem::path& static_dir) {
  server.Get("/health", [this](const httplib::Request&, httplib::Response& res) { send(res, health()); });
  server.Get("/presets", [this](const httplib::Request&, httplib::Response& res) { send(res, presets()); });
  server.Get("/labels", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> kind;
    if (req.has_param("kind")) kind = req.get_param_value("kind");
    send(res, labels(kind));
  });
  server.Post("/search", [this](const httplib::Request& req, httplib::Response& res) {
    query_route(req, res, [this](const auto& body, auto image, auto mask) { return search(body, image, mask); });
  });
  server.Post("/classify", [this](const httplib::Request& req, httplib::Response& res) {
    query_route(req, res, [this](const auto& body, auto image, auto mask) { return classify(body, image, mask); });
  });
  server.Post("/index/build", [this](const httplib::Request& req, httplib::Response& res) {
    json_route(req, res, [this](const auto& body) { return build_index(body); });
  });
  server.Post("/evaluate", [this](const httplib::Request& req, httplib::Response& res) {
    json_route(req, res, [this](const auto& body) { return evaluate(body); });
  });
  server.Get(R"(/thumbs/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto path = thumbnail(std::stoull(req.matches[1]));
    std::ifstream in;
    if (path) in.open(*path, std::ios::binary);
    if (!path || !in) {
      nlohmann::ordered_json j;
      j["error"] = {{"code", "unknown_id"}, {"message", "no image for logo " + std::string(req.matches[1])}};
      send(res, {404, dump_json(j)});
      return;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    res.set_content(ss.str(), content_type_for(*path));
  });
  if (!static_dir.empty()) server.set_mount_point("/", static_dir.string());
}

}  // namespace logofuse
