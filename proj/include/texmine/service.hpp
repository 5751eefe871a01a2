#ifndef TEXMINE_SERVICE_HPP
#define TEXMINE_SERVICE_HPP

// HTTP service behind the parameter-tuning UI. Detection requests re-run the
// detector on cached decoded images; nothing else is kept between requests
// apart from PBR previews, which are addressed by token.

#include "texmine/config.hpp"
#include "texmine/pipeline.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

namespace texmine {

/// Parameters of one detection request; unspecified fields come from the config.
struct DetectRequest {
    GridParams grid;
    DetectParams detect;
    int resize = 1600;
    CropBounds bounds;

    static DetectRequest from_config(const PipelineConfig& cfg) {
        return {cfg.grid, cfg.detect, cfg.resize_long_edge, cfg.bounds()};
    }

    void validate() const {
        grid.validate();
        detect.validate();
        if (resize < 1)
            throw InvalidArgument("resize must be >= 1");
        if (bounds.min_px < 1 || bounds.min_px > bounds.max_px)
            throw InvalidArgument("require 1 <= min_crop_px <= max_crop_px");
    }
};

namespace detail {

template <typename Get>
DetectRequest parse_detect_request(DetectRequest req, Get&& get) {
    auto num = [&](const char* key, auto& dst) {
        if (auto v = get(key))
            dst = static_cast<std::decay_t<decltype(dst)>>(*v);
    };
    num("cell_px", req.grid.cell_px);
    num("bins", req.grid.bins);
    num("threshold", req.detect.threshold);
    num("min_cells", req.detect.min_cells);
    num("max_cells", req.detect.max_cells);
    num("flat_std", req.detect.flat_std);
    num("overlap_iou", req.detect.overlap_iou);
    num("resize", req.resize);
    num("min_crop_px", req.bounds.min_px);
    num("max_crop_px", req.bounds.max_px);
    req.validate();
    return req;
}

} // namespace detail

inline DetectRequest detect_request_from_json(const nlohmann::json& body, const DetectRequest& base) {
    return detail::parse_detect_request(base, [&](const char* key) -> std::optional<double> {
        if (!body.contains(key) || body.at(key).is_null())
            return std::nullopt;
        if (!body.at(key).is_number())
            throw InvalidArgument(std::string(key) + " must be a number");
        return body.at(key).get<double>();
    });
}

inline DetectRequest detect_request_from_query(const httplib::Request& req, const DetectRequest& base) {
    return detail::parse_detect_request(base, [&](const char* key) -> std::optional<double> {
        if (!req.has_param(key))
            return std::nullopt;
        try {
            return std::stod(req.get_param_value(key));
        } catch (const std::exception&) {
            throw InvalidArgument(std::string(key) + " must be a number");
        }
    });
}

inline nlohmann::json regions_to_json(const std::vector<TextureCrop>& crops) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : crops)
        out.push_back({{"x", c.rect.x}, {"y", c.rect.y}, {"w", c.rect.w}, {"h", c.rect.h},
                       {"max_pair_distance", c.max_pair_distance}});
    return out;
}

/// Draws 2-pixel red outlines of every crop rectangle.
inline Raster draw_overlay(const Raster& image, const std::vector<TextureCrop>& crops) {
    Raster out = image;
    auto plot = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= out.width() || y >= out.height())
            return;
        out.at(x, y, 0) = 1.0f;
        out.at(x, y, 1) = 0.0f;
        out.at(x, y, 2) = 0.0f;
    };
    for (const auto& c : crops) {
        for (int t = 0; t < 2; ++t) {
            for (int x = c.rect.x; x < c.rect.x + c.rect.w; ++x) {
                plot(x, c.rect.y + t);
                plot(x, c.rect.y + c.rect.h - 1 - t);
            }
            for (int y = c.rect.y; y < c.rect.y + c.rect.h; ++y) {
                plot(c.rect.x + t, y);
                plot(c.rect.x + c.rect.w - 1 - t, y);
            }
        }
    }
    return out;
}

class TuningService {
public:
    explicit TuningService(PipelineConfig cfg) : cfg_(std::move(cfg)) {
        // SO_REUSEADDR only; binding a busy port must fail.
        server_.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
        });
        register_routes();
    }

    TuningService(const TuningService&) = delete;
    TuningService& operator=(const TuningService&) = delete;

    /// Serves static UI files from `dir` at "/".
    bool mount_ui(const std::filesystem::path& dir) { return server_.set_mount_point("/", dir.string()); }

    /// Binds and serves until stop(). Throws PortInUse when the port is taken.
    void serve(const std::string& host, int port) {
        if (!server_.bind_to_port(host, port))
            throw PortInUse("cannot bind " + host + ":" + std::to_string(port));
        server_.listen_after_bind();
    }

    /// Binds to an ephemeral port and returns it; call listen() afterwards.
    int bind_any(const std::string& host = "127.0.0.1") {
        const int port = server_.bind_to_any_port(host);
        if (port < 0)
            throw PortInUse("cannot bind an ephemeral port");
        return port;
    }
    void listen() { server_.listen_after_bind(); }
    void wait_until_ready() const { server_.wait_until_ready(); }
    void stop() { server_.stop(); }

    /// Detection on a cached image; shared by the HTTP handlers.
    std::vector<TextureCrop> detect(const std::string& image_id, const DetectRequest& req) {
        const auto image = prepared(image_id, req.resize);
        return detect_textures(*image, req.grid, req.detect, req.bounds, image_id);
    }

    std::shared_ptr<const Raster> prepared(const std::string& image_id, int resize) {
        const std::string rel = image_path(image_id);
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(rel, resize);
        if (auto it = cache_.find(key); it != cache_.end())
            return it->second;
        auto raster = std::make_shared<const Raster>(load_prepared_image(cfg_.input_dir / rel, resize));
        cache_.emplace(key, raster);
        return raster;
    }

private:
    struct NotFound : Error { using Error::Error; };

    std::string image_path(const std::string& image_id) {
        std::lock_guard lock(mutex_);
        if (ids_.empty() || !ids_.count(image_id)) {
            ids_.clear();
            for (const auto& rel : enumerate_images(cfg_.input_dir))
                ids_[source_id_for(rel)] = rel;
        }
        auto it = ids_.find(image_id);
        if (it == ids_.end())
            throw NotFound("unknown image: " + image_id);
        return it->second;
    }

    static void send_json(httplib::Response& res, const nlohmann::json& j, int status = 200) {
        res.status = status;
        res.set_content(j.dump(), "application/json");
    }

    static void send_png(httplib::Response& res, const Raster& r) {
        const auto bytes = encode_png(r);
        res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
    }

    template <typename Fn>
    static httplib::Server::Handler guarded(Fn fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const NotFound& e) {
                send_json(res, {{"error", e.what()}}, 404);
            } catch (const InvalidArgument& e) {
                send_json(res, {{"error", e.what()}}, 400);
            } catch (const nlohmann::json::exception& e) {
                send_json(res, {{"error", e.what()}}, 400);
            } catch (const std::exception& e) {
                send_json(res, {{"error", e.what()}}, 500);
            }
        };
    }

    static nlohmann::json parse_body(const httplib::Request& req) {
        if (req.body.empty())
            return nlohmann::json::object();
        auto j = nlohmann::json::parse(req.body, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw InvalidArgument("request body must be a JSON object");
        return j;
    }

    DetectRequest base_request() const { return DetectRequest::from_config(cfg_); }

    void register_routes() {
        server_.Get("/api/images", guarded([this](const httplib::Request&, httplib::Response& res) {
            nlohmann::json list = nlohmann::json::array();
            for (const auto& rel : enumerate_images(cfg_.input_dir)) {
                const std::string id = source_id_for(rel);
                const auto img = prepared(id, std::numeric_limits<int>::max());
                list.push_back({{"id", id}, {"path", rel}, {"w", img->width()}, {"h", img->height()}});
            }
            send_json(res, list);
        }));

        server_.Get("/api/schema", guarded([](const httplib::Request&, httplib::Response& res) {
            const DetectParams d;
            const GridParams g;
            send_json(res, {
                               {"cell_px", {{"min", 8}, {"default", g.cell_px}}},
                               {"bins", {{"min", 2}, {"max", 256}, {"default", g.bins}}},
                               {"threshold", {{"min", 0.0}, {"max_exclusive", 1.0}, {"default", d.threshold}}},
                               {"min_cells", {{"min", 2}, {"default", d.min_cells}}},
                               {"max_cells", {{"min", 2}, {"default", d.max_cells}}},
                               {"flat_std", {{"min", 0.0}, {"default", d.flat_std}}},
                               {"overlap_iou", {{"min", 0.0}, {"max", 1.0}, {"default", d.overlap_iou}}},
                               {"resize", {{"min", 1}, {"default", 1600}}},
                           });
        }));

        server_.Post("/api/detect", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto body = parse_body(req);
            const std::string id = body.at("image_id").get<std::string>();
            const DetectRequest params = detect_request_from_json(body, base_request());
            const auto t0 = std::chrono::steady_clock::now();
            const auto crops = detect(id, params);
            const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            send_json(res, {{"regions", regions_to_json(crops)}, {"timing_ms", ms}});
        }));

        server_.Get(R"(/api/overlay/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const DetectRequest params = detect_request_from_query(req, base_request());
            send_png(res, draw_overlay(*prepared(id, params.resize), detect(id, params)));
        }));

        server_.Get(R"(/api/crop/([^/]+)/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const std::size_t index = std::stoul(req.matches[2]);
            const auto crops = detect(id, detect_request_from_query(req, base_request()));
            if (index >= crops.size())
                throw NotFound("region index out of range");
            send_png(res, crops[index].raster);
        }));

        server_.Post("/api/preview_pbr", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto body = parse_body(req);
            const std::string id = body.at("image_id").get<std::string>();
            const auto index = body.at("region_index").get<std::size_t>();
            const auto seed = body.value("seed", cfg_.seed);
            auto crops = detect(id, detect_request_from_json(body, base_request()));
            if (index >= crops.size())
                throw NotFound("region index out of range");
            TextureCrop crop = std::move(crops[index]);
            crop.raster = quantize_8bit(crop.raster);
            const PBRMaterial m = generate_material(crop, seed, cfg_.synth);

            const std::string token = hex64(fnv1a64(m.material_id));
            nlohmann::json maps = nlohmann::json::object();
            std::map<std::string, std::string> encoded;
            for (const auto& name : material_file_names()) {
                const Raster* r = name == "normal" ? &m.normal : &m.map(property_for(name));
                const auto bytes = encode_png(*r, name == "height" ? PngDepth::k16 : PngDepth::k8);
                encoded[name] = std::string(bytes.begin(), bytes.end());
                maps[name] = "/api/preview/" + token + "/" + name + ".png";
            }
            {
                std::lock_guard lock(mutex_);
                previews_[token] = std::move(encoded);
            }
            send_json(res, {{"maps", maps}, {"material", material_to_json(m)}});
        }));

        server_.Get(R"(/api/preview/([0-9a-f]+)/([a-z]+)\.png)",
                    guarded([this](const httplib::Request& req, httplib::Response& res) {
                        std::lock_guard lock(mutex_);
                        auto it = previews_.find(req.matches[1]);
                        if (it == previews_.end() || !it->second.count(req.matches[2]))
                            throw NotFound("unknown preview");
                        res.set_content(it->second.at(req.matches[2]), "image/png");
                    }));

        server_.Post("/api/export_config", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const DetectRequest params = detect_request_from_json(parse_body(req), base_request());
            PipelineConfig out = cfg_;
            out.grid = params.grid;
            out.detect = params.detect;
            out.resize_long_edge = params.resize;
            out.min_crop_px = params.bounds.min_px;
            out.max_crop_px = params.bounds.max_px;
            res.set_content(config_to_toml(out), "application/toml");
        }));
    }

    static Property property_for(const std::string& name) {
        for (Property p : kAllProperties)
            if (property_name(p) == name)
                return p;
        throw InvalidArgument("unknown map: " + name);
    }

    PipelineConfig cfg_;
    httplib::Server server_;
    std::mutex mutex_;
    std::map<std::pair<std::string, int>, std::shared_ptr<const Raster>> cache_;
    std::map<std::string, std::string> ids_;
    std::map<std::string, std::map<std::string, std::string>> previews_;
};

} // namespace texmine

#endif // TEXMINE_SERVICE_HPP
