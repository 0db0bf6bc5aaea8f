#include "histmap/style.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "histmap/errors.hpp"

namespace histmap {

using json = nlohmann::json;

namespace {

constexpr LabelKind kLabelKinds[] = {LabelKind::house_number, LabelKind::street_name, LabelKind::place_name};

Rgb rgb_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("color must be an array [r, g, b]");
    Rgb c;
    std::uint8_t* ch[] = {&c.r, &c.g, &c.b};
    for (std::size_t i = 0; i < 3; ++i) {
        const int v = j[i].get<int>();
        if (v < 0 || v > 255) throw ConfigError("color channel out of range 0..255");
        *ch[i] = static_cast<std::uint8_t>(v);
    }
    return c;
}

json rgb_to_json(Rgb c) { return json::array({c.r, c.g, c.b}); }

void check_width(double w, const std::string& what) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError(what + " must be finite and >= 0");
}

} // namespace

bool StyleSpec::any_label_enabled() const {
    for (const auto& l : labels)
        if (l.enabled) return true;
    return false;
}

void StyleSpec::validate() const {
    if (!is_valid_class(background_class)) throw ConfigError("background_class must be in 1..5");
    for (int c = 1; c <= kClassCount; ++c)
        check_width(class_style(c).stroke_width_px, std::string(class_name(c)) + " stroke_width_px");
    if (grid) {
        if (!std::isfinite(grid->spacing) || grid->spacing <= 0.0) throw ConfigError("grid spacing must be > 0");
        check_width(grid->width_px, "grid width_px");
    }
    for (auto kind : kLabelKinds) {
        const auto& rule = label_rule(kind);
        if (rule.font_px <= 0) throw ConfigError(std::string(to_string(kind)) + " font_px must be > 0");
        check_width(rule.repeat_gap_px, std::string(to_string(kind)) + " repeat_gap_px");
    }
}

StyleSpec StyleSpec::historical_default() {
    StyleSpec s;
    s.class_style(1) = {{196, 112, 96}, {90, 50, 40}, 1.0};
    s.class_style(2) = {{250, 246, 232}, {250, 246, 232}, 6.0};
    s.class_style(3) = {{176, 200, 140}, {120, 150, 96}, 1.0};
    s.class_style(4) = {{230, 220, 200}, {200, 190, 170}, 0.0};
    s.class_style(5) = {{140, 170, 200}, {90, 120, 160}, 1.0};
    s.background_class = static_cast<int>(LandCover::sealed);
    s.grid = GridStyle{};
    s.label_rule(LabelKind::house_number) = {8, {40, 30, 30}, false, 100.0};
    s.label_rule(LabelKind::street_name) = {10, {30, 30, 30}, false, 100.0};
    s.label_rule(LabelKind::place_name) = {12, {20, 20, 20}, false, 100.0};
    s.anti_alias = true;
    s.font = "builtin";
    return s;
}

StyleSpec StyleSpec::from_json(std::string_view text) {
    StyleSpec s = historical_default();
    try {
        const json j = json::parse(text);
        if (auto it = j.find("classes"); it != j.end()) {
            for (const auto& [name, cj] : it->items()) {
                int id = 0;
                for (int c = 1; c <= kClassCount; ++c)
                    if (class_name(c) == name) id = c;
                if (id == 0) throw ConfigError("unknown class '" + name + "' in style");
                auto& cs = s.class_style(id);
                if (cj.contains("fill")) cs.fill = rgb_from_json(cj["fill"]);
                if (cj.contains("stroke")) cs.stroke = rgb_from_json(cj["stroke"]);
                cs.stroke_width_px = cj.value("stroke_width_px", cs.stroke_width_px);
            }
        }
        s.background_class = j.value("background_class", s.background_class);
        if (auto it = j.find("grid"); it != j.end()) {
            if (it->is_null()) {
                s.grid.reset();
            } else {
                GridStyle g = s.grid.value_or(GridStyle{});
                g.spacing = it->value("spacing", g.spacing);
                if (it->contains("color")) g.color = rgb_from_json((*it)["color"]);
                g.width_px = it->value("width_px", g.width_px);
                s.grid = g;
            }
        }
        if (auto it = j.find("labels"); it != j.end()) {
            for (const auto& [name, lj] : it->items()) {
                auto kind = label_kind_from_string(name);
                if (!kind || *kind == LabelKind::none) throw ConfigError("unknown label kind '" + name + "' in style");
                auto& rule = s.label_rule(*kind);
                rule.font_px = lj.value("font_px", rule.font_px);
                if (lj.contains("color")) rule.color = rgb_from_json(lj["color"]);
                rule.enabled = lj.value("enabled", rule.enabled);
                rule.repeat_gap_px = lj.value("repeat_gap_px", rule.repeat_gap_px);
            }
        }
        s.anti_alias = j.value("anti_alias", s.anti_alias);
        s.font = j.value("font", s.font);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("style: ") + e.what());
    }
    s.validate();
    return s;
}

StyleSpec StyleSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read style '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string StyleSpec::to_json() const {
    json j;
    for (int c = 1; c <= kClassCount; ++c) {
        const auto& cs = class_style(c);
        j["classes"][std::string(class_name(c))] = {
            {"fill", rgb_to_json(cs.fill)}, {"stroke", rgb_to_json(cs.stroke)}, {"stroke_width_px", cs.stroke_width_px}};
    }
    j["background_class"] = background_class;
    if (grid)
        j["grid"] = {{"spacing", grid->spacing}, {"color", rgb_to_json(grid->color)}, {"width_px", grid->width_px}};
    else
        j["grid"] = nullptr;
    for (auto kind : kLabelKinds) {
        const auto& rule = label_rule(kind);
        j["labels"][std::string(to_string(kind))] = {{"font_px", rule.font_px},
                                                     {"color", rgb_to_json(rule.color)},
                                                     {"enabled", rule.enabled},
                                                     {"repeat_gap_px", rule.repeat_gap_px}};
    }
    j["anti_alias"] = anti_alias;
    j["font"] = font;
    return j.dump(2);
}

} // namespace histmap
