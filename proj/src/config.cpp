#include "fpplab/config.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace fpplab {

ConfigSource ConfigSource::hashed(std::uint64_t seed) {
    ConfigSource s;
    s.base_ = Base::hashed;
    s.seed_ = seed;
    return s;
}

ConfigSource ConfigSource::constant(Color c) {
    ConfigSource s;
    s.base_ = Base::constant;
    s.const_color_ = c;
    return s;
}

ConfigSource ConfigSource::stored(std::vector<std::pair<Site, Color>> entries) {
    ConfigSource s;
    s.base_ = Base::stored;
    auto m = std::make_shared<Layer>();
    m->reserve(entries.size());
    for (const auto& [v, c] : entries) (*m)[v] = c;
    s.stored_ = std::move(m);
    return s;
}

Color ConfigSource::color_at(Site v) const {
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
        const auto f = (*it)->find(v);
        if (f != (*it)->end()) return f->second;
    }
    switch (base_) {
        case Base::hashed:
            return hashed_color(seed_, v);
        case Base::constant:
            return const_color_;
        case Base::stored: {
            const auto f = stored_->find(v);
            if (f == stored_->end()) {
                throw InvalidSpec("stored configuration does not cover site " + to_string(v));
            }
            return f->second;
        }
    }
    return Color::blue;  // unreachable
}

ConfigSource ConfigSource::with_overrides(std::span<const Site> sites, Color c) const {
    auto layer = std::make_shared<Layer>();
    layer->reserve(sites.size());
    for (const Site v : sites) (*layer)[v] = c;
    ConfigSource out = *this;
    out.layers_.push_back(std::move(layer));
    return out;
}

ConfigSource ConfigSource::with_override_map(std::vector<std::pair<Site, Color>> entries) const {
    auto layer = std::make_shared<Layer>();
    layer->reserve(entries.size());
    for (const auto& [v, c] : entries) (*layer)[v] = c;
    ConfigSource out = *this;
    out.layers_.push_back(std::move(layer));
    return out;
}

std::optional<std::uint64_t> ConfigSource::seed() const {
    if (base_ == Base::hashed) return seed_;
    return std::nullopt;
}

void ConfigSource::write_text(std::ostream& os, std::span<const Site> sites) const {
    for (const Site v : sites) {
        os << v.x << ' ' << v.y << ' ' << weight(color_at(v)) << '\n';
    }
}

ConfigSource ConfigSource::read_text(std::istream& is) {
    std::vector<std::pair<Site, Color>> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        long long x, y;
        int c;
        if (!(ls >> x >> y >> c) || (c != 0 && c != 1)) {
            throw IoError("bad stored-config line " + std::to_string(lineno) + ": '" + line + "'");
        }
        entries.push_back({Site{static_cast<std::int32_t>(x), static_cast<std::int32_t>(y)},
                           c == 1 ? Color::yellow : Color::blue});
    }
    return stored(std::move(entries));
}

RegionEnumeration::RegionEnumeration(ConfigSource base, std::vector<Site> sites)
    : base_(std::move(base)), sites_(std::move(sites)) {
    if (sites_.size() > static_cast<std::size_t>(kEnumerationCap)) {
        throw RegionTooLarge("enumeration over " + std::to_string(sites_.size()) +
                             " sites exceeds cap of " + std::to_string(kEnumerationCap));
    }
    count_ = std::uint64_t{1} << sites_.size();
}

ConfigSource RegionEnumeration::at(std::uint64_t index) const {
    std::vector<std::pair<Site, Color>> entries;
    entries.reserve(sites_.size());
    for (std::size_t j = 0; j < sites_.size(); ++j) {
        entries.push_back({sites_[j], ((index >> j) & 1) ? Color::yellow : Color::blue});
    }
    return base_.with_override_map(std::move(entries));
}

}  // namespace fpplab
