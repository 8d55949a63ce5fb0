#include "vwsim/inventory_json.hpp"

#include "json.hpp"

#include <charconv>
#include <set>
#include <system_error>

namespace vwsim {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, ptr);
}

double parse_number(std::string_view s, const std::string& path) {
    // from_chars rejects leading whitespace; trim both ends first.
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw InventoryParseError(path + ": malformed coordinate number");
    return v;
}

std::pair<double, double> parse_coord_pair(const ordered_json& j, const std::string& path) {
    if (!j.is_string()) throw InventoryParseError(path + ": expected \"x, y\" string");
    std::string_view s = j.get_ref<const std::string&>();
    auto comma = s.find(',');
    if (comma == std::string_view::npos)
        throw InventoryParseError(path + ": expected \"x, y\" string");
    return {parse_number(s.substr(0, comma), path), parse_number(s.substr(comma + 1), path)};
}

const ordered_json& require(const ordered_json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) throw InventoryParseError(path + ": missing required field " + key);
    return *it;
}

std::string require_string(const ordered_json& j, const char* key, const std::string& path) {
    const auto& v = require(j, key, path);
    if (!v.is_string()) throw InventoryParseError(path + "." + key + ": expected string");
    return v.get<std::string>();
}

HashDigest require_digest(const ordered_json& j, const char* key, const std::string& path) {
    std::string hex = require_string(j, key, path);
    try {
        return HashDigest::from_hex(hex);
    } catch (const std::invalid_argument& e) {
        throw InventoryParseError(path + "." + key + ": " + e.what());
    }
}

ordered_json properties_to_json(const PropertyMap& fields) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : fields) j[k] = v; // PropertyMap iterates sorted
    return j;
}

PropertyMap properties_from_json(const ordered_json& j, const std::string& path) {
    if (!j.is_object()) throw InventoryParseError(path + ": expected object");
    PropertyMap fields;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "PHash") continue;
        if (!it.value().is_string())
            throw InventoryParseError(path + "." + it.key() + ": expected string");
        fields[it.key()] = it.value().get<std::string>();
    }
    return fields;
}

ordered_json object_to_json(const ObjectEntry& obj) {
    ordered_json j = ordered_json::object();
    j["OID"] = obj.oid;
    j["OHash"] = obj.ohash.hex();
    j["OCoord"] = format_coord_pair(obj.ocoord.x, obj.ocoord.y);
    j["LCID"] = obj.lcid;
    ordered_json props = ordered_json::object();
    props["PHash"] = obj.properties.phash.hex();
    for (const auto& [k, v] : obj.properties.fields) props[k] = v;
    j["OProperties"] = std::move(props);
    ordered_json types = ordered_json::array();
    for (const auto& g : obj.file_types) {
        ordered_json tj = ordered_json::object();
        tj["Type"] = g.type_name;
        tj["FTHash"] = g.fthash.hex();
        ordered_json files = ordered_json::array();
        for (const auto& f : g.files) {
            ordered_json fj = ordered_json::object();
            fj["FHash"] = f.fhash.hex();
            fj["FProperties"] = properties_to_json(f.properties);
            fj["Size"] = f.size;
            files.push_back(std::move(fj));
        }
        tj["Files"] = std::move(files);
        types.push_back(std::move(tj));
    }
    j["FileType"] = std::move(types);
    return j;
}

ObjectEntry object_from_json(const ordered_json& j, const std::string& path) {
    if (!j.is_object()) throw InventoryParseError(path + ": expected object");
    ObjectEntry obj;
    obj.oid = require_string(j, "OID", path);
    if (obj.oid.empty()) throw InventoryParseError(path + ".OID: must be non-empty");
    obj.ohash = require_digest(j, "OHash", path);
    auto [ox, oy] = parse_coord_pair(require(j, "OCoord", path), path + ".OCoord");
    obj.ocoord = {ox, oy};
    obj.lcid = require_string(j, "LCID", path);
    if (obj.lcid.empty()) throw InventoryParseError(path + ".LCID: must be non-empty");
    const auto& props = require(j, "OProperties", path);
    obj.properties.phash = require_digest(props, "PHash", path + ".OProperties");
    obj.properties.fields = properties_from_json(props, path + ".OProperties");
    const auto& types = require(j, "FileType", path);
    if (!types.is_array()) throw InventoryParseError(path + ".FileType: expected array");
    std::set<std::string> seen_types;
    for (std::size_t ti = 0; ti < types.size(); ++ti) {
        std::string tpath = path + ".FileType[" + std::to_string(ti) + "]";
        const auto& tj = types[ti];
        FileTypeGroup g;
        g.type_name = require_string(tj, "Type", tpath);
        if (!seen_types.insert(g.type_name).second)
            throw InventoryParseError(tpath + ": duplicate Type " + g.type_name);
        g.fthash = require_digest(tj, "FTHash", tpath);
        const auto& files = require(tj, "Files", tpath);
        if (!files.is_array() || files.empty())
            throw InventoryParseError(tpath + ".Files: expected non-empty array");
        for (std::size_t fi = 0; fi < files.size(); ++fi) {
            std::string fpath = tpath + ".Files[" + std::to_string(fi) + "]";
            const auto& fj = files[fi];
            FileEntry f;
            f.fhash = require_digest(fj, "FHash", fpath);
            f.properties = properties_from_json(require(fj, "FProperties", fpath), fpath + ".FProperties");
            const auto& size = require(fj, "Size", fpath);
            if (!size.is_number_unsigned())
                throw InventoryParseError(fpath + ".Size: expected non-negative integer");
            f.size = size.get<std::uint64_t>();
            g.files.push_back(std::move(f));
        }
        obj.file_types.push_back(std::move(g));
    }
    return obj;
}

} // namespace

std::string format_coord_pair(double x, double y) {
    return format_number(x) + ", " + format_number(y);
}

std::string serialize_inventory(const Inventory& inv) {
    ordered_json j = ordered_json::object();
    j["RID"] = inv.rid;
    j["RCoord"] = format_coord_pair(inv.rcoord.x, inv.rcoord.y);
    ordered_json objects = ordered_json::array();
    for (const auto& o : inv.objects) objects.push_back(object_to_json(o));
    j["Object"] = std::move(objects);
    return j.dump(2) + "\n";
}

Inventory parse_inventory(std::string_view text) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw InventoryParseError("inventory: malformed JSON");
    if (!j.is_object()) throw InventoryParseError("inventory: expected object");
    Inventory inv;
    inv.rid = require_string(j, "RID", "inventory");
    if (inv.rid.empty()) throw InventoryParseError("inventory.RID: must be non-empty");
    auto [rx, ry] = parse_coord_pair(require(j, "RCoord", "inventory"), "inventory.RCoord");
    inv.rcoord = {rx, ry};
    const auto& objects = require(j, "Object", "inventory");
    if (!objects.is_array()) throw InventoryParseError("inventory.Object: expected array");
    std::set<ObjectId> seen;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        std::string path = "inventory.Object[" + std::to_string(i) + "]";
        ObjectEntry obj = object_from_json(objects[i], path);
        if (!seen.insert(obj.oid).second)
            throw InventoryParseError(path + ": duplicate OID " + obj.oid);
        inv.upsert(std::move(obj));
    }
    return inv;
}

std::string serialize_object(const ObjectEntry& obj) {
    return object_to_json(obj).dump(2) + "\n";
}

ObjectEntry parse_object(std::string_view text) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw InventoryParseError("object: malformed JSON");
    return object_from_json(j, "object");
}

} // namespace vwsim
