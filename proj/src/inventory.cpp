#include "vwsim/inventory.hpp"

#include <algorithm>
#include <stdexcept>

namespace vwsim {

namespace {
const std::string kEmpty;
}

const std::string& FileEntry::name() const {
    auto it = properties.find("Name");
    return it == properties.end() ? kEmpty : it->second;
}

const ObjectEntry* Inventory::find(const ObjectId& oid) const {
    auto it = std::lower_bound(objects.begin(), objects.end(), oid,
                               [](const ObjectEntry& e, const ObjectId& id) { return e.oid < id; });
    return it != objects.end() && it->oid == oid ? &*it : nullptr;
}

void Inventory::upsert(ObjectEntry entry) {
    auto it = std::lower_bound(objects.begin(), objects.end(), entry.oid,
                               [](const ObjectEntry& e, const ObjectId& id) { return e.oid < id; });
    if (it != objects.end() && it->oid == entry.oid) {
        *it = std::move(entry);
    } else {
        objects.insert(it, std::move(entry));
    }
}

bool Inventory::erase(const ObjectId& oid) {
    auto it = std::lower_bound(objects.begin(), objects.end(), oid,
                               [](const ObjectEntry& e, const ObjectId& id) { return e.oid < id; });
    if (it == objects.end() || it->oid != oid) return false;
    objects.erase(it);
    return true;
}

std::string canonical_properties(const PropertyMap& fields) {
    std::string out;
    bool first = true;
    for (const auto& [k, v] : fields) { // std::map iterates in key order
        if (!first) out.push_back('\n');
        first = false;
        out += k;
        out.push_back('=');
        out += v;
    }
    return out;
}

HashDigest file_hash(std::string_view content, const PropertyMap& properties) {
    std::string buf(content);
    buf += canonical_properties(properties);
    return sha256(buf);
}

HashDigest property_hash(const ObjectProperties& properties) {
    return sha256(canonical_properties(properties.fields));
}

HashDigest object_root(const ObjectEntry& obj) {
    std::vector<HashDigest> leaves;
    leaves.reserve(1 + obj.file_types.size());
    leaves.push_back(obj.properties.phash);
    for (const auto& g : obj.file_types) leaves.push_back(g.fthash);
    return merkle_root(leaves);
}

void canonicalize(ObjectEntry& obj) {
    std::sort(obj.file_types.begin(), obj.file_types.end(),
              [](const FileTypeGroup& a, const FileTypeGroup& b) { return a.type_name < b.type_name; });
    for (auto& g : obj.file_types) {
        std::sort(g.files.begin(), g.files.end(),
                  [](const FileEntry& a, const FileEntry& b) { return a.name() < b.name(); });
    }
}

ObjectEntry recompute_hashes(ObjectEntry obj) {
    canonicalize(obj);
    for (auto& g : obj.file_types) {
        if (g.files.empty()) throw std::domain_error("file type group with no files");
        std::vector<HashDigest> fhashes;
        fhashes.reserve(g.files.size());
        for (auto& f : g.files) {
            if (f.content.empty() && f.size != 0)
                throw std::domain_error("recompute_hashes: file carries no content");
            f.fhash = file_hash(f.content, f.properties);
            f.size = f.content.size();
            fhashes.push_back(f.fhash);
        }
        g.fthash = merkle_root(fhashes);
    }
    obj.properties.phash = property_hash(obj.properties);
    obj.ohash = object_root(obj);
    return obj;
}

std::vector<std::string> verify_object(const ObjectEntry& obj, std::size_t* visited) {
    std::size_t visits = 0;
    std::vector<std::string> violations;

    ++visits; // object root
    bool root_ok = object_root(obj) == obj.ohash;
    bool child_found = false;
    if (!root_ok) {
        ++visits; // property node
        if (property_hash(obj.properties) != obj.properties.phash) {
            violations.push_back("properties");
            child_found = true;
        }
    }
    for (const auto& g : obj.file_types) {
        ++visits; // type node
        std::vector<HashDigest> fhashes;
        fhashes.reserve(g.files.size());
        for (const auto& f : g.files) fhashes.push_back(f.fhash);
        if (g.files.empty() || merkle_root(fhashes) == g.fthash) continue;
        child_found = true;
        bool file_found = false;
        for (const auto& f : g.files) {
            ++visits; // file node
            if (file_hash(f.content, f.properties) != f.fhash) {
                violations.push_back(g.type_name + "/" + f.name());
                file_found = true;
            }
        }
        if (!file_found) violations.push_back(g.type_name);
    }
    if (!root_ok && !child_found) violations.push_back("object");
    if (visited) *visited = visits;
    return violations;
}

DownloadPlan diff_objects(const ObjectEntry* local, const ObjectEntry& remote) {
    DownloadPlan plan;
    if (!local) {
        plan.object_needed = true;
        return plan;
    }
    if (local->ohash == remote.ohash) return plan;

    if (local->properties.phash != remote.properties.phash) plan.stale_property_block = true;

    std::map<std::string, const FileTypeGroup*> local_groups;
    for (const auto& g : local->file_types) local_groups.emplace(g.type_name, &g);

    for (const auto& rg : remote.file_types) {
        auto it = local_groups.find(rg.type_name);
        const FileTypeGroup* lg = it == local_groups.end() ? nullptr : it->second;
        if (lg && lg->fthash == rg.fthash) continue;
        std::map<std::string, const FileEntry*> local_files;
        if (lg) {
            for (const auto& f : lg->files) local_files.emplace(f.name(), &f);
        }
        for (const auto& rf : rg.files) {
            auto fit = local_files.find(rf.name());
            if (fit == local_files.end() || fit->second->fhash != rf.fhash) {
                plan.stale_files.emplace(rg.type_name, rf.name());
            }
        }
    }

    // Hashes differ but nothing is downloadable: the remote shed files or
    // types the local copy still has. Resync the whole object so the plan is
    // never empty while the roots disagree.
    if (plan.empty()) plan.object_needed = true;
    return plan;
}

} // namespace vwsim
