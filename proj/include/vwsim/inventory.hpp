#pragma once

#include "vwsim/digest.hpp"
#include "vwsim/geometry.hpp"
#include "vwsim/ids.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vwsim {

using PropertyMap = std::map<std::string, std::string>;

/// One resource file of an object. `content` holds the simulated payload; it
/// is present on author/cache copies and empty on catalog (wire) copies,
/// where only the hash and byte count travel.
struct FileEntry {
    HashDigest fhash;
    PropertyMap properties; // Name, Author, Version, ... sorted by key
    std::uint64_t size = 0;
    std::string content;

    const std::string& name() const;
    bool operator==(const FileEntry&) const = default;
};

/// Files of one class (texture, sound, ...). fthash is the Merkle root of the
/// member file hashes in canonical (file name) order.
struct FileTypeGroup {
    std::string type_name;
    HashDigest fthash;
    std::vector<FileEntry> files;
    bool operator==(const FileTypeGroup&) const = default;
};

struct ObjectProperties {
    PropertyMap fields; // Name, Author, Version, ... excluding PHash
    HashDigest phash;
    bool operator==(const ObjectProperties&) const = default;
};

/// Catalog entry of one object. ohash is the Merkle root over the property
/// hash followed by the file-type hashes, types in canonical (type name)
/// order.
struct ObjectEntry {
    ObjectId oid;
    HashDigest ohash;
    Coord ocoord;
    LogicalComputerId lcid;
    ObjectProperties properties;
    std::vector<FileTypeGroup> file_types;
    bool operator==(const ObjectEntry&) const = default;
};

/// Per-region content catalog. Objects are kept sorted by OID.
struct Inventory {
    RegionId rid;
    RegionCoord rcoord;
    std::vector<ObjectEntry> objects;

    const ObjectEntry* find(const ObjectId& oid) const;
    /// Insert or replace by OID, keeping the sort order.
    void upsert(ObjectEntry entry);
    bool erase(const ObjectId& oid);
    bool operator==(const Inventory&) const = default;
};

/// What a client has to download to bring a local copy up to the remote one.
/// An empty plan means the object hashes already match.
struct DownloadPlan {
    bool object_needed = false;        // no usable local copy; fetch everything
    bool stale_property_block = false; // property metadata changed
    std::set<std::pair<std::string, std::string>> stale_files; // (type, file name)

    bool empty() const {
        return !object_needed && !stale_property_block && stale_files.empty();
    }
};

/// Canonical property serialization used for hashing: "key=value" lines in
/// key order joined with '\n'.
std::string canonical_properties(const PropertyMap& fields);

/// FHash = sha256(content || canonical properties).
HashDigest file_hash(std::string_view content, const PropertyMap& properties);

/// PHash = sha256(canonical properties), PHash itself excluded.
HashDigest property_hash(const ObjectProperties& properties);

/// Object-level root recomputed from the *stored* child hashes.
HashDigest object_root(const ObjectEntry& obj);

/// Sorts file types by type name and files by file name (the canonical order
/// every hash is defined over).
void canonicalize(ObjectEntry& obj);

/// Recomputes every hash bottom-up from file contents and properties and
/// returns the canonicalized entry. Throws std::domain_error when a file
/// carries no content.
ObjectEntry recompute_hashes(ObjectEntry obj);

/// Hierarchical integrity check. Each level is recomputed from the stored
/// hashes one level down (file hashes from content), and the search descends
/// into the files of a type group only when that group's root fails, so a
/// single corrupted entry is located in O(root + types + files-of-one-type)
/// node visits instead of touching every file. Returns the violating node
/// paths ("object", "properties", "<type>", "<type>/<file>"); empty when the
/// stored tree is consistent. `visited` (optional) receives the number of
/// node visits.
std::vector<std::string> verify_object(const ObjectEntry& obj,
                                       std::size_t* visited = nullptr);

/// Comparison cascade local-vs-remote: equal OHash short-circuits to an empty
/// plan, otherwise PHash and per-type FTHash comparisons descend to the exact
/// per-file FHash differences. `local == nullptr` requests the whole object.
DownloadPlan diff_objects(const ObjectEntry* local, const ObjectEntry& remote);

} // namespace vwsim
