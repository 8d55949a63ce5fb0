#pragma once

#include "vwsim/digest.hpp"
#include "vwsim/ids.hpp"
#include "vwsim/metrics.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace vwsim {

enum class OverlayStatus {
    Ok,
    RetryAfterStabilization,
    NotFound,
    AlreadyExists,
    WrongOwner,
    Unreachable,
};

struct ChordConfig {
    int id_bits = 32;            // b
    int stabilization_period = 1;
    int finger_set_max = 4;      // neighbors kept per finger level
};

/// LCID -> replica addresses, versioned so updates are observable.
struct MappingRecord {
    LogicalComputerId lcid;
    std::vector<NodeAddress> replicas;
    std::uint64_t version = 0;
    bool operator==(const MappingRecord&) const = default;
};

/// Ring overlay node. Owns the key segment [id, successor) (wrapping) and
/// keeps, per finger level i, neighbors whose clockwise distance lies in
/// [2^i, 2^{i+1}).
struct AddressingBot {
    std::uint64_t id = 0;
    NodeAddress address;
    std::uint64_t successor = 0;
    std::uint64_t predecessor = 0;
    std::vector<std::vector<std::uint64_t>> fingers;
    // key -> lcid -> record (several lcids may truncate to one key)
    std::map<std::uint64_t, std::map<LogicalComputerId, MappingRecord>> store;
};

struct LookupResult {
    OverlayStatus status = OverlayStatus::Ok;
    std::uint64_t owner_id = 0;
    NodeAddress owner_address;
    int forwards = 0;
};

/// The object resource lookup service: a ring of addressing bots mapping
/// logical computer ids to replica addresses. Successor/predecessor links are
/// repaired eagerly on graceful join/leave; finger tables are rebuilt lazily,
/// one level per stabilization tick, so routing may cross stale entries and
/// prunes them when a delivery fails.
class ChordRing {
public:
    explicit ChordRing(ChordConfig cfg = {});

    const ChordConfig& config() const { return cfg_; }
    std::uint64_t key_mask() const { return mask_; }
    std::uint64_t key_of(const LogicalComputerId& lcid) const;
    std::uint64_t ring_distance(std::uint64_t from, std::uint64_t to) const;

    bool empty() const { return bots_.empty(); }
    std::size_t size() const { return bots_.size(); }
    bool contains(std::uint64_t id) const { return bots_.count(id) != 0; }
    std::vector<std::uint64_t> ids() const;
    const AddressingBot& bot(std::uint64_t id) const { return bots_.at(id); }
    AddressingBot& bot_mut(std::uint64_t id) { return bots_.at(id); }
    const AddressingBot* bot_by_address(NodeAddress addr) const;
    /// Smallest live id; the conventional bootstrap entry point.
    std::uint64_t first_live() const;

    /// Graceful membership changes. join hands the new bot the keys of its
    /// segment; leave hands the departing bot's keys to the bot that owns
    /// them afterwards (its predecessor, since segments run [id, successor)).
    void join(std::uint64_t id, NodeAddress addr);
    void leave(std::uint64_t id);

    /// Routes from `entry_id` to the owner of `key`. Meters one direct hop
    /// for the delivery to the entry bot plus one ring hop per forward
    /// (attempts to departed finger targets included); the reply hop belongs
    /// to the calling operation. `forwards` is the inter-bot forward count.
    LookupResult lookup(std::uint64_t entry_id, std::uint64_t key, Meter* m);

    OverlayStatus mapping_create(std::uint64_t entry_id, const LogicalComputerId& lcid,
                                 std::vector<NodeAddress> replicas, Meter* m);
    OverlayStatus mapping_update(std::uint64_t entry_id, const LogicalComputerId& lcid,
                                 std::vector<NodeAddress> replicas, Meter* m);

    struct QueryResult {
        OverlayStatus status = OverlayStatus::Ok;
        MappingRecord record;
        int forwards = 0;
    };
    QueryResult mapping_query(std::uint64_t entry_id, const LogicalComputerId& lcid, Meter* m);

    /// One round trip straight to a (possibly stale) cached addressing bot.
    struct DirectQueryResult {
        OverlayStatus status = OverlayStatus::Ok;
        MappingRecord record;
    };
    DirectQueryResult query_at(NodeAddress bot_addr, const LogicalComputerId& lcid, Meter* m);

    /// Rebuilds one finger level (cycle mod id_bits) on every bot.
    void stabilize_tick(std::uint64_t cycle);
    /// Rebuilds every level on every bot; used after bulk construction.
    void rebuild_all_fingers();

    /// True when `key` falls in [from, from.successor).
    bool owns(std::uint64_t from_id, std::uint64_t key) const;

private:
    void rebuild_finger_level(AddressingBot& bot, int level);
    void prune_finger(AddressingBot& bot, std::uint64_t dead_id);

    ChordConfig cfg_;
    std::uint64_t mask_ = 0;
    std::map<std::uint64_t, AddressingBot> bots_;
    std::map<std::uint32_t, std::uint64_t> by_address_;
};

} // namespace vwsim
