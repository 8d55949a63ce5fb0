#pragma once

#include "vwsim/chord.hpp"
#include "vwsim/ids.hpp"
#include "vwsim/inventory.hpp"
#include "vwsim/metrics.hpp"

#include <map>
#include <vector>

namespace vwsim {

/// A user's replicated storage unit: a set of replica nodes serving identical
/// object payloads. Replica-group internals are out of scope here; the
/// replicas are a static address set that scripted events may rotate.
struct LogicalComputer {
    LogicalComputerId lcid;
    std::vector<NodeAddress> replicas;
    std::map<ObjectId, ObjectEntry> store; // authoritative entries with content
};

class LogicalComputerRegistry {
public:
    LogicalComputer& create(const LogicalComputerId& lcid, std::vector<NodeAddress> replicas);
    bool contains(const LogicalComputerId& lcid) const { return lcs_.count(lcid) != 0; }
    LogicalComputer& at(const LogicalComputerId& lcid) { return lcs_.at(lcid); }
    const LogicalComputer& at(const LogicalComputerId& lcid) const { return lcs_.at(lcid); }
    std::size_t size() const { return lcs_.size(); }

    /// Swap one replica address (scripted replica-change event). The caller
    /// follows up with a mapping_update on the ring.
    void replace_replica(const LogicalComputerId& lcid, NodeAddress old_addr,
                         NodeAddress fresh_addr);

    /// One round trip to a replica for an object's payloads: one request hop,
    /// one reply hop, plus one metered transfer per wanted file. A stale
    /// replica address yields Unreachable after the accounted delivery.
    struct FetchResult {
        OverlayStatus status = OverlayStatus::Ok;
        const ObjectEntry* entry = nullptr;
    };
    FetchResult fetch(NodeAddress replica, const ObjectId& oid, std::size_t wanted_files,
                      Meter* m) const;

private:
    std::map<LogicalComputerId, LogicalComputer> lcs_;
    std::map<std::uint32_t, LogicalComputerId> by_replica_;
};

} // namespace vwsim
