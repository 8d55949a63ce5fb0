#include "vwsim/chord.hpp"

#include <algorithm>
#include <stdexcept>

namespace vwsim {

ChordRing::ChordRing(ChordConfig cfg) : cfg_(cfg) {
    if (cfg_.id_bits < 8 || cfg_.id_bits > 64)
        throw std::invalid_argument("id_bits must be in [8, 64]");
    mask_ = cfg_.id_bits == 64 ? ~0ull : ((1ull << cfg_.id_bits) - 1);
}

std::uint64_t ChordRing::key_of(const LogicalComputerId& lcid) const {
    if (lcid.empty()) throw std::invalid_argument("key_of: empty lcid");
    HashDigest d = sha256(lcid);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d.bytes[i];
    return v >> (64 - cfg_.id_bits);
}

std::uint64_t ChordRing::ring_distance(std::uint64_t from, std::uint64_t to) const {
    return (to - from) & mask_;
}

std::vector<std::uint64_t> ChordRing::ids() const {
    std::vector<std::uint64_t> out;
    out.reserve(bots_.size());
    for (const auto& [id, _] : bots_) out.push_back(id);
    return out;
}

const AddressingBot* ChordRing::bot_by_address(NodeAddress addr) const {
    auto it = by_address_.find(addr.value);
    return it == by_address_.end() ? nullptr : &bots_.at(it->second);
}

std::uint64_t ChordRing::first_live() const {
    if (bots_.empty()) throw std::runtime_error("ring is empty");
    return bots_.begin()->first;
}

bool ChordRing::owns(std::uint64_t from_id, std::uint64_t key) const {
    const AddressingBot& b = bots_.at(from_id);
    if (b.successor == from_id) return true; // single bot owns the whole space
    return ring_distance(from_id, key) < ring_distance(from_id, b.successor);
}

void ChordRing::join(std::uint64_t id, NodeAddress addr) {
    id &= mask_;
    if (bots_.count(id)) throw std::invalid_argument("join: id already present");
    AddressingBot bot;
    bot.id = id;
    bot.address = addr;
    bot.fingers.assign(cfg_.id_bits, {});
    if (bots_.empty()) {
        bot.successor = bot.predecessor = id;
        bots_.emplace(id, std::move(bot));
        by_address_.emplace(addr.value, id);
        return;
    }
    // Predecessor: greatest id below the newcomer, wrapping to the maximum.
    auto it = bots_.lower_bound(id);
    std::uint64_t pred = it == bots_.begin() ? bots_.rbegin()->first : std::prev(it)->first;
    AddressingBot& p = bots_.at(pred);
    std::uint64_t succ = p.successor;
    bot.predecessor = pred;
    bot.successor = succ;

    // Keys in [id, succ) move from the predecessor to the newcomer.
    std::uint64_t span = ring_distance(id, succ);
    auto& pstore = p.store;
    for (auto sit = pstore.begin(); sit != pstore.end();) {
        if (ring_distance(id, sit->first) < span) {
            bot.store.emplace(sit->first, std::move(sit->second));
            sit = pstore.erase(sit);
        } else {
            ++sit;
        }
    }

    p.successor = id;
    bots_.at(succ).predecessor = id;
    bots_.emplace(id, std::move(bot));
    by_address_.emplace(addr.value, id);
}

void ChordRing::leave(std::uint64_t id) {
    auto it = bots_.find(id);
    if (it == bots_.end()) throw std::invalid_argument("leave: unknown id");
    if (bots_.size() == 1) throw std::invalid_argument("leave: cannot remove the last bot");
    AddressingBot& bot = it->second;
    // After departure the segment [pred, succ) belongs to the predecessor.
    AddressingBot& p = bots_.at(bot.predecessor);
    for (auto& [key, recs] : bot.store) {
        auto& slot = p.store[key];
        for (auto& [lcid, rec] : recs) slot.insert_or_assign(lcid, std::move(rec));
    }
    p.successor = bot.successor;
    bots_.at(bot.successor).predecessor = bot.predecessor;
    by_address_.erase(bot.address.value);
    bots_.erase(it);
}

void ChordRing::prune_finger(AddressingBot& bot, std::uint64_t dead_id) {
    for (auto& level : bot.fingers) {
        level.erase(std::remove(level.begin(), level.end(), dead_id), level.end());
    }
}

LookupResult ChordRing::lookup(std::uint64_t entry_id, std::uint64_t key, Meter* m) {
    key &= mask_;
    if (bots_.empty()) return {OverlayStatus::RetryAfterStabilization, 0, {}, 0};
    if (!bots_.count(entry_id)) entry_id = first_live();
    if (m) m->hop(HopKind::Direct, "ring-entry");

    std::uint64_t cur = entry_id;
    int forwards = 0;
    const int limit = 2 * static_cast<int>(bots_.size()) + 2 * cfg_.id_bits + 4;
    while (true) {
        if (owns(cur, key)) {
            const AddressingBot& b = bots_.at(cur);
            return {OverlayStatus::Ok, cur, b.address, forwards};
        }
        AddressingBot& cb = bots_.at(cur);
        std::uint64_t target_dist = ring_distance(cur, key);
        std::uint64_t next = cur;
        bool sent = false;
        while (!sent) {
            // Greatest clockwise progress not overshooting the key; the live
            // successor is always a valid fallback. Ties go to the smaller id.
            std::uint64_t best = cb.successor;
            std::uint64_t best_dist = ring_distance(cur, best);
            for (const auto& level : cb.fingers) {
                for (std::uint64_t f : level) {
                    std::uint64_t d = ring_distance(cur, f);
                    if (d == 0 || d > target_dist) continue;
                    if (d > best_dist || (d == best_dist && f < best)) {
                        best = f;
                        best_dist = d;
                    }
                }
            }
            ++forwards;
            if (!bots_.count(best)) {
                if (m) m->dead_delivery(HopKind::RingRouting);
                prune_finger(cb, best);
                continue;
            }
            if (m) m->hop(HopKind::RingRouting, "ring");
            next = best;
            sent = true;
        }
        cur = next;
        if (forwards > limit) return {OverlayStatus::RetryAfterStabilization, 0, {}, forwards};
    }
}

OverlayStatus ChordRing::mapping_create(std::uint64_t entry_id, const LogicalComputerId& lcid,
                                        std::vector<NodeAddress> replicas, Meter* m) {
    if (replicas.empty()) throw std::invalid_argument("mapping_create: empty replica set");
    std::uint64_t key = key_of(lcid);
    LookupResult lr = lookup(entry_id, key, m);
    if (lr.status != OverlayStatus::Ok) return lr.status;
    if (m) m->hop(HopKind::Direct, "ring-reply");
    auto& slot = bots_.at(lr.owner_id).store[key];
    if (slot.count(lcid)) return OverlayStatus::AlreadyExists;
    MappingRecord rec{lcid, std::move(replicas), 1};
    slot.emplace(lcid, std::move(rec));
    return OverlayStatus::Ok;
}

OverlayStatus ChordRing::mapping_update(std::uint64_t entry_id, const LogicalComputerId& lcid,
                                        std::vector<NodeAddress> replicas, Meter* m) {
    if (replicas.empty()) throw std::invalid_argument("mapping_update: empty replica set");
    std::uint64_t key = key_of(lcid);
    LookupResult lr = lookup(entry_id, key, m);
    if (lr.status != OverlayStatus::Ok) return lr.status;
    if (m) m->hop(HopKind::Direct, "ring-reply");
    auto& slot = bots_.at(lr.owner_id).store[key];
    auto it = slot.find(lcid);
    if (it == slot.end()) return OverlayStatus::NotFound;
    it->second.replicas = std::move(replicas);
    ++it->second.version;
    return OverlayStatus::Ok;
}

ChordRing::QueryResult ChordRing::mapping_query(std::uint64_t entry_id,
                                                const LogicalComputerId& lcid, Meter* m) {
    std::uint64_t key = key_of(lcid);
    LookupResult lr = lookup(entry_id, key, m);
    if (lr.status != OverlayStatus::Ok) return {lr.status, {}, lr.forwards};
    if (m) m->hop(HopKind::Direct, "ring-reply");
    const auto& store = bots_.at(lr.owner_id).store;
    auto kit = store.find(key);
    if (kit != store.end()) {
        auto rit = kit->second.find(lcid);
        if (rit != kit->second.end()) return {OverlayStatus::Ok, rit->second, lr.forwards};
    }
    return {OverlayStatus::NotFound, {}, lr.forwards};
}

ChordRing::DirectQueryResult ChordRing::query_at(NodeAddress bot_addr,
                                                 const LogicalComputerId& lcid, Meter* m) {
    if (m) m->hop(HopKind::Direct, "addr-query");
    auto ait = by_address_.find(bot_addr.value);
    if (ait == by_address_.end()) {
        if (m) ++m->dead_deliveries;
        return {OverlayStatus::Unreachable, {}};
    }
    const AddressingBot& bot = bots_.at(ait->second);
    std::uint64_t key = key_of(lcid);
    if (!owns(bot.id, key)) {
        if (m) m->hop(HopKind::Direct, "addr-reply");
        return {OverlayStatus::WrongOwner, {}};
    }
    if (m) m->hop(HopKind::Direct, "addr-reply");
    auto kit = bot.store.find(key);
    if (kit != bot.store.end()) {
        auto rit = kit->second.find(lcid);
        if (rit != kit->second.end()) return {OverlayStatus::Ok, rit->second};
    }
    return {OverlayStatus::NotFound, {}};
}

void ChordRing::rebuild_finger_level(AddressingBot& bot, int level) {
    std::uint64_t lo = 1ull << level;
    std::uint64_t hi = level + 1 >= cfg_.id_bits ? mask_ : (1ull << (level + 1)) - 1;
    std::vector<std::uint64_t> entries;
    std::uint64_t start = (bot.id + lo) & mask_;
    auto it = bots_.lower_bound(start);
    for (std::size_t seen = 0; seen < bots_.size(); ++seen) {
        if (it == bots_.end()) it = bots_.begin();
        std::uint64_t d = ring_distance(bot.id, it->first);
        if (d < lo || d > hi) break;
        entries.push_back(it->first);
        if (entries.size() >= static_cast<std::size_t>(cfg_.finger_set_max)) break;
        ++it;
    }
    bot.fingers[level] = std::move(entries);
}

void ChordRing::stabilize_tick(std::uint64_t cycle) {
    int level = static_cast<int>(cycle % static_cast<std::uint64_t>(cfg_.id_bits));
    for (auto& [id, bot] : bots_) rebuild_finger_level(bot, level);
}

void ChordRing::rebuild_all_fingers() {
    for (auto& [id, bot] : bots_) {
        for (int level = 0; level < cfg_.id_bits; ++level) rebuild_finger_level(bot, level);
    }
}

} // namespace vwsim
