#include "brick/ledger.hpp"

#include <algorithm>

namespace brick {

Chain::Chain(ChainParams params, std::uint64_t seed) : params_(params), rng_(seed) {
  if (params_.confirm_depth == 0) params_.confirm_depth = 1;
  if (params_.liveness_bound == 0) params_.liveness_bound = 1;
  blocks_.push_back(Block{0, {}, {}});
}

std::optional<Height> Chain::finalized_height() const {
  Height h = height();
  if (h + 1 < params_.confirm_depth) return std::nullopt;
  return h + 1 - params_.confirm_depth;
}

bool Chain::is_final(Height included_at) const {
  auto fin = finalized_height();
  return fin && included_at <= *fin;
}

void Chain::register_contract(const ChannelId& address, ContractExecutor* executor) {
  contracts_[address] = executor;
}

void Chain::add_hold_policy(HoldPolicy policy) { holds_.push_back(std::move(policy)); }

TxId Chain::submit(const PublicKey& sender, const ChannelId& contract, std::string kind,
                   Bytes payload) {
  Transaction tx{next_id_++, sender, contract, std::move(kind), std::move(payload), height()};
  std::uniform_int_distribution<Height> delay(1, params_.liveness_bound);
  Height due = height() + delay(rng_);
  for (const auto& hold : holds_) due += hold(tx);
  TxId id = tx.id;
  pending_.push_back(Pending{due, std::move(tx)});
  return id;
}

const Block& Chain::advance_block() {
  Block block;
  block.height = height() + 1;
  std::vector<Pending> waiting;
  for (auto& p : pending_) {
    if (p.due <= block.height) {
      block.txs.push_back(std::move(p.tx));
    } else {
      waiting.push_back(std::move(p));
    }
  }
  pending_ = std::move(waiting);

  for (std::size_t i = 0; i < block.txs.size(); ++i) {
    const auto& tx = block.txs[i];
    Receipt r;
    auto it = contracts_.find(tx.contract);
    if (it == contracts_.end()) {
      r.tx = tx.id;
      r.height = block.height;
      r.error = Error{Errc::UnknownContract};
    } else {
      r = it->second->execute(tx, block.height);
    }
    index_[tx.id] = {block.height, i};
    block.receipts.push_back(std::move(r));
  }
  blocks_.push_back(std::move(block));
  for (auto& [addr, exec] : contracts_) exec->on_block(height());
  return blocks_.back();
}

std::optional<Receipt> Chain::receipt(TxId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return blocks_[it->second.first].receipts[it->second.second];
}

std::optional<Height> Chain::inclusion_height(TxId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second.first;
}

nlohmann::json Chain::to_json() const {
  auto out = nlohmann::json::array();
  for (const auto& b : blocks_) {
    nlohmann::json jb;
    jb["height"] = b.height;
    jb["txs"] = nlohmann::json::array();
    for (std::size_t i = 0; i < b.txs.size(); ++i) {
      const auto& tx = b.txs[i];
      const auto& r = b.receipts[i];
      nlohmann::json jt;
      jt["id"] = tx.id;
      jt["kind"] = tx.kind;
      jt["sender"] = tx.sender.hex();
      jt["payload-hex"] = to_hex(tx.payload);
      jt["ok"] = r.ok();
      if (r.error) jt["error"] = r.error->message();
      jb["txs"].push_back(std::move(jt));
    }
    out.push_back(std::move(jb));
  }
  return out;
}

}  // namespace brick
