#pragma once

// One simulated run: parties, wardens, an optional auditor, the network and
// the chain, wired together and driven by a single scheduler.

#include <array>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <vector>

#include "brick/baseline.hpp"
#include "brick/brick_plus.hpp"
#include "brick/ledger.hpp"
#include "brick/messages.hpp"
#include "brick/netsim.hpp"
#include "brick/party.hpp"
#include "brick/report.hpp"
#include "brick/scenario.hpp"
#include "brick/warden.hpp"

namespace brick {

class World {
 public:
  /// Builds every actor, deploys and funds the contract and opens the
  /// channel. Fails with ConfigInvalid for inconsistent configurations.
  static Result<std::unique_ptr<World>> create(ScenarioConfig cfg);

  /// Starts the workload and runs until the channel is settled or the time
  /// limit passes.
  RunReport run();

  /// Fine-grained control for tests.
  void start();
  void run_until(SimTime limit);
  bool settled() const;
  RunReport report() const;

  const ScenarioConfig& config() const { return cfg_; }
  Scheduler& scheduler() { return sched_; }
  Chain& chain() { return chain_; }
  const BrickContract& contract() const { return *contract_; }
  Party& party(Role r) { return *parties_[r == Role::A ? 0 : 1]; }
  const Party& party(Role r) const { return *parties_[r == Role::A ? 0 : 1]; }
  Warden& warden(std::size_t i) { return wardens_.at(i); }
  const std::vector<Warden>& wardens() const { return wardens_; }
  const Trace& trace() const { return trace_; }
  Network<Message>& network() { return *net_; }

  /// Highest seq acknowledged by at least t distinct wardens.
  Seq ack_quorum_seq() const;
  /// Wardens with a recorded claim below a seq they had acknowledged when
  /// they claimed.
  std::vector<std::size_t> equivocators() const;

 private:
  explicit World(ScenarioConfig cfg);
  Status setup();
  void install_adversary();
  void execute(Role r, Actions actions);
  void on_party_message(Role r, std::uint32_t from, const Message& m);
  void on_warden_message(std::size_t w, std::uint32_t from, const Message& m);
  void on_auditor_message(std::uint32_t from, const Message& m);
  void submit_claim(std::size_t w);
  void tick();
  void finish_audit();
  std::string actor_name(const PublicKey& pk) const;
  SafetyFacts safety_facts() const;

  ScenarioConfig cfg_;
  Scheduler sched_;
  Trace trace_;
  Chain chain_;
  std::unique_ptr<Network<Message>> net_;
  std::unique_ptr<BrickContract> contract_;
  ChannelId channel_;
  KeyPair key_a_;
  KeyPair key_b_;
  std::vector<KeyPair> warden_keys_;
  std::optional<KeyPair> auditor_key_;
  std::array<std::unique_ptr<Party>, 2> parties_;
  std::vector<Warden> wardens_;
  std::unique_ptr<Auditor> auditor_;

  std::array<std::uint32_t, 2> party_node_{};
  std::vector<std::uint32_t> warden_node_;
  std::uint32_t auditor_node_ = 0;

  std::set<std::size_t> redeem_submitted_;
  std::size_t access_seen_ = 0;
  bool started_ = false;
  std::optional<SimTime> close_started_at_;
  std::optional<SimTime> closed_at_;
  /// Highest ack seq each warden had emitted when it published its claim.
  std::vector<Seq> acked_at_claim_;
  bool audit_requested_ = false;
  bool histories_requested_ = false;
  bool audit_done_ = false;
  Height last_block_ = 0;
  std::optional<AuditReport> audit_report_;
};

/// Runs a scenario end to end. Baseline runs also carry the paired Brick run
/// under the identical adversary when `paired` is set. With `trace_out` the
/// run's trace is written there as JSON lines.
Result<RunReport> run_scenario(const ScenarioConfig& cfg, std::ostream* trace_out = nullptr);

/// The dispute-window channel under the configured adversary.
Result<RunReport> run_baseline(const ScenarioConfig& cfg, std::ostream* trace_out = nullptr);

}  // namespace brick
