"""
Replays a trace against the channel semantics and audits the protocol invariants it records.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import groupby
from typing import Dict, List, Set

from src.core.radio import ActionKind, NodeStatus, Observation, allowed_observations, scaled_log2
from src.core.radio_engine import resolve_listeners
from src.core.trace import PhaseRecord, Trace
from src.protocols.cd_mis import check_phase_budget

CD_PROTOCOLS = ('cd-mis', 'beep-mis')
NOCD_PROTOCOL = 'nocd-mis'


@dataclass
class AuditResult:
    """Result of auditing one trace."""
    success: bool = True
    passed_checks: List[str] = field(default_factory=list)
    failures: List[Dict[str, str]] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def add_passed(self, check: str):
        self.passed_checks.append(check)
        logging.debug(f"Audit passed: {check}")

    def add_failure(self, check: str, detail: str):
        self.failures.append({"check": check, "detail": detail})
        self.success = False
        logging.error(f"Audit failed: {check} - {detail}")

    def add_warning(self, warning: str):
        self.warnings.append(warning)
        logging.warning(f"Audit warning: {warning}")

    def generate_report(self) -> str:
        """Generate human-readable audit report."""
        report = ["=== TRACE AUDIT REPORT ==="]
        report.append("All checks passed" if self.success else "Audit found violations")

        if self.passed_checks:
            report.append("\nPassed Checks:")
            for check in self.passed_checks:
                report.append(f"  • {check}")

        if self.failures:
            report.append("\nFailures:")
            for failure in self.failures:
                report.append(f"  • {failure['check']}: {failure['detail']}")

        if self.warnings:
            report.append("\nWarnings:")
            for warning in self.warnings:
                report.append(f"  • {warning}")

        return "\n".join(report)


class TraceAuditService:
    """Checks everything a trace asserts about itself.

    Deterministic properties fail the audit. Properties that only hold with high probability are
    reported as warnings unless `strict` is set.
    """

    def __init__(self, trace: Trace, strict: bool = False):
        self.trace = trace
        self.strict = strict
        self.result = AuditResult()

    def audit(self) -> AuditResult:
        self.result = AuditResult()
        trace = self.trace

        if trace.config.get('rounds_recorded', True):
            self._check_energy_ledger()
            self._check_observations()
            self._check_terminated_silent()
        else:
            self.result.add_warning("awake rounds were not recorded; replay checks skipped")
        self._check_energy_cap()
        self._check_final_statuses()

        if trace.protocol in CD_PROTOCOLS:
            self._check_cd_schedule()
            self._check_local_maxima(soft=False)
            self._check_must_decide()
        elif trace.protocol == NOCD_PROTOCOL:
            if trace.config.get('rounds_recorded', True):
                self._check_lockstep()
            self._check_must_decide()
            self._check_local_maxima(soft=True)
            self._check_commit_degree()
            self._check_simultaneous_commits()
        return self.result

    def _soft_failure(self, check: str, detail: str) -> None:
        if self.strict:
            self.result.add_failure(check, detail)
        else:
            self.result.add_warning(f"{check}: {detail}")

    def _check_energy_ledger(self) -> None:
        counted = [0] * self.trace.node_count
        for _, node, _, _ in self.trace.rounds:
            counted[node] += 1
        mismatched = [node for node in range(self.trace.node_count) if counted[node] != self.trace.energy[node]]
        if mismatched:
            self.result.add_failure("energy ledger", f"energy differs from awake rounds for nodes {mismatched[:10]}")
        else:
            self.result.add_passed("energy ledger")

    def _check_energy_cap(self) -> None:
        cap = self.trace.config.get('energy_cap')
        if cap is None:
            return
        over = [node for node, energy in enumerate(self.trace.energy) if energy > cap]
        if over:
            self.result.add_failure("energy cap", f"nodes {over[:10]} exceeded the cap of {cap}")
        else:
            self.result.add_passed("energy cap")

    def _check_observations(self) -> None:
        trace = self.trace
        allowed = allowed_observations(trace.model)
        ordered = sorted(trace.rounds, key=lambda event: (event[0], event[1]))
        for round_number, events in groupby(ordered, key=lambda event: event[0]):
            events = list(events)
            if round_number < 0 or round_number >= trace.round_count:
                self.result.add_failure("observation replay", f"awake event outside the run in round {round_number}")
                return
            nodes = [node for _, node, _, _ in events]
            if len(set(nodes)) != len(nodes):
                self.result.add_failure("observation replay", f"node acted twice in round {round_number}")
                return
            transmitters = {node for _, node, action, _ in events if action is ActionKind.TRANSMIT}
            listeners = [node for _, node, action, _ in events if action is ActionKind.LISTEN]
            expected = resolve_listeners(trace.graph, transmitters, listeners, trace.model)
            for _, node, action, observation in events:
                if action is ActionKind.TRANSMIT:
                    wanted = Observation.NOTHING
                elif action is ActionKind.LISTEN:
                    wanted = expected[node]
                    if observation not in allowed:
                        self.result.add_failure(
                            "observation replay",
                            f"{observation.value} is impossible on a {trace.model.value} channel "
                            f"(node {node}, round {round_number})")
                        return
                else:
                    self.result.add_failure("observation replay", f"sleep recorded as awake (node {node}, round {round_number})")
                    return
                if observation is not wanted:
                    self.result.add_failure(
                        "observation replay",
                        f"node {node} observed {observation.value} in round {round_number}, expected {wanted.value}")
                    return
        self.result.add_passed("observation replay")

    def _check_terminated_silent(self) -> None:
        """Out-MIS nodes stop acting at their decision; CD nodes stop at either decision."""
        trace = self.trace
        stops_on_join = trace.protocol != NOCD_PROTOCOL
        stops: Dict[int, int] = {}
        for round_number, node, status in trace.transitions:
            if node in stops:
                continue
            if status is NodeStatus.OUT_MIS or (stops_on_join and status is NodeStatus.IN_MIS):
                stops[node] = round_number
        late = sorted({node for round_number, node, _, _ in trace.rounds
                       if node in stops and round_number >= stops[node]})
        if late:
            self.result.add_failure("terminated nodes silent", f"nodes {late[:10]} acted after terminating")
        else:
            self.result.add_passed("terminated nodes silent")

    def _check_final_statuses(self) -> None:
        replayed = self.trace.statuses_at(self.trace.round_count)
        if list(self.trace.final) != replayed:
            self.result.add_failure("final statuses", "final statuses disagree with the transition log")
        else:
            self.result.add_passed("final statuses")

    def _check_cd_schedule(self) -> None:
        if not self.trace.config.get('rounds_recorded', True):
            return
        if check_phase_budget(self.trace):
            self.result.add_passed("knocked-out sleep schedule")
        else:
            self.result.add_failure("knocked-out sleep schedule",
                                    "a knocked-out node was awake before its phase's final round or the budget was exceeded")

    def _completed_phases(self) -> List[PhaseRecord]:
        return [record for record in self.trace.phases
                if self.trace.phase_boundary(record.index) <= self.trace.round_count]

    def _check_must_decide(self) -> None:
        trace = self.trace
        undecided = []
        for record in self._completed_phases():
            statuses = trace.statuses_at(trace.phase_boundary(record.index))
            unresolved = set(record.low_degree_unresolved)
            for node in set(record.winners) | set(record.committed_nodes):
                if node in unresolved or trace.capped[node]:
                    continue
                if not statuses[node].is_decided:
                    undecided.append((record.index, node))
            for node in sorted(unresolved):
                self.result.add_warning(f"low-degree MIS left node {node} undecided in phase {record.index}")
        if undecided:
            self.result.add_failure("must decide", f"(phase, node) pairs still undecided: {undecided[:10]}")
        else:
            self.result.add_passed("must decide")

    def _local_maxima(self, record: PhaseRecord) -> Set[int]:
        ranks = dict(record.ranks)
        maxima = set()
        for node, rank in ranks.items():
            rivals = [ranks[neighbor] for neighbor in self.trace.graph.neighbors(node) if neighbor in ranks]
            if all(rank > rival for rival in rivals):
                maxima.add(node)
        return maxima

    def _check_local_maxima(self, soft: bool) -> None:
        missing = []
        for record in self.trace.phases:
            winners = set(record.winners)
            for node in self._local_maxima(record):
                if node not in winners and not self.trace.capped[node]:
                    missing.append((record.index, node))
        if not missing:
            self.result.add_passed("local maxima win")
            return
        detail = f"(phase, node) local maxima that did not win: {missing[:10]}"
        if soft:
            self._soft_failure("local maxima win", detail)
        else:
            self.result.add_failure("local maxima win", detail)

    def _bitty_span(self) -> int:
        return int(self.trace.config['schedule']['T_B_K'])

    def _check_commit_degree(self) -> None:
        trace = self.trace
        bound = scaled_log2(trace.config['kappa'], trace.config['n'])
        bitty_span = self._bitty_span()
        crowded = []
        for record in trace.phases:
            participants = set(record.participants)
            for node, bitty in record.committed:
                statuses = trace.statuses_at(record.start_round + bitty * bitty_span)
                active = sum(1 for neighbor in trace.graph.neighbors(node)
                             if neighbor in participants and statuses[neighbor] is not NodeStatus.LOSE)
                if active > bound:
                    crowded.append((record.index, node, active))
        if crowded:
            self._soft_failure("commit degree",
                               f"(phase, node, active neighbors) above {bound}: {crowded[:10]}")
        else:
            self.result.add_passed("commit degree")

    def _check_simultaneous_commits(self) -> None:
        staggered = []
        for record in self.trace.phases:
            commit_bitty = dict(record.committed)
            for u, v in self.trace.graph.induced_edges(commit_bitty):
                if commit_bitty[u] != commit_bitty[v]:
                    staggered.append((record.index, u, v))
        if staggered:
            self._soft_failure("simultaneous commits",
                               f"(phase, u, v) adjacent nodes committed in different Bitty phases: {staggered[:10]}")
        else:
            self.result.add_passed("simultaneous commits")

    def _check_lockstep(self) -> None:
        """Every awake round of the no-CD protocol falls inside a block its status allows."""
        trace = self.trace
        schedule = trace.config['schedule']
        offsets = schedule['offsets']
        first, second, shallow = offsets['first_check'], offsets['second_check'], offsets['shallow_check']
        low_degree_start = second + schedule['T_B_K']
        records = {record.index: record for record in trace.phases}

        per_phase = defaultdict(list)
        for round_number, node, action, _ in trace.rounds:
            per_phase[round_number // trace.phase_length].append((round_number, node, action))

        for phase, events in sorted(per_phase.items()):
            start = phase * trace.phase_length
            record = records.get(phase, PhaseRecord(index=phase, start_round=start))
            at_start = trace.statuses_at(start)
            at_first = trace.statuses_at(start + first)
            at_second = trace.statuses_at(start + second)
            low_degree = set(record.low_degree) | set(record.low_degree_unresolved)
            for round_number, node, action in events:
                offset = round_number - start
                if offset < first:
                    allowed = at_start[node] is NodeStatus.UNDECIDED
                elif offset < second:
                    allowed = (at_first[node] is NodeStatus.IN_MIS and action is ActionKind.TRANSMIT) or \
                              (at_first[node] is NodeStatus.WIN and action is ActionKind.LISTEN)
                elif offset < low_degree_start:
                    allowed = (at_second[node] is NodeStatus.IN_MIS and action is ActionKind.TRANSMIT) or \
                              (at_second[node] is NodeStatus.COMMIT and action is ActionKind.LISTEN)
                elif offset < shallow:
                    allowed = node in low_degree
                else:
                    allowed = True
                if not allowed:
                    self.result.add_failure(
                        "schedule lockstep",
                        f"node {node} {action.value} at offset {offset} of phase {phase} outside its block")
                    return
        self.result.add_passed("schedule lockstep")
