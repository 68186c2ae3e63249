"""The bundled anomaly detection rule packages.

Seven packages ship as one program: brute-force logins, privilege
escalation, frequent network connections, account anomalies, klogind
brute force, GDM authentication failures, and system-level issues. The
rule text is embedded as-is and never edited programmatically; threshold
overrides are applied by rewriting the ``#const`` lines only, so the rules
an operator audits are exactly the rules that run.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, fields, replace
from typing import Optional

RULES_TEXT = """\
% Brute force: repeated failed logins from one address inside a sliding
% window. The count is inclusive at both window edges.
#const login_time_window = 600.
#const failed_login_threshold = 5.

potential_brute_force(IP, Time) :-
    login_attempt(IP, Time, failed, _),
    failed_count(IP, Time, Count),
    Count >= failed_login_threshold.

failed_count(IP, Time, Count) :-
    login_attempt(IP, Time, failed, _),
    Count = #count{T : login_attempt(IP, T, failed, _),
    T >= Time - login_time_window, T <= Time}.

% Privilege escalation: a non-root user opens a session as uid 0.
potential_privilege_escalation(User, Timestamp) :-
    session(User, UID, opened, Timestamp),
    UID == 0,
    User != "root".

% Network anomalies: one address with many connections.
#const connection_threshold = 10.

network_anomaly(IP) :- frequent_connections(IP).

frequent_connections(IP) :- network_connection(IP, _),
    #count{T : network_connection(IP, T)} >= connection_threshold.

% Account anomalies: admin-account creation, or reactivation of an
% account separately known to be dormant.
account_anomaly(Action, User, Time) :-
    account_action(Action, User, Time), Action == create_admin.

account_anomaly(Action, User, Time) :-
    account_action(Action, User, Time),
    Action == reactivate, dormant_account(User).

% Klogind brute force: repeated authentication failures from one address.
#const klogind_failure_threshold = 5.

potential_klogind_brute_force(IP) :-
    klogind_auth_failure(IP, _),
    #count{T : klogind_auth_failure(IP, T)} >=
        klogind_failure_threshold.

% GDM authentication failures. The count is global (not windowed and not
% per-source), so once the threshold is met every failure timestamp flags.
#const gdm_failure_threshold = 3.

potential_gdm_brute_force(Time) :- gdm_auth_failure(Time),
    #count{T : gdm_auth_failure(T)} >= gdm_failure_threshold.

% System issues: pass observed operational events through as alerts.
system_issue(logrotate_abnormal_exit, Time) :-
    logrotate_abnormal_exit(Time).

system_issue(named_soa_error, Time) :-
    named_soa_error(Time).

system_issue(xinetd_connection_reset, Time) :-
    xinetd_connection_reset(Time).
"""


@dataclass(frozen=True)
class Thresholds:
    """Tunable constants of the bundled program; all strictly positive."""

    login_time_window: int = 600
    failed_login_threshold: int = 5
    connection_threshold: int = 10
    klogind_failure_threshold: int = 5
    gdm_failure_threshold: int = 3

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
                raise ValueError(
                    f"{f.name} must be a strictly positive integer, got {value!r}")

    def with_overrides(self, **overrides: int) -> "Thresholds":
        unknown = set(overrides) - {f.name for f in fields(self)}
        if unknown:
            raise ValueError(f"unknown threshold name(s): {', '.join(sorted(unknown))}")
        return replace(self, **overrides)


THRESHOLD_NAMES = tuple(f.name for f in fields(Thresholds))


def default_program(thresholds: Optional[Thresholds] = None) -> str:
    """The bundled program text with ``#const`` lines set from thresholds."""
    if thresholds is None:
        return RULES_TEXT
    text = RULES_TEXT
    for name in THRESHOLD_NAMES:
        value = getattr(thresholds, name)
        text, count = re.subn(
            rf"(#const {name} = )\d+", rf"\g<1>{value}", text, count=1)
        if count != 1:
            raise AssertionError(f"no #const line for {name}")
    return text


@dataclass(frozen=True)
class CatalogEntry:
    """One anomaly output predicate.

    ``arg_roles`` labels each argument position; the role "timestamp"
    marks the event-time argument, everything else names an entity.
    """

    predicate: str
    arity: int
    kind: str
    description: str
    arg_roles: tuple[str, ...]


ANOMALY_CATALOG: tuple[CatalogEntry, ...] = (
    CatalogEntry("potential_brute_force", 2, "potential_brute_force",
                 "repeated failed logins from one address within the window",
                 ("ip", "timestamp")),
    CatalogEntry("potential_privilege_escalation", 2, "potential_privilege_escalation",
                 "non-root user opened a session with uid 0",
                 ("user", "timestamp")),
    CatalogEntry("network_anomaly", 1, "network_anomaly",
                 "address with an unusually high connection count",
                 ("ip",)),
    CatalogEntry("account_anomaly", 3, "account_anomaly",
                 "admin account created or dormant account reactivated",
                 ("action", "user", "timestamp")),
    CatalogEntry("potential_klogind_brute_force", 1, "potential_klogind_brute_force",
                 "repeated klogind authentication failures from one address",
                 ("ip",)),
    CatalogEntry("potential_gdm_brute_force", 1, "potential_gdm_brute_force",
                 "display-manager authentication failures past the threshold",
                 ("timestamp",)),
    CatalogEntry("system_issue", 2, "system_issue",
                 "operational problem observed in the logs",
                 ("issue", "timestamp")),
)


def list_anomaly_predicates() -> list[str]:
    """Names of the seven anomaly output predicates, in bundled-package order."""
    return [entry.predicate for entry in ANOMALY_CATALOG]
