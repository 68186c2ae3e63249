"""Shared fixtures: reference programs and a small synthetic log corpus."""
from __future__ import annotations

import csv
import io
from pathlib import Path

import pytest

from stratalog.parser import parse_program
from stratalog.rules import default_program

REPO_ROOT = Path(__file__).resolve().parent.parent
DATASET_PATH = REPO_ROOT / "data" / "Linux_2k.log_structured.csv"

# Minimal program exercising negation-as-failure: tweety keeps flying
# because nothing proves it abnormal, polly does not fly at all.
BIRDS_TEXT = """\
can_fly(X) :- bird(X), not abnormal(X).
abnormal(X) :- penguin(X).
bird(tweety).
penguin(polly).
"""

# Raw syslog lines that drive one brute-force alert (five failures within
# the window), one privilege escalation, one system issue, plus noise.
SYSLOG_SAMPLE = """\
Jun 14 15:16:01 combo sshd(pam_unix)[19939]: authentication failure; logname= uid=0 euid=0 tty=NODEVssh ruser= rhost=218.188.2.4
Jun 14 15:16:31 combo sshd(pam_unix)[19940]: authentication failure; logname= uid=0 euid=0 tty=NODEVssh ruser= rhost=218.188.2.4
Jun 14 15:17:01 combo sshd(pam_unix)[19941]: authentication failure; logname= uid=0 euid=0 tty=NODEVssh ruser= rhost=218.188.2.4
Jun 14 15:17:31 combo sshd(pam_unix)[19942]: authentication failure; logname= uid=0 euid=0 tty=NODEVssh ruser= rhost=218.188.2.4
Jun 14 15:18:01 combo sshd(pam_unix)[19943]: authentication failure; logname= uid=0 euid=0 tty=NODEVssh ruser= rhost=218.188.2.4
Jun 15 04:06:18 combo su(pam_unix)[21416]: session opened for user cyrus by (uid=0)
Jun 15 04:06:19 combo su(pam_unix)[21416]: session closed for user cyrus
Jun 15 04:06:20 combo logrotate: ALERT exited abnormally with [1]
Jun 15 09:00:00 combo kernel: klogd startup succeeded
"""


def make_csv_sample(rows: list[dict] | None = None) -> str:
    """A structured export equivalent of SYSLOG_SAMPLE (or custom rows)."""
    header = ["LineId", "Month", "Date", "Time", "Component", "PID",
              "Content", "EventId", "EventTemplate"]
    if rows is None:
        rows = []
        for i, line in enumerate(SYSLOG_SAMPLE.splitlines(), start=1):
            month, day, time_of_day, _host, rest = line.split(" ", 4)
            component, _, content = rest.partition(": ")
            pid = ""
            if component.endswith("]") and "[" in component:
                component, _, pid_part = component.partition("[")
                pid = pid_part[:-1]
            rows.append({
                "LineId": str(i), "Month": month, "Date": day,
                "Time": time_of_day, "Component": component, "PID": pid,
                "Content": content, "EventId": f"E{i}", "EventTemplate": "",
            })
    sink = io.StringIO()
    writer = csv.DictWriter(sink, fieldnames=header)
    writer.writeheader()
    writer.writerows(rows)
    return sink.getvalue()


@pytest.fixture
def birds_text() -> str:
    return BIRDS_TEXT


@pytest.fixture
def birds_program():
    return parse_program(BIRDS_TEXT)


@pytest.fixture
def bundled_program():
    return parse_program(default_program())


@pytest.fixture
def syslog_sample() -> str:
    return SYSLOG_SAMPLE


@pytest.fixture
def csv_sample() -> str:
    return make_csv_sample()
