"""End to end: log file in, explained alerts out.

The same pipeline backs the `stratalog detect` command line:

    read log -> extract facts -> evaluate rule packages -> render alerts

This script runs it on the bundled sample (and on the 2k-line reference
dataset when data/Linux_2k.log_structured.csv has been fetched with
scripts/fetch_linux2k.py).
"""
from pathlib import Path

from stratalog import (
    RunConfig,
    detect,
    group_alerts,
    load_entries,
    render_alerts,
    render_grouped,
)

HERE = Path(__file__).resolve().parent
DATASET = HERE.parent / "data" / "Linux_2k.log_structured.csv"

# --- sample log ---------------------------------------------------------------
config = RunConfig(input_path=HERE / "data" / "sample.log",
                   input_format="syslog", base_year=2005)
entries, result = load_entries(config)
alerts = detect(entries, config)

print(f"sample: {len(entries)} entries -> {len(alerts)} alerts\n")
print(render_alerts(alerts, "text"))

# The JSON rendering is one object per line, ready for a SIEM or jq:
print("as JSON lines:")
print(render_alerts(alerts, "json"))

# Grouping folds repeated alerts about the same entity into one row:
print("grouped:")
print(render_grouped(group_alerts(alerts), "text"))

# --- supplemental facts ---------------------------------------------------------
# Facts that do not come from logs (account inventory, dormancy lists) join
# through a facts file; see RunConfig(extra_facts_path=...) or --extra-facts.

# --- reference dataset -----------------------------------------------------------
if DATASET.exists():
    config = RunConfig(input_path=DATASET, input_format="csv", base_year=2005)
    entries, result = load_entries(config)
    alerts = detect(entries, config)
    groups = group_alerts(alerts)
    print(f"\nreference dataset: {len(entries)} entries -> "
          f"{len(alerts)} alerts in {len(groups)} groups")
    print(render_grouped(groups, "text"))
else:
    print(f"\n(reference dataset not present; run scripts/fetch_linux2k.py "
          f"to enable the full replay)")
