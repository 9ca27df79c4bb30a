"""Fixed seeds for every randomized run (tests, acceptance, scripts)."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Seeds:
    regular_oracle: int = 1101
    auto_runs: int = 1102
    singular_arcs: int = 1103
    merging: int = 1104
    mutations: int = 1105
    cli_roundtrip: int = 1106
    candidates: int = 1107
    hypothesis: int = 1108
    cli_default: int = 0


SEEDS = Seeds()
