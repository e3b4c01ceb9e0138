from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Verdict:
    """Outcome of the verifiers' end-of-round check; falsy on reject."""

    accepted: bool
    reason: str = ""

    def __bool__(self):
        return self.accepted


ACCEPT = Verdict(True)
