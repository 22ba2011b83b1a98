"""Oracle-call accounting.

Every solver run owns exactly one ledger; gap evaluation uses a separate
one so measurement never contaminates reported complexity. Counters are
monotone. A Hessian evaluation reused from a lazy snapshot does not
increment ``n_hess``.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class OracleLedger:
    n_value: int = 0
    n_grad: int = 0
    n_hess: int = 0
    n_crn: int = 0
    n_eg: int = 0
    # Number of lazy-snapshot sequences started (LEN epochs, lazy prox
    # bundles). Used by the lazy-accounting bound n_hess <= n_crn/m + seq.
    n_snapshot_seq: int = 0
    # Optional hard cap on CRN calls; None means unlimited.
    crn_budget: int | None = None

    def charge_value(self, k: int = 1) -> None:
        self.n_value += k

    def charge_grad(self, k: int = 1) -> None:
        self.n_grad += k

    def charge_hess(self, k: int = 1) -> None:
        self.n_hess += k

    def charge_crn(self) -> None:
        self.n_crn += 1

    def charge_eg(self) -> None:
        self.n_eg += 1

    def charge_snapshot_seq(self) -> None:
        self.n_snapshot_seq += 1

    def exhausted(self) -> bool:
        return self.crn_budget is not None and self.n_crn >= self.crn_budget

    def snapshot(self) -> "OracleLedger":
        """Immutable-by-convention copy for reports."""
        return OracleLedger(
            n_value=self.n_value,
            n_grad=self.n_grad,
            n_hess=self.n_hess,
            n_crn=self.n_crn,
            n_eg=self.n_eg,
            n_snapshot_seq=self.n_snapshot_seq,
            crn_budget=self.crn_budget,
        )

    def as_dict(self) -> dict:
        return {
            "n_value": self.n_value,
            "n_grad": self.n_grad,
            "n_hess": self.n_hess,
            "n_crn": self.n_crn,
            "n_eg": self.n_eg,
            "n_snapshot_seq": self.n_snapshot_seq,
        }
