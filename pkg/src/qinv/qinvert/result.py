from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..chancore import Channel
from ..fidelity import BoundCertificate


@dataclass
class QiResult:
    """A quasi-inverse together with the fidelities it achieves.

    ``qi`` is stored in Choi form.  ``solver`` holds diagnostics such as
    ``iterations``, ``constraints_added``, ``final_min_eig``, ``objective_gap``,
    ``converged`` and ``degenerate``.
    """

    qi: Channel
    fidelity_before: float
    fidelity_after: float
    bound: BoundCertificate | None = None
    solver: dict = field(default_factory=dict)

    @property
    def gain(self) -> float:
        return self.fidelity_after - self.fidelity_before

    @property
    def converged(self) -> bool:
        return bool(self.solver.get("converged", True))

    @property
    def degenerate(self) -> bool:
        return bool(self.solver.get("degenerate", False))

    def choi(self) -> np.ndarray:
        return self.qi.choi()

    def superop(self) -> np.ndarray:
        return self.qi.superop()
