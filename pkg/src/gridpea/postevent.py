"""Post-event analysis: classify a captured window and cross-check the ML
verdict against the single-bus-anomaly heuristic.

A genuine fault sags several buses at once; a spoofed measurement stream can
only distort the compromised substation. The deviation localizer measures
each bus's worst voltage-magnitude departure from its pre-trip baseline and
reports the buses above threshold; it is advisory and never overrides the
classifier's decision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import featurize, schema_hash
from .errors import GridPeaError, WindowError
from .ml.model_io import TrainedModel, predict
from .scenarios import decode_combined
from .windows import EventWindow

DEFAULT_TAU = 0.05


def schema_for_window(window: EventWindow) -> tuple[str, ...]:
    from .dataset import QUANTITIES

    return tuple(
        f"t{f}_b{b}_{q}"
        for f in range(window.n_frames)
        for b in window.bus_ids
        for q in QUANTITIES
    )


@dataclass(frozen=True)
class DeviationSummary:
    per_bus: dict[int, float]        # bus -> max |dV| over frames and phases, p.u.
    ranked: tuple[tuple[int, float], ...]
    exceeded: tuple[int, ...]        # buses above tau, by descending deviation
    tau: float

    def to_json_obj(self) -> dict:
        return {
            "tau": self.tau,
            "per_bus": {str(b): v for b, v in self.per_bus.items()},
            "exceeded": list(self.exceeded),
        }


def deviation_localize(window: EventWindow, baseline: np.ndarray | None = None,
                       tau: float = DEFAULT_TAU) -> DeviationSummary:
    """Rank buses by worst voltage-magnitude deviation from the baseline.

    The baseline defaults to the mean of the pre-trip frames; at least one
    pre-trip frame is required.
    """
    if window.n_frames == 0:
        raise WindowError("empty window")
    if baseline is None:
        if window.trip_index < 1:
            raise WindowError("window has no pre-trip frames to form a baseline")
        baseline = window.v_mag[: window.trip_index].mean(axis=0)
    baseline = np.asarray(baseline, dtype=float)
    if baseline.shape != window.v_mag.shape[1:]:
        raise WindowError("baseline shape does not match the window")

    dev = np.max(np.abs(window.v_mag - baseline[None]), axis=(0, 2))
    order = np.argsort(-dev, kind="stable")
    ranked = tuple((int(window.bus_ids[i]), float(dev[i])) for i in order)
    exceeded = tuple(b for b, v in ranked if v > tau)
    per_bus = {int(window.bus_ids[i]): float(dev[i]) for i in range(window.n_bus)}
    return DeviationSummary(per_bus=per_bus, ranked=ranked, exceeded=exceeded, tau=tau)


@dataclass(frozen=True)
class Verdict:
    decision: str                    # normal | fault | cyber_attack
    event12: int
    combined202: int
    fault_line: int | None
    fault_type: str | None
    suspect_bus: int | None
    model_id: str
    deviation: DeviationSummary
    agreement: bool

    def to_json_obj(self) -> dict:
        obj = {
            "decision": self.decision,
            "event12": self.event12,
            "combined202": self.combined202,
            "model_id": self.model_id,
            "deviation": self.deviation.to_json_obj(),
            "agreement": self.agreement,
        }
        if self.decision == "fault":
            obj["fault"] = {"line": self.fault_line, "ftype": self.fault_type}
        if self.decision == "cyber_attack":
            obj["suspect_bus"] = self.suspect_bus
        return obj


def analyze(model: TrainedModel, window: EventWindow, tau: float = DEFAULT_TAU) -> Verdict:
    """Featurize a window, predict its combined class, and attach the
    deviation cross-check. The agreement flag is true when the classifier
    says attack exactly when one bus exceeds tau."""
    space = model.train_meta.get("label_space", "combined202")
    if space != "combined202":
        raise GridPeaError(
            f"analyze needs a model trained on the combined202 label space, got {space!r}"
        )
    schema = schema_for_window(window)
    h = schema_hash(schema)
    features = featurize(window, schema)
    label = int(predict(model, features[None, :], h)[0])

    category, line, ftype = decode_combined(label)
    summary = deviation_localize(window, tau=tau)

    if category == "normal":
        decision, event12 = "normal", 0
        fault_line = fault_type = suspect = None
    elif category == "fault":
        decision, event12 = "fault", ftype.class_index
        fault_line, fault_type, suspect = line, ftype.code, None
    else:
        decision, event12 = "cyber_attack", 11
        fault_line = fault_type = None
        suspect = summary.ranked[0][0] if summary.ranked else None

    agreement = (decision == "cyber_attack") == (len(summary.exceeded) == 1)
    return Verdict(
        decision=decision,
        event12=event12,
        combined202=label,
        fault_line=fault_line,
        fault_type=fault_type,
        suspect_bus=suspect,
        model_id=model.model_id,
        deviation=summary,
        agreement=agreement,
    )
