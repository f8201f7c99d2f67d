"""Binary response labels from the four response metrics.

Boundary semantics: a volume reduction of exactly 65% and an SLD decrease of
exactly 30% are non-response; CRS 3 is the only CRS response; RECIST CR/PR
map to response (RECIST 1.1 responder grouping).
"""

from __future__ import annotations

from dataclasses import dataclass

RESPONSE = "response"
NON_RESPONSE = "non_response"

METRICS = ("CRS", "RECIST", "VolR", "DiaR")

VOLR_REDUCTION_THRESHOLD = 65.0   # percent; <= threshold is non-response
DIAR_DECREASE_THRESHOLD = 30.0    # percent; <= threshold is non-response


class LabelError(ValueError):
    pass


class UndefinedLabelError(LabelError):
    """Inputs make the label mathematically undefined (e.g. zero baseline)."""


class LabelUnavailableError(LabelError):
    """Required clinical input missing for this patient."""


@dataclass(frozen=True)
class ResponseLabel:
    metric: str
    value: str  # "response" | "non_response"
    trace: str

    @property
    def is_response(self) -> bool:
        return self.value == RESPONSE


def derive_volr(pre_vol_mm3: float, post_vol_mm3: float) -> ResponseLabel:
    if pre_vol_mm3 <= 0:
        raise UndefinedLabelError(f"pre-treatment volume must be positive, got {pre_vol_mm3}")
    if post_vol_mm3 < 0:
        raise UndefinedLabelError(f"post-treatment volume must be >= 0, got {post_vol_mm3}")
    reduction = 100.0 * (pre_vol_mm3 - post_vol_mm3) / pre_vol_mm3
    value = RESPONSE if reduction > VOLR_REDUCTION_THRESHOLD else NON_RESPONSE
    return ResponseLabel("VolR", value,
                         f"volume {pre_vol_mm3:.1f} -> {post_vol_mm3:.1f} mm3, "
                         f"reduction {reduction:.2f}%")


def derive_diar(sld_pre_mm: float | None, sld_post_mm: float | None) -> ResponseLabel:
    if sld_pre_mm is None or sld_post_mm is None:
        raise LabelUnavailableError("SLD missing for a timepoint")
    if sld_pre_mm <= 0:
        raise UndefinedLabelError(f"pre-treatment SLD must be positive, got {sld_pre_mm}")
    decrease = 100.0 * (sld_pre_mm - sld_post_mm) / sld_pre_mm
    value = RESPONSE if decrease > DIAR_DECREASE_THRESHOLD else NON_RESPONSE
    return ResponseLabel("DiaR", value,
                         f"SLD {sld_pre_mm:.1f} -> {sld_post_mm:.1f} mm, "
                         f"decrease {decrease:.2f}%")


def derive_crs(crs: int | None) -> ResponseLabel:
    if crs is None:
        raise LabelUnavailableError("CRS missing")
    if crs not in (1, 2, 3):
        raise LabelError(f"CRS {crs} outside 1..3")
    value = RESPONSE if crs == 3 else NON_RESPONSE
    return ResponseLabel("CRS", value, f"CRS {crs}")


def derive_recist(category: str | None) -> ResponseLabel:
    if category is None:
        raise LabelUnavailableError("RECIST category missing")
    if category in ("CR", "PR"):
        value = RESPONSE
    elif category in ("SD", "PD"):
        value = NON_RESPONSE
    else:
        raise LabelError(f"unknown RECIST category {category!r}")
    return ResponseLabel("RECIST", value, f"RECIST {category}")
