"""Builders and analyses for the three worked applications."""

from .delay import (
    DelayBasis,
    DelayInstance,
    delay_basis,
    delay_build,
    delay_matfun,
    delay_second_bound,
)
from .hadeler import (
    HadelerInstance,
    SimplifiedHadeler,
    hadeler_build,
    hadeler_matfun,
    hadeler_simplify,
)
from .resonance import (
    ResonanceConfig,
    ResonanceMatFun,
    ResonancePencil,
    ResonanceReport,
    resonance_T,
    resonance_certify,
    resonance_pencil,
)

__all__ = [
    "DelayBasis",
    "DelayInstance",
    "HadelerInstance",
    "SimplifiedHadeler",
    "ResonanceConfig",
    "ResonanceMatFun",
    "ResonancePencil",
    "ResonanceReport",
    "delay_basis",
    "delay_build",
    "delay_matfun",
    "delay_second_bound",
    "hadeler_build",
    "hadeler_matfun",
    "hadeler_simplify",
    "nlevp_from_dict",
    "resonance_T",
    "resonance_certify",
    "resonance_pencil",
]


def nlevp_from_dict(doc):
    """Instance wrapper {"nlevp": name, "data": path?, "params": {...}}."""
    from ..errors import ParseError

    name = doc.get("nlevp")
    data = doc.get("data")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ParseError("params: expected an object")
    try:
        if name == "hadeler":
            return hadeler_matfun(hadeler_build(source=data, **params))
        if name == "time_delay":
            return delay_matfun(delay_build(source=data, **params))
    except TypeError as e:
        raise ParseError(f"params: {e}") from None
    raise ParseError(f"nlevp: unknown instance name {name!r}")
