"""Noise channel models: parameters, per-block event sampling, realization.

Two kinds of channel families:

* label families (Pauli, phase damping, amplitude damping): a finite set of
  labeled Kraus operators; each label splits into a scalar prefactor and a
  unit-spectral-norm "bare" operator, so correlated application across a
  block scales the branch once instead of once per qubit.
* collective families (dephasing CD, rotation CR): a single-qubit unitary
  with a continuous parameter, the same unitary hitting every transmitted
  qubit of a block.

Sampling regimes (how one block's event is drawn):

* correlated_label: one label per channel component per block, drawn from
  the nominal probabilities independently of the state.  This is the
  literal "whole block suffers the same effect" model and the default.
* physical_correlated: one label per component, drawn with its Born weight
  w = c^2 * |bare applied to all transmitted qubits|^2 on the current
  state; the weight deficit is drawn directly as heralded loss.
* independent: a separate label per transmitted qubit per component, a
  stress-test regime that deliberately breaks the shared-effect assumption.

Loss rule: a block is lost exactly when the event annihilates its state
vector (norm below EPS_ZERO); kept blocks are renormalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache

import numpy as np

from .qcore import EPS_ALG, EPS_ZERO, OP_I, OP_X, OP_Z, OP_ZX, Ket, Op, apply_on

TWO_PI = 2.0 * math.pi


class Family(Enum):
    IDEAL = "ideal"
    PAULI_TWO = "pauli_two"
    PAULI_ONE = "pauli_one"
    PD = "pd"
    AD = "ad"
    CD = "cd"
    CR = "cr"
    MIXTURE = "mixture"


class Regime(Enum):
    CORRELATED_LABEL = "correlated_label"
    PHYSICAL_CORRELATED = "physical_correlated"
    INDEPENDENT = "independent"


# CR matrix conventions: "reflection" is the determinant -1 form
# [[cos, sin], [sin, -cos]]; "rotation" the determinant +1 form
# [[cos, sin], [-sin, cos]].
CR_CONVENTIONS = ("reflection", "rotation")


def _check_prob(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and 0.0 <= value <= 1.0):
        raise ValueError(f"{name} must be a probability in [0, 1], got {value!r}")


@dataclass(frozen=True)
class PauliParams:
    p_i: float
    p_z: float
    p_x: float
    p_zx: float

    def __post_init__(self) -> None:
        for name in ("p_i", "p_z", "p_x", "p_zx"):
            _check_prob(name, getattr(self, name))
        total = self.p_i + self.p_z + self.p_x + self.p_zx
        if abs(total - 1.0) > EPS_ALG:
            raise ValueError(f"Pauli probabilities must sum to 1, got {total}")


@dataclass(frozen=True)
class OnePauliParams:
    nontrivial_op: str  # "Z", "X" or "ZX"
    p_keep: float

    def __post_init__(self) -> None:
        if self.nontrivial_op not in ("Z", "X", "ZX"):
            raise ValueError(f"nontrivial_op must be Z, X or ZX, got {self.nontrivial_op!r}")
        _check_prob("p_keep", self.p_keep)


@dataclass(frozen=True)
class PdParams:
    p: float

    def __post_init__(self) -> None:
        _check_prob("p", self.p)


@dataclass(frozen=True)
class AdParams:
    p: float

    def __post_init__(self) -> None:
        _check_prob("p", self.p)


@dataclass(frozen=True)
class ParamDist:
    """Distribution of a collective-noise parameter (dephasing phase or
    rotation angle).  Kinds: uniform on [low, high); fixed at value; walk =
    per-block bounded random walk starting at value with uniform steps in
    [-step, step], wrapped into [0, 2pi) (sessions precompute walk values)."""

    kind: str = "uniform"
    low: float = 0.0
    high: float = TWO_PI
    value: float = 0.0
    step: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("uniform", "fixed", "walk"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        for name in ("low", "high", "value", "step"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"distribution field {name} must be finite")
        if self.kind == "uniform" and not self.low < self.high:
            raise ValueError("uniform distribution requires low < high")
        if self.kind == "walk" and self.step < 0.0:
            raise ValueError("walk step must be nonnegative")

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind == "uniform":
            return float(rng.uniform(self.low, self.high))
        if self.kind == "fixed":
            return self.value
        raise ValueError("walk distributions are materialized per session, not sampled here")


UNIFORM_ANGLE = ParamDist()


@dataclass(frozen=True)
class CdParams:
    phi_dist: ParamDist = UNIFORM_ANGLE


@dataclass(frozen=True)
class CrParams:
    theta_dist: ParamDist = UNIFORM_ANGLE
    convention: str = "reflection"

    def __post_init__(self) -> None:
        if self.convention not in CR_CONVENTIONS:
            raise ValueError(f"convention must be one of {CR_CONVENTIONS}, got {self.convention!r}")


Params = PauliParams | OnePauliParams | PdParams | AdParams | CdParams | CrParams | None

_PARAMS_TYPE: dict[Family, type | None] = {
    Family.IDEAL: type(None),
    Family.PAULI_TWO: PauliParams,
    Family.PAULI_ONE: OnePauliParams,
    Family.PD: PdParams,
    Family.AD: AdParams,
    Family.CD: CdParams,
    Family.CR: CrParams,
}


@dataclass(frozen=True)
class ChannelElement:
    """One non-mixture noise family with its parameters."""

    family: Family
    params: Params = None

    def __post_init__(self) -> None:
        if self.family is Family.MIXTURE:
            raise ValueError("mixture elements cannot nest")
        expected = _PARAMS_TYPE[self.family]
        if not isinstance(self.params, expected):
            raise ValueError(
                f"family {self.family.value} requires {expected.__name__} parameters")


@dataclass(frozen=True)
class ChannelModel:
    """Configured channel: a family (or ordered mixture) plus the regime."""

    family: Family
    params: Params = None
    elements: tuple[ChannelElement, ...] = ()
    regime: Regime = Regime.CORRELATED_LABEL

    def __post_init__(self) -> None:
        if self.family is Family.MIXTURE:
            if not self.elements:
                raise ValueError("mixture channels need at least one element")
            if self.params is not None:
                raise ValueError("mixture channels carry params per element")
        else:
            if self.elements:
                raise ValueError("only mixture channels carry an element list")
            # reuse the element validation for the single-family case
            ChannelElement(self.family, self.params)

    def components(self) -> tuple[ChannelElement, ...]:
        """The ordered element list; a single-family channel is one element."""
        if self.family is Family.MIXTURE:
            return self.elements
        return (ChannelElement(self.family, self.params),)


@dataclass(frozen=True)
class LabelSpec:
    """One labeled branch of a finite channel family.

    The printed Kraus operator is sqrt(weight) * bare with bare of unit
    spectral norm; nominal is the label's draw probability under the
    correlated_label regime, weight its per-block Born factor under
    physical_correlated.
    """

    label: str
    nominal: float
    weight: float
    bare: Op


_PROJ0 = Op(2, np.array([[1, 0], [0, 0]], dtype=complex))
_PROJ1 = Op(2, np.array([[0, 0], [0, 1]], dtype=complex))
_LOWER = Op(2, np.array([[0, 1], [0, 0]], dtype=complex))  # |1> -> |0>
_ONE_PAULI_OPS = {"Z": OP_Z, "X": OP_X, "ZX": OP_ZX}


@lru_cache(maxsize=None)
def label_specs(family: Family, params: Params) -> tuple[LabelSpec, ...]:
    """Labeled branches of a finite family.

    The phase-damping error weight p is split evenly across its two
    projector labels for the nominal distribution (only the aggregate error
    probability is physically specified; both labels herald identically).
    """
    if family is Family.IDEAL:
        return (LabelSpec("I", 1.0, 1.0, OP_I),)
    if family is Family.PAULI_TWO:
        assert isinstance(params, PauliParams)
        return (
            LabelSpec("I", params.p_i, params.p_i, OP_I),
            LabelSpec("Z", params.p_z, params.p_z, OP_Z),
            LabelSpec("X", params.p_x, params.p_x, OP_X),
            LabelSpec("ZX", params.p_zx, params.p_zx, OP_ZX),
        )
    if family is Family.PAULI_ONE:
        assert isinstance(params, OnePauliParams)
        p_err = 1.0 - params.p_keep
        return (
            LabelSpec("I", params.p_keep, params.p_keep, OP_I),
            LabelSpec(params.nontrivial_op, p_err, p_err, _ONE_PAULI_OPS[params.nontrivial_op]),
        )
    if family is Family.PD:
        assert isinstance(params, PdParams)
        p = params.p
        return (
            LabelSpec("E0", 1.0 - p, 1.0 - p, OP_I),
            LabelSpec("E1", p / 2.0, p, _PROJ0),
            LabelSpec("E2", p / 2.0, p, _PROJ1),
        )
    if family is Family.AD:
        assert isinstance(params, AdParams)
        p = params.p
        decay_keep = Op(2, np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - p)]], dtype=complex))
        return (
            LabelSpec("E0", 1.0 - p, 1.0, decay_keep),
            LabelSpec("E1", p, p, _LOWER),
        )
    raise ValueError(f"family {family.value} has no finite label set")


def kraus_set_of(family: Family, params: Params) -> list[Op]:
    """The family's single-qubit Kraus operators, scalars included."""
    return [Op(2, math.sqrt(spec.weight) * spec.bare.mat) for spec in label_specs(family, params)]


def cd_matrix(phi: float) -> Op:
    """Collective dephasing unitary diag(1, e^{i phi})."""
    return Op(2, np.array([[1.0, 0.0], [0.0, np.exp(1j * phi)]]), unitary=True)


def cr_matrix(theta: float, convention: str = "reflection") -> Op:
    """Collective rotation unitary for the given convention.

    reflection: [[cos, sin], [sin, -cos]] (determinant -1);
    rotation:   [[cos, sin], [-sin, cos]] (determinant +1).
    """
    c, s = math.cos(theta), math.sin(theta)
    if convention == "reflection":
        mat = np.array([[c, s], [s, -c]], dtype=complex)
    elif convention == "rotation":
        mat = np.array([[c, s], [-s, c]], dtype=complex)
    else:
        raise ValueError(f"convention must be one of {CR_CONVENTIONS}, got {convention!r}")
    return Op(2, mat, unitary=True)


def _element_qubit_op(element: ChannelElement, label: str | None, param: float | None) -> Op:
    if element.family in (Family.CD, Family.CR):
        assert param is not None
        if element.family is Family.CD:
            return cd_matrix(param)
        assert isinstance(element.params, CrParams)
        return cr_matrix(param, element.params.convention)
    assert label is not None
    for spec in label_specs(element.family, element.params):
        if spec.label == label:
            return spec.bare
    raise ValueError(f"label {label!r} unknown for family {element.family.value}")


@dataclass(frozen=True)
class ElementAction:
    """The sampled action of one channel component on one block.

    Label families carry one label per transmitted qubit (identical entries
    under the correlated regimes); collective families one parameter per
    qubit likewise.  lost marks the physical_correlated annihilation branch,
    where no operator is drawn at all.
    """

    element: ChannelElement
    labels: tuple[str, ...] = ()
    params: tuple[float, ...] = ()
    lost: bool = False


@dataclass(frozen=True)
class NoiseEvent:
    """Ordered per-component actions for one block."""

    actions: tuple[ElementAction, ...]


def _draw_nominal(specs: tuple[LabelSpec, ...], rng: np.random.Generator) -> LabelSpec:
    u = rng.random()
    acc = 0.0
    for spec in specs:
        acc += spec.nominal
        if u < acc:
            return spec
    return specs[-1]


def _apply_bare(element: ChannelElement, action: ElementAction,
                state: Ket, transmitted: tuple[int, ...]) -> Ket:
    if element.family in (Family.CD, Family.CR):
        for q, value in zip(transmitted, action.params):
            state = apply_on(_element_qubit_op(element, None, value), [q], state)
        return state
    for q, label in zip(transmitted, action.labels):
        state = apply_on(_element_qubit_op(element, label, None), [q], state)
    return state


def sample_event(channel: ChannelModel, block: Ket,
                 transmitted: tuple[int, ...] | list[int],
                 rng: np.random.Generator) -> NoiseEvent:
    """Draw one block's noise event under the channel's regime.

    Under physical_correlated the drawn actions are applied as sampling
    proceeds, because later components' Born weights depend on the state
    left by earlier ones; once annihilation is drawn the remaining
    components are recorded as lost without consuming randomness.
    """
    transmitted = tuple(transmitted)
    if not transmitted:
        raise ValueError("transmitted qubit list is empty")
    nq = len(transmitted)
    actions: list[ElementAction] = []
    state = block
    annihilated = False
    for element in channel.components():
        if annihilated:
            actions.append(ElementAction(element, lost=True))
            continue
        collective = element.family in (Family.CD, Family.CR)
        if collective:
            dist = (element.params.phi_dist if element.family is Family.CD
                    else element.params.theta_dist)
            if channel.regime is Regime.INDEPENDENT:
                values = tuple(dist.sample(rng) for _ in range(nq))
            else:
                values = (dist.sample(rng),) * nq
            action = ElementAction(element, params=values)
        else:
            specs = label_specs(element.family, element.params)
            if channel.regime is Regime.CORRELATED_LABEL:
                action = ElementAction(element, labels=(_draw_nominal(specs, rng).label,) * nq)
            elif channel.regime is Regime.INDEPENDENT:
                action = ElementAction(
                    element, labels=tuple(_draw_nominal(specs, rng).label for _ in range(nq)))
            else:  # physical_correlated
                weights = []
                for spec in specs:
                    branch = state
                    for q in transmitted:
                        branch = apply_on(spec.bare, [q], branch)
                    weights.append(spec.weight * float(np.vdot(branch.amps, branch.amps).real))
                u = rng.random()
                acc = 0.0
                chosen: LabelSpec | None = None
                for spec, w in zip(specs, weights):
                    acc += w
                    if u < acc:
                        chosen = spec
                        break
                if chosen is None:  # deficit mass: heralded loss
                    action = ElementAction(element, lost=True)
                    annihilated = True
                else:
                    action = ElementAction(element, labels=(chosen.label,) * nq)
        if channel.regime is Regime.PHYSICAL_CORRELATED and not action.lost:
            state = _apply_bare(element, action, state, transmitted)
            norm = state.norm()
            if norm < EPS_ZERO:  # cannot happen for positive-weight draws
                annihilated = True
            else:
                state = Ket(state.n_qubits, state.amps / norm)
        actions.append(action)
    return NoiseEvent(tuple(actions))


def apply_event(event: NoiseEvent, block: Ket,
                transmitted: tuple[int, ...] | list[int]) -> tuple[Ket, bool]:
    """Apply a sampled event to a block; returns (state, lost).

    Every component's per-qubit operator hits each transmitted qubit in the
    declared order.  lost is True exactly when the final norm falls below
    EPS_ZERO; kept states come back renormalized.
    """
    transmitted = tuple(transmitted)
    state = block
    for action in event.actions:
        if action.lost:
            return block, True
        state = _apply_bare(action.element, action, state, transmitted)
    norm = state.norm()
    if norm < EPS_ZERO:
        return state, True
    return Ket(state.n_qubits, state.amps / norm), False


def walk_values(dist: ParamDist, n_blocks: int, seed_key: tuple) -> np.ndarray:
    """Materialize a bounded-random-walk parameter sequence for a session.

    One value per block, from a dedicated substream, so block processing
    order never affects the sequence.  Values wrap into [0, 2pi).
    """
    rng = np.random.default_rng(seed_key)
    steps = rng.uniform(-dist.step, dist.step, size=n_blocks)
    return (dist.value + np.cumsum(steps)) % TWO_PI


def pin_walk_params(channel: ChannelModel, values: dict[int, float]) -> ChannelModel:
    """Replace walk distributions with fixed per-block values (component
    index -> value); used by sessions to keep blocks order-independent."""
    if not values:
        return channel
    new_elements = []
    for idx, element in enumerate(channel.components()):
        if idx in values:
            pinned = ParamDist(kind="fixed", value=values[idx])
            if element.family is Family.CD:
                element = replace(element, params=replace(element.params, phi_dist=pinned))
            elif element.family is Family.CR:
                element = replace(element, params=replace(element.params, theta_dist=pinned))
            else:
                raise ValueError("only collective components carry walk parameters")
        new_elements.append(element)
    if channel.family is Family.MIXTURE:
        return replace(channel, elements=tuple(new_elements))
    single = new_elements[0]
    return ChannelModel(single.family, single.params, regime=channel.regime)
