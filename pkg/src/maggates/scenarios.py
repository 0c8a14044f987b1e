"""Assemble complete gate set-ups (species, qubit, geometry, modes, current)."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .atomic import QubitPair, field_independent_point, make_qubit_pair
from .chain import ChainConfig, ModeDecomposition, gate_mode, two_ion_gate_chain
from .constants import IonSpecies, get_species
from .fields import FiveWireDesign, design_five_wire
from .gates import (GateReport, GateSpec, RabiSet, rabi_frequencies, residual_error_budget, sigma_phiphi_gate,
                    sigma_zz_gate, solve_gate_current)

CLOCK_PAIR = ((1, 1), (2, 0))
ZZ_PAIR = ((2, 2), (2, 0))


@dataclass
class GateSetup:
    kind: str
    species: IonSpecies
    pair: QubitPair
    design: FiveWireDesign
    chain: ChainConfig
    modes: ModeDecomposition
    mode_index: int
    spec: GateSpec
    rabi: RabiSet

    @property
    def current(self) -> float:
        return self.spec.current

    def report(self, displacement=None) -> GateReport:
        if self.kind == "zz":
            rep = sigma_zz_gate(self.rabi, self.mode_index, self.spec.delta)
        else:
            rep = sigma_phiphi_gate(self.rabi, self.mode_index, self.spec.delta, self.spec.phase_b, self.spec.phase_r)
        rep.required_current = self.current
        if displacement is not None:
            rep.budget = residual_error_budget(self.design, displacement, self.spec, self.pair)
        return rep


def bias_field(species: IonSpecies, clock_pair=CLOCK_PAIR, bracket=(5e-3, 20e-3)) -> float:
    return field_independent_point(species, clock_pair, bracket).B


def build_gate_setup(
    kind: str,
    *,
    species: IonSpecies | None = None,
    pair_labels=None,
    B0: float | None = None,
    d0: float = 30e-6,
    mode_frequency: float = 2 * math.pi * 5e6,
    mode_axis: str | None = None,
    mode_kind: str = "rocking",
    omega_axial: float = 2 * math.pi * 1e6,
    tau: float | None = 20e-6,
    delta: float | None = None,
    current: float | None = None,
    phase_b: float = 0.0,
    phase_r: float = 0.0,
    design: FiveWireDesign | None = None,
) -> GateSetup:
    """Gate set-up on the five-wire layout.

    Exactly one of ``tau``, ``delta`` and ``current`` fixes the gate; the
    others follow from the single-loop condition delta = 4 |Omega_{j,n}|.
    Defaults: 9Be+, clock-point bias field, zz on the x mode and phiphi on
    the z mode (the axes along which the gradient couples).
    """
    given = [v is not None for v in (tau, delta, current)]
    if sum(given) != 1:
        raise ValueError("specify exactly one of tau, delta, current")
    species = species or get_species("9Be+")
    if pair_labels is None:
        pair_labels = ZZ_PAIR if kind == "zz" else CLOCK_PAIR
    if B0 is None:
        B0 = bias_field(species)
    if mode_axis is None:
        mode_axis = "x" if kind == "zz" else "z"
    pair = make_qubit_pair(species, pair_labels[0], pair_labels[1], B0)
    design = design or design_five_wire(d0)
    chain = two_ion_gate_chain(species.mass, mode_frequency, mode_axis, mode_kind, omega_axial)
    modes, j = gate_mode(chain, mode_axis, mode_kind)
    per_amp = design.gradient_field(1.0)

    if tau is None and delta is not None:
        tau = 2 * math.pi / abs(delta)
    if current is None:
        current = solve_gate_current(tau, per_amp, modes, j, pair, kind)
    rabi = rabi_frequencies(per_amp, current, pair, modes)
    coupling = abs(rabi.Omega_z_jn[j, 0] if kind == "zz" else rabi.Omega_x_jn[j, 0])
    delta = 4 * coupling if delta is None else delta
    spec = GateSpec(
        kind=kind, mode_index=j, mode_axis=mode_axis, mode_frequency=float(modes.frequencies[j]),
        q0=float(modes.q0[j]), delta=delta, current=current, pair=pair, phase_b=phase_b, phase_r=phase_r,
    )
    return GateSetup(kind, species, pair, design, chain, modes, j, spec, rabi)
