"""One-example generation: pulses -> distortion -> noise -> evolution -> record.

Seeding contract: example i of a dataset uses a 64-bit seed derived by
hashing (master seed, dataset name, i) with BLAKE2b, so outputs are
reproducible regardless of worker scheduling. elapsed_time defaults to
0.0 because archives must be byte-identical across reruns; pass
record_timing=True to store wall-clock seconds instead.
"""

from __future__ import annotations

import hashlib
import time
from typing import Optional

import numpy as np

from .datasetio import DatasetConfig, ExampleRecord, dataset_name, field_shapes
from .evolve import SystemSpec, assemble_hamiltonians, evolve, noise_operators
from .measure import build_plan, expectations
from .noise import DEFAULT_SETTINGS, NoiseSettings, make_noise, stack_axes
from .pulses import (
    FilterSettings,
    PulseConfig,
    apply_distortion,
    design_from_settings,
    draw_pulse_params,
    render_waveform,
)


def example_seed(master_seed: int, dataset: str, index: int) -> int:
    """Stable 64-bit per-example seed from (master seed, dataset name, index)."""
    key = f"{master_seed}:{dataset}:{index}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def system_for(cfg: DatasetConfig) -> SystemSpec:
    omega = cfg.params.omega
    return SystemSpec(
        category=cfg.category,
        omega=float(omega[0]) if cfg.n_qubits == 1 else tuple(omega),
    )


def pulse_config_for(cfg: DatasetConfig) -> PulseConfig:
    return PulseConfig(
        waveform="gaussian" if cfg.waveform == "G" else "square",
        n_pulses=cfg.params.n_pulses,
        amp_min=cfg.params.amp_min,
        amp_max=cfg.params.amp_max,
        total_time=cfg.params.total_time,
        n_steps=cfg.params.n_steps,
        sigma=cfg.params.sigma,
    )


def generate_example(
    cfg: DatasetConfig,
    index: int,
    master_seed: int,
    noise_settings: NoiseSettings = DEFAULT_SETTINGS,
    filter_settings: FilterSettings = FilterSettings(),
    record_timing: bool = False,
) -> ExampleRecord:
    """Run the full pipeline for one example and assemble its record."""
    t_start = time.perf_counter()
    name = dataset_name(cfg)
    seed = example_seed(master_seed, name, index)
    rng = np.random.default_rng(seed)
    params = cfg.params
    m, k = params.n_steps, params.n_realizations

    spec = system_for(cfg)
    pcfg = pulse_config_for(cfg)
    pulse_params = draw_pulse_params(rng, pcfg, cfg.n_channels)
    waveforms = render_waveform(pulse_params, pcfg)
    if cfg.distortion:
        filt = design_from_settings(filter_settings)
        distorted = apply_distortion(filt, waveforms)
    else:
        distorted = waveforms.copy()

    if cfg.noisy:
        axes = make_noise(
            cfg.noise_profiles(), m, k, params.total_time, rng, noise_settings
        )
        noise_arr = stack_axes(axes)
    else:
        noise_arr = np.zeros((0, k, m))

    h0, h1 = assemble_hamiltonians(spec, distorted, noise_arr)
    traj = evolve(spec, h0, h1, dt=params.total_time / m)
    plan = build_plan(cfg.n_qubits)
    ops = noise_operators(traj.ui_final, plan.observables)
    exp = expectations(plan, traj.u0_final, ops, per_realization=True)

    meta = {
        "name": name,
        "dim": cfg.dim,
        "Omega": list(params.omega),
        "T": params.total_time,
        "M": m,
        "K": k,
        "num_ex": params.num_ex,
        "batch_size": params.batch_size,
        "noise_profile": list(cfg.profiles),
        "pulse_shape": "Gaussian" if cfg.waveform == "G" else "Square",
        "num_pulses": params.n_pulses,
        "amp_min": params.amp_min,
        "amp_max": params.amp_max,
        "sigma": params.sigma,
        "distortion": cfg.distortion,
        "filter": filter_settings.as_dict() if cfg.distortion else None,
        "noise_settings": noise_settings.as_dict() if cfg.noisy else None,
        "master_seed": master_seed,
        "example_index": index,
        "example_seed": seed,
    }

    record = ExampleRecord(
        simulation_parameters=meta,
        static_operators=spec.drift()[None],
        dynamic_operators=spec.control_generators(),
        noise_operators=(
            spec.noise_generators()
            if cfg.noisy
            else np.zeros((0, cfg.dim, cfg.dim), dtype=np.complex128)
        ),
        measurement_operators=plan.observables,
        initial_states=plan.states,
        pulse_parameters=pulse_params,
        time_range=pcfg.times()[None],
        pulses=waveforms[None],
        distorted_pulses=distorted[None],
        expectations=exp.flat(),
        vo_operator=ops.averaged[:, None],
        noise=noise_arr.transpose(2, 1, 0)[None],
        h0=h0[None],
        h1=h1.transpose(1, 0, 2, 3)[None],
        u0=traj.u0_seq[None],
        u_i=traj.ui_final[None, None],
        vo_expectations=exp.flat_per_realization(),
        e_o=exp.flat(),
        elapsed_time=time.perf_counter() - t_start if record_timing else 0.0,
    )

    declared = field_shapes(cfg)
    for key, arr in record.arrays().items():
        want = declared[key][1]
        assert tuple(arr.shape) == want, f"{key}: {arr.shape} != {want}"
    return record
