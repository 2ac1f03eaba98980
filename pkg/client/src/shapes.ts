/**
 * The declared shape of every array field, recomputed from the example
 * metadata alone so the check is independent of the writer.
 */

import type { DTypeCode } from "./container.js";

const CONTROL_CHANNELS: Record<string, number> = {
  X: 1,
  XY: 2,
  "IX-XI": 2,
  "IX-XI-XX": 3,
};

export interface ExampleGeometry {
  dim: number;
  nSteps: number;
  nRealizations: number;
  nPulses: number;
  nChannels: number;
  nAxes: number;
  nObservables: number;
  nStates: number;
  nPairs: number;
  profiles: string[];
  distortion: boolean;
}

export function geometryFromMeta(meta: Record<string, unknown>): ExampleGeometry {
  const name = String(meta.name ?? "");
  const parts = name.split("_");
  if (parts.length < 3) {
    throw new Error(`metadata carries no parseable dataset name: ${name}`);
  }
  const dim = parts[1] === "2q" ? 4 : 2;
  const nChannels = CONTROL_CHANNELS[parts[2]];
  if (nChannels === undefined) {
    throw new Error(`unknown control token in ${name}`);
  }
  const profiles = Array.isArray(meta.noise_profile)
    ? (meta.noise_profile as string[])
    : [];
  const nObservables = dim === 2 ? 3 : 15;
  const nStates = dim === 2 ? 6 : 36;
  return {
    dim,
    nSteps: Number(meta.M),
    nRealizations: Number(meta.K),
    nPulses: Number(meta.num_pulses),
    nChannels,
    nAxes: profiles.length,
    nObservables,
    nStates,
    nPairs: nStates * nObservables,
    profiles,
    distortion: Boolean(meta.distortion),
  };
}

export function expectedShapes(
  g: ExampleGeometry
): Record<string, { dtype: DTypeCode; shape: number[] }> {
  const { dim: d, nSteps: m, nRealizations: k } = g;
  return {
    pulse_parameters: { dtype: "f64", shape: [g.nChannels, g.nPulses, 3] },
    time_range: { dtype: "f64", shape: [1, m] },
    pulses: { dtype: "f64", shape: [1, m, g.nChannels] },
    distorted_pulses: { dtype: "f64", shape: [1, m, g.nChannels] },
    expectations: { dtype: "f64", shape: [g.nPairs] },
    V_O_operator: { dtype: "c128", shape: [g.nObservables, 1, d, d] },
    noise: { dtype: "f64", shape: [1, m, k, g.nAxes] },
    H0: { dtype: "c128", shape: [1, m, d, d] },
    H1: { dtype: "c128", shape: [1, m, k, d, d] },
    U0: { dtype: "c128", shape: [1, m, d, d] },
    U_I: { dtype: "c128", shape: [1, 1, k, d, d] },
    V_O: { dtype: "f64", shape: [g.nPairs, k] },
    E_O: { dtype: "f64", shape: [g.nPairs] },
    "simulation_parameters.static_operators": { dtype: "c128", shape: [1, d, d] },
    "simulation_parameters.dynamic_operators": {
      dtype: "c128",
      shape: [g.nChannels, d, d],
    },
    "simulation_parameters.noise_operators": { dtype: "c128", shape: [g.nAxes, d, d] },
    "simulation_parameters.measurement_operators": {
      dtype: "c128",
      shape: [g.nObservables, d, d],
    },
    "simulation_parameters.initial_states": { dtype: "c128", shape: [g.nStates, d, d] },
  };
}
