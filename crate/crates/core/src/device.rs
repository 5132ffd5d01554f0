//! Behavioural model of a single analogue resistive memory cell.
//!
//! A cell is just a conductance clamped to `[g_min, g_max]`. Writes move it
//! by one nominal step per pulse (potentiation up, depression down) with
//! multiplicative cycle-to-cycle noise on the step; reads return the
//! conductance with multiplicative read noise and never disturb the state.
//!
//! Two programming schemes are provided. The open-loop scheme fires
//! `round(distance / mean_step)` full-size pulses and keeps whatever residual
//! that leaves. The closed-loop scheme alternates reads and pulses, trimming
//! the commanded step to the remaining gap, until the read value is within a
//! relative tolerance of the target — so with all noise switched off it lands
//! on the target exactly.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// One write-pulse shape: amplitude magnitude and duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub amplitude_v: f64,
    pub width_s: f64,
}

/// Stochastic update law and read behaviour of one cell. All values are
/// calibration inputs, not constants; the defaults describe a 256-level cell
/// with a 200 uS window and 10 ns pulses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Lowest reachable conductance (siemens). Fresh cells start here.
    pub g_min_s: f64,
    /// Highest reachable conductance (siemens).
    pub g_max_s: f64,
    /// Number of resolvable levels across the window.
    pub n_states: u32,
    /// Expected conductance change per full pulse (siemens).
    pub mean_step_s: f64,
    /// Positive write pulse (conductance increase).
    pub pot_pulse: PulseSpec,
    /// Negative write pulse (conductance decrease); amplitude is the magnitude.
    pub dep_pulse: PulseSpec,
    /// Read voltage (volts); reads are non-destructive.
    pub read_voltage_v: f64,
    /// Duration of one read (seconds).
    pub read_width_s: f64,
    /// Relative std of the per-pulse step (cycle-to-cycle variation).
    pub sigma_c2c: f64,
    /// Relative std of a residual error applied once after programming.
    pub sigma_prog: f64,
    /// Relative std of read noise.
    pub sigma_read: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        let g_min_s = 10e-6;
        let g_max_s = 210e-6;
        let n_states = 256;
        Self {
            g_min_s,
            g_max_s,
            n_states,
            mean_step_s: (g_max_s - g_min_s) / n_states as f64,
            pot_pulse: PulseSpec {
                amplitude_v: 0.8,
                width_s: 10e-9,
            },
            dep_pulse: PulseSpec {
                amplitude_v: 0.925,
                width_s: 10e-9,
            },
            read_voltage_v: 0.15,
            read_width_s: 10e-9,
            sigma_c2c: 0.02,
            sigma_prog: 0.0,
            sigma_read: 0.005,
        }
    }
}

impl DeviceParams {
    /// Default parameters with every noise source switched off.
    pub fn noiseless() -> Self {
        Self {
            sigma_c2c: 0.0,
            sigma_prog: 0.0,
            sigma_read: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.g_min_s > 0.0
            && self.g_max_s > self.g_min_s
            && self.n_states >= 2
            && self.mean_step_s > 0.0
            && self.pot_pulse.width_s > 0.0
            && self.dep_pulse.width_s > 0.0
            && self.pot_pulse.amplitude_v > 0.0
            && self.dep_pulse.amplitude_v > 0.0
            && self.read_voltage_v > 0.0
            && self.read_width_s > 0.0
            && self.sigma_c2c >= 0.0
            && self.sigma_prog >= 0.0
            && self.sigma_read >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(
                "device parameters violate 0 < g_min < g_max, n_states >= 2, sigmas >= 0, widths > 0"
                    .into(),
            ))
        }
    }

    fn pulse_spec(&self, polarity: Polarity) -> &PulseSpec {
        match polarity {
            Polarity::Potentiation => &self.pot_pulse,
            Polarity::Depression => &self.dep_pulse,
        }
    }
}

/// Running totals of analog activity; the crossbar layer converts these into
/// ledger events.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AnalogCost {
    pub pulses: u64,
    pub reads: u64,
    pub pulse_energy_j: f64,
    pub read_energy_j: f64,
    /// Accumulated pulse durations (this cell acting alone).
    pub pulse_time_s: f64,
    /// Accumulated read durations (this cell acting alone).
    pub read_time_s: f64,
}

impl AnalogCost {
    pub fn add(&mut self, other: &AnalogCost) {
        self.pulses += other.pulses;
        self.reads += other.reads;
        self.pulse_energy_j += other.pulse_energy_j;
        self.read_energy_j += other.read_energy_j;
        self.pulse_time_s += other.pulse_time_s;
        self.read_time_s += other.read_time_s;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Potentiation,
    Depression,
}

/// Conductance state of one cell, always inside `[g_min, g_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceState {
    conductance_s: f64,
}

impl DeviceState {
    /// A freshly formed cell rests at the low-conductance bound.
    pub fn fresh(params: &DeviceParams) -> Self {
        Self {
            conductance_s: params.g_min_s,
        }
    }

    pub fn with_conductance(conductance_s: f64, params: &DeviceParams) -> Result<Self> {
        if conductance_s < params.g_min_s || conductance_s > params.g_max_s {
            return Err(Error::TargetOutOfRange {
                target_s: conductance_s,
                g_min_s: params.g_min_s,
                g_max_s: params.g_max_s,
            });
        }
        Ok(Self { conductance_s })
    }

    pub fn conductance_s(&self) -> f64 {
        self.conductance_s
    }

    /// Retention-drift hook. The measured devices hold their state over the
    /// simulated horizons, so this is the identity; replace it to study
    /// drifting technologies.
    pub fn retain(&mut self, _elapsed_s: f64) {}
}

/// Outcome of one programming operation on one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProgramReport {
    pub pulses_applied: u64,
    pub verify_reads: u64,
    pub converged: bool,
    /// Signed relative deviation of the final conductance from the target.
    pub final_error: f64,
}

fn noise(sigma: f64, rng: &mut RandomStream) -> f64 {
    if sigma > 0.0 {
        let z: f64 = rng.sample(StandardNormal);
        sigma * z
    } else {
        0.0
    }
}

/// Fires one full-size pulse. The realized step is
/// `mean_step * (1 + N(0, sigma_c2c))` in the polarity direction, clamped to
/// the conductance window. Pulse energy is `V^2 * G * width` at the
/// conductance the cell had when the pulse arrived.
pub fn apply_pulse(
    state: &mut DeviceState,
    polarity: Polarity,
    params: &DeviceParams,
    cost: &mut AnalogCost,
    rng: &mut RandomStream,
) {
    actuate(state, polarity, params.mean_step_s, params, cost, rng);
}

/// Pulse with a commanded step magnitude (closed-loop writes trim the final
/// pulse to the remaining gap).
fn actuate(
    state: &mut DeviceState,
    polarity: Polarity,
    commanded_step_s: f64,
    params: &DeviceParams,
    cost: &mut AnalogCost,
    rng: &mut RandomStream,
) {
    let spec = params.pulse_spec(polarity);
    cost.pulses += 1;
    cost.pulse_energy_j += spec.amplitude_v * spec.amplitude_v * state.conductance_s * spec.width_s;
    cost.pulse_time_s += spec.width_s;
    let realized = commanded_step_s * (1.0 + noise(params.sigma_c2c, rng));
    let signed = match polarity {
        Polarity::Potentiation => realized,
        Polarity::Depression => -realized,
    };
    state.conductance_s = (state.conductance_s + signed).clamp(params.g_min_s, params.g_max_s);
}

/// Non-destructive read: returns `G * (1 + N(0, sigma_read))`.
pub fn read_conductance(
    state: &DeviceState,
    params: &DeviceParams,
    cost: &mut AnalogCost,
    rng: &mut RandomStream,
) -> f64 {
    cost.reads += 1;
    cost.read_energy_j +=
        params.read_voltage_v * params.read_voltage_v * state.conductance_s * params.read_width_s;
    cost.read_time_s += params.read_width_s;
    state.conductance_s * (1.0 + noise(params.sigma_read, rng))
}

fn residual_kick(state: &mut DeviceState, params: &DeviceParams, rng: &mut RandomStream) {
    if params.sigma_prog > 0.0 {
        state.conductance_s = (state.conductance_s * (1.0 + noise(params.sigma_prog, rng)))
            .clamp(params.g_min_s, params.g_max_s);
    }
}

fn check_target(target_s: f64, params: &DeviceParams) -> Result<()> {
    if target_s < params.g_min_s || target_s > params.g_max_s || !target_s.is_finite() {
        return Err(Error::TargetOutOfRange {
            target_s,
            g_min_s: params.g_min_s,
            g_max_s: params.g_max_s,
        });
    }
    Ok(())
}

/// Open-loop write: fires `round((target - G) / mean_step)` full pulses and
/// reports the residual. Never reads, always reports convergence.
pub fn program_without_verify(
    state: &mut DeviceState,
    target_s: f64,
    params: &DeviceParams,
    cost: &mut AnalogCost,
    rng: &mut RandomStream,
) -> Result<ProgramReport> {
    check_target(target_s, params)?;
    let distance = target_s - state.conductance_s;
    let count = (distance / params.mean_step_s).round().abs() as u64;
    let polarity = if distance >= 0.0 {
        Polarity::Potentiation
    } else {
        Polarity::Depression
    };
    for _ in 0..count {
        actuate(state, polarity, params.mean_step_s, params, cost, rng);
    }
    residual_kick(state, params, rng);
    Ok(ProgramReport {
        pulses_applied: count,
        verify_reads: 0,
        converged: true,
        final_error: (state.conductance_s - target_s) / target_s,
    })
}

/// Closed-loop write: read, stop once the read value is within `tolerance`
/// (relative) of the target, otherwise pulse toward it with the commanded
/// step trimmed to the observed gap. Fails with `NotConverged` when the pulse
/// budget runs out; the cell keeps its last state so stuck or slow cells are
/// visible to the caller.
pub fn program_with_verify(
    state: &mut DeviceState,
    target_s: f64,
    tolerance: f64,
    max_pulses: u64,
    params: &DeviceParams,
    cost: &mut AnalogCost,
    rng: &mut RandomStream,
) -> Result<ProgramReport> {
    check_target(target_s, params)?;
    if tolerance <= 0.0 || max_pulses == 0 {
        return Err(Error::Config(
            "verify programming needs tolerance > 0 and max_pulses >= 1".into(),
        ));
    }
    let mut pulses = 0u64;
    let mut reads = 0u64;
    loop {
        let observed = read_conductance(state, params, cost, rng);
        reads += 1;
        let gap = target_s - observed;
        if gap.abs() <= tolerance * target_s {
            break;
        }
        if pulses >= max_pulses {
            return Err(Error::NotConverged {
                pulses,
                final_error: (state.conductance_s - target_s) / target_s,
            });
        }
        let polarity = if gap >= 0.0 {
            Polarity::Potentiation
        } else {
            Polarity::Depression
        };
        actuate(
            state,
            polarity,
            gap.abs().min(params.mean_step_s),
            params,
            cost,
            rng,
        );
        pulses += 1;
    }
    residual_kick(state, params, rng);
    Ok(ProgramReport {
        pulses_applied: pulses,
        verify_reads: reads,
        converged: true,
        final_error: (state.conductance_s - target_s) / target_s,
    })
}
