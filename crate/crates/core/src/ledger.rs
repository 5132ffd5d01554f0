//! Energy/latency accounting for every analog event, and the write-latency
//! scaling study.
//!
//! Programming and read events carry their own modeled wall time: cells in a
//! row are written in parallel, rows are sequential, distinct arrays are
//! sequential (one programming driver), and a whole-array read settles in a
//! single read step. Arrays that hold fixed operators (the DFT matrix, pilot
//! matrices) are recorded under [`EventKind::StaticProgram`] and excluded
//! from throughput summaries: they are written once, while the recurring
//! cost of a link is re-programming the detection arrays at every channel
//! update plus the one-step reads.
//!
//! Op counting: one complex MAC is four real MACs and one real MAC is two
//! ops, so an R x C analog matrix-vector product contributes `2*R*C` ops and
//! one detector evaluation contributes `8 * detect_cmacs(n_t, n_r)`.

use crate::crossbar::ProgramConfig;
use crate::device::{self, AnalogCost, DeviceParams, DeviceState};
use crate::error::{Error, Result};
use crate::rng::RandomStream;
use rand::Rng;

pub const OPS_PER_CMAC: u64 = 8;

/// What an analog event was for. `StaticProgram` marks programming of fixed
/// operator arrays; everything else is a recurring cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Programming an array that never changes during a run (DFT, pilots).
    StaticProgram,
    /// Re-programming detection arrays after a channel estimate.
    UpdateProgram,
    /// Channel-estimation reads (rows of the received pilot block).
    PilotRead,
    /// One-step DFT/IDFT execution.
    DftRead,
    /// One-step detector evaluation.
    DetectRead,
    /// Diagnostic whole-array readout.
    Readout,
}

impl EventKind {
    pub const ALL: [EventKind; 6] = [
        EventKind::StaticProgram,
        EventKind::UpdateProgram,
        EventKind::PilotRead,
        EventKind::DftRead,
        EventKind::DetectRead,
        EventKind::Readout,
    ];

    fn index(self) -> usize {
        match self {
            EventKind::StaticProgram => 0,
            EventKind::UpdateProgram => 1,
            EventKind::PilotRead => 2,
            EventKind::DftRead => 3,
            EventKind::DetectRead => 4,
            EventKind::Readout => 5,
        }
    }
}

/// One recorded analog event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalogEvent {
    pub kind: EventKind,
    pub write_pulses: u64,
    pub verify_reads: u64,
    /// Device cells conducting during one-step reads.
    pub cell_reads: u64,
    /// Number of one-step analog invocations (MVMs, detector settles).
    pub invocations: u64,
    pub pulse_energy_j: f64,
    pub read_energy_j: f64,
    /// Modeled wall time of this event.
    pub latency_s: f64,
    /// Dense-equivalent ops this event replaces.
    pub ops: u64,
}

impl AnalogEvent {
    pub fn program(kind: EventKind, cost: &AnalogCost, latency_s: f64) -> Self {
        Self {
            kind,
            write_pulses: cost.pulses,
            verify_reads: cost.reads,
            cell_reads: 0,
            invocations: 0,
            pulse_energy_j: cost.pulse_energy_j,
            read_energy_j: cost.read_energy_j,
            latency_s,
            ops: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KindTotals {
    pub write_pulses: u64,
    pub verify_reads: u64,
    pub cell_reads: u64,
    pub invocations: u64,
    pub pulse_energy_j: f64,
    pub read_energy_j: f64,
    pub latency_s: f64,
    pub ops: u64,
}

impl KindTotals {
    fn add_event(&mut self, e: &AnalogEvent) {
        self.write_pulses += e.write_pulses;
        self.verify_reads += e.verify_reads;
        self.cell_reads += e.cell_reads;
        self.invocations += e.invocations;
        self.pulse_energy_j += e.pulse_energy_j;
        self.read_energy_j += e.read_energy_j;
        self.latency_s += e.latency_s;
        self.ops += e.ops;
    }

    fn add(&mut self, o: &KindTotals) {
        self.write_pulses += o.write_pulses;
        self.verify_reads += o.verify_reads;
        self.cell_reads += o.cell_reads;
        self.invocations += o.invocations;
        self.pulse_energy_j += o.pulse_energy_j;
        self.read_energy_j += o.read_energy_j;
        self.latency_s += o.latency_s;
        self.ops += o.ops;
    }

    pub fn energy_j(&self) -> f64 {
        self.pulse_energy_j + self.read_energy_j
    }
}

/// Append-only accumulator of analog activity, split by event kind.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLatencyLedger {
    totals: [KindTotals; 6],
}

impl EnergyLatencyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_event(&mut self, event: &AnalogEvent) {
        self.totals[event.kind.index()].add_event(event);
    }

    /// Fold another ledger in (used to combine per-trial ledgers in a fixed
    /// trial order).
    pub fn merge(&mut self, other: &EnergyLatencyLedger) {
        for (t, o) in self.totals.iter_mut().zip(other.totals.iter()) {
            t.add(o);
        }
    }

    pub fn kind(&self, kind: EventKind) -> &KindTotals {
        &self.totals[kind.index()]
    }

    fn sum<F: Fn(&KindTotals) -> f64>(&self, f: F) -> f64 {
        self.totals.iter().map(f).sum()
    }

    fn sum_u64<F: Fn(&KindTotals) -> u64>(&self, f: F) -> u64 {
        self.totals.iter().map(f).sum()
    }

    pub fn write_pulses(&self) -> u64 {
        self.sum_u64(|t| t.write_pulses)
    }

    pub fn verify_reads(&self) -> u64 {
        self.sum_u64(|t| t.verify_reads)
    }

    pub fn cell_reads(&self) -> u64 {
        self.sum_u64(|t| t.cell_reads)
    }

    pub fn invocations(&self) -> u64 {
        self.sum_u64(|t| t.invocations)
    }

    pub fn pulse_energy_j(&self) -> f64 {
        self.sum(|t| t.pulse_energy_j)
    }

    pub fn read_energy_j(&self) -> f64 {
        self.sum(|t| t.read_energy_j)
    }

    pub fn energy_j(&self) -> f64 {
        self.pulse_energy_j() + self.read_energy_j()
    }

    /// Modeled wall time of everything recorded, static programming included.
    pub fn wall_latency_s(&self) -> f64 {
        self.sum(|t| t.latency_s)
    }

    pub fn total_ops(&self) -> u64 {
        self.sum_u64(|t| t.ops)
    }

    pub fn is_empty(&self) -> bool {
        self.write_pulses() == 0 && self.verify_reads() == 0 && self.invocations() == 0
    }

    fn recurring(&self) -> KindTotals {
        let mut acc = KindTotals::default();
        for kind in EventKind::ALL {
            if kind != EventKind::StaticProgram {
                acc.add(self.kind(kind));
            }
        }
        acc
    }
}

/// Throughput/efficiency summary of a completed run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfSummary {
    /// Dense-equivalent ops performed (1 MAC = 2 ops).
    pub total_ops: u64,
    /// Recurring analog wall time (channel-update programming + reads).
    pub latency_s: f64,
    /// Recurring analog energy.
    pub energy_j: f64,
    pub tops: f64,
    pub tops_per_watt: f64,
}

/// Derives TOPS and TOPS/W from the recurring part of a ledger. Fails with
/// [`Error::EmptyLedger`] when the run performed no analog work (ideal mode).
pub fn summarize(ledger: &EnergyLatencyLedger) -> Result<PerfSummary> {
    if ledger.is_empty() {
        return Err(Error::EmptyLedger);
    }
    let rec = ledger.recurring();
    if rec.ops == 0 || rec.latency_s <= 0.0 || rec.energy_j() <= 0.0 {
        return Err(Error::EmptyLedger);
    }
    let total_ops = rec.ops;
    let latency_s = rec.latency_s;
    let energy_j = rec.energy_j();
    Ok(PerfSummary {
        total_ops,
        latency_s,
        energy_j,
        tops: total_ops as f64 / latency_s / 1e12,
        tops_per_watt: total_ops as f64 / energy_j / 1e12,
    })
}

/// Complex-MAC count of the dense L-MMSE/ZF evaluation one detector step
/// replaces: form H^H H (n_t^2 n_r), form H^H y (n_t n_r), LU-factor the
/// n_t x n_t system and solve. Mirrored by a counting oracle in the tests.
pub fn detect_cmacs(n_t: u64, n_r: u64) -> u64 {
    let n = n_t;
    let gram = n_t * n_t * n_r;
    let rhs = n_t * n_r;
    // LU with partial pivoting: per column k, n-1-k divisions and (n-1-k)^2
    // update MACs.
    let lu: u64 = (0..n).map(|k| (n - 1 - k) + (n - 1 - k) * (n - 1 - k)).sum();
    gram + rhs + lu
}

/// Complex-MAC count of a dense DFT of length `n_c`.
pub fn dft_cmacs(n_c: u64) -> u64 {
    n_c * n_c
}

/// Complex-MAC count of the dense pilot estimate S * P^H.
pub fn estimate_cmacs(n_t: u64, n_r: u64) -> u64 {
    n_r * n_t * n_t
}

/// One row of the write-latency scaling study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub n: usize,
    pub mean_latency_s: f64,
    pub std_latency_s: f64,
}

/// Least-squares fit of the measured means against one basis function.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFit {
    pub coefficient: f64,
    pub rel_rmse: f64,
    /// mean latency divided by the basis value, per scanned size.
    pub normalized: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<ScanRow>,
    pub trials: u32,
    pub fit_n_ln_n: BasisFit,
    pub fit_n_sqrt_ln_n: BasisFit,
}

impl ScalingReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,trials,mean_latency_s,std_latency_s,norm_n_ln_n,norm_n_sqrt_ln_n\n",
        );
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{:e},{:e},{:e},{:e}\n",
                row.n,
                self.trials,
                row.mean_latency_s,
                row.std_latency_s,
                self.fit_n_ln_n.normalized[i],
                self.fit_n_sqrt_ln_n.normalized[i],
            ));
        }
        out
    }
}

fn fit_through_origin(basis: &[f64], means: &[f64]) -> BasisFit {
    let num: f64 = basis.iter().zip(means).map(|(b, y)| b * y).sum();
    let den: f64 = basis.iter().map(|b| b * b).sum();
    let c = num / den;
    let mse: f64 = basis
        .iter()
        .zip(means)
        .map(|(b, y)| (y - c * b) * (y - c * b))
        .sum::<f64>()
        / means.len() as f64;
    let mean_y = means.iter().sum::<f64>() / means.len() as f64;
    BasisFit {
        coefficient: c,
        rel_rmse: mse.sqrt() / mean_y,
        normalized: basis.iter().zip(means).map(|(b, y)| y / b).collect(),
    }
}

/// Programs `trials` fresh N x N single arrays per size, row by row, with
/// uniformly distributed conductance targets, and reports how the expected
/// write latency grows with N. Per-row wall time is the slowest cell in the
/// row (cells in a row are written in parallel); the array total is the sum
/// over rows.
pub fn latency_scan(
    sizes: &[usize],
    prog: &ProgramConfig,
    params: &DeviceParams,
    trials: u32,
    rng: &mut RandomStream,
) -> Result<ScalingReport> {
    if sizes.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 sizes, got {}",
            sizes.len()
        )));
    }
    if trials < 30 {
        return Err(Error::InsufficientData(format!(
            "need at least 30 trials, got {trials}"
        )));
    }
    if sizes.iter().any(|&n| n < 2) {
        return Err(Error::InsufficientData("sizes must be >= 2".into()));
    }
    params.validate()?;
    let budget = prog.pulse_budget(params);
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut latencies = Vec::with_capacity(trials as usize);
        for _ in 0..trials {
            let mut array_latency = 0.0;
            for _row in 0..n {
                let mut row_latency: f64 = 0.0;
                for _col in 0..n {
                    let target =
                        rng.random_range(params.g_min_s..=params.g_max_s);
                    let mut cell = DeviceState::fresh(params);
                    let mut cost = AnalogCost::default();
                    match prog.scheme {
                        crate::crossbar::WriteScheme::Verify => {
                            device::program_with_verify(
                                &mut cell,
                                target,
                                prog.tolerance,
                                budget,
                                params,
                                &mut cost,
                                rng,
                            )?;
                        }
                        crate::crossbar::WriteScheme::NoVerify => {
                            device::program_without_verify(
                                &mut cell, target, params, &mut cost, rng,
                            )?;
                        }
                    }
                    row_latency = row_latency.max(cost.pulse_time_s + cost.read_time_s);
                }
                array_latency += row_latency;
            }
            latencies.push(array_latency);
        }
        let mean = latencies.iter().sum::<f64>() / latencies.len() as f64;
        let var = latencies
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .sum::<f64>()
            / (latencies.len() - 1) as f64;
        rows.push(ScanRow {
            n,
            mean_latency_s: mean,
            std_latency_s: var.sqrt(),
        });
    }
    let means: Vec<f64> = rows.iter().map(|r| r.mean_latency_s).collect();
    let basis_ln: Vec<f64> = rows.iter().map(|r| r.n as f64 * (r.n as f64).ln()).collect();
    let basis_sqrt: Vec<f64> = rows
        .iter()
        .map(|r| r.n as f64 * (r.n as f64).ln().sqrt())
        .collect();
    Ok(ScalingReport {
        rows,
        trials,
        fit_n_ln_n: fit_through_origin(&basis_ln, &means),
        fit_n_sqrt_ln_n: fit_through_origin(&basis_sqrt, &means),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossbar::WriteScheme;
    use crate::rng::stream;

    #[test]
    fn fresh_ledger_is_all_zero() {
        let ledger = EnergyLatencyLedger::new();
        assert!(ledger.is_empty());
        assert_eq!(ledger.total_ops(), 0);
        assert_eq!(ledger.energy_j(), 0.0);
        assert_eq!(ledger.wall_latency_s(), 0.0);
        assert!(matches!(summarize(&ledger), Err(Error::EmptyLedger)));
    }

    #[test]
    fn identical_events_add_up() {
        let event = AnalogEvent {
            kind: EventKind::UpdateProgram,
            write_pulses: 3,
            verify_reads: 4,
            cell_reads: 0,
            invocations: 0,
            pulse_energy_j: 1.5e-12,
            read_energy_j: 2.5e-13,
            latency_s: 1e-7,
            ops: 0,
        };
        let mut ledger = EnergyLatencyLedger::new();
        ledger.record_event(&event);
        ledger.record_event(&event);
        assert_eq!(ledger.write_pulses(), 6);
        assert_eq!(ledger.verify_reads(), 8);
        assert_eq!(ledger.pulse_energy_j(), 3e-12);
        assert_eq!(ledger.wall_latency_s(), 2e-7);
    }

    #[test]
    fn merge_sums_all_kinds() {
        let mut a = EnergyLatencyLedger::new();
        let mut b = EnergyLatencyLedger::new();
        let e1 = AnalogEvent {
            kind: EventKind::DftRead,
            write_pulses: 0,
            verify_reads: 0,
            cell_reads: 8,
            invocations: 1,
            pulse_energy_j: 0.0,
            read_energy_j: 1e-15,
            latency_s: 1e-8,
            ops: 8,
        };
        a.record_event(&e1);
        b.record_event(&e1);
        b.record_event(&e1);
        a.merge(&b);
        assert_eq!(a.invocations(), 3);
        assert_eq!(a.total_ops(), 24);
    }

    #[test]
    fn summary_excludes_static_programming() {
        let mut ledger = EnergyLatencyLedger::new();
        ledger.record_event(&AnalogEvent {
            kind: EventKind::StaticProgram,
            write_pulses: 1000,
            verify_reads: 1000,
            cell_reads: 0,
            invocations: 0,
            pulse_energy_j: 1e-6,
            read_energy_j: 1e-8,
            latency_s: 1e-3,
            ops: 0,
        });
        ledger.record_event(&AnalogEvent {
            kind: EventKind::DetectRead,
            write_pulses: 0,
            verify_reads: 0,
            cell_reads: 64,
            invocations: 1,
            pulse_energy_j: 0.0,
            read_energy_j: 2e-14,
            latency_s: 1e-8,
            ops: 1280,
        });
        ledger.record_event(&AnalogEvent {
            kind: EventKind::UpdateProgram,
            write_pulses: 100,
            verify_reads: 0,
            cell_reads: 0,
            invocations: 0,
            pulse_energy_j: 5e-11,
            read_energy_j: 0.0,
            latency_s: 1e-6,
            ops: 0,
        });
        let s = summarize(&ledger).unwrap();
        assert_eq!(s.total_ops, 1280);
        assert!((s.latency_s - (1e-8 + 1e-6)).abs() < 1e-20);
        assert!((s.energy_j - (2e-14 + 5e-11)).abs() < 1e-24);
        assert!((s.tops - 1280.0 / s.latency_s / 1e12).abs() < 1e-12);
        assert!((s.tops_per_watt - 1280.0 / s.energy_j / 1e12).abs() < 1e-9);
    }

    #[test]
    fn detect_cmacs_small_cases() {
        // n_t = 1: gram 1*1*nr + rhs nr + lu 0.
        assert_eq!(detect_cmacs(1, 1), 2);
        assert_eq!(detect_cmacs(1, 4), 8);
        // n_t = 2: gram 4nr, rhs 2nr, lu k=0: 1+1=2, k=1: 0 -> 2.
        assert_eq!(detect_cmacs(2, 2), 8 + 4 + 2);
    }

    #[test]
    fn scan_rejects_thin_inputs() {
        let params = DeviceParams::noiseless();
        let prog = ProgramConfig::default();
        assert!(matches!(
            latency_scan(&[8], &prog, &params, 40, &mut stream(0, 0)),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            latency_scan(&[8, 16], &prog, &params, 5, &mut stream(0, 0)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn zero_noise_uniform_targets_have_deterministic_latency() {
        // All cells share one target: row latency equals the per-cell pulse
        // train, total is n rows of it.
        let params = DeviceParams::noiseless();
        let n = 4;
        let pulses = 10u64;
        let target = params.g_min_s + pulses as f64 * params.mean_step_s;
        let mut total = 0.0;
        for _row in 0..n {
            let mut row_latency: f64 = 0.0;
            for _col in 0..n {
                let mut cell = DeviceState::fresh(&params);
                let mut cost = AnalogCost::default();
                device::program_without_verify(
                    &mut cell,
                    target,
                    &params,
                    &mut cost,
                    &mut stream(0, 0),
                )
                .unwrap();
                row_latency = row_latency.max(cost.pulse_time_s);
            }
            total += row_latency;
        }
        let expected = n as f64 * pulses as f64 * params.pot_pulse.width_s;
        assert!((total - expected).abs() <= 1e-18);
    }

    #[test]
    fn no_verify_latency_not_above_verify() {
        let params = DeviceParams {
            sigma_c2c: 0.3,
            ..DeviceParams::noiseless()
        };
        let verify = ProgramConfig {
            scheme: WriteScheme::Verify,
            ..ProgramConfig::default()
        };
        let no_verify = ProgramConfig {
            scheme: WriteScheme::NoVerify,
            ..ProgramConfig::default()
        };
        let rv = latency_scan(&[8, 16], &verify, &params, 40, &mut stream(3, 1)).unwrap();
        let rn = latency_scan(&[8, 16], &no_verify, &params, 40, &mut stream(3, 1)).unwrap();
        for (v, n) in rv.rows.iter().zip(rn.rows.iter()) {
            assert!(
                n.mean_latency_s <= v.mean_latency_s,
                "no-verify {} vs verify {}",
                n.mean_latency_s,
                v.mean_latency_s
            );
        }
    }
}
