//! Differential-pair conductance array storing a signed real matrix.
//!
//! A signed matrix `M` is scaled by `alpha = (g_max - g_min) / max|M|` and
//! split by sign: positive entries are written into the plus array as an
//! offset above the `g_min` baseline, negative entries into the minus array,
//! and the unused side of every pair rests at the baseline. The baseline
//! cancels in the differential readout, so the pair realizes
//! `G+ - G- = alpha * M` and a one-step analog multiply returns
//! `((G+ - G-) * v) / alpha`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::complex_map::{RealBlockMatrix, RealStackedVector};
use crate::device::{
    self, AnalogCost, DeviceParams, DeviceState,
};
use crate::error::{Error, Result};
use crate::ledger::{AnalogEvent, EnergyLatencyLedger, EventKind};
use crate::rng::RandomStream;

/// Programming scheme for an array write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WriteScheme {
    /// Closed loop: read after every pulse, stop inside the tolerance window.
    Verify,
    /// Open loop: a fixed pulse train, residuals kept.
    NoVerify,
}

/// How matrices are written into arrays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgramConfig {
    pub scheme: WriteScheme,
    /// Relative tolerance of the verify window (entries above the floor).
    pub tolerance: f64,
    /// Fraction of max|M| below which the verify window stops shrinking, so
    /// near-zero entries get the absolute window tolerance*alpha*floor*max|M|.
    pub tolerance_floor: f64,
    /// Per-cell pulse budget for verify writes; 0 means 8 * n_states.
    pub max_pulses: u64,
}

impl Default for ProgramConfig {
    fn default() -> Self {
        Self {
            scheme: WriteScheme::Verify,
            tolerance: 0.01,
            tolerance_floor: 0.5,
            max_pulses: 0,
        }
    }
}

impl ProgramConfig {
    pub fn pulse_budget(&self, params: &DeviceParams) -> u64 {
        if self.max_pulses == 0 {
            8 * params.n_states as u64
        } else {
            self.max_pulses
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tolerance > 0.0 && (0.0..=1.0).contains(&self.tolerance_floor) {
            Ok(())
        } else {
            Err(Error::Config(
                "crossbar programming needs tolerance > 0 and tolerance_floor in [0, 1]".into(),
            ))
        }
    }
}

/// Elementwise deviation (matrix units) between the stored effective matrix
/// and its target.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ErrorMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| format!("{:e}", self.get(r, c))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Two conductance arrays plus the scale factor that maps matrix units to
/// siemens.
#[derive(Debug, Clone)]
pub struct CrossbarPair {
    rows: usize,
    cols: usize,
    g_plus: Vec<DeviceState>,
    g_minus: Vec<DeviceState>,
    alpha_s: f64,
    target: RealBlockMatrix,
}

/// Writes a real block matrix into a fresh differential pair, row by row
/// (cells of a row in parallel, rows and the two arrays sequential), records
/// one programming event of the given kind, and reports the residual error
/// matrix (noiseless readout, matrix units).
pub fn program_matrix(
    target: &RealBlockMatrix,
    prog: &ProgramConfig,
    params: &DeviceParams,
    kind: EventKind,
    ledger: &mut EnergyLatencyLedger,
    rng: &mut RandomStream,
) -> Result<(CrossbarPair, ErrorMatrix, AnalogEvent)> {
    params.validate()?;
    prog.validate()?;
    let (rows, cols) = (target.rows(), target.cols());
    let max_abs = target.max_abs();
    // A zero matrix still programs: every cell targets the baseline.
    let alpha_s = if max_abs > 0.0 {
        (params.g_max_s - params.g_min_s) / max_abs
    } else {
        params.g_max_s - params.g_min_s
    };
    let budget = prog.pulse_budget(params);
    let mut g_plus = vec![DeviceState::fresh(params); rows * cols];
    let mut g_minus = vec![DeviceState::fresh(params); rows * cols];
    let mut total = AnalogCost::default();
    let mut latency_s = 0.0;
    for (cells, sign) in [(&mut g_plus, 1.0), (&mut g_minus, -1.0)] {
        for r in 0..rows {
            let mut row_latency: f64 = 0.0;
            for c in 0..cols {
                let entry = target.get(r, c) * sign;
                let goal_s = params.g_min_s + alpha_s * entry.max(0.0);
                let mut cost = AnalogCost::default();
                let cell = &mut cells[r * cols + c];
                let outcome = match prog.scheme {
                    WriteScheme::NoVerify => {
                        device::program_without_verify(cell, goal_s, params, &mut cost, rng)
                    }
                    WriteScheme::Verify => {
                        let window_s = prog.tolerance
                            * alpha_s
                            * entry
                                .abs()
                                .max(prog.tolerance_floor * max_abs.max(f64::MIN_POSITIVE));
                        let tol_rel = (window_s / goal_s).max(f64::EPSILON);
                        device::program_with_verify(
                            cell, goal_s, tol_rel, budget, params, &mut cost, rng,
                        )
                    }
                };
                if let Err(source) = outcome {
                    return Err(Error::ProgrammingFailure {
                        row: r,
                        col: c,
                        source: Box::new(source),
                    });
                }
                row_latency = row_latency.max(cost.pulse_time_s + cost.read_time_s);
                total.add(&cost);
            }
            latency_s += row_latency;
        }
    }
    let pair = CrossbarPair {
        rows,
        cols,
        g_plus,
        g_minus,
        alpha_s,
        target: target.clone(),
    };
    let error = pair.error_matrix();
    let event = AnalogEvent::program(kind, &total, latency_s);
    ledger.record_event(&event);
    Ok((pair, error, event))
}

impl CrossbarPair {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn alpha_s(&self) -> f64 {
        self.alpha_s
    }

    pub fn target(&self) -> &RealBlockMatrix {
        &self.target
    }

    /// Effective stored matrix in matrix units from true conductances; the
    /// instrumentation view, free of read noise.
    pub fn stored_matrix_exact(&self) -> RealBlockMatrix {
        let data: Vec<f64> = self
            .g_plus
            .iter()
            .zip(&self.g_minus)
            .map(|(p, m)| (p.conductance_s() - m.conductance_s()) / self.alpha_s)
            .collect();
        RealBlockMatrix::from_raw(self.rows / 2, self.cols / 2, data)
            .expect("pair shape is a valid block shape")
    }

    /// Deviation of the stored matrix from its programming target.
    pub fn error_matrix(&self) -> ErrorMatrix {
        let stored = self.stored_matrix_exact();
        let data: Vec<f64> = stored
            .data()
            .iter()
            .zip(self.target.data())
            .map(|(s, t)| s - t)
            .collect();
        ErrorMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// One-step readout of the whole pair with fresh read noise, recorded as
    /// a diagnostic event.
    pub fn stored_matrix(
        &self,
        params: &DeviceParams,
        ledger: &mut EnergyLatencyLedger,
        rng: &mut RandomStream,
    ) -> RealBlockMatrix {
        let (data, read_energy_j) = self.read_all(params, rng);
        ledger.record_event(&AnalogEvent {
            kind: EventKind::Readout,
            write_pulses: 0,
            verify_reads: 0,
            cell_reads: (2 * self.rows * self.cols) as u64,
            invocations: 1,
            pulse_energy_j: 0.0,
            read_energy_j,
            latency_s: params.read_width_s,
            ops: 0,
        });
        RealBlockMatrix::from_raw(self.rows / 2, self.cols / 2, data)
            .expect("pair shape is a valid block shape")
    }

    /// Differential read of every cell; returns matrix-unit entries and the
    /// read energy of both arrays.
    pub(crate) fn read_all(&self, params: &DeviceParams, rng: &mut RandomStream) -> (Vec<f64>, f64) {
        let sigma = params.sigma_read;
        let mut conductance_sum = 0.0;
        let mut data = Vec::with_capacity(self.rows * self.cols);
        if sigma > 0.0 {
            for (p, m) in self.g_plus.iter().zip(&self.g_minus) {
                let (gp, gm) = (p.conductance_s(), m.conductance_s());
                conductance_sum += gp + gm;
                let zp: f64 = rng.sample(rand_distr::StandardNormal);
                let zm: f64 = rng.sample(rand_distr::StandardNormal);
                data.push((gp * (1.0 + sigma * zp) - gm * (1.0 + sigma * zm)) / self.alpha_s);
            }
        } else {
            for (p, m) in self.g_plus.iter().zip(&self.g_minus) {
                let (gp, gm) = (p.conductance_s(), m.conductance_s());
                conductance_sum += gp + gm;
                data.push((gp - gm) / self.alpha_s);
            }
        }
        let read_energy_j =
            params.read_voltage_v * params.read_voltage_v * conductance_sum * params.read_width_s;
        (data, read_energy_j)
    }

    /// One-step analog matrix-vector product `((G+ - G-) * v) / alpha` with
    /// fresh read noise per cell per invocation.
    pub fn mvm(
        &self,
        v: &RealStackedVector,
        params: &DeviceParams,
        kind: EventKind,
        ledger: &mut EnergyLatencyLedger,
        rng: &mut RandomStream,
    ) -> Result<RealStackedVector> {
        if v.len() != self.cols {
            return Err(Error::shape(
                format!("input of length {}", self.cols),
                format!("{}", v.len()),
            ));
        }
        let x = v.as_slice();
        let sigma = params.sigma_read;
        let mut out = vec![0.0; self.rows];
        let mut conductance_sum = 0.0;
        for r in 0..self.rows {
            let off = r * self.cols;
            let plus = &self.g_plus[off..off + self.cols];
            let minus = &self.g_minus[off..off + self.cols];
            let mut acc = 0.0;
            if sigma > 0.0 {
                for j in 0..self.cols {
                    let (gp, gm) = (plus[j].conductance_s(), minus[j].conductance_s());
                    conductance_sum += gp + gm;
                    let zp: f64 = rng.sample(rand_distr::StandardNormal);
                    let zm: f64 = rng.sample(rand_distr::StandardNormal);
                    acc += (gp * (1.0 + sigma * zp) - gm * (1.0 + sigma * zm)) * x[j];
                }
            } else {
                for j in 0..self.cols {
                    let (gp, gm) = (plus[j].conductance_s(), minus[j].conductance_s());
                    conductance_sum += gp + gm;
                    acc += (gp - gm) * x[j];
                }
            }
            out[r] = acc / self.alpha_s;
        }
        self.record_mvm(kind, conductance_sum, params, ledger);
        RealStackedVector::new(out)
    }

    /// One-step product with the transposed stored matrix (`(G+ - G-)^T v`),
    /// used by the inverse transform without reprogramming.
    pub fn mvm_transposed(
        &self,
        v: &RealStackedVector,
        params: &DeviceParams,
        kind: EventKind,
        ledger: &mut EnergyLatencyLedger,
        rng: &mut RandomStream,
    ) -> Result<RealStackedVector> {
        if v.len() != self.rows {
            return Err(Error::shape(
                format!("input of length {}", self.rows),
                format!("{}", v.len()),
            ));
        }
        let x = v.as_slice();
        let sigma = params.sigma_read;
        let mut out = vec![0.0; self.cols];
        let mut conductance_sum = 0.0;
        for r in 0..self.rows {
            let off = r * self.cols;
            let plus = &self.g_plus[off..off + self.cols];
            let minus = &self.g_minus[off..off + self.cols];
            let xr = x[r];
            if sigma > 0.0 {
                for j in 0..self.cols {
                    let (gp, gm) = (plus[j].conductance_s(), minus[j].conductance_s());
                    conductance_sum += gp + gm;
                    let zp: f64 = rng.sample(rand_distr::StandardNormal);
                    let zm: f64 = rng.sample(rand_distr::StandardNormal);
                    out[j] += (gp * (1.0 + sigma * zp) - gm * (1.0 + sigma * zm)) * xr;
                }
            } else {
                for j in 0..self.cols {
                    let (gp, gm) = (plus[j].conductance_s(), minus[j].conductance_s());
                    conductance_sum += gp + gm;
                    out[j] += (gp - gm) * xr;
                }
            }
        }
        for o in &mut out {
            *o /= self.alpha_s;
        }
        self.record_mvm(kind, conductance_sum, params, ledger);
        RealStackedVector::new(out)
    }

    fn record_mvm(
        &self,
        kind: EventKind,
        conductance_sum: f64,
        params: &DeviceParams,
        ledger: &mut EnergyLatencyLedger,
    ) {
        let cells = (2 * self.rows * self.cols) as u64;
        ledger.record_event(&AnalogEvent {
            kind,
            write_pulses: 0,
            verify_reads: 0,
            cell_reads: cells,
            invocations: 1,
            pulse_energy_j: 0.0,
            read_energy_j: params.read_voltage_v
                * params.read_voltage_v
                * conductance_sum
                * params.read_width_s,
            latency_s: params.read_width_s,
            ops: 2 * (self.rows * self.cols) as u64,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_map::{real_mapping, ComplexMatrix};
    use crate::rng::stream;
    use num_complex::Complex64;

    fn tight() -> ProgramConfig {
        ProgramConfig {
            scheme: WriteScheme::Verify,
            tolerance: 1e-12,
            tolerance_floor: 0.5,
            max_pulses: 0,
        }
    }

    fn random_block(k: usize, l: usize, seed: u64) -> RealBlockMatrix {
        let mut rng = stream(seed, 0);
        real_mapping(&ComplexMatrix::from_fn(k, l, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }))
    }

    #[test]
    fn zero_noise_verify_stores_exactly() {
        let params = DeviceParams::noiseless();
        let target = random_block(3, 2, 1);
        let mut ledger = EnergyLatencyLedger::new();
        let (_, error, _) =
            program_matrix(&target, &tight(), &params, EventKind::StaticProgram, &mut ledger, &mut stream(1, 1))
                .unwrap();
        assert!(
            error.max_abs() <= 1e-12 * target.max_abs(),
            "residual {:e}",
            error.max_abs()
        );
    }

    #[test]
    fn zero_matrix_needs_no_pulses() {
        let params = DeviceParams::noiseless();
        let target = RealBlockMatrix::from_raw(2, 2, vec![0.0; 16]).unwrap();
        let mut ledger = EnergyLatencyLedger::new();
        let (_, error, event) =
            program_matrix(&target, &tight(), &params, EventKind::StaticProgram, &mut ledger, &mut stream(2, 1))
                .unwrap();
        assert_eq!(event.write_pulses, 0);
        assert_eq!(event.verify_reads, 32); // one verify read per cell
        assert_eq!(error.max_abs(), 0.0);
    }

    #[test]
    fn sign_splitting_keeps_one_side_at_baseline() {
        let params = DeviceParams::noiseless();
        let target = random_block(2, 2, 3);
        let mut ledger = EnergyLatencyLedger::new();
        let (pair, _, _) =
            program_matrix(&target, &tight(), &params, EventKind::StaticProgram, &mut ledger, &mut stream(3, 1))
                .unwrap();
        for r in 0..pair.rows() {
            for c in 0..pair.cols() {
                let idx = r * pair.cols() + c;
                let above_plus = pair.g_plus[idx].conductance_s() > params.g_min_s + 1e-12;
                let above_minus = pair.g_minus[idx].conductance_s() > params.g_min_s + 1e-12;
                assert!(!(above_plus && above_minus), "both sides programmed at ({r},{c})");
            }
        }
    }

    #[test]
    fn verify_error_bounded_by_tolerance_above_floor() {
        let params = DeviceParams {
            sigma_c2c: 0.02,
            sigma_read: 0.0,
            ..DeviceParams::noiseless()
        };
        let prog = ProgramConfig {
            scheme: WriteScheme::Verify,
            tolerance: 0.01,
            tolerance_floor: 0.5,
            max_pulses: 0,
        };
        let target = random_block(4, 4, 5);
        let mut ledger = EnergyLatencyLedger::new();
        let (_, error, _) =
            program_matrix(&target, &prog, &params, EventKind::StaticProgram, &mut ledger, &mut stream(5, 1))
                .unwrap();
        let max_abs = target.max_abs();
        for r in 0..target.rows() {
            for c in 0..target.cols() {
                let m = target.get(r, c).abs();
                let allowed = prog.tolerance * m.max(prog.tolerance_floor * max_abs);
                assert!(
                    error.get(r, c).abs() <= allowed * (1.0 + 1e-9),
                    "cell ({r},{c}): |{:e}| > {:e}",
                    error.get(r, c),
                    allowed
                );
            }
        }
    }

    #[test]
    fn identity_mvm_is_identity_at_zero_noise() {
        let params = DeviceParams::noiseless();
        let target = real_mapping(&ComplexMatrix::identity(3));
        let mut ledger = EnergyLatencyLedger::new();
        let (pair, _, _) =
            program_matrix(&target, &tight(), &params, EventKind::StaticProgram, &mut ledger, &mut stream(6, 1))
                .unwrap();
        let v = RealStackedVector::new(vec![0.5, -1.5, 2.0, 0.0, 1.0, -0.25]).unwrap();
        let out = pair
            .mvm(&v, &params, EventKind::DftRead, &mut ledger, &mut stream(6, 2))
            .unwrap();
        for (a, b) in out.as_slice().iter().zip(v.as_slice()) {
            assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
        // Zero input maps to zero.
        let zero = RealStackedVector::new(vec![0.0; 6]).unwrap();
        let out = pair
            .mvm(&zero, &params, EventKind::DftRead, &mut ledger, &mut stream(6, 3))
            .unwrap();
        assert!(out.as_slice().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn zero_noise_mvm_matches_dense_product() {
        let params = DeviceParams::noiseless();
        let mut rng = stream(7, 0);
        for k in [2usize, 4, 8, 32] {
            let target = random_block(k, k, 7 + k as u64);
            let mut ledger = EnergyLatencyLedger::new();
            let (pair, _, _) = program_matrix(
                &target,
                &tight(),
                &params,
                EventKind::StaticProgram,
                &mut ledger,
                &mut stream(8, k as u64),
            )
            .unwrap();
            let v: Vec<f64> = (0..2 * k).map(|_| rng.random_range(-1.0..1.0)).collect();
            let sv = RealStackedVector::new(v.clone()).unwrap();
            let got = pair
                .mvm(&sv, &params, EventKind::DftRead, &mut ledger, &mut stream(9, k as u64))
                .unwrap();
            let want = target.mat_vec(&v).unwrap();
            let scale = want.iter().map(|x| x.abs()).fold(1.0f64, f64::max);
            for (a, b) in got.as_slice().iter().zip(&want) {
                assert!((a - b).abs() <= 1e-10 * scale, "{a} vs {b} at k={k}");
            }
        }
    }

    #[test]
    fn mvm_is_linear_without_read_noise() {
        let params = DeviceParams {
            sigma_c2c: 0.05,
            sigma_read: 0.0,
            ..DeviceParams::noiseless()
        };
        let target = random_block(3, 3, 11);
        let mut ledger = EnergyLatencyLedger::new();
        let (pair, _, _) = program_matrix(
            &target,
            &ProgramConfig::default(),
            &params,
            EventKind::StaticProgram,
            &mut ledger,
            &mut stream(11, 1),
        )
        .unwrap();
        let mut rng = stream(11, 2);
        let u: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (a, b) = (2.0, -0.75);
        let combined: Vec<f64> = u.iter().zip(&w).map(|(x, y)| a * x + b * y).collect();
        let f = |v: Vec<f64>, l: &mut EnergyLatencyLedger, r: &mut RandomStream| {
            pair.mvm(&RealStackedVector::new(v).unwrap(), &params, EventKind::DftRead, l, r)
                .unwrap()
                .into_vec()
        };
        let fu = f(u, &mut ledger, &mut stream(11, 3));
        let fw = f(w, &mut ledger, &mut stream(11, 4));
        let fc = f(combined, &mut ledger, &mut stream(11, 5));
        for i in 0..fu.len() {
            let lin = a * fu[i] + b * fw[i];
            assert!((fc[i] - lin).abs() <= 1e-10 * lin.abs().max(1.0));
        }
    }

    #[test]
    fn mvm_rejects_wrong_length() {
        let params = DeviceParams::noiseless();
        let target = random_block(2, 3, 13);
        let mut ledger = EnergyLatencyLedger::new();
        let (pair, _, _) =
            program_matrix(&target, &tight(), &params, EventKind::StaticProgram, &mut ledger, &mut stream(13, 1))
                .unwrap();
        let bad = RealStackedVector::new(vec![0.0; 4]).unwrap();
        assert!(pair
            .mvm(&bad, &params, EventKind::DftRead, &mut ledger, &mut stream(13, 2))
            .is_err());
    }

    #[test]
    fn transposed_mvm_matches_dense_transpose() {
        let params = DeviceParams::noiseless();
        let target = random_block(3, 2, 17);
        let mut ledger = EnergyLatencyLedger::new();
        let (pair, _, _) =
            program_matrix(&target, &tight(), &params, EventKind::StaticProgram, &mut ledger, &mut stream(17, 1))
                .unwrap();
        let mut rng = stream(17, 2);
        let v: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let got = pair
            .mvm_transposed(
                &RealStackedVector::new(v.clone()).unwrap(),
                &params,
                EventKind::DftRead,
                &mut ledger,
                &mut stream(17, 3),
            )
            .unwrap();
        let want = target.transpose().mat_vec(&v).unwrap();
        for (a, b) in got.as_slice().iter().zip(&want) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn stored_matrix_consistent_with_per_cell_tolerance() {
        let params = DeviceParams {
            sigma_c2c: 0.02,
            sigma_read: 0.0,
            ..DeviceParams::noiseless()
        };
        let prog = ProgramConfig {
            scheme: WriteScheme::Verify,
            tolerance: 0.01,
            tolerance_floor: 0.5,
            max_pulses: 0,
        };
        let target = random_block(4, 4, 19);
        let mut ledger = EnergyLatencyLedger::new();
        let (pair, error, _) =
            program_matrix(&target, &prog, &params, EventKind::StaticProgram, &mut ledger, &mut stream(19, 1))
                .unwrap();
        // Frobenius norm bounded by the sum of squared per-cell windows.
        let max_abs = target.max_abs();
        let bound: f64 = target
            .data()
            .iter()
            .map(|m| {
                let w = prog.tolerance * m.abs().max(prog.tolerance_floor * max_abs);
                w * w
            })
            .sum::<f64>()
            .sqrt();
        assert!(error.frobenius() <= bound * (1.0 + 1e-9));
        let exact = pair.stored_matrix_exact();
        let noisy = pair.stored_matrix(&params, &mut ledger, &mut stream(19, 2));
        assert_eq!(exact.data(), noisy.data()); // sigma_read == 0
    }

    #[test]
    fn error_matrix_exports_csv() {
        let params = DeviceParams::noiseless();
        let target = random_block(2, 2, 23);
        let mut ledger = EnergyLatencyLedger::new();
        let (_, error, _) =
            program_matrix(&target, &tight(), &params, EventKind::StaticProgram, &mut ledger, &mut stream(23, 1))
                .unwrap();
        let csv = error.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().next().unwrap().split(',').count(), 4);
    }
}
