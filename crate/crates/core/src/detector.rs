//! Feedback crossbar circuit computing L-MMSE/ZF detection in one step.
//!
//! Two differential pairs hold the real image of the channel matrix (the
//! right pair stores its transpose). With TIA feedback conductances `g1` and
//! `g2`, the settled output voltages satisfy
//! `v = (G_r G_l + g1 g2 I)^-1 G_r i` for input currents `i` scaled from the
//! received vector. Choosing `g1 g2 = alpha^2 / SNR` makes `v` the stacked
//! image of the L-MMSE estimate; opening the second feedback (`g2 = 0`)
//! yields zero forcing. Detection is evaluated either by solving that fixed
//! point directly or by relaxing the settling dynamics; both see one fresh
//! sample of read noise per detection, because the circuit holds a physical
//! state while it settles.

use num_complex::Complex64;

use crate::complex_map::{inverse_vector_mapping, real_mapping, vector_mapping, ComplexMatrix};
use crate::crossbar::{program_matrix, CrossbarPair, ProgramConfig};
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::ledger::{self, AnalogEvent, EnergyLatencyLedger, EventKind};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorMode {
    Lmmse,
    Zf,
}

/// Recovered symbol vector plus convergence data (relaxation mode only).
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub x_hat: Vec<Complex64>,
    pub converged: bool,
    pub iterations: u64,
}

/// Controls for the settling-dynamics integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationOptions {
    /// Euler step in normalized time; 0 picks a stable step from the stored
    /// targets.
    pub time_step: f64,
    /// Stop once the update norm falls below this.
    pub tolerance: f64,
    pub max_steps: u64,
    /// Optional initial voltage vector (stacked real form).
    pub initial: Option<Vec<f64>>,
}

impl Default for RelaxationOptions {
    fn default() -> Self {
        Self {
            time_step: 0.0,
            tolerance: 1e-10,
            max_steps: 200_000,
            initial: None,
        }
    }
}

/// The programmed detection circuit.
#[derive(Debug, Clone)]
pub struct DetectorCircuit {
    left_pair: CrossbarPair,
    right_pair: CrossbarPair,
    g1_s: f64,
    g2_s: f64,
    snr: f64,
    alpha_s: f64,
    mode: DetectorMode,
    n_t: usize,
    n_r: usize,
}

/// Programs the channel estimate into both pairs (one holding the transpose)
/// and wires the feedback conductances to `g1 = g2 = alpha / sqrt(SNR)`, so
/// their product realizes the `alpha^2 / SNR` regularizer. ZF mode opens the
/// second feedback.
pub fn build_detector(
    h_hat: &ComplexMatrix,
    snr: f64,
    mode: DetectorMode,
    prog: &ProgramConfig,
    params: &DeviceParams,
    ledger: &mut EnergyLatencyLedger,
    rng: &mut RandomStream,
) -> Result<DetectorCircuit> {
    if !(snr > 0.0) {
        return Err(Error::Config(format!("snr must be positive, got {snr}")));
    }
    let (n_r, n_t) = (h_hat.rows(), h_hat.cols());
    let left_target = real_mapping(h_hat);
    let right_target = real_mapping(&h_hat.hermitian());
    let (left_pair, _, _) = program_matrix(
        &left_target,
        prog,
        params,
        EventKind::UpdateProgram,
        ledger,
        rng,
    )?;
    let (right_pair, _, _) = program_matrix(
        &right_target,
        prog,
        params,
        EventKind::UpdateProgram,
        ledger,
        rng,
    )?;
    debug_assert!((left_pair.alpha_s() - right_pair.alpha_s()).abs() <= 1e-12 * left_pair.alpha_s());
    let alpha_s = left_pair.alpha_s();
    let g1_s = alpha_s / snr.sqrt();
    let g2_s = match mode {
        DetectorMode::Lmmse => alpha_s / snr.sqrt(),
        DetectorMode::Zf => 0.0,
    };
    Ok(DetectorCircuit {
        left_pair,
        right_pair,
        g1_s,
        g2_s,
        snr,
        alpha_s,
        mode,
        n_t,
        n_r,
    })
}

impl DetectorCircuit {
    pub fn mode(&self) -> DetectorMode {
        self.mode
    }

    pub fn g1_s(&self) -> f64 {
        self.g1_s
    }

    pub fn g2_s(&self) -> f64 {
        self.g2_s
    }

    pub fn alpha_s(&self) -> f64 {
        self.alpha_s
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    /// Toggles the second feedback between open (ZF) and `alpha^2/(snr g1)`
    /// (L-MMSE). Purely a bias change: the stored pairs are untouched.
    pub fn set_mode(&mut self, mode: DetectorMode) {
        self.mode = mode;
        self.g2_s = match mode {
            DetectorMode::Lmmse => self.alpha_s * self.alpha_s / (self.snr * self.g1_s),
            DetectorMode::Zf => 0.0,
        };
    }

    /// Regularizer the feedback wiring realizes, in matrix units.
    fn regularizer(&self) -> f64 {
        self.g1_s * self.g2_s / (self.alpha_s * self.alpha_s)
    }

    /// Reads both pairs once (fresh read noise) and records the one-step
    /// detection event.
    fn read_effective(
        &self,
        params: &DeviceParams,
        ledger: &mut EnergyLatencyLedger,
        rng: &mut RandomStream,
    ) -> (Vec<f64>, Vec<f64>) {
        let (left, e_left) = self.left_pair.read_all(params, rng);
        let (right, e_right) = self.right_pair.read_all(params, rng);
        let cells = 2 * (self.left_pair.rows() * self.left_pair.cols()
            + self.right_pair.rows() * self.right_pair.cols());
        ledger.record_event(&AnalogEvent {
            kind: EventKind::DetectRead,
            write_pulses: 0,
            verify_reads: 0,
            cell_reads: cells as u64,
            invocations: 1,
            pulse_energy_j: 0.0,
            read_energy_j: e_left + e_right,
            latency_s: params.read_width_s,
            ops: ledger::OPS_PER_CMAC * ledger::detect_cmacs(self.n_t as u64, self.n_r as u64),
        });
        (left, right)
    }

    fn check_input(&self, y: &[Complex64]) -> Result<()> {
        if y.len() != self.n_r {
            return Err(Error::shape(
                format!("received vector of length {}", self.n_r),
                format!("{}", y.len()),
            ));
        }
        Ok(())
    }

    /// Solves the settled fixed point directly.
    pub fn detect_algebraic(
        &self,
        y: &[Complex64],
        params: &DeviceParams,
        ledger: &mut EnergyLatencyLedger,
        rng: &mut RandomStream,
    ) -> Result<DetectionResult> {
        self.check_input(y)?;
        let (left, right) = self.read_effective(params, ledger, rng);
        let n = 2 * self.n_t;
        let m = 2 * self.n_r;
        let jy = vector_mapping(y);
        // A = right * left + reg I, b = right * J(y), all in matrix units.
        let mut a = vec![0.0; n * n];
        for r in 0..n {
            for k in 0..m {
                let w = right[r * m + k];
                for c in 0..n {
                    a[r * n + c] += w * left[k * n + c];
                }
            }
        }
        let reg = self.regularizer();
        for d in 0..n {
            a[d * n + d] += reg;
        }
        let mut b = vec![0.0; n];
        for r in 0..n {
            b[r] = right[r * m..(r + 1) * m]
                .iter()
                .zip(jy.as_slice())
                .map(|(w, v)| w * v)
                .sum();
        }
        lu_solve(n, &mut a, &mut b)?;
        Ok(DetectionResult {
            x_hat: inverse_vector_mapping(&b)?,
            converged: true,
            iterations: 0,
        })
    }

    /// Stable Euler step bound from the stored targets.
    pub fn suggested_time_step(&self) -> f64 {
        let inf = |m: &crate::complex_map::RealBlockMatrix| -> f64 {
            let mut worst = 0.0f64;
            for r in 0..m.rows() {
                let sum: f64 = (0..m.cols()).map(|c| m.get(r, c).abs()).sum();
                worst = worst.max(sum);
            }
            worst
        };
        let gain = self.alpha_s * self.alpha_s / self.g1_s;
        let rate = self.g2_s
            + gain * inf(self.right_pair.target()) * inf(self.left_pair.target());
        1.0 / rate.max(f64::MIN_POSITIVE)
    }

    /// Integrates the settling dynamics
    /// `dv/dt = -(g2 v + (alpha^2/g1) G_r (G_l v - J(y)))` to its fixed
    /// point. Effective matrices are read once, as in the algebraic path.
    pub fn detect_dynamical(
        &self,
        y: &[Complex64],
        opts: &RelaxationOptions,
        params: &DeviceParams,
        ledger: &mut EnergyLatencyLedger,
        rng: &mut RandomStream,
    ) -> Result<DetectionResult> {
        self.check_input(y)?;
        if opts.time_step < 0.0 {
            return Err(Error::Config("time_step must be positive".into()));
        }
        let dt = if opts.time_step == 0.0 {
            self.suggested_time_step()
        } else {
            opts.time_step
        };
        let (left, right) = self.read_effective(params, ledger, rng);
        let n = 2 * self.n_t;
        let m = 2 * self.n_r;
        let jy = vector_mapping(y);
        let jy = jy.as_slice();
        let gain = self.alpha_s * self.alpha_s / self.g1_s;
        let mut v = match &opts.initial {
            Some(v0) if v0.len() == n => v0.clone(),
            Some(v0) => {
                return Err(Error::shape(format!("initial of length {n}"), format!("{}", v0.len())))
            }
            None => vec![0.0; n],
        };
        let mut residual = vec![0.0; m];
        let mut update = vec![0.0; n];
        let mut iterations = 0u64;
        loop {
            // residual = G_l v - J(y) in matrix units.
            for r in 0..m {
                let row = &left[r * n..(r + 1) * n];
                residual[r] = row.iter().zip(&v).map(|(a, x)| a * x).sum::<f64>() - jy[r];
            }
            let mut norm_sq = 0.0;
            for r in 0..n {
                let row = &right[r * m..(r + 1) * m];
                let feedback: f64 = row.iter().zip(&residual).map(|(a, x)| a * x).sum();
                let dv = -dt * (self.g2_s * v[r] + gain * feedback);
                update[r] = dv;
                norm_sq += dv * dv;
            }
            for (vi, dvi) in v.iter_mut().zip(&update) {
                *vi += dvi;
            }
            iterations += 1;
            if norm_sq.sqrt() < opts.tolerance {
                break;
            }
            if iterations >= opts.max_steps {
                return Err(Error::NoConvergence {
                    max_steps: opts.max_steps,
                    last_update: norm_sq.sqrt(),
                });
            }
        }
        Ok(DetectionResult {
            x_hat: inverse_vector_mapping(&v)?,
            converged: true,
            iterations,
        })
    }
}

/// Exact floating-point L-MMSE/ZF detection (the benchmark processor): solves
/// `(H^H H + I/snr) x = H^H y` through the real block mapping.
pub fn lmmse_closed_form(
    h: &ComplexMatrix,
    snr: f64,
    mode: DetectorMode,
    y: &[Complex64],
) -> Result<Vec<Complex64>> {
    if y.len() != h.rows() {
        return Err(Error::shape(
            format!("received vector of length {}", h.rows()),
            format!("{}", y.len()),
        ));
    }
    let hh = h.hermitian();
    let mut gram = hh.mul(h)?;
    if mode == DetectorMode::Lmmse {
        if !(snr > 0.0) {
            return Err(Error::Config(format!("snr must be positive, got {snr}")));
        }
        for d in 0..gram.rows() {
            let z = gram.get(d, d);
            gram.set(d, d, z + Complex64::new(1.0 / snr, 0.0));
        }
    }
    let rhs = hh.mat_vec(y)?;
    let a = real_mapping(&gram);
    let n = a.rows();
    let mut a_data = a.data().to_vec();
    let mut b = vector_mapping(&rhs).into_vec();
    lu_solve(n, &mut a_data, &mut b)?;
    inverse_vector_mapping(&b)
}

/// In-place LU solve with partial pivoting on a dense row-major system.
fn lu_solve(n: usize, a: &mut [f64], b: &mut [f64]) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = a.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let floor = scale.max(f64::MIN_POSITIVE) * 1e-13 * n as f64;
    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot = a[k * n + k].abs();
        for i in k + 1..n {
            let v = a[i * n + k].abs();
            if v > pivot {
                pivot = v;
                pivot_row = i;
            }
        }
        if pivot <= floor {
            return Err(Error::SingularSystem { pivot });
        }
        if pivot_row != k {
            for j in 0..n {
                a.swap(k * n + j, pivot_row * n + j);
            }
            b.swap(k, pivot_row);
        }
        let diag = a[k * n + k];
        for i in k + 1..n {
            let factor = a[i * n + k] / diag;
            if factor == 0.0 {
                continue;
            }
            a[i * n + k] = 0.0;
            for j in k + 1..n {
                a[i * n + j] -= factor * a[k * n + j];
            }
            b[i] -= factor * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut acc = b[k];
        for j in k + 1..n {
            acc -= a[k * n + j] * b[j];
        }
        b[k] = acc / a[k * n + k];
    }
    Ok(())
}
