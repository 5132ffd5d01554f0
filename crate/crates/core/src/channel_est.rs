//! Pilot-based channel estimation.
//!
//! With a unitary training matrix `P` the least-squares/ML estimate of the
//! channel is simply `H_hat = S P^H`, where `S` is the received training
//! block. On the crossbar the real image of `P` is stored once and each of
//! the `2 N_r` rows of the real image of `S` is driven through it, so one
//! estimate costs exactly `2 N_r` analog reads. An identity pilot needs no
//! computation at all: the received block already is the estimate.

use crate::complex_map::{inverse_real_mapping, real_mapping, ComplexMatrix, RealBlockMatrix, RealStackedVector};
use crate::crossbar::{program_matrix, ProgramConfig};
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::ledger::{EnergyLatencyLedger, EventKind};
use crate::ofdm::unitary_dft_matrix;
use crate::rng::RandomStream;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotKind {
    Identity,
    Dft,
    Hadamard,
}

/// Builds a unitary training matrix of the requested family.
pub fn make_unitary_pilot(n_t: usize, kind: PilotKind) -> Result<ComplexMatrix> {
    if n_t == 0 {
        return Err(Error::UnsupportedSize(0));
    }
    match kind {
        PilotKind::Identity => Ok(ComplexMatrix::identity(n_t)),
        PilotKind::Dft => Ok(unitary_dft_matrix(n_t)),
        PilotKind::Hadamard => {
            if !n_t.is_power_of_two() {
                return Err(Error::UnsupportedSize(n_t));
            }
            let scale = 1.0 / (n_t as f64).sqrt();
            Ok(ComplexMatrix::from_fn(n_t, n_t, |r, c| {
                // Sylvester sign: parity of the AND of the index bits.
                let sign = if (r & c).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                Complex64::new(sign * scale, 0.0)
            }))
        }
    }
}

/// Transmitted training matrix and the block received through the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotBlock {
    p: ComplexMatrix,
    s: ComplexMatrix,
}

impl PilotBlock {
    pub fn new(p: ComplexMatrix, s: ComplexMatrix) -> Result<Self> {
        if p.rows() != p.cols() || s.cols() != p.rows() {
            return Err(Error::shape(
                format!("P {0}x{0} and S n_r x {0}", p.rows()),
                format!("P {}x{}, S {}x{}", p.rows(), p.cols(), s.rows(), s.cols()),
            ));
        }
        let dev = p.unitarity_error();
        if dev > 1e-10 {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { p, s })
    }

    pub fn pilot(&self) -> &ComplexMatrix {
        &self.p
    }

    pub fn received(&self) -> &ComplexMatrix {
        &self.s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMode {
    Exact,
    Crossbar,
}

/// Least-squares channel estimate `S P^H`. Crossbar mode programs the pilot
/// image (a fixed array, recorded as static programming) and feeds the rows
/// of the received image through it.
pub fn estimate_channel(
    pilot: &PilotBlock,
    mode: EstimateMode,
    prog: &ProgramConfig,
    params: &DeviceParams,
    ledger: &mut EnergyLatencyLedger,
    rng: &mut RandomStream,
) -> Result<ComplexMatrix> {
    match mode {
        EstimateMode::Exact => pilot.s.mul(&pilot.p.hermitian()),
        EstimateMode::Crossbar => {
            let p_image = real_mapping(&pilot.p);
            let (pair, _, _) = program_matrix(
                &p_image,
                prog,
                params,
                EventKind::StaticProgram,
                ledger,
                rng,
            )?;
            let s_image = real_mapping(&pilot.s);
            let n_r = pilot.s.rows();
            let width = s_image.cols();
            let mut h_rows = Vec::with_capacity(2 * n_r * width);
            for r in 0..s_image.rows() {
                let row: Vec<f64> = (0..width).map(|c| s_image.get(r, c)).collect();
                let out = pair.mvm(
                    &RealStackedVector::new(row)?,
                    params,
                    EventKind::PilotRead,
                    ledger,
                    rng,
                )?;
                h_rows.extend_from_slice(out.as_slice());
            }
            let h_image = RealBlockMatrix::from_raw(n_r, pilot.p.rows(), h_rows)?;
            Ok(inverse_real_mapping(&h_image))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossbar::WriteScheme;
    use crate::rng::stream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn tight() -> ProgramConfig {
        ProgramConfig {
            scheme: WriteScheme::Verify,
            tolerance: 1e-12,
            tolerance_floor: 0.5,
            max_pulses: 0,
        }
    }

    fn random_h(n_r: usize, n_t: usize, rng: &mut RandomStream) -> ComplexMatrix {
        ComplexMatrix::from_fn(n_r, n_t, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn max_entry_err(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn pilot_families_are_unitary() {
        assert_eq!(
            make_unitary_pilot(2, PilotKind::Identity).unwrap(),
            ComplexMatrix::identity(2)
        );
        assert!(make_unitary_pilot(5, PilotKind::Dft).unwrap().unitarity_error() < 1e-10);
        let h4 = make_unitary_pilot(4, PilotKind::Hadamard).unwrap();
        assert!(h4.unitarity_error() < 1e-10);
        for z in h4.data() {
            assert!((z.re.abs() - 0.5).abs() < 1e-12 && z.im == 0.0);
        }
        assert!(matches!(
            make_unitary_pilot(3, PilotKind::Hadamard),
            Err(Error::UnsupportedSize(3))
        ));
    }

    #[test]
    fn identity_pilot_passes_the_received_block_through() {
        let mut rng = stream(1, 0);
        let s = random_h(3, 2, &mut rng);
        let pilot = PilotBlock::new(ComplexMatrix::identity(2), s.clone()).unwrap();
        let h = estimate_channel(
            &pilot,
            EstimateMode::Exact,
            &tight(),
            &DeviceParams::noiseless(),
            &mut EnergyLatencyLedger::new(),
            &mut stream(1, 1),
        )
        .unwrap();
        assert!(max_entry_err(&h, &s) < 1e-12);
    }

    #[test]
    fn noiseless_training_recovers_the_channel() {
        let mut rng = stream(2, 0);
        let h = random_h(4, 4, &mut rng);
        for kind in [PilotKind::Identity, PilotKind::Dft, PilotKind::Hadamard] {
            let p = make_unitary_pilot(4, kind).unwrap();
            let s = h.mul(&p).unwrap();
            let pilot = PilotBlock::new(p, s).unwrap();
            let h_hat = estimate_channel(
                &pilot,
                EstimateMode::Exact,
                &tight(),
                &DeviceParams::noiseless(),
                &mut EnergyLatencyLedger::new(),
                &mut stream(2, 1),
            )
            .unwrap();
            assert!(max_entry_err(&h_hat, &h) <= 1e-10, "{kind:?}");
        }
    }

    #[test]
    fn crossbar_mode_matches_exact_and_uses_two_nr_reads() {
        let params = DeviceParams::noiseless();
        let mut rng = stream(3, 0);
        let h = random_h(4, 4, &mut rng);
        let p = make_unitary_pilot(4, PilotKind::Dft).unwrap();
        let s = h.mul(&p).unwrap();
        let pilot = PilotBlock::new(p, s).unwrap();
        let mut ledger = EnergyLatencyLedger::new();
        let exact = estimate_channel(
            &pilot,
            EstimateMode::Exact,
            &tight(),
            &params,
            &mut EnergyLatencyLedger::new(),
            &mut stream(3, 1),
        )
        .unwrap();
        let xbar = estimate_channel(
            &pilot,
            EstimateMode::Crossbar,
            &tight(),
            &params,
            &mut ledger,
            &mut stream(3, 2),
        )
        .unwrap();
        assert!(max_entry_err(&exact, &xbar) <= 1e-9);
        assert_eq!(ledger.kind(EventKind::PilotRead).invocations, 2 * 4);
        assert_eq!(
            ledger.kind(EventKind::PilotRead).ops,
            2 * 4 * (2 * (8 * 8) as u64)
        );
    }

    #[test]
    fn estimate_is_unbiased_and_tightens_with_pilot_snr() {
        let mut rng = stream(4, 0);
        let h = random_h(2, 2, &mut rng);
        let p = make_unitary_pilot(2, PilotKind::Dft).unwrap();
        let clean = h.mul(&p).unwrap();
        let mut err_by_sigma = Vec::new();
        for sigma in [0.3, 0.03] {
            let trials = 400;
            let mut sum = ComplexMatrix::zeros(2, 2);
            let mut sq_err = 0.0;
            for _ in 0..trials {
                let s = ComplexMatrix::from_fn(2, 2, |r, c| {
                    let zr: f64 = rng.sample(StandardNormal);
                    let zi: f64 = rng.sample(StandardNormal);
                    clean.get(r, c) + Complex64::new(zr, zi) * (sigma / 2f64.sqrt())
                });
                let pilot = PilotBlock::new(p.clone(), s).unwrap();
                let h_hat = estimate_channel(
                    &pilot,
                    EstimateMode::Exact,
                    &tight(),
                    &DeviceParams::noiseless(),
                    &mut EnergyLatencyLedger::new(),
                    &mut stream(4, 1),
                )
                .unwrap();
                for r in 0..2 {
                    for c in 0..2 {
                        sum.set(r, c, sum.get(r, c) + h_hat.get(r, c));
                        sq_err += (h_hat.get(r, c) - h.get(r, c)).norm_sqr();
                    }
                }
            }
            let mut bias = 0.0f64;
            for r in 0..2 {
                for c in 0..2 {
                    bias = bias.max((sum.get(r, c) / trials as f64 - h.get(r, c)).norm());
                }
            }
            // Mean error shrinks like sigma/sqrt(trials).
            assert!(bias <= 5.0 * sigma / (trials as f64).sqrt(), "bias {bias}");
            err_by_sigma.push(sq_err / trials as f64);
        }
        assert!(err_by_sigma[1] < err_by_sigma[0] * 0.05);
    }

    #[test]
    fn rejects_non_unitary_pilot() {
        let p = ComplexMatrix::new(
            2,
            2,
            vec![Complex64::ONE, Complex64::ONE, Complex64::ZERO, Complex64::ONE],
        )
        .unwrap();
        let s = ComplexMatrix::zeros(2, 2);
        assert!(matches!(PilotBlock::new(p, s), Err(Error::NotUnitary(_))));
    }
}
