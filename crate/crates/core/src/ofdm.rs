//! OFDM transform stage: unitary DFT/IDFT executed exactly or on a
//! programmed crossbar, plus cyclic-prefix handling.
//!
//! The transform matrix is `W[k][l] = exp(-2*pi*i*k*l/n) / sqrt(n)`, so
//! `W^-1 = W^H` and the inverse transform runs on the same programmed pair
//! read in transpose (the real block image of `W^H` is the transpose of the
//! image of `W`). In crossbar mode one transform is exactly one analog
//! matrix-vector invocation.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::complex_map::{inverse_vector_mapping, real_mapping, vector_mapping, ComplexMatrix};
use crate::crossbar::{program_matrix, CrossbarPair, ProgramConfig};
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::ledger::{EnergyLatencyLedger, EventKind};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Time,
    Frequency,
}

/// A block of samples tagged with the domain it lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmSymbolBlock {
    samples: Vec<Complex64>,
    domain: Domain,
}

impl OfdmSymbolBlock {
    pub fn frequency(samples: Vec<Complex64>) -> Self {
        Self {
            samples,
            domain: Domain::Frequency,
        }
    }

    pub fn time(samples: Vec<Complex64>) -> Self {
        Self {
            samples,
            domain: Domain::Time,
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }
}

/// Unitary DFT matrix of size `n`.
pub fn unitary_dft_matrix(n: usize) -> ComplexMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |k, l| {
        let phase = -TAU * (k as f64) * (l as f64) / n as f64;
        Complex64::from_polar(scale, phase)
    })
}

#[derive(Debug, Clone)]
pub enum DftMode {
    Exact,
    Crossbar(CrossbarPair),
}

/// DFT/IDFT executor over `n_c` sub-carriers.
#[derive(Debug, Clone)]
pub struct DftOperator {
    n_c: usize,
    w: ComplexMatrix,
    mode: DftMode,
}

/// Exact-mode operator; fails below 2 sub-carriers.
pub fn dft_matrix(n_c: usize) -> Result<DftOperator> {
    if n_c < 2 {
        return Err(Error::UnsupportedSize(n_c));
    }
    Ok(DftOperator {
        n_c,
        w: unitary_dft_matrix(n_c),
        mode: DftMode::Exact,
    })
}

impl DftOperator {
    /// Programs the real image of the transform matrix into a differential
    /// pair (recorded as static programming: the matrix never changes) and
    /// switches the operator to crossbar execution.
    pub fn into_crossbar(
        self,
        prog: &ProgramConfig,
        params: &DeviceParams,
        ledger: &mut EnergyLatencyLedger,
        rng: &mut RandomStream,
    ) -> Result<DftOperator> {
        let target = real_mapping(&self.w);
        let (pair, _, _) = program_matrix(
            &target,
            prog,
            params,
            EventKind::StaticProgram,
            ledger,
            rng,
        )?;
        Ok(DftOperator {
            n_c: self.n_c,
            w: self.w,
            mode: DftMode::Crossbar(pair),
        })
    }

    pub fn n_c(&self) -> usize {
        self.n_c
    }

    pub fn is_crossbar(&self) -> bool {
        matches!(self.mode, DftMode::Crossbar(_))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.w
    }

    /// Residual error of the programmed pair, when in crossbar mode.
    pub fn crossbar_error(&self) -> Option<crate::crossbar::ErrorMatrix> {
        match &self.mode {
            DftMode::Crossbar(pair) => Some(pair.error_matrix()),
            DftMode::Exact => None,
        }
    }

    fn check_pair(&self, pair: &CrossbarPair) -> Result<()> {
        if pair.rows() != 2 * self.n_c || pair.cols() != 2 * self.n_c {
            return Err(Error::ModeMismatch(format!(
                "crossbar pair is {}x{}, transform needs {}x{}",
                pair.rows(),
                pair.cols(),
                2 * self.n_c,
                2 * self.n_c
            )));
        }
        Ok(())
    }

    /// Time domain (cyclic prefix already removed) to frequency domain.
    pub fn dft(
        &self,
        block: &OfdmSymbolBlock,
        params: &DeviceParams,
        ledger: &mut EnergyLatencyLedger,
        rng: &mut RandomStream,
    ) -> Result<OfdmSymbolBlock> {
        if block.domain() != Domain::Time {
            return Err(Error::ModeMismatch("dft expects a time-domain block".into()));
        }
        if block.samples().len() != self.n_c {
            return Err(Error::BadLength(format!(
                "dft expects {} samples, got {}",
                self.n_c,
                block.samples().len()
            )));
        }
        let out = match &self.mode {
            DftMode::Exact => self.w.mat_vec(block.samples())?,
            DftMode::Crossbar(pair) => {
                self.check_pair(pair)?;
                let v = vector_mapping(block.samples());
                let i = pair.mvm(&v, params, EventKind::DftRead, ledger, rng)?;
                inverse_vector_mapping(i.as_slice())?
            }
        };
        Ok(OfdmSymbolBlock::frequency(out))
    }

    /// Frequency domain to time domain via `W^H` (the transposed pair in
    /// crossbar mode; nothing is reprogrammed).
    pub fn idft(
        &self,
        block: &OfdmSymbolBlock,
        params: &DeviceParams,
        ledger: &mut EnergyLatencyLedger,
        rng: &mut RandomStream,
    ) -> Result<OfdmSymbolBlock> {
        if block.domain() != Domain::Frequency {
            return Err(Error::ModeMismatch(
                "idft expects a frequency-domain block".into(),
            ));
        }
        if block.samples().len() != self.n_c {
            return Err(Error::BadLength(format!(
                "idft expects {} samples, got {}",
                self.n_c,
                block.samples().len()
            )));
        }
        let out = match &self.mode {
            DftMode::Exact => {
                // W is symmetric, so W^H x = conj(W * conj(x)).
                let conj: Vec<Complex64> = block.samples().iter().map(|z| z.conj()).collect();
                self.w.mat_vec(&conj)?.into_iter().map(|z| z.conj()).collect()
            }
            DftMode::Crossbar(pair) => {
                self.check_pair(pair)?;
                let v = vector_mapping(block.samples());
                let i = pair.mvm_transposed(&v, params, EventKind::DftRead, ledger, rng)?;
                inverse_vector_mapping(i.as_slice())?
            }
        };
        Ok(OfdmSymbolBlock::time(out))
    }
}

/// Prepends the last `cp_len` samples.
pub fn add_cyclic_prefix(samples: &[Complex64], cp_len: usize) -> Result<Vec<Complex64>> {
    if cp_len >= samples.len() {
        return Err(Error::BadLength(format!(
            "cyclic prefix {cp_len} must be shorter than the symbol ({})",
            samples.len()
        )));
    }
    let mut out = Vec::with_capacity(samples.len() + cp_len);
    out.extend_from_slice(&samples[samples.len() - cp_len..]);
    out.extend_from_slice(samples);
    Ok(out)
}

/// Drops the first `cp_len` samples.
pub fn remove_cyclic_prefix(samples: &[Complex64], cp_len: usize) -> Result<Vec<Complex64>> {
    if samples.len() <= cp_len {
        return Err(Error::BadLength(format!(
            "cannot strip a {cp_len}-sample prefix from {} samples",
            samples.len()
        )));
    }
    Ok(samples[cp_len..].to_vec())
}
