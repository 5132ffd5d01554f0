//! Frequency-selective MIMO channel: i.i.d. Rayleigh taps per antenna pair
//! plus AWGN, with the per-sub-carrier matrices precomputed from the taps.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::complex_map::ComplexMatrix;
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    /// i.i.d. complex Gaussian taps, unit average power per antenna pair.
    Rayleigh,
    /// Identity channel (wired prototype): one unit tap per matching antenna.
    Awgn,
}

/// One block-fading realization: taps per (rx, tx) pair and the derived
/// per-sub-carrier channel matrices.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    n_c: usize,
    n_t: usize,
    n_r: usize,
    n_taps: usize,
    taps: Vec<Complex64>,
    h_freq: Vec<ComplexMatrix>,
}

fn standard_complex(rng: &mut RandomStream) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Draws a channel realization. Rayleigh taps are CN(0, 1/n_taps) so the
/// average total power per antenna pair is one.
pub fn generate_channel(
    kind: ChannelKind,
    n_c: usize,
    n_t: usize,
    n_r: usize,
    n_taps: usize,
    rng: &mut RandomStream,
) -> ChannelRealization {
    assert!(n_taps >= 1 && n_t >= 1 && n_r >= 1 && n_c >= 1);
    let mut taps = vec![Complex64::ZERO; n_r * n_t * n_taps];
    match kind {
        ChannelKind::Rayleigh => {
            let scale = (0.5 / n_taps as f64).sqrt();
            for tap in taps.iter_mut() {
                *tap = standard_complex(rng) * scale;
            }
        }
        ChannelKind::Awgn => {
            for r in 0..n_r.min(n_t) {
                taps[(r * n_t + r) * n_taps] = Complex64::ONE;
            }
        }
    }
    let mut h_freq = Vec::with_capacity(n_c);
    for k in 0..n_c {
        h_freq.push(ComplexMatrix::from_fn(n_r, n_t, |r, t| {
            let base = (r * n_t + t) * n_taps;
            (0..n_taps)
                .map(|l| {
                    let phase = -TAU * (k as f64) * (l as f64) / n_c as f64;
                    taps[base + l] * Complex64::from_polar(1.0, phase)
                })
                .sum()
        }));
    }
    ChannelRealization {
        n_c,
        n_t,
        n_r,
        n_taps,
        taps,
        h_freq,
    }
}

impl ChannelRealization {
    pub fn n_taps(&self) -> usize {
        self.n_taps
    }

    pub fn taps(&self, rx: usize, tx: usize) -> &[Complex64] {
        let base = (rx * self.n_t + tx) * self.n_taps;
        &self.taps[base..base + self.n_taps]
    }

    /// Channel matrix of sub-carrier `k` (the tap DFT evaluated at `k`).
    pub fn subcarrier(&self, k: usize) -> &ComplexMatrix {
        &self.h_freq[k]
    }

    pub fn n_c(&self) -> usize {
        self.n_c
    }

    /// Time-domain propagation: per-receive-antenna tap convolution of the
    /// transmit streams plus AWGN with the given per-component std. Streams
    /// are treated as isolated symbols (zero initial state); the cyclic
    /// prefix absorbs the missing history.
    pub fn propagate(
        &self,
        tx: &[Vec<Complex64>],
        noise_std_per_component: f64,
        rng: &mut RandomStream,
    ) -> Vec<Vec<Complex64>> {
        assert_eq!(tx.len(), self.n_t);
        let len = tx[0].len();
        let mut out = vec![vec![Complex64::ZERO; len]; self.n_r];
        for r in 0..self.n_r {
            let stream_out = &mut out[r];
            for t in 0..self.n_t {
                let taps = self.taps(r, t);
                let stream_in = &tx[t];
                for (l, tap) in taps.iter().enumerate() {
                    if tap.norm_sqr() == 0.0 {
                        continue;
                    }
                    for n in l..len {
                        stream_out[n] += tap * stream_in[n - l];
                    }
                }
            }
            if noise_std_per_component > 0.0 {
                for sample in stream_out.iter_mut() {
                    *sample += standard_complex(rng) * noise_std_per_component;
                }
            }
        }
        out
    }
}
