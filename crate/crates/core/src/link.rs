//! End-to-end MIMO-OFDM link.
//!
//! One frame is one OFDM symbol across all transmit antennas: payload bits
//! are Gray-mapped, carried to the time domain by an exact IDFT, extended
//! with a cyclic prefix, pushed through the block-fading channel with AWGN,
//! and recovered through the configured receiver (exact or crossbar DFT plus
//! per-sub-carrier L-MMSE detection). The channel is re-drawn, re-estimated
//! from an identity pilot, and the detectors are re-programmed every
//! `channel_update_period` frames.
//!
//! Channel taps, propagation noise and pilot noise are drawn from fixed
//! streams of `cfg.seed`, so runs that differ only in processor mode or
//! write scheme face identical channels and the comparison is paired; the
//! caller-provided stream drives device stochasticity only.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{generate_channel, ChannelKind, ChannelRealization};
use crate::complex_map::ComplexMatrix;
use crate::crossbar::ProgramConfig;
use crate::detector::{build_detector, lmmse_closed_form, DetectorCircuit, DetectorMode};
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::ledger::EnergyLatencyLedger;
use crate::ofdm::{add_cyclic_prefix, dft_matrix, remove_cyclic_prefix, OfdmSymbolBlock};
use crate::pgm::{bits_to_bytes, bytes_to_bits, GrayImage};
use crate::qam::{bits_per_symbol, qam_demap, qam_map};
use crate::rng::{stream, stream_id, RandomStream};

/// Which baseband processor the receiver runs on.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessorMode {
    /// Double-precision floating point (the benchmark).
    Ideal,
    /// Crossbar DFT and detector circuits written with this scheme.
    Crossbar(ProgramConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_c: usize,
    pub n_t: usize,
    pub n_r: usize,
    pub modulation_order: u32,
    pub cp_len: usize,
    pub channel_taps: usize,
    pub channel_kind: ChannelKind,
    pub snr_db: f64,
    pub processor_mode: ProcessorMode,
    /// OFDM symbols between channel re-estimations.
    pub channel_update_period: usize,
    pub seed: u64,
    /// Reported MER is capped here (zero error power would be infinite).
    pub mer_cap_db: f64,
    /// How many (sent, detected) symbol pairs to keep for scatter plots.
    pub constellation_capture: usize,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        bits_per_symbol(self.modulation_order)?;
        if self.n_c < 2 {
            return Err(Error::Config(format!("n_c must be >= 2, got {}", self.n_c)));
        }
        if self.n_t == 0 || self.n_r < self.n_t {
            return Err(Error::Config(format!(
                "antenna counts need n_r >= n_t >= 1, got n_t {}, n_r {}",
                self.n_t, self.n_r
            )));
        }
        if self.channel_taps == 0 {
            return Err(Error::Config("channel_taps must be >= 1".into()));
        }
        if self.cp_len + 1 < self.channel_taps {
            return Err(Error::Config(format!(
                "cp_len {} cannot absorb {} channel taps",
                self.cp_len, self.channel_taps
            )));
        }
        if self.cp_len >= self.n_c {
            return Err(Error::Config(format!(
                "cp_len {} must be shorter than the symbol ({})",
                self.cp_len, self.n_c
            )));
        }
        if self.channel_update_period == 0 {
            return Err(Error::Config("channel_update_period must be >= 1".into()));
        }
        if !(self.mer_cap_db > 0.0) {
            return Err(Error::Config("mer_cap_db must be positive".into()));
        }
        Ok(())
    }

    pub fn bits_per_frame(&self) -> usize {
        self.n_c * self.n_t * bits_per_symbol(self.modulation_order).unwrap_or(0) as usize
    }

    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    /// AWGN std per real component for unit-energy symbols: the complex
    /// noise variance per receive antenna is 1/SNR.
    pub fn noise_std_per_component(&self) -> f64 {
        (0.5 / self.snr_linear()).sqrt()
    }
}

/// Quality metrics of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkMetrics {
    pub mer_db: f64,
    pub ber: f64,
    pub symbols_sent: u64,
    pub bits_sent: u64,
    /// (transmitted, detected) pairs, capped at `constellation_capture`.
    pub constellation: Vec<(Complex64, Complex64)>,
}

/// Modulation error ratio in dB: signal power over constellation error
/// power, capped at `cap_db` (and exactly `cap_db` for zero error power).
pub fn compute_mer(received: &[Complex64], ideal: &[Complex64], cap_db: f64) -> Result<f64> {
    if received.is_empty() {
        return Err(Error::EmptyInput("compute_mer"));
    }
    if received.len() != ideal.len() {
        return Err(Error::BadLength(format!(
            "mer needs equal lengths, got {} and {}",
            received.len(),
            ideal.len()
        )));
    }
    let signal: f64 = ideal.iter().map(|z| z.norm_sqr()).sum();
    let error: f64 = received
        .iter()
        .zip(ideal)
        .map(|(r, i)| (r - i).norm_sqr())
        .sum();
    Ok(mer_from_powers(signal, error, cap_db))
}

fn mer_from_powers(signal: f64, error: f64, cap_db: f64) -> f64 {
    if error == 0.0 {
        cap_db
    } else {
        (10.0 * (signal / error).log10()).min(cap_db)
    }
}

/// Bit error ratio: flipped bits over total bits.
pub fn compute_ber(rx_bits: &[bool], tx_bits: &[bool]) -> Result<f64> {
    if rx_bits.is_empty() {
        return Err(Error::EmptyInput("compute_ber"));
    }
    if rx_bits.len() != tx_bits.len() {
        return Err(Error::BadLength(format!(
            "ber needs equal lengths, got {} and {}",
            rx_bits.len(),
            tx_bits.len()
        )));
    }
    let flips = rx_bits.iter().zip(tx_bits).filter(|(a, b)| a != b).count();
    Ok(flips as f64 / tx_bits.len() as f64)
}

enum SubcarrierDetector {
    Ideal(ComplexMatrix),
    Circuit(DetectorCircuit),
}

fn standard_complex(rng: &mut RandomStream) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Runs the full transmit/receive chain over the payload and returns the
/// recovered bits, quality metrics and the analog event ledger (empty in
/// ideal mode). The payload must be a whole number of frames.
pub fn run_link(
    cfg: &SystemConfig,
    device: &DeviceParams,
    payload: &[bool],
    device_rng: &mut RandomStream,
) -> Result<(Vec<bool>, LinkMetrics, EnergyLatencyLedger)> {
    cfg.validate()?;
    device.validate()?;
    let frame_bits = cfg.bits_per_frame();
    if payload.is_empty() || payload.len() % frame_bits != 0 {
        return Err(Error::BadLength(format!(
            "payload of {} bits is not a positive multiple of the {frame_bits}-bit frame",
            payload.len()
        )));
    }
    let frames = payload.len() / frame_bits;
    let snr = cfg.snr_linear();
    let noise_std = cfg.noise_std_per_component();

    let mut chan_rng = stream(cfg.seed, stream_id::CHANNEL);
    let mut noise_rng = stream(cfg.seed, stream_id::PROPAGATION_NOISE);
    let mut pilot_rng = stream(cfg.seed, stream_id::PILOT_NOISE);

    let mut ledger = EnergyLatencyLedger::new();
    let tx_op = dft_matrix(cfg.n_c)?;
    let rx_op = match &cfg.processor_mode {
        ProcessorMode::Ideal => dft_matrix(cfg.n_c)?,
        ProcessorMode::Crossbar(prog) => {
            dft_matrix(cfg.n_c)?.into_crossbar(prog, device, &mut ledger, device_rng)?
        }
    };

    let mut channel: Option<ChannelRealization> = None;
    let mut detectors: Vec<SubcarrierDetector> = Vec::with_capacity(cfg.n_c);
    let mut rx_bits = Vec::with_capacity(payload.len());
    let mut signal_power = 0.0;
    let mut error_power = 0.0;
    let mut constellation = Vec::new();
    let mut rx_symbols = vec![Complex64::ZERO; cfg.n_c * cfg.n_t];

    for frame in 0..frames {
        if frame % cfg.channel_update_period == 0 {
            let chan = generate_channel(
                cfg.channel_kind,
                cfg.n_c,
                cfg.n_t,
                cfg.n_r,
                cfg.channel_taps,
                &mut chan_rng,
            );
            detectors.clear();
            for k in 0..cfg.n_c {
                // Identity pilot: the received training block is the channel
                // observed through one shot of receiver noise.
                let h = chan.subcarrier(k);
                let h_hat = ComplexMatrix::from_fn(cfg.n_r, cfg.n_t, |r, t| {
                    h.get(r, t) + standard_complex(&mut pilot_rng) * noise_std
                });
                detectors.push(match &cfg.processor_mode {
                    ProcessorMode::Ideal => SubcarrierDetector::Ideal(h_hat),
                    ProcessorMode::Crossbar(prog) => SubcarrierDetector::Circuit(build_detector(
                        &h_hat,
                        snr,
                        DetectorMode::Lmmse,
                        prog,
                        device,
                        &mut ledger,
                        device_rng,
                    )?),
                });
            }
            channel = Some(chan);
        }
        let chan = channel.as_ref().expect("channel drawn on frame 0");

        let frame_payload = &payload[frame * frame_bits..(frame + 1) * frame_bits];
        // Symbol s = k * n_t + t rides sub-carrier k on antenna t.
        let tx_symbols = qam_map(frame_payload, cfg.modulation_order)?;

        let mut tx_streams = Vec::with_capacity(cfg.n_t);
        for t in 0..cfg.n_t {
            let freq: Vec<Complex64> = (0..cfg.n_c).map(|k| tx_symbols[k * cfg.n_t + t]).collect();
            let time = tx_op
                .idft(&OfdmSymbolBlock::frequency(freq), device, &mut ledger, device_rng)?
                .into_samples();
            tx_streams.push(add_cyclic_prefix(&time, cfg.cp_len)?);
        }

        let rx_streams = chan.propagate(&tx_streams, noise_std, &mut noise_rng);

        let mut rx_freq = Vec::with_capacity(cfg.n_r);
        for stream_r in &rx_streams {
            let time = remove_cyclic_prefix(stream_r, cfg.cp_len)?;
            let freq = rx_op
                .dft(&OfdmSymbolBlock::time(time), device, &mut ledger, device_rng)?
                .into_samples();
            rx_freq.push(freq);
        }

        for k in 0..cfg.n_c {
            let y: Vec<Complex64> = (0..cfg.n_r).map(|r| rx_freq[r][k]).collect();
            let x_hat = match &detectors[k] {
                SubcarrierDetector::Ideal(h_hat) => {
                    lmmse_closed_form(h_hat, snr, DetectorMode::Lmmse, &y)?
                }
                SubcarrierDetector::Circuit(circuit) => {
                    circuit
                        .detect_algebraic(&y, device, &mut ledger, device_rng)?
                        .x_hat
                }
            };
            for t in 0..cfg.n_t {
                let sent = tx_symbols[k * cfg.n_t + t];
                let got = x_hat[t];
                signal_power += sent.norm_sqr();
                error_power += (got - sent).norm_sqr();
                if constellation.len() < cfg.constellation_capture {
                    constellation.push((sent, got));
                }
                rx_symbols[k * cfg.n_t + t] = got;
            }
        }
        rx_bits.extend(qam_demap(&rx_symbols, cfg.modulation_order)?);
    }

    let metrics = LinkMetrics {
        mer_db: mer_from_powers(signal_power, error_power, cfg.mer_cap_db),
        ber: compute_ber(&rx_bits, payload)?,
        symbols_sent: (frames * cfg.n_c * cfg.n_t) as u64,
        bits_sent: payload.len() as u64,
        constellation,
    };
    Ok((rx_bits, metrics, ledger))
}

/// Sends an image through the link (zero-padded to a whole number of
/// frames) and reconstructs it with the original dimensions.
pub fn transmit_image(
    cfg: &SystemConfig,
    device: &DeviceParams,
    image: &GrayImage,
    device_rng: &mut RandomStream,
) -> Result<(GrayImage, LinkMetrics)> {
    let mut bits = bytes_to_bits(&image.pixels);
    let payload_bits = bits.len();
    let frame_bits = cfg.bits_per_frame();
    if frame_bits == 0 {
        cfg.validate()?;
    }
    let rem = payload_bits % frame_bits;
    if rem != 0 {
        bits.resize(payload_bits + frame_bits - rem, false);
    }
    let (rx_bits, metrics, _) = run_link(cfg, device, &bits, device_rng)?;
    let bytes = bits_to_bytes(&rx_bits[..payload_bits]);
    Ok((GrayImage::new(image.width, image.height, bytes)?, metrics))
}
