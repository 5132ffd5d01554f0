//! Square-QAM Gray mapper and hard-decision demapper.
//!
//! Each symbol takes `log2(M)` bits; the first half selects the in-phase
//! level, the second half the quadrature level, each through a Gray code so
//! neighbouring constellation points differ in exactly one bit. Levels are
//! scaled for unit average symbol energy. Hard decisions slice each axis
//! independently, which for a square constellation is exactly the
//! minimum-Euclidean-distance rule.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Validates the modulation order: a perfect-square power of four, at most
/// 1024. Returns bits per symbol.
pub fn bits_per_symbol(m: u32) -> Result<u32> {
    let ok = m >= 4 && m <= 1024 && m.is_power_of_two() && m.trailing_zeros() % 2 == 0;
    if !ok {
        return Err(Error::Config(format!(
            "modulation order {m} is not a square power of 4 in [4, 1024]"
        )));
    }
    Ok(m.trailing_zeros())
}

fn level_scale(m: u32) -> f64 {
    // Per-axis levels are odd integers in [-(L-1), L-1]; unit average symbol
    // energy needs a = sqrt(3 / (2 (M - 1))).
    (3.0 / (2.0 * (m as f64 - 1.0))).sqrt()
}

fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

fn gray_to_index(mut g: u32) -> u32 {
    let mut i = 0;
    while g != 0 {
        i ^= g;
        g >>= 1;
    }
    i
}

fn bits_to_value(bits: &[bool]) -> u32 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u32)
}

fn axis_level(bits: &[bool], side: u32, a: f64) -> f64 {
    let index = gray_to_index(bits_to_value(bits));
    (2.0 * index as f64 - (side as f64 - 1.0)) * a
}

/// Gray-coded square-QAM constellation point for a bit group (in-phase bits
/// first).
pub fn qam_map(bits: &[bool], m: u32) -> Result<Vec<Complex64>> {
    let k = bits_per_symbol(m)? as usize;
    if bits.is_empty() || bits.len() % k != 0 {
        return Err(Error::BadLength(format!(
            "bit count {} is not a positive multiple of {k}",
            bits.len()
        )));
    }
    let side = 1u32 << (k / 2);
    let a = level_scale(m);
    Ok(bits
        .chunks_exact(k)
        .map(|chunk| {
            let (i_bits, q_bits) = chunk.split_at(k / 2);
            Complex64::new(axis_level(i_bits, side, a), axis_level(q_bits, side, a))
        })
        .collect())
}

fn slice_axis(x: f64, side: u32, a: f64) -> u32 {
    let idx = ((x / a + (side as f64 - 1.0)) / 2.0).round();
    idx.clamp(0.0, side as f64 - 1.0) as u32
}

fn push_bits(value: u32, width: u32, out: &mut Vec<bool>) {
    for b in (0..width).rev() {
        out.push((value >> b) & 1 == 1);
    }
}

/// Hard-decision demapping by per-axis slicing.
pub fn qam_demap(symbols: &[Complex64], m: u32) -> Result<Vec<bool>> {
    let k = bits_per_symbol(m)?;
    let half = k / 2;
    let side = 1u32 << half;
    let a = level_scale(m);
    let mut bits = Vec::with_capacity(symbols.len() * k as usize);
    for z in symbols {
        push_bits(gray(slice_axis(z.re, side, a)), half, &mut bits);
        push_bits(gray(slice_axis(z.im, side, a)), half, &mut bits);
    }
    Ok(bits)
}

/// All `M` constellation points indexed by their bit label.
pub fn constellation(m: u32) -> Result<Vec<Complex64>> {
    let k = bits_per_symbol(m)? as usize;
    (0..m)
        .map(|label| {
            let bits: Vec<bool> = (0..k).rev().map(|b| (label >> b) & 1 == 1).collect();
            Ok(qam_map(&bits, m)?[0])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constellation_has_unit_average_energy() {
        for m in [4u32, 16, 64, 256, 1024] {
            let points = constellation(m).unwrap();
            let energy: f64 = points.iter().map(|z| z.norm_sqr()).sum::<f64>() / m as f64;
            assert!((energy - 1.0).abs() <= 1e-12, "m = {m}: {energy}");
        }
    }

    #[test]
    fn neighbours_differ_in_one_bit() {
        for m in [16u32, 64] {
            let points = constellation(m).unwrap();
            let a = level_scale(m);
            for (la, pa) in points.iter().enumerate() {
                for (lb, pb) in points.iter().enumerate().skip(la + 1) {
                    let d = (pa - pb).norm();
                    if (d - 2.0 * a).abs() < 1e-9 {
                        let flips = (la ^ lb).count_ones();
                        assert_eq!(flips, 1, "m={m}: {la:b} vs {lb:b} at distance {d}");
                    }
                }
            }
        }
    }

    #[test]
    fn noiseless_roundtrip_all_16qam_patterns() {
        for value in 0u32..16 {
            let bits: Vec<bool> = (0..4).rev().map(|b| (value >> b) & 1 == 1).collect();
            let symbols = qam_map(&bits, 16).unwrap();
            assert_eq!(qam_demap(&symbols, 16).unwrap(), bits);
        }
    }

    #[test]
    fn decisions_tolerate_sub_half_distance_perturbations() {
        let m = 16;
        let a = level_scale(m);
        let points = constellation(m).unwrap();
        let nudge = 0.49 * a; // half the minimum distance is `a`
        for (label, p) in points.iter().enumerate() {
            let perturbed = p + Complex64::new(nudge, -nudge);
            let bits = qam_demap(&[perturbed], m).unwrap();
            let mut want = Vec::new();
            push_bits(label as u32, 4, &mut want);
            assert_eq!(bits, want, "label {label:04b}");
        }
    }

    #[test]
    fn rejects_bad_orders_and_lengths() {
        assert!(bits_per_symbol(8).is_err()); // power of two, not of four
        assert!(bits_per_symbol(2).is_err());
        assert!(bits_per_symbol(4096).is_err());
        assert!(qam_map(&[true; 3], 16).is_err());
        assert!(qam_map(&[], 16).is_err());
    }
}
