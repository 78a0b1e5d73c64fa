//! Gray-mapped square QAM over complex AWGN with max-log LLR demapping.
//!
//! The first half of a symbol's bits select the in-phase PAM level and the
//! second half the quadrature level. Constellations have unit average
//! energy, so the channel SNR is Es/N0. LLRs are `ln P(b=0)/P(b=1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Modulation;

/// Amplitude levels of the per-dimension PAM, indexed by Gray label.
fn pam_levels(m: Modulation) -> Vec<f64> {
    let half = m.bits_per_symbol() / 2;
    let levels = 1usize << half;
    // Average QAM energy is 2 (M^2 - 1) / 3 for M levels per dimension.
    let scale = (2.0 * ((levels * levels) as f64 - 1.0) / 3.0).sqrt().recip();
    let mut by_label = vec![0.0; levels];
    for idx in 0..levels {
        let gray = idx ^ (idx >> 1);
        by_label[gray] = (2.0 * idx as f64 - (levels as f64 - 1.0)) * scale;
    }
    by_label
}

fn label(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1) as usize)
}

/// Maps bits to complex symbols, zero-padding the tail.
pub fn modulate(bits: &[u8], m: Modulation) -> Vec<(f64, f64)> {
    let bps = m.bits_per_symbol();
    let half = bps / 2;
    let levels = pam_levels(m);
    bits.chunks(bps)
        .map(|chunk| {
            let mut sym = [0u8; 8];
            sym[..chunk.len()].copy_from_slice(chunk);
            (levels[label(&sym[..half])], levels[label(&sym[half..bps])])
        })
        .collect()
}

/// Max-log LLRs for one received PAM coordinate.
fn demap_dimension(y: f64, levels: &[f64], bits: usize, n0: f64, out: &mut Vec<f64>) {
    for b in 0..bits {
        let shift = bits - 1 - b;
        let mut d0 = f64::INFINITY;
        let mut d1 = f64::INFINITY;
        for (lab, &a) in levels.iter().enumerate() {
            let d = (y - a) * (y - a);
            if (lab >> shift) & 1 == 0 {
                d0 = d0.min(d);
            } else {
                d1 = d1.min(d);
            }
        }
        out.push((d1 - d0) / n0);
    }
}

pub fn demodulate(symbols: &[(f64, f64)], m: Modulation, snr_db: f64, n_bits: usize) -> Vec<f64> {
    let half = m.bits_per_symbol() / 2;
    let levels = pam_levels(m);
    let n0 = 10f64.powf(-snr_db / 10.0);
    let mut llrs = Vec::with_capacity(symbols.len() * m.bits_per_symbol());
    for &(i, q) in symbols {
        demap_dimension(i, &levels, half, n0, &mut llrs);
        demap_dimension(q, &levels, half, n0, &mut llrs);
    }
    llrs.truncate(n_bits);
    llrs
}

/// Modulates, adds complex Gaussian noise at Es/N0 = `snr_db` and returns
/// one LLR per input bit.
pub fn transmit_awgn_with<R: Rng + ?Sized>(
    bits: &[u8],
    m: Modulation,
    snr_db: f64,
    rng: &mut R,
) -> Vec<f64> {
    let sigma = (10f64.powf(-snr_db / 10.0) / 2.0).sqrt();
    let mut symbols = modulate(bits, m);
    for s in &mut symbols {
        let ni: f64 = StandardNormal.sample(rng);
        let nq: f64 = StandardNormal.sample(rng);
        s.0 += sigma * ni;
        s.1 += sigma * nq;
    }
    demodulate(&symbols, m, snr_db, bits.len())
}

pub fn transmit_awgn(bits: &[u8], m: Modulation, snr_db: f64, seed: u64) -> Vec<f64> {
    transmit_awgn_with(bits, m, snr_db, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Hard decisions on LLR signs.
pub fn hard_decision(llrs: &[f64]) -> Vec<u8> {
    llrs.iter().map(|&l| u8::from(l < 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngExt;

    fn random_bits(n: usize, seed: u64) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(0..2u8)).collect()
    }

    #[test]
    fn unit_average_energy() {
        for m in Modulation::ALL {
            let bps = m.bits_per_symbol();
            let all: Vec<u8> = (0..(1usize << bps))
                .flat_map(|s| (0..bps).rev().map(move |b| ((s >> b) & 1) as u8))
                .collect();
            let syms = modulate(&all, m);
            let e: f64 = syms.iter().map(|(i, q)| i * i + q * q).sum::<f64>() / syms.len() as f64;
            assert!((e - 1.0).abs() < 1e-12, "{m:?}: {e}");
        }
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        for m in Modulation::ALL {
            let levels = pam_levels(m);
            let mut by_amp: Vec<(f64, usize)> = levels.iter().copied().zip(0..).collect();
            by_amp.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in by_amp.windows(2) {
                assert_eq!((w[0].1 ^ w[1].1).count_ones(), 1);
            }
        }
    }

    #[test]
    fn noiseless_recovery() {
        for m in Modulation::ALL {
            let bits = random_bits(516, 3);
            let llrs = transmit_awgn(&bits, m, 60.0, 11);
            assert_eq!(llrs.len(), bits.len());
            assert_eq!(hard_decision(&llrs), bits, "{m:?}");
        }
    }

    #[test]
    fn pure_noise_is_coin_flip() {
        let bits = random_bits(10_000, 5);
        let llrs = transmit_awgn(&bits, Modulation::Qpsk, -60.0, 9);
        let errors = hard_decision(&llrs).iter().zip(&bits).filter(|(a, b)| a != b).count();
        let ber = errors as f64 / bits.len() as f64;
        assert!((ber - 0.5).abs() < 0.05, "{ber}");
    }

    #[test]
    fn qpsk_ber_matches_closed_form() {
        // Each QPSK bit sees amplitude sqrt(Es/2) against noise variance
        // N0/2, so BER = Q(sqrt(Es/N0)) = Q(1) at 0 dB.
        use statrs::distribution::{ContinuousCDF, Normal};
        let q1 = 1.0 - Normal::standard().cdf(1.0);
        let bits = random_bits(100_000, 21);
        let llrs = transmit_awgn(&bits, Modulation::Qpsk, 0.0, 22);
        let errors = hard_decision(&llrs).iter().zip(&bits).filter(|(a, b)| a != b).count();
        let ber = errors as f64 / bits.len() as f64;
        assert!((q1 - 0.158_655).abs() < 1e-5);
        assert!((ber - q1).abs() < 0.01, "{ber} vs {q1}");
    }

    #[test]
    fn deterministic_per_seed() {
        let bits = random_bits(512, 1);
        assert_eq!(
            transmit_awgn(&bits, Modulation::Qam64, 5.0, 4),
            transmit_awgn(&bits, Modulation::Qam64, 5.0, 4)
        );
    }
}
