use std::collections::HashSet;

use modesel::ldpc::{modem, CalibrationSet, Decoder, LdpcCode, Modulation};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Parity check straight from the check lists, independent of `is_codeword`.
fn syndrome_is_zero(code: &LdpcCode, bits: &[u8]) -> bool {
    code.checks().iter().all(|c| c.iter().map(|&v| bits[v as usize] as u32).sum::<u32>() % 2 == 0)
}

fn bits_of(x: u32, k: usize) -> Vec<u8> {
    (0..k).map(|i| ((x >> i) & 1) as u8).collect()
}

fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

#[test]
fn small_code_exhaustive() {
    let code = LdpcCode::new(16, 0.5, 7).unwrap();
    let k = code.k();
    assert_eq!(k, 8);
    let words: Vec<Vec<u8>> = (0..1u32 << k).map(|x| code.encode(&bits_of(x, k)).unwrap()).collect();
    let distinct: HashSet<&Vec<u8>> = words.iter().collect();
    assert_eq!(distinct.len(), 1 << k);
    for (x, w) in words.iter().enumerate() {
        assert!(syndrome_is_zero(&code, w));
        assert_eq!(&w[..k], &bits_of(x as u32, k)[..]);
    }
    // Linearity: the XOR of two codewords is the codeword of the XOR.
    for a in (0..1usize << k).step_by(7) {
        for b in (0..1usize << k).step_by(11) {
            assert_eq!(xor(&words[a], &words[b]), words[a ^ b]);
        }
    }
    // Every vector that passes all checks is one of the 2^k codewords.
    let valid = (0..1u32 << 16).filter(|&x| syndrome_is_zero(&code, &bits_of(x, 16))).count();
    assert_eq!(valid, 1 << k);
}

#[test]
fn generator_matrix_oracle() {
    let code = LdpcCode::new(512, 0.5, 0).unwrap();
    let k = code.k();
    let rows: Vec<Vec<u8>> = (0..k)
        .map(|i| {
            let mut e = vec![0u8; k];
            e[i] = 1;
            code.encode(&e).unwrap()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let msg: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
        let mut expected = vec![0u8; code.n()];
        for (i, &b) in msg.iter().enumerate() {
            if b == 1 {
                expected = xor(&expected, &rows[i]);
            }
        }
        assert_eq!(code.encode(&msg).unwrap(), expected);
    }
}

#[test]
fn high_snr_roundtrip_1000_messages() {
    let code = LdpcCode::new(512, 0.5, 0).unwrap();
    let decoder = Decoder::new(&code);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2u8)).collect();
        let cw = code.encode(&msg).unwrap();
        let llrs = modem::transmit_awgn_with(&cw, Modulation::Qpsk, 10.0, &mut rng);
        let out = decoder.decode(&llrs, 50).unwrap();
        assert!(out.converged);
        assert_eq!(out.message, msg);
    }
}

#[test]
fn fixture_curves_are_well_formed() {
    let set = CalibrationSet::from_text(include_str!("data/calibration.txt")).unwrap();
    assert_eq!((set.n, set.k), (512, 256));
    for m in Modulation::ALL {
        let c = set.curve(m).unwrap();
        assert!(c.points.windows(2).all(|w| w[1].bler <= w[0].bler), "{m}");
        for p in c.points.iter().filter(|p| p.bler < 0.9) {
            assert!(p.ber <= p.hard_ber, "{m} at {} dB", p.snr_db);
        }
        // Higher orders need more SNR for the same BLER.
        assert!(c.bler_at(40.0) < 0.01, "{m}");
    }
    let at = |m: Modulation, snr: f64| set.curve(m).unwrap().bler_at(snr);
    assert!(at(Modulation::Qpsk, 10.0) < 1e-2);
    assert!(at(Modulation::Qpsk, 5.0) <= at(Modulation::Qam16, 5.0));
    assert!(at(Modulation::Qam16, 10.0) <= at(Modulation::Qam64, 10.0));
    assert!(at(Modulation::Qam64, 15.0) <= at(Modulation::Qam256, 15.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn encoded_words_pass_every_check(seed in 0u64..1000, msg_seed in any::<u64>()) {
        let code = LdpcCode::new(64, 0.5, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(msg_seed);
        let a: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2u8)).collect();
        let b: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2u8)).collect();
        let ca = code.encode(&a).unwrap();
        let cb = code.encode(&b).unwrap();
        prop_assert!(syndrome_is_zero(&code, &ca));
        prop_assert!(code.is_codeword(&ca));
        prop_assert_eq!(xor(&ca, &cb), code.encode(&xor(&a, &b)).unwrap());
    }
}
