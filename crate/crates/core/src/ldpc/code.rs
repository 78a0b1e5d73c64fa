//! Random regular LDPC codes and their systematic encoder.
//!
//! Every variable node has degree [`COLUMN_WEIGHT`]; check degrees differ by
//! at most one. The parity-check matrix is redrawn until it has full row
//! rank, and its columns are reordered so that a codeword is the message
//! followed by the parity bits.

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LdpcError;

pub const COLUMN_WEIGHT: usize = 3;
const MAX_ATTEMPTS: u64 = 200;

/// Packed GF(2) row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitRow(Vec<u64>);

impl BitRow {
    pub(crate) fn zeros(len: usize) -> Self {
        BitRow(vec![0; len.div_ceil(64)])
    }

    pub(crate) fn get(&self, i: usize) -> bool {
        (self.0[i / 64] >> (i % 64)) & 1 == 1
    }

    pub(crate) fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    /// Parity of the AND of two rows.
    pub(crate) fn dot(&self, other: &BitRow) -> u8 {
        let ones: u32 = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        (ones & 1) as u8
    }

    pub(crate) fn from_bits(bits: &[u8]) -> Self {
        let mut row = BitRow::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                row.set(i);
            }
        }
        row
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdpcCode {
    n: usize,
    k: usize,
    seed: u64,
    /// Variable indices of each check.
    checks: Vec<Vec<u32>>,
    /// Per parity bit, the message bits it sums.
    parity_rows: Vec<BitRow>,
}

impl LdpcCode {
    /// Draws a code of length `n` and rate close to `rate`.
    pub fn new(n: usize, rate: f64, seed: u64) -> Result<Self, LdpcError> {
        if n == 0 || n % 2 != 0 {
            return Err(LdpcError::InvalidParameters(format!(
                "codeword length {n} must be even and positive"
            )));
        }
        if !(rate > 0.0 && rate < 1.0) {
            return Err(LdpcError::InvalidParameters(format!(
                "rate {rate} must lie strictly between 0 and 1"
            )));
        }
        let m = ((n as f64) * (1.0 - rate)).round() as usize;
        if m < COLUMN_WEIGHT || m >= n {
            return Err(LdpcError::InvalidParameters(format!(
                "n = {n}, rate = {rate} leaves {m} checks; need between {COLUMN_WEIGHT} and {}",
                n - 1
            )));
        }
        // Each check must be able to hold at least two edges.
        if COLUMN_WEIGHT * n < 2 * m {
            return Err(LdpcError::InvalidParameters(format!(
                "too many checks ({m}) for {n} variables of degree {COLUMN_WEIGHT}"
            )));
        }
        for attempt in 0..MAX_ATTEMPTS {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let Some(columns) = draw_columns(n, m, &mut rng) else {
                continue;
            };
            if let Some(code) = Self::systematic(n, m, seed, &columns) {
                return Ok(code);
            }
        }
        Err(LdpcError::InvalidParameters(format!(
            "no full-rank construction for n = {n}, rate = {rate} after {MAX_ATTEMPTS} draws"
        )))
    }

    /// Gaussian elimination over GF(2); `None` when rank deficient.
    fn systematic(n: usize, m: usize, seed: u64, columns: &[Vec<u32>]) -> Option<Self> {
        let mut rows: Vec<BitRow> = (0..m).map(|_| BitRow::zeros(n)).collect();
        for (v, checks) in columns.iter().enumerate() {
            for &c in checks {
                rows[c as usize].set(v);
            }
        }
        let mut pivots = Vec::with_capacity(m);
        let mut r = 0;
        for col in 0..n {
            if r == m {
                break;
            }
            let Some(p) = (r..m).find(|&i| rows[i].get(col)) else {
                continue;
            };
            rows.swap(r, p);
            let pivot = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.get(col) {
                    row.xor_assign(&pivot);
                }
            }
            pivots.push(col);
            r += 1;
        }
        if r < m {
            return None;
        }
        let is_pivot = {
            let mut v = vec![false; n];
            for &p in &pivots {
                v[p] = true;
            }
            v
        };
        // New layout: free columns (message) first, then pivots (parity).
        let order: Vec<usize> = (0..n)
            .filter(|&c| !is_pivot[c])
            .chain(pivots.iter().copied())
            .collect();
        let k = n - m;
        let mut position = vec![0usize; n];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }
        let mut checks = vec![Vec::new(); m];
        for (v, cs) in columns.iter().enumerate() {
            for &c in cs {
                checks[c as usize].push(position[v] as u32);
            }
        }
        for c in &mut checks {
            c.sort_unstable();
        }
        // In reduced form, pivot bit i equals the sum of its row over the
        // free columns.
        let parity_rows = rows
            .iter()
            .map(|row| {
                let mut out = BitRow::zeros(k);
                for (j, &old) in order[..k].iter().enumerate() {
                    if row.get(old) {
                        out.set(j);
                    }
                }
                out
            })
            .collect();
        Some(LdpcCode {
            n,
            k,
            seed,
            checks,
            parity_rows,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.n - self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn checks(&self) -> &[Vec<u32>] {
        &self.checks
    }

    /// Systematic encoding: `message || parity`.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>, LdpcError> {
        if message.len() != self.k {
            return Err(LdpcError::Length {
                expected: self.k,
                got: message.len(),
            });
        }
        let packed = BitRow::from_bits(message);
        let mut codeword = Vec::with_capacity(self.n);
        codeword.extend(message.iter().map(|b| b & 1));
        codeword.extend(self.parity_rows.iter().map(|row| row.dot(&packed)));
        Ok(codeword)
    }

    /// True when every parity check is satisfied.
    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        bits.len() == self.n
            && self
                .checks
                .iter()
                .all(|c| c.iter().fold(0u8, |acc, &v| acc ^ (bits[v as usize] & 1)) == 0)
    }
}

/// Assigns each variable [`COLUMN_WEIGHT`] distinct checks, drawing checks in
/// proportion to their remaining capacity so that check degrees come out
/// balanced.
fn draw_columns(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<u32>>> {
    let edges = COLUMN_WEIGHT * n;
    let mut capacity: Vec<usize> = (0..m).map(|i| edges / m + usize::from(i < edges % m)).collect();
    capacity.shuffle(rng);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut assigned = vec![Vec::new(); n];
    let mut remaining = edges;
    for &v in &order {
        let mut chosen: Vec<u32> = Vec::with_capacity(COLUMN_WEIGHT);
        for _ in 0..COLUMN_WEIGHT {
            let available: usize = capacity
                .iter()
                .enumerate()
                .filter(|(c, _)| !chosen.contains(&(*c as u32)))
                .map(|(_, &cap)| cap)
                .sum();
            if available == 0 {
                return None;
            }
            let mut ticket = rng.random_range(0..available);
            let mut pick = None;
            for (c, &cap) in capacity.iter().enumerate() {
                if cap == 0 || chosen.contains(&(c as u32)) {
                    continue;
                }
                if ticket < cap {
                    pick = Some(c);
                    break;
                }
                ticket -= cap;
            }
            let c = pick?;
            capacity[c] -= 1;
            remaining -= 1;
            chosen.push(c as u32);
        }
        assigned[v] = chosen;
    }
    debug_assert_eq!(remaining, 0);
    Some(assigned)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_code_shape() {
        let code = LdpcCode::new(512, 0.5, 7).unwrap();
        assert_eq!(code.n(), 512);
        assert!((230..=256).contains(&code.k()), "k = {}", code.k());
        assert!((0.45..=0.55).contains(&code.rate()));
        let mut col_deg = vec![0; 512];
        for c in code.checks() {
            assert!((5..=7).contains(&c.len()));
            for &v in c {
                col_deg[v as usize] += 1;
            }
        }
        assert!(col_deg.iter().all(|&d| d == COLUMN_WEIGHT));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = LdpcCode::new(512, 0.5, 7).unwrap();
        let b = LdpcCode::new(512, 0.5, 7).unwrap();
        assert_eq!(a, b);
        let c = LdpcCode::new(512, 0.5, 8).unwrap();
        assert_ne!(a.checks(), c.checks());
    }

    #[test]
    fn invalid_parameters() {
        assert!(LdpcCode::new(15, 0.5, 1).is_err());
        assert!(LdpcCode::new(0, 0.5, 1).is_err());
        assert!(LdpcCode::new(16, 0.0, 1).is_err());
        assert!(LdpcCode::new(16, 1.0, 1).is_err());
        assert!(LdpcCode::new(16, 0.95, 1).is_err());
    }

    #[test]
    fn zero_message_zero_codeword() {
        let code = LdpcCode::new(512, 0.5, 7).unwrap();
        let cw = code.encode(&vec![0; code.k()]).unwrap();
        assert!(cw.iter().all(|&b| b == 0));
    }

    #[test]
    fn wrong_length_rejected() {
        let code = LdpcCode::new(16, 0.5, 1).unwrap();
        assert_eq!(
            code.encode(&[0; 3]),
            Err(LdpcError::Length {
                expected: code.k(),
                got: 3
            })
        );
    }
}
