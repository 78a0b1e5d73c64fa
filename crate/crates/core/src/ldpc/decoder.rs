//! Flooding sum-product (belief propagation) decoder.

use super::code::LdpcCode;
use super::LdpcError;

pub const DEFAULT_MAX_ITERS: usize = 50;

/// Messages are clipped to keep `atanh` finite.
const LLR_CLIP: f64 = 40.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Estimated message bits (the first `k` codeword positions).
    pub message: Vec<u8>,
    /// Full hard-decision codeword estimate.
    pub codeword: Vec<u8>,
    /// All checks satisfied with every bit decided.
    pub converged: bool,
    pub iterations: usize,
}

/// Edge layout for a code; build once and reuse across blocks.
#[derive(Debug, Clone)]
pub struct Decoder {
    n: usize,
    k: usize,
    /// Edge ranges per check (CSR offsets).
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    /// Edge ids per variable (CSR).
    var_ptr: Vec<usize>,
    var_edges: Vec<usize>,
}

impl Decoder {
    pub fn new(code: &LdpcCode) -> Self {
        let mut check_ptr = vec![0];
        let mut edge_var = Vec::new();
        for c in code.checks() {
            edge_var.extend(c.iter().map(|&v| v as usize));
            check_ptr.push(edge_var.len());
        }
        let n = code.n();
        let mut per_var: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (e, &v) in edge_var.iter().enumerate() {
            per_var[v].push(e);
        }
        let mut var_ptr = vec![0];
        let mut var_edges = Vec::with_capacity(edge_var.len());
        for edges in per_var {
            var_edges.extend(edges);
            var_ptr.push(var_edges.len());
        }
        Decoder {
            n,
            k: code.k(),
            check_ptr,
            edge_var,
            var_ptr,
            var_edges,
        }
    }

    pub fn decode(&self, llrs: &[f64], max_iters: usize) -> Result<DecodeResult, LdpcError> {
        if llrs.len() != self.n {
            return Err(LdpcError::Length {
                expected: self.n,
                got: llrs.len(),
            });
        }
        let edges = self.edge_var.len();
        let mut v2c: Vec<f64> = self.edge_var.iter().map(|&v| llrs[v]).collect();
        let mut c2v = vec![0.0; edges];
        let mut tanh_half = vec![0.0; edges];
        let mut total = llrs.to_vec();
        let mut hard = vec![0u8; self.n];
        let mut iterations = 0;
        let mut converged = false;

        while iterations < max_iters.max(1) {
            iterations += 1;
            for e in 0..edges {
                tanh_half[e] = (0.5 * v2c[e].clamp(-LLR_CLIP, LLR_CLIP)).tanh();
            }
            for c in 0..self.check_ptr.len() - 1 {
                let (lo, hi) = (self.check_ptr[c], self.check_ptr[c + 1]);
                // Leave-one-out products via prefix and suffix passes.
                let mut prefix = 1.0;
                for e in lo..hi {
                    c2v[e] = prefix;
                    prefix *= tanh_half[e];
                }
                let mut suffix = 1.0;
                for e in (lo..hi).rev() {
                    let p = (c2v[e] * suffix).clamp(-0.999_999_999_999, 0.999_999_999_999);
                    c2v[e] = 2.0 * p.atanh();
                    suffix *= tanh_half[e];
                }
            }
            let mut undecided = false;
            for v in 0..self.n {
                let es = &self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]];
                let t = llrs[v] + es.iter().map(|&e| c2v[e]).sum::<f64>();
                total[v] = t;
                for &e in es {
                    v2c[e] = t - c2v[e];
                }
                hard[v] = u8::from(t < 0.0);
                undecided |= t == 0.0;
            }
            if !undecided && self.syndrome_ok(&hard) {
                converged = true;
                break;
            }
        }
        Ok(DecodeResult {
            message: hard[..self.k].to_vec(),
            codeword: hard,
            converged,
            iterations,
        })
    }

    fn syndrome_ok(&self, bits: &[u8]) -> bool {
        (0..self.check_ptr.len() - 1).all(|c| {
            self.edge_var[self.check_ptr[c]..self.check_ptr[c + 1]]
                .iter()
                .fold(0u8, |acc, &v| acc ^ bits[v])
                == 0
        })
    }
}

/// One-shot convenience wrapper around [`Decoder`].
pub fn decode(code: &LdpcCode, llrs: &[f64], max_iters: usize) -> Result<DecodeResult, LdpcError> {
    Decoder::new(code).decode(llrs, max_iters)
}
