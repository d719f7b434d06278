//! Systematic encoding by peeling and sum-product decoding.
//!
//! The encoder resolves parity bits one check at a time. When every
//! remaining check holds two or more unknown parity bits, one unknown is
//! declared a gap variable; the checks left over at the end form a small
//! square system in the gap variables, inverted once when the plan is built.
//! For E2RC-shaped parity parts the gap is at most one circulant.

use crate::error::{Error, Result};
use crate::lift::{LiftedCode, SparseMatrix};

/// LLR magnitude cap of the decoder.
pub const LLR_CLIP: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    /// Parity `col` is the sum of the other bits of `row`.
    Solve { row: usize, col: usize },
    /// Parity `col` is the `idx`-th gap variable.
    Gap { col: usize, idx: usize },
}

/// Precomputed elimination order for one parity-check matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderPlan {
    n: usize,
    systematic: Vec<usize>,
    steps: Vec<Step>,
    residual: Vec<usize>,
    /// Inverse of the gap system, one bit-row per gap variable.
    inverse: Vec<Vec<u64>>,
}

fn words(bits: usize) -> usize {
    bits.div_ceil(64)
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

fn bit(v: &[u64], i: usize) -> bool {
    v[i / 64] >> (i % 64) & 1 == 1
}

impl EncoderPlan {
    /// Plans encoding with the given information columns; every other
    /// column is parity. Fails when the parity part is not square or is
    /// singular.
    pub fn build(h: &SparseMatrix, systematic: &[usize]) -> Result<Self> {
        let (m, n) = (h.num_rows(), h.num_cols());
        let mut known = vec![false; n];
        for &c in systematic {
            known[c] = true;
        }
        if n - systematic.len() != m {
            return Err(Error::Unsupported(format!("{} parity columns for {m} checks", n - systematic.len())));
        }
        let mut count: Vec<usize> = (0..m).map(|r| h.row(r).iter().filter(|&&c| !known[c]).count()).collect();
        let mut used = vec![false; m];
        let mut queue: Vec<usize> = (0..m).filter(|&r| count[r] == 1).collect();
        let mut steps = Vec::with_capacity(m);
        let mut remaining = m;
        let mut gaps = 0;
        let resolve = |col: usize, known: &mut Vec<bool>, count: &mut Vec<usize>, queue: &mut Vec<usize>| {
            known[col] = true;
            for &r in h.col(col) {
                count[r] -= 1;
                if count[r] == 1 {
                    queue.push(r);
                }
            }
        };
        while remaining > 0 {
            if let Some(r) = queue.pop() {
                if used[r] || count[r] != 1 {
                    continue;
                }
                let col = *h.row(r).iter().find(|&&c| !known[c]).expect("one unknown left");
                used[r] = true;
                steps.push(Step::Solve { row: r, col });
                resolve(col, &mut known, &mut count, &mut queue);
            } else {
                // Stuck: guess an unknown of the check closest to resolving.
                let r = (0..m).filter(|&r| !used[r] && count[r] > 1).min_by_key(|&r| count[r]);
                let Some(r) = r else {
                    return Err(Error::Construction("parity part is singular".into()));
                };
                let col = *h.row(r).iter().find(|&&c| !known[c]).expect("unknowns left");
                steps.push(Step::Gap { col, idx: gaps });
                gaps += 1;
                resolve(col, &mut known, &mut count, &mut queue);
            }
            remaining -= 1;
        }
        let residual: Vec<usize> = (0..m).filter(|&r| !used[r]).collect();
        // Gap coefficients of every parity bit.
        let w = words(gaps);
        let mut coef = vec![vec![0u64; w]; n];
        for s in &steps {
            match *s {
                Step::Gap { col, idx } => coef[col][idx / 64] |= 1 << (idx % 64),
                Step::Solve { row, col } => {
                    let mut acc = vec![0u64; w];
                    for &c in h.row(row) {
                        if c != col {
                            xor_into(&mut acc, &coef[c]);
                        }
                    }
                    coef[col] = acc;
                }
            }
        }
        let system: Vec<Vec<u64>> = residual
            .iter()
            .map(|&r| {
                let mut acc = vec![0u64; w];
                for &c in h.row(r) {
                    xor_into(&mut acc, &coef[c]);
                }
                acc
            })
            .collect();
        let inverse = invert_gf2(system, gaps).ok_or_else(|| Error::Construction("parity part is singular".into()))?;
        Ok(EncoderPlan { n, systematic: systematic.to_vec(), steps, residual, inverse })
    }

    /// Number of gap variables.
    pub fn gap(&self) -> usize {
        self.inverse.len()
    }

    pub fn k(&self) -> usize {
        self.systematic.len()
    }

    /// Codeword with `message` in the information columns.
    pub fn encode(&self, h: &SparseMatrix, message: &[u8]) -> Result<Vec<u8>> {
        if message.len() != self.systematic.len() {
            return Err(Error::Invalid(format!("message has {} bits, expected {}", message.len(), self.systematic.len())));
        }
        let mut x = vec![0u8; self.n];
        for (&c, &b) in self.systematic.iter().zip(message) {
            x[c] = b & 1;
        }
        let gaps = self.gap();
        let mut g = vec![0u8; gaps];
        if gaps > 0 {
            self.run(h, &mut x, &g);
            let syn: Vec<u8> = self.residual.iter().map(|&r| h.row(r).iter().fold(0, |a, &c| a ^ x[c])).collect();
            for (gi, row) in g.iter_mut().zip(&self.inverse) {
                *gi = syn.iter().enumerate().filter(|&(j, &s)| s == 1 && bit(row, j)).count() as u8 & 1;
            }
        }
        self.run(h, &mut x, &g);
        Ok(x)
    }

    fn run(&self, h: &SparseMatrix, x: &mut [u8], g: &[u8]) {
        for s in &self.steps {
            match *s {
                Step::Gap { col, idx } => x[col] = g[idx],
                Step::Solve { row, col } => {
                    x[col] = 0;
                    x[col] = h.row(row).iter().fold(0, |a, &c| a ^ x[c]);
                }
            }
        }
    }
}

/// Gauss-Jordan inverse of a square GF(2) matrix given as bit-rows.
fn invert_gf2(mut a: Vec<Vec<u64>>, n: usize) -> Option<Vec<Vec<u64>>> {
    if a.len() != n {
        return None;
    }
    let w = words(n);
    let mut inv: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            let mut r = vec![0u64; w];
            r[i / 64] |= 1 << (i % 64);
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| bit(&a[r], col))?;
        a.swap(col, p);
        inv.swap(col, p);
        let (pa, pi) = (a[col].clone(), inv[col].clone());
        for r in 0..n {
            if r != col && bit(&a[r], col) {
                xor_into(&mut a[r], &pa);
                xor_into(&mut inv[r], &pi);
            }
        }
    }
    Some(inv)
}

/// Encodes with the code's plan.
pub fn encode(code: &LiftedCode, message: &[u8]) -> Result<Vec<u8>> {
    let plan = code.encoder_plan().ok_or_else(|| Error::Unsupported("code has no systematic encoder".into()))?;
    plan.encode(code.h(), message)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub bits: Vec<u8>,
    pub iterations: usize,
    /// Zero syndrome with every posterior decided.
    pub converged: bool,
}

/// Flooding sum-product decoder with reusable message buffers.
#[derive(Debug, Clone)]
pub struct BpDecoder {
    row_start: Vec<usize>,
    edge_col: Vec<usize>,
    /// Edge indices per column.
    col_edges: Vec<Vec<usize>>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    tanh_buf: Vec<f64>,
}

impl BpDecoder {
    pub fn new(h: &SparseMatrix) -> Self {
        let mut row_start = Vec::with_capacity(h.num_rows() + 1);
        let mut edge_col = Vec::with_capacity(h.nnz());
        let mut col_edges = vec![Vec::new(); h.num_cols()];
        row_start.push(0);
        for r in 0..h.num_rows() {
            for &c in h.row(r) {
                col_edges[c].push(edge_col.len());
                edge_col.push(c);
            }
            row_start.push(edge_col.len());
        }
        let e = edge_col.len();
        BpDecoder { row_start, edge_col, col_edges, v2c: vec![0.0; e], c2v: vec![0.0; e], tanh_buf: Vec::new() }
    }

    /// Decodes channel LLRs (positive favours bit 0). Punctured positions
    /// carry 0.
    pub fn decode(&mut self, llr: &[f64], max_iters: usize) -> DecodeResult {
        let n = self.col_edges.len();
        assert_eq!(llr.len(), n, "llr length must equal the block length");
        let ch: Vec<f64> = llr.iter().map(|l| l.clamp(-LLR_CLIP, LLR_CLIP)).collect();
        for (c, es) in self.col_edges.iter().enumerate() {
            for &e in es {
                self.v2c[e] = ch[c];
            }
        }
        let mut bits = vec![0u8; n];
        let mut total = ch.clone();
        let mut iterations = 0;
        let mut converged = false;
        while iterations < max_iters {
            self.check_update();
            for (c, es) in self.col_edges.iter().enumerate() {
                let t = ch[c] + es.iter().map(|&e| self.c2v[e]).sum::<f64>();
                total[c] = t;
                for &e in es {
                    self.v2c[e] = (t - self.c2v[e]).clamp(-LLR_CLIP, LLR_CLIP);
                }
            }
            iterations += 1;
            for (b, &t) in bits.iter_mut().zip(&total) {
                *b = (t < 0.0) as u8;
            }
            if total.iter().all(|&t| t != 0.0) && self.syndrome_is_zero(&bits) {
                converged = true;
                break;
            }
        }
        DecodeResult { bits, iterations, converged }
    }

    fn check_update(&mut self) {
        for r in 0..self.row_start.len() - 1 {
            let (a, b) = (self.row_start[r], self.row_start[r + 1]);
            let d = b - a;
            self.tanh_buf.clear();
            self.tanh_buf.extend(self.v2c[a..b].iter().map(|&m| (0.5 * m).tanh()));
            // Products of all other inputs by forward and backward sweeps.
            let mut fwd = 1.0;
            for i in 0..d {
                self.c2v[a + i] = fwd;
                fwd *= self.tanh_buf[i];
            }
            let mut bwd = 1.0;
            for i in (0..d).rev() {
                let p = self.c2v[a + i] * bwd;
                bwd *= self.tanh_buf[i];
                self.c2v[a + i] = (2.0 * p.atanh()).clamp(-LLR_CLIP, LLR_CLIP);
            }
        }
    }

    fn syndrome_is_zero(&self, bits: &[u8]) -> bool {
        (0..self.row_start.len() - 1)
            .all(|r| self.edge_col[self.row_start[r]..self.row_start[r + 1]].iter().fold(0, |a, &c| a ^ bits[c]) == 0)
    }
}

/// One-shot decode.
pub fn bp_decode(h: &SparseMatrix, llr: &[f64], max_iters: usize) -> DecodeResult {
    BpDecoder::new(h).decode(llr, max_iters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::{lift, lift_with, systematic_columns, LiftOptions};
    use crate::protograph::protograph_one;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense Gaussian elimination encoder: solves `H_p x_p = H_s x_s`.
    fn dense_encode(h: &SparseMatrix, systematic: &[usize], msg: &[u8]) -> Vec<u8> {
        let n = h.num_cols();
        let parity: Vec<usize> = (0..n).filter(|c| !systematic.contains(c)).collect();
        let m = h.num_rows();
        let mut a: Vec<Vec<u8>> = (0..m)
            .map(|r| {
                let mut row = vec![0u8; parity.len() + 1];
                for &c in h.row(r) {
                    if let Some(j) = parity.iter().position(|&p| p == c) {
                        row[j] = 1;
                    } else {
                        let k = systematic.iter().position(|&s| s == c).unwrap();
                        row[parity.len()] ^= msg[k];
                    }
                }
                row
            })
            .collect();
        let p = parity.len();
        for col in 0..p {
            let piv = (col..m).find(|&r| a[r][col] == 1).expect("nonsingular");
            a.swap(col, piv);
            let pr = a[col].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != col && row[col] == 1 {
                    for (x, y) in row.iter_mut().zip(&pr) {
                        *x ^= y;
                    }
                }
            }
        }
        let mut x = vec![0u8; n];
        for (&c, &b) in systematic.iter().zip(msg) {
            x[c] = b;
        }
        for (j, &c) in parity.iter().enumerate() {
            x[c] = a[j][p];
        }
        x
    }

    #[test]
    fn encoder_matches_gaussian_elimination() {
        let g = protograph_one();
        let code = lift_with(&g, 4, 1, &LiftOptions { allow_four_cycles: true, ..Default::default() }).unwrap();
        let sys = systematic_columns(&g, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
            let x = encode(&code, &msg).unwrap();
            assert_eq!(x, dense_encode(code.h(), &sys, &msg));
        }
    }

    #[test]
    fn zero_and_random_messages() {
        let code = lift(&protograph_one(), 64, 2).unwrap();
        assert!(code.encoder_plan().unwrap().gap() <= 64);
        assert!(encode(&code, &vec![0; code.k()]).unwrap().iter().all(|&b| b == 0));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
            let x = encode(&code, &msg).unwrap();
            assert!(code.h().is_codeword(&x));
        }
    }

    #[test]
    fn noiseless_decodes_in_one_iteration() {
        let code = lift(&protograph_one(), 64, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
        let x = encode(&code, &msg).unwrap();
        let llr: Vec<f64> = x.iter().map(|&b| if b == 0 { 20.0 } else { -20.0 }).collect();
        let r = bp_decode(code.h(), &llr, 100);
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.bits, x);
        let erased = bp_decode(code.h(), &vec![0.0; code.n()], 20);
        assert!(!erased.converged);
    }

    #[test]
    fn bp_agrees_with_ml_on_a_toy_code() {
        // Extended Hamming [8,4,4] code.
        let rows = vec![vec![0, 1, 2, 3, 4, 5, 6, 7], vec![1, 3, 5, 7], vec![2, 3, 6, 7], vec![4, 5, 6, 7]];
        let h = SparseMatrix::from_rows(8, rows).unwrap();
        let words: Vec<Vec<u8>> =
            (0..256u32).map(|w| (0..8).map(|i| (w >> i & 1) as u8).collect()).filter(|x: &Vec<u8>| h.is_codeword(x)).collect();
        assert_eq!(words.len(), 16);
        let sigma = (1.0 / (2.0 * 0.5 * 10f64.powf(0.4))).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut dec = BpDecoder::new(&h);
        let trials = 10_000;
        let mut agree = 0;
        for t in 0..trials {
            let x = &words[t % 16];
            let llr: Vec<f64> = x
                .iter()
                .map(|&b| {
                    let n: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
                    2.0 * ((1.0 - 2.0 * b as f64) + sigma * n) / (sigma * sigma)
                })
                .collect();
            let ml = words
                .iter()
                .max_by(|a, b| {
                    let score = |w: &Vec<u8>| w.iter().zip(&llr).map(|(&c, l)| if c == 0 { *l } else { -l }).sum::<f64>();
                    score(a).total_cmp(&score(b))
                })
                .unwrap();
            agree += (dec.decode(&llr, 50).bits == *ml) as usize;
        }
        assert!(agree as f64 >= 0.95 * trials as f64, "{agree}");
    }
}
