//! Quasi-cyclic lifting of protographs by circulant permutations.
//!
//! An edge of protograph entry `(c, v)` with shift `s` joins row `c·q + i`
//! to column `v·q + (i + s) mod q` for every `i`.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codec::EncoderPlan;
use crate::error::{Error, Result};
use crate::protograph::Protograph;

/// Binary matrix stored by rows and by columns, indices ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl SparseMatrix {
    /// Builds from row supports. Duplicate entries are an error.
    pub fn from_rows(num_cols: usize, mut rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut cols = vec![Vec::new(); num_cols];
        for (r, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Construction(format!("row {r} has a repeated entry")));
            }
            for &c in row.iter() {
                if c >= num_cols {
                    return Err(Error::Invalid(format!("column {c} out of range in row {r}")));
                }
                cols[c].push(r);
            }
        }
        Ok(SparseMatrix { rows, cols })
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.rows[r]
    }

    pub fn col(&self, c: usize) -> &[usize] {
        &self.cols[c]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `H·x` over GF(2).
    pub fn syndrome(&self, x: &[u8]) -> Vec<u8> {
        self.rows.iter().map(|r| r.iter().fold(0u8, |a, &c| a ^ (x[c] & 1))).collect()
    }

    pub fn is_codeword(&self, x: &[u8]) -> bool {
        x.len() == self.num_cols() && self.rows.iter().all(|r| r.iter().fold(0u8, |a, &c| a ^ (x[c] & 1)) == 0)
    }

    /// Column permutation: column `c` moves to `perm[c]`.
    pub fn permute_cols(&self, perm: &[usize]) -> Result<Self> {
        let rows = self.rows.iter().map(|r| r.iter().map(|&c| perm[c]).collect()).collect();
        SparseMatrix::from_rows(self.num_cols(), rows)
    }

    /// alist text: dimensions, maximum weights, weights, then 1-based
    /// supports per column and per row, zero-padded to the maximum weight.
    pub fn to_alist(&self) -> String {
        let (n, m) = (self.num_cols(), self.num_rows());
        let max_c = self.cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_r = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut s = String::new();
        let _ = writeln!(s, "{n} {m}");
        let _ = writeln!(s, "{max_c} {max_r}");
        let weights = |lists: &[Vec<usize>]| lists.iter().map(|l| l.len().to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "{}", weights(&self.cols));
        let _ = writeln!(s, "{}", weights(&self.rows));
        let padded = |s: &mut String, l: &[usize], w: usize| {
            let mut items: Vec<String> = l.iter().map(|i| (i + 1).to_string()).collect();
            items.resize(w, "0".to_string());
            let _ = writeln!(s, "{}", items.join(" "));
        };
        for c in &self.cols {
            padded(&mut s, c, max_c);
        }
        for r in &self.rows {
            padded(&mut s, r, max_r);
        }
        s
    }

    pub fn from_alist(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut next = |what: &str| -> Result<(usize, Vec<usize>)> {
            let (i, l) = lines.next().ok_or_else(|| Error::Parse { line: 0, msg: format!("missing {what}") })?;
            let nums = l
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| Error::Parse { line: i + 1, msg: format!("{t}: {e}") }))
                .collect::<Result<Vec<_>>>()?;
            Ok((i + 1, nums))
        };
        let (l, dims) = next("dimensions")?;
        let [n, m] = dims[..] else {
            return Err(Error::Parse { line: l, msg: "expected `N M`".into() });
        };
        next("maximum weights")?;
        let (l, col_w) = next("column weights")?;
        if col_w.len() != n {
            return Err(Error::Parse { line: l, msg: format!("expected {n} column weights") });
        }
        let (l, row_w) = next("row weights")?;
        if row_w.len() != m {
            return Err(Error::Parse { line: l, msg: format!("expected {m} row weights") });
        }
        let mut cols = Vec::with_capacity(n);
        for &w in &col_w {
            let (l, list) = next("column support")?;
            cols.push(support(l, &list, w, m)?);
        }
        let mut rows = Vec::with_capacity(m);
        for &w in &row_w {
            let (l, list) = next("row support")?;
            rows.push(support(l, &list, w, n)?);
        }
        let h = SparseMatrix::from_rows(n, rows)?;
        if h.cols != cols {
            return Err(Error::Parse { line: 0, msg: "row and column supports disagree".into() });
        }
        Ok(h)
    }
}

fn support(line: usize, list: &[usize], w: usize, bound: usize) -> Result<Vec<usize>> {
    let (head, pad) = list.split_at(w.min(list.len()));
    if head.len() != w || pad.iter().any(|&x| x != 0) || head.iter().any(|&x| x == 0 || x > bound) {
        return Err(Error::Parse { line, msg: format!("bad support of weight {w}") });
    }
    let mut v: Vec<usize> = head.iter().map(|x| x - 1).collect();
    v.sort_unstable();
    Ok(v)
}

/// Girth of the Tanner graph of `h` by a breadth-first search from every
/// check node. `None` when the graph is a forest.
pub fn tanner_girth(h: &SparseMatrix) -> Option<usize> {
    girth_from(h, 0..h.num_rows())
}

fn girth_from(h: &SparseMatrix, sources: impl Iterator<Item = usize>) -> Option<usize> {
    let (m, n) = (h.num_rows(), h.num_cols());
    // Nodes: checks 0..m, variables m..m+n.
    let mut dist = vec![usize::MAX; m + n];
    let mut parent = vec![usize::MAX; m + n];
    let mut best = usize::MAX;
    let mut queue = std::collections::VecDeque::new();
    let mut touched = Vec::new();
    for s in sources {
        for &t in &touched {
            dist[t] = usize::MAX;
            parent[t] = usize::MAX;
        }
        touched.clear();
        queue.clear();
        dist[s] = 0;
        touched.push(s);
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            if 2 * dist[u] + 1 >= best {
                break;
            }
            let nbrs: Box<dyn Iterator<Item = usize>> = if u < m {
                Box::new(h.row(u).iter().map(|&c| m + c))
            } else {
                Box::new(h.col(u - m).iter().copied())
            };
            for w in nbrs {
                if w == parent[u] {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    touched.push(w);
                    queue.push_back(w);
                } else {
                    best = best.min(dist[u] + dist[w] + 1);
                }
            }
        }
    }
    (best != usize::MAX).then_some(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiftOptions {
    /// Fresh edge orders tried before giving up.
    pub retries: usize,
    /// Accept 4-cycles when no shift avoids them (small toy lifts).
    pub allow_four_cycles: bool,
    /// Longest base walk examined when scoring a shift.
    pub cycle_search: usize,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions { retries: 20, allow_four_cycles: false, cycle_search: 6 }
    }
}

/// A protograph lifted by circulants.
#[derive(Debug, Clone)]
pub struct LiftedCode {
    proto: Protograph,
    q: usize,
    /// Shifts per entry of [`Protograph::edges`], one per parallel edge.
    shifts: Vec<Vec<usize>>,
    h: SparseMatrix,
    plan: Option<EncoderPlan>,
}

impl LiftedCode {
    /// Expands explicit shifts. Parallel edges need distinct shifts.
    pub fn from_shifts(proto: &Protograph, q: usize, shifts: Vec<Vec<usize>>) -> Result<Self> {
        let edges = proto.edges();
        if q == 0 {
            return Err(Error::Invalid("circulant size must be positive".into()));
        }
        if shifts.len() != edges.len() {
            return Err(Error::Invalid(format!("{} shift lists for {} protograph entries", shifts.len(), edges.len())));
        }
        let mut rows = vec![Vec::new(); proto.num_checks() * q];
        for (&(c, v, k), sh) in edges.iter().zip(&shifts) {
            if sh.len() != k as usize || sh.iter().any(|&s| s >= q) {
                return Err(Error::Invalid(format!("entry ({c},{v}) needs {k} shifts below {q}, got {sh:?}")));
            }
            for &s in sh {
                for i in 0..q {
                    rows[c * q + i].push(v * q + (i + s) % q);
                }
            }
        }
        let h = SparseMatrix::from_rows(proto.num_vars() * q, rows)
            .map_err(|_| Error::Construction("parallel edges share a shift".into()))?;
        let plan = EncoderPlan::build(&h, &systematic_columns(proto, q)).ok();
        Ok(LiftedCode { proto: proto.clone(), q, shifts, h, plan })
    }

    pub fn proto(&self) -> &Protograph {
        &self.proto
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn shifts(&self) -> &[Vec<usize>] {
        &self.shifts
    }

    pub fn h(&self) -> &SparseMatrix {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.h.num_cols()
    }

    /// Number of information bits.
    pub fn k(&self) -> usize {
        self.proto.num_systematic() * self.q
    }

    pub fn encoder_plan(&self) -> Option<&EncoderPlan> {
        self.plan.as_ref()
    }

    /// Bit-level mask from a per-protograph-variable mask.
    pub fn expand_mask(&self, base: &[bool]) -> Result<Vec<bool>> {
        if base.len() != self.proto.num_vars() {
            return Err(Error::Invalid(format!("mask has {} entries, expected {}", base.len(), self.proto.num_vars())));
        }
        Ok(base.iter().flat_map(|&b| std::iter::repeat_n(b, self.q)).collect())
    }

    /// Exact girth. Circulant symmetry means searching from the first row of
    /// every check block is enough.
    pub fn girth(&self) -> Option<usize> {
        girth_from(&self.h, (0..self.proto.num_checks()).map(|c| c * self.q))
    }

    /// Shift table as text, one protograph entry per line: `c v s1 s2 ...`.
    pub fn shift_table(&self) -> String {
        let mut s = String::new();
        for (&(c, v, _), sh) in self.proto.edges().iter().zip(&self.shifts) {
            let list: Vec<String> = sh.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{c} {v} {}", list.join(" "));
        }
        s
    }
}

/// Columns holding information bits, in order.
pub fn systematic_columns(proto: &Protograph, q: usize) -> Vec<usize> {
    (0..proto.num_vars())
        .filter(|&v| !proto.role(v).is_parity())
        .flat_map(|v| v * q..(v + 1) * q)
        .collect()
}

/// Lifts `g` with default options.
pub fn lift(g: &Protograph, q: usize, seed: u64) -> Result<LiftedCode> {
    lift_with(g, q, seed, &LiftOptions::default())
}

/// Greedy girth-aware circulant choice. Edges are visited in a seeded random
/// order; each takes the shift whose shortest new cycle is longest, then
/// the fewest such cycles, ties broken at random. Retries with a fresh order
/// when some edge cannot avoid a 4-cycle or the parity part is singular.
pub fn lift_with(g: &Protograph, q: usize, seed: u64, opts: &LiftOptions) -> Result<LiftedCode> {
    let edges = g.edges();
    let max_mult = edges.iter().map(|e| e.2).max().unwrap_or(0) as usize;
    if q == 0 || max_mult > q {
        return Err(Error::Invalid(format!("circulant size {q} is below the largest multiplicity {max_mult}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances: Vec<(usize, usize, usize)> = edges
        .iter()
        .enumerate()
        .flat_map(|(t, &(c, v, k))| (0..k as usize).map(move |_| (t, c, v)))
        .collect();
    let mut last_err = String::new();
    for _ in 0..=opts.retries {
        let mut order: Vec<usize> = (0..instances.len()).collect();
        order.shuffle(&mut rng);
        let mut placed: Vec<(usize, usize, usize)> = Vec::with_capacity(instances.len());
        let mut shift_of: Vec<usize> = Vec::with_capacity(instances.len());
        let mut four_cycle = false;
        for &e in &order {
            let (t, c, v) = instances[e];
            let walks = closed_walks(&placed, &shift_of, c, v, q, opts.cycle_search);
            let mut best: Option<(usize, usize)> = None;
            let mut cands = Vec::new();
            for s in 0..q {
                let score = shift_score(&walks, s, q, opts.cycle_search + 2);
                let key = (score.0, usize::MAX - score.1);
                match best {
                    Some(b) if key < b => {}
                    Some(b) if key == b => cands.push(s),
                    _ => {
                        best = Some(key);
                        cands.clear();
                        cands.push(s);
                    }
                }
            }
            let (girth, _) = best.expect("q > 0");
            if girth <= 2 {
                four_cycle = true;
                last_err = "no free shift for a parallel edge".into();
                break;
            }
            if girth <= 4 && !opts.allow_four_cycles {
                four_cycle = true;
                last_err = format!("every shift for entry ({c},{v}) closes a 4-cycle");
                break;
            }
            let s = *cands.choose(&mut rng).expect("at least one candidate");
            placed.push((t, c, v));
            shift_of.push(s);
        }
        if four_cycle {
            continue;
        }
        let mut shifts: Vec<Vec<usize>> = edges.iter().map(|_| Vec::new()).collect();
        for (&(t, _, _), &s) in placed.iter().zip(&shift_of) {
            shifts[t].push(s);
        }
        for sh in &mut shifts {
            sh.sort_unstable();
        }
        let code = LiftedCode::from_shifts(g, q, shifts)?;
        let wants_encoder = g.num_vars() - g.num_systematic() == g.num_checks();
        if wants_encoder && code.plan.is_none() {
            last_err = "parity part is singular".into();
            continue;
        }
        return Ok(code);
    }
    Err(Error::Construction(format!("lifting failed after {} attempts ({last_err}); try a larger circulant size", opts.retries + 1)))
}

/// Closed non-backtracking walks through the new edge, bucketed by
/// `(length, net traversals of the new edge, shift sum of the placed edges
/// mod q)`, with their counts.
type WalkClasses = HashMap<(usize, i64, usize), usize>;

/// Enumerates closed walks of length `<= max_len` that start at check `c`
/// with the new edge `c -> v`, alternate check and variable nodes, never
/// reuse the edge just traversed and return to `c` through an edge other
/// than the new one.
fn closed_walks(placed: &[(usize, usize, usize)], shift_of: &[usize], c: usize, v: usize, q: usize, max_len: usize) -> WalkClasses {
    let mut cx = WalkSearch {
        placed,
        shift_of,
        q: q as i64,
        c,
        v,
        by_check: HashMap::new(),
        by_var: HashMap::new(),
        max_len,
        out: HashMap::new(),
    };
    for (i, &(_, pc, pv)) in placed.iter().enumerate() {
        cx.by_check.entry(pc).or_default().push(i);
        cx.by_var.entry(pv).or_default().push(i);
    }
    cx.by_check.entry(c).or_default().push(NEW);
    cx.by_var.entry(v).or_default().push(NEW);
    cx.extend(true, v, NEW, 1, 1, 0);
    cx.out
}

const NEW: usize = usize::MAX;

struct WalkSearch<'a> {
    placed: &'a [(usize, usize, usize)],
    shift_of: &'a [usize],
    q: i64,
    c: usize,
    v: usize,
    by_check: HashMap<usize, Vec<usize>>,
    by_var: HashMap<usize, Vec<usize>>,
    max_len: usize,
    out: WalkClasses,
}

impl WalkSearch<'_> {
    /// Continues a walk of `len` edges that ended at `node` through `last`.
    /// Check-to-variable steps add the shift, variable-to-check steps
    /// subtract it.
    fn extend(&mut self, at_var: bool, node: usize, last: usize, len: usize, coeff: i64, sum: i64) {
        let degree = if at_var { self.by_var[&node].len() } else { self.by_check[&node].len() };
        for i in 0..degree {
            let e = if at_var { self.by_var[&node][i] } else { self.by_check[&node][i] };
            if e == last {
                continue;
            }
            let sign = if at_var { -1 } else { 1 };
            let (ec, ev, coeff, sum) = if e == NEW {
                (self.c, self.v, coeff + sign, sum)
            } else {
                let (_, pc, pv) = self.placed[e];
                (pc, pv, coeff, (sum + sign * self.shift_of[e] as i64).rem_euclid(self.q))
            };
            let next = if at_var { ec } else { ev };
            if at_var && next == self.c && e != NEW {
                *self.out.entry((len + 1, coeff, sum as usize)).or_insert(0) += 1;
            }
            if len + 1 < self.max_len {
                self.extend(!at_var, next, e, len + 1, coeff, sum);
            }
        }
    }
}

/// Shortest lifted cycle through the new edge at shift `s` (capped at `cap`)
/// and how many walks reach it.
fn shift_score(walks: &WalkClasses, s: usize, q: usize, cap: usize) -> (usize, usize) {
    let mut best = cap;
    let mut count = 0;
    let qi = q as i64;
    for (&(len, coeff, sum), &n) in walks {
        let r = (sum as i64 + coeff * s as i64).rem_euclid(qi) as usize;
        let cycle = len.saturating_mul(q / gcd(r, q));
        if cycle < best {
            best = cycle;
            count = n;
        } else if cycle == best && cycle < cap {
            count += n;
        }
    }
    (best, count)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
