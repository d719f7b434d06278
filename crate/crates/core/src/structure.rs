//! E2RC parity structure: the recursive-doubling H2 base, k-step
//! recoverability and the designed puncturing order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::protograph::{Protograph, VarRole};

/// A code rate kept as a fraction so that rate lists like `8/14` stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rate {
    pub num: u64,
    pub den: u64,
}

impl Rate {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den <= num {
            return Err(Error::Domain(format!("rate {num}/{den} is not in (0,1)")));
        }
        Ok(Rate { num, den })
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Rate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad rate `{s}`, expected `k/n`"));
        let (a, b) = s.trim().split_once('/').ok_or_else(bad)?;
        let num = a.trim().parse().map_err(|_| bad())?;
        let den = b.trim().parse().map_err(|_| bad())?;
        Rate::new(num, den)
    }
}

/// Square `m x m` H2 protograph built by recursive doubling. Variable `j` is
/// created at stage `ceil(log2(j+1))`; variable 0 is the degree-1 node.
pub fn build_h2_base(m: usize) -> Result<Protograph> {
    if m == 0 || !m.is_power_of_two() {
        return Err(Error::Unsupported(format!("H2 base size must be a power of two, got {m}")));
    }
    // Each row lists the parity variables it touches.
    let mut rows: Vec<Vec<usize>> = vec![vec![0]];
    let mut next_var = 1;
    while rows.len() < m {
        let mut split = Vec::with_capacity(rows.len() * 2);
        for parent in rows {
            let v = next_var;
            next_var += 1;
            let mut first = parent;
            first.push(v);
            split.push(first);
            split.push(vec![v]);
        }
        rows = split;
    }
    let matrix = rows
        .iter()
        .map(|r| {
            let mut row = vec![0u32; m];
            for &v in r {
                row[v] += 1;
            }
            row
        })
        .collect();
    Protograph::unpunctured(matrix, vec![VarRole::ParityNew; m])
}

/// k-step recoverability levels of the split parity nodes of a protograph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SrProfile {
    /// `(variable index, level)`; `None` means never recovered.
    levels: Vec<(usize, Option<u32>)>,
}

impl SrProfile {
    pub fn levels(&self) -> &[(usize, Option<u32>)] {
        &self.levels
    }

    pub fn level(&self, var: usize) -> Option<Option<u32>> {
        self.levels.iter().find(|e| e.0 == var).map(|e| e.1)
    }

    /// Number of nodes per finite level.
    pub fn census(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for &(_, l) in &self.levels {
            if let Some(l) = l {
                *out.entry(l).or_insert(0) += 1;
            }
        }
        out
    }

    pub fn unresolved(&self) -> Vec<usize> {
        self.levels.iter().filter(|e| e.1.is_none()).map(|e| e.0).collect()
    }
}

/// Erasure peeling with every `ParityNew` node erased and everything else
/// known. A check resolves a node in round `k` when that node is its only
/// unresolved neighbour after round `k-1` and is attached by a single edge.
pub fn sr_classify(g: &Protograph) -> Result<SrProfile> {
    let targets = g.vars_with_role(VarRole::ParityNew);
    if targets.is_empty() {
        return Err(Error::Invalid("protograph has no split parity nodes".into()));
    }
    let mut level: Vec<Option<u32>> = vec![None; g.num_vars()];
    let mut known: Vec<bool> = g.roles().iter().map(|r| *r != VarRole::ParityNew).collect();
    let mut round = 0;
    loop {
        round += 1;
        let mut fresh = Vec::new();
        for c in 0..g.num_checks() {
            let mut unknown = g.row(c).iter().enumerate().filter(|&(v, &k)| k > 0 && !known[v]);
            if let (Some((v, &k)), None) = (unknown.next(), unknown.next()) {
                if k == 1 {
                    fresh.push(v);
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        for v in fresh {
            if !known[v] {
                known[v] = true;
                level[v] = Some(round);
            }
        }
    }
    Ok(SrProfile { levels: targets.into_iter().map(|v| (v, level[v])).collect() })
}

/// Split parity nodes in puncturing order: ascending level, newest (highest
/// index) first within a level.
pub fn puncture_order(profile: &SrProfile) -> Result<Vec<usize>> {
    let bad = profile.unresolved();
    if !bad.is_empty() {
        return Err(Error::Invalid(format!("parity nodes {bad:?} are never recovered")));
    }
    let mut order: Vec<(u32, usize)> = profile.levels.iter().map(|&(v, l)| (l.unwrap_or(u32::MAX), v)).collect();
    order.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    Ok(order.into_iter().map(|e| e.1).collect())
}

/// Marks the first `p` nodes of the puncturing order of `g` (per variable).
pub fn puncture_first(g: &Protograph, p: usize) -> Result<Vec<bool>> {
    let order = puncture_order(&sr_classify(g)?)?;
    if p > order.len() {
        return Err(Error::Invalid(format!("cannot puncture {p} of {} nodes", order.len())));
    }
    let mut mask = vec![false; g.num_vars()];
    for &v in &order[..p] {
        mask[v] = true;
    }
    Ok(mask)
}

/// Number of punctured parity nodes `p` with `k/(k + parity - p) = rate`.
fn puncture_count(k: usize, parity: usize, max_p: usize, rate: Rate) -> Result<usize> {
    let achievable: Vec<String> = (0..=max_p).map(|p| format!("{k}/{}", k + parity - p)).collect();
    let unreachable = || Error::UnachievableRate { requested: rate.to_string(), achievable: achievable.join(", ") };
    // rate.num * (k + parity - p) == rate.den * k
    let lhs = rate.den as u128 * k as u128;
    if lhs % rate.num as u128 != 0 {
        return Err(unreachable());
    }
    let transmitted = (lhs / rate.num as u128) as usize;
    if transmitted > k + parity || transmitted < k + parity - max_p {
        return Err(unreachable());
    }
    Ok(k + parity - transmitted)
}

/// Per-parity-node mask of the H2 base of size `m` for `target_rate`, with
/// `k_sys` systematic nodes per base copy.
pub fn puncture_mask_for_rate(m: usize, k_sys: usize, target_rate: Rate) -> Result<Vec<bool>> {
    let h2 = build_h2_base(m)?;
    let p = puncture_count(k_sys, m, m - 1, target_rate)?;
    puncture_first(&h2, p)
}

/// Puncture mask of a full protograph (systematic + parity) for `rate`.
/// Only split parity nodes are punctured.
pub fn protograph_mask_for_rate(g: &Protograph, rate: Rate) -> Result<Vec<bool>> {
    let k = g.num_systematic();
    let parity = g.num_vars() - k;
    let splittable = g.vars_with_role(VarRole::ParityNew).len();
    let max_p = splittable.min(parity.saturating_sub(1));
    let p = puncture_count(k, parity, max_p, rate)?;
    puncture_first(g, p)
}

/// Rates reachable by the designed pattern of `g`, mother rate first.
pub fn protograph_rates(g: &Protograph) -> Vec<Rate> {
    let k = g.num_systematic() as u64;
    let parity = (g.num_vars() - g.num_systematic()) as u64;
    let splittable = g.vars_with_role(VarRole::ParityNew).len() as u64;
    let max_p = splittable.min(parity.saturating_sub(1));
    (0..=max_p).filter_map(|p| Rate::new(k, k + parity - p).ok()).collect()
}

/// Greedy pivoting: true when the parity columns can be ordered so that each
/// is solved by a check whose other parity neighbours are already solved.
pub fn is_triangularizable(g: &Protograph) -> bool {
    let mut known: Vec<bool> = g.roles().iter().map(|r| !r.is_parity()).collect();
    let mut used = vec![false; g.num_checks()];
    loop {
        let mut progress = false;
        for c in 0..g.num_checks() {
            if used[c] {
                continue;
            }
            let unknown: Vec<usize> = (0..g.num_vars()).filter(|&v| g.get(c, v) > 0 && !known[v]).collect();
            if unknown.len() == 1 && g.get(c, unknown[0]) == 1 {
                known[unknown[0]] = true;
                used[c] = true;
                progress = true;
            }
        }
        if !progress {
            return known.iter().all(|&k| k);
        }
    }
}
